#include <gtest/gtest.h>

#include "cellembed/error.hpp"
#include "cellembed/experiment.hpp"

using namespace cellembed;

namespace {

const char* kSmall = R"(# comment line
[experiment]
pipeline = pack
seeds = 1 2
radii = 8 16   # trailing comment
truncation = 24
output = out/x

[generator]
kind = poisson-voronoi
intensity = 1

[tolerances]
trend_ratio = 0.8
)";

}  // namespace

TEST(ExperimentConfig, ParsesAndRoundTrips) {
  auto c = parse_experiment_config(kSmall);
  EXPECT_EQ(c.pipeline, PipelineKind::Pack);
  EXPECT_EQ(c.seeds, (std::vector<std::uint64_t>{1, 2}));
  EXPECT_EQ(c.radii, (std::vector<double>{8, 16}));
  EXPECT_EQ(c.truncation, (std::vector<double>{24}));
  EXPECT_EQ(c.output, "out/x");
  EXPECT_DOUBLE_EQ(c.trend_ratio, 0.8);
  auto again = parse_experiment_config(c.text());
  EXPECT_EQ(again.text(), c.text());
  EXPECT_EQ(c.text(false).find("output"), std::string::npos);
}

TEST(ExperimentConfig, RejectsBadInput) {
  auto bad = [](const std::string& extra) { return parse_experiment_config(std::string(kSmall) + extra); };
  EXPECT_THROW(bad("typo_key = 3\n"), Error);                 // unknown key in [tolerances]
  EXPECT_THROW(bad("[nonsense]\n"), Error);                    // unknown section
  EXPECT_THROW(bad("trend_ratio = 0.7\n"), Error);             // duplicate
  EXPECT_THROW(bad("[walk]\nwalks = many\n"), Error);          // not a number
  EXPECT_THROW(bad("[walk]\nconductance = magic\n"), Error);
  EXPECT_THROW(bad("[verify]\nscope = everything\n"), Error);
  EXPECT_THROW(bad("[generator]\n"), Error);                   // duplicate section
  EXPECT_THROW(parse_experiment_config("[experiment]\nradii = 16 8\n"), Error);
  EXPECT_THROW(parse_experiment_config("[experiment]\nseeds =\n"), Error);
  EXPECT_THROW(parse_experiment_config("pipeline = pack\n"), Error);
  EXPECT_THROW(parse_experiment_config("[experiment]\nradii = 4 8\n"), Error);  // overlaps calibration annulus
  EXPECT_THROW(parse_experiment_config("[experiment\n"), Error);
}

TEST(Pipelines, PackIsDeterministic) {
  auto c = parse_experiment_config(kSmall);
  auto a = run_pack_pipeline(c);
  auto b = run_pack_pipeline(c);
  EXPECT_EQ(a.report, b.report);
  EXPECT_EQ(a.csv, b.csv);
  ASSERT_EQ(a.files.size(), b.files.size());
  for (size_t i = 0; i < a.files.size(); ++i) EXPECT_EQ(a.files[i].second, b.files[i].second);
  EXPECT_NE(a.report.find("[verdict]"), std::string::npos);
  EXPECT_NE(a.csv.find("seed,truncation,r"), std::string::npos);
  // one row per (seed, r)
  EXPECT_EQ(std::count(a.csv.begin(), a.csv.end(), '\n'), 1 + 2 * 2);
  c.output = "elsewhere";
  EXPECT_EQ(run_pack_pipeline(c).report, a.report);
}

TEST(Pipelines, UniformizeAndWalk) {
  auto c = parse_experiment_config(kSmall);
  c.seeds = {3};
  auto u = run_uniformize_pipeline(c);
  EXPECT_NE(u.report.find("edge_trend_pass"), std::string::npos);
  EXPECT_EQ(u.report, run_uniformize_pipeline(c).report);
  c.walks = 300;
  c.steps = 5000;
  auto w = run_walk_pipeline(c);
  EXPECT_NE(w.report.find("status = pass"), std::string::npos);
  EXPECT_EQ(w.report, run_walk_pipeline(c).report);
  c.walks = 50;
  auto under = run_walk_pipeline(c);
  EXPECT_NE(under.report.find("status = underpowered"), std::string::npos);
  EXPECT_TRUE(under.pass);
}

TEST(Pipelines, WindowTooSmall) {
  auto c = parse_experiment_config(kSmall);
  EXPECT_DOUBLE_EQ(window_for_truncation(24), 64);
  c.generator.window = 30;
  EXPECT_THROW(generate_for(c, 1, 24), Error);
  c.generator.window = 0;
  EXPECT_GT(generate_for(c, 1, 24).num_cells(), 100);
}

TEST(Verify, SuitePassesAndMutationFails) {
  VerifyOptions o;
  auto s = run_verify_suite(o);
  EXPECT_EQ(s.failed, 0) << s.text();
  EXPECT_EQ(s.exit_code(), 0);
  EXPECT_GT(s.passed, 15);
  EXPECT_EQ(s.text(), run_verify_suite(o).text());
  o.mutate_dubejko = true;
  o.scope = "walks";
  auto m = run_verify_suite(o);
  EXPECT_EQ(m.exit_code(), 1);
  bool martingale_failed = false;
  for (auto& c : m.checks)
    if (c.name == "dubejko_martingale") martingale_failed = c.status == CheckStatus::Fail;
  EXPECT_TRUE(martingale_failed);
  o.mutate_dubejko = false;
  o.walk_budget = 20;
  auto u = run_verify_suite(o);
  EXPECT_EQ(u.underpowered, 1);
  EXPECT_EQ(u.failed, 0);
  o.scope = "nope";
  EXPECT_THROW(run_verify_suite(o), Error);
}

TEST(Svg, Deterministic) {
  Svg a(Box{{0, 0}, {2, 1}}, 100);
  a.polygon({{0, 0}, {1, 0}, {1, 1}}, "black", "none");
  a.circle({1, 0.5}, 0.25, "blue", "none");
  a.polyline({{0, 0}, {2, 1}}, "red");
  auto s = a.str();
  EXPECT_EQ(s.rfind("<svg", 0), 0u);
  EXPECT_NE(s.find("points=\"0.000,50.000 50.000,50.000 50.000,0.000\""), std::string::npos);
  EXPECT_NE(s.find("r=\"12.500\""), std::string::npos);
  EXPECT_THROW(Svg(Box{{0, 0}, {0, 1}}), Error);
}
