// cellembed: experiment driver.
#include <CLI11.hpp>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <optional>

#include "cellembed/error.hpp"
#include "cellembed/experiment.hpp"
#include "cellembed/format.hpp"

using namespace cellembed;
namespace fs = std::filesystem;

namespace {

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string scope;
  bool mutation = false;
  int walk_budget = -1;
};

ExperimentConfig load(const Options& o, std::optional<PipelineKind> kind) {
  ExperimentConfig c = o.config_path.empty() ? default_config(kind.value_or(PipelineKind::Pack))
                                             : parse_experiment_config(read_file(o.config_path));
  if (kind) c.pipeline = *kind;
  if (o.seed) c.seeds = {*o.seed};
  if (!o.out.empty()) c.output = o.out;
  if (!o.scope.empty()) c.scope = o.scope;
  if (o.mutation) c.mutation = true;
  if (o.walk_budget > 0) c.walks = o.walk_budget;
  c.check();
  return c;
}

// timestamps live apart from the deterministic report
void write_run_info(const fs::path& dir, const std::string& command) {
  std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[64];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  write_file((dir / "run_info.txt").string(), "command = " + command + "\nfinished = " + buf + "\n");
}

int emit(const ExperimentConfig& c, const PipelineResult& r, const std::string& command, const std::string& stem) {
  fs::path dir(c.output);
  fs::create_directories(dir);
  write_file((dir / (stem + ".txt")).string(), r.report);
  if (!r.csv.empty()) write_file((dir / (stem + ".csv")).string(), r.csv);
  for (auto& [name, contents] : r.files) write_file((dir / name).string(), contents);
  write_file((dir / "config.txt").string(), c.text());
  write_run_info(dir, command);
  std::cout << r.report;
  return r.pass ? 0 : 1;
}

int run_generate(const Options& o) {
  auto c = load(o, std::nullopt);
  fs::path dir(c.output);
  fs::create_directories(dir);
  for (auto seed : c.seeds) {
    double R = c.truncation.back();
    auto config = generate_for(c, seed, R);
    auto v = config.validate();
    std::string tag = "seed" + std::to_string(seed);
    write_file((dir / ("config_" + tag + ".txt")).string(), config.serialize());
    Svg svg(Box{{-c.radii.front(), -c.radii.front()}, {c.radii.front(), c.radii.front()}});
    for (int h : config.cells_meeting(Box{{-c.radii.front(), -c.radii.front()}, {c.radii.front(), c.radii.front()}}))
      for (auto& piece : config.cell(h).pieces()) svg.polygon(piece, "#555555", "#eeeeee", 0.6);
    write_file((dir / ("cells_" + tag + ".svg")).string(), svg.str());
    std::cout << "seed " << seed << ": cells=" << config.num_cells() << " valid=" << (v.ok ? "true" : "false") << "\n";
    if (!v.ok) return 1;
  }
  write_run_info(dir, "generate");
  return 0;
}

int run_verify(const Options& o) {
  auto c = load(o, PipelineKind::Verify);
  VerifyOptions vo;
  vo.scope = c.scope;
  vo.mutate_dubejko = c.mutation;
  vo.seed = c.seeds.front();
  vo.walk_budget = o.walk_budget > 0 ? o.walk_budget : 400;
  vo.min_walks = c.min_walks;
  auto sum = run_verify_suite(vo);
  PipelineResult r;
  r.report = sum.text();
  r.pass = sum.exit_code() == 0;
  return emit(c, r, "verify", "verify");
}

int run_report(const Options& o) {
  fs::path dir(o.out.empty() ? "out" : o.out);
  if (!fs::is_directory(dir)) throw Error(ErrorKind::Usage, "no output directory " + dir.string());
  std::vector<fs::path> reports;
  for (auto& e : fs::directory_iterator(dir))
    if (e.path().extension() == ".txt" && e.path().filename() != "run_info.txt" && e.path().filename() != "config.txt" &&
        e.path().filename().string().rfind("config_", 0) != 0)
      reports.push_back(e.path());
  std::sort(reports.begin(), reports.end());
  if (reports.empty()) throw Error(ErrorKind::Usage, "no reports in " + dir.string());
  bool pass = true;
  for (auto& p : reports) {
    std::string text = read_file(p.string());
    bool failed = text.find("\npass = false") != std::string::npos || text.find("\nstatus = fail") != std::string::npos;
    pass = pass && !failed;
    std::cout << p.filename().string() << ": " << (failed ? "fail" : "pass") << "\n";
  }
  return pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cellembed: cell configurations, circle packings and discrete conformal embeddings"};
  app.require_subcommand(1);
  Options o;
  auto common = [&](CLI::App* s) {
    s->add_option("--config", o.config_path, "experiment config file");
    s->add_option("--seed", o.seed, "single seed overriding the config");
    s->add_option("--out", o.out, "output directory");
  };
  auto* gen = app.add_subcommand("generate", "sample configurations and write them with an SVG of the cells");
  auto* pk = app.add_subcommand("pack", "circle packings and the packing comparison");
  auto* wk = app.add_subcommand("walk", "random walk statistics");
  auto* un = app.add_subcommand("uniformize", "discrete uniformization and the embedding comparison");
  auto* cmp = app.add_subcommand("compare", "run the comparison pipeline named in the config");
  auto* ver = app.add_subcommand("verify", "invariant scans of every module");
  auto* rep = app.add_subcommand("report", "summarize the reports in an output directory");
  for (auto* s : {gen, pk, wk, un, cmp, ver}) common(s);
  rep->add_option("--out", o.out, "output directory");
  ver->add_option("--scope", o.scope, "module scope (all, planar_map, ..., compare)");
  ver->add_flag("--mutate-dubejko", o.mutation, "inject the swapped-factor conductance");
  ver->add_option("--walk-budget", o.walk_budget, "walks for the statistical checks");
  wk->add_option("--walk-budget", o.walk_budget, "walks per seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  try {
    if (gen->parsed()) return run_generate(o);
    if (pk->parsed()) return emit(load(o, PipelineKind::Pack), run_pack_pipeline(load(o, PipelineKind::Pack)), "pack", "report");
    if (un->parsed()) {
      auto c = load(o, PipelineKind::Uniformize);
      return emit(c, run_uniformize_pipeline(c), "uniformize", "report");
    }
    if (wk->parsed()) {
      auto c = load(o, PipelineKind::Walk);
      return emit(c, run_walk_pipeline(c), "walk", "report");
    }
    if (cmp->parsed()) {
      auto c = load(o, std::nullopt);
      if (c.pipeline != PipelineKind::Pack && c.pipeline != PipelineKind::Uniformize)
        throw Error(ErrorKind::Usage, "compare needs pipeline = pack or uniformize");
      return emit(c, run_pipeline(c), "compare", "compare_report");
    }
    if (ver->parsed()) return run_verify(o);
    if (rep->parsed()) return run_report(o);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.kind() == ErrorKind::Usage || e.kind() == ErrorKind::InvalidInput ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
