#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "cellembed/compare.hpp"
#include "cellembed/generators.hpp"

namespace cellembed {

enum class PipelineKind { Pack, Uniformize, Walk, Verify };
const char* pipeline_name(PipelineKind k);

// Flat key = value text with [sections]; '#' starts a comment; unknown keys are errors.
//   [experiment] pipeline, seeds, radii, truncation, output
//   [generator]  kind, intensity, percolation_p, window, buffer, collapse, disk_window
//   [tolerances] solve, trend_ratio, majority
//   [gauge]      calibration_inner, calibration_outer
//   [uniformize] mesh_level
//   [walk]       walks, steps, exit_fraction, conductance (dubejko | unit), min_walks
//   [verify]     scope, mutation (none | dubejko_swap)
struct ExperimentConfig {
  PipelineKind pipeline = PipelineKind::Pack;
  GeneratorSpec generator;
  std::vector<std::uint64_t> seeds{1};
  std::vector<double> radii{8, 16, 32, 64};
  std::vector<double> truncation{96};  // disk truncation radii, one run per entry
  std::string output = "out";

  double solve_tol = 1e-10;
  double trend_ratio = 0.5;
  double majority = 0.8;  // fraction of seeds that must pass a trend
  Calibration calibration;
  int mesh_level = 2;

  int walks = 1000;
  long steps = 10000;
  double exit_fraction = 0.8;  // exit radius as a fraction of the packing (or truncation) radius
  std::string conductance = "dubejko";
  int min_walks = 200;  // fewer walks: statistical checks are underpowered

  std::string scope = "all";
  bool mutation = false;

  void check() const;
  // canonical form, parses back to the same config; the report omits the output directory
  std::string text(bool with_output = true) const;
};
ExperimentConfig parse_experiment_config(const std::string& text);
ExperimentConfig default_config(PipelineKind kind);

struct PipelineResult {
  std::string report;  // deterministic
  std::string csv;
  std::vector<std::pair<std::string, std::string>> files;  // extra outputs (name, contents)
  bool pass = true;
};

// generator window needed for a disk truncation of radius R
double window_for_truncation(double R);
CellConfiguration generate_for(const ExperimentConfig& cfg, std::uint64_t seed, double truncation);

PipelineResult run_pack_pipeline(const ExperimentConfig& cfg);
PipelineResult run_uniformize_pipeline(const ExperimentConfig& cfg);
PipelineResult run_walk_pipeline(const ExperimentConfig& cfg);
PipelineResult run_pipeline(const ExperimentConfig& cfg);

enum class CheckStatus { Pass, Fail, Underpowered };
const char* check_status_name(CheckStatus s);

struct CheckResult {
  std::string scope;
  std::string name;
  CheckStatus status = CheckStatus::Pass;
  std::string detail;
};

struct VerifyOptions {
  std::string scope = "all";
  bool mutate_dubejko = false;
  int walk_budget = 400;
  int min_walks = 200;
  std::uint64_t seed = 1;
};

struct VerifySummary {
  std::vector<CheckResult> checks;
  int passed = 0, failed = 0, underpowered = 0;
  std::string text() const;
  int exit_code() const { return failed > 0 ? 1 : 0; }
};

const std::vector<std::string>& verify_scopes();
VerifySummary run_verify_suite(const VerifyOptions& opt);

// Minimal SVG writer; y axis flipped so that the picture matches the plane.
class Svg {
 public:
  Svg(const Box& view, double pixels = 800);
  void polygon(const std::vector<Vec2>& pts, const std::string& stroke, const std::string& fill, double width = 1);
  void polyline(const std::vector<Vec2>& pts, const std::string& stroke, double width = 1);
  void circle(const Vec2& c, double r, const std::string& stroke, const std::string& fill, double width = 1);
  std::string str() const;

 private:
  std::string num(double v) const;
  std::string point(const Vec2& p) const;
  Box view_;
  double scale_;
  std::string body_;
};

// Cells meeting `view` with the packing circles mapped through the gauge.
std::string packing_overlay_svg(const CellConfiguration& config, const CirclePacking& packing, const GaugeFit& gauge,
                                const Box& view);
// Cells meeting `view` with the gauge-mapped images of the surface edges.
std::string embedding_overlay_svg(const CellConfiguration& config, const EquilateralSurface& s, const SurfacePortion& p,
                                  const PLMap& map, const std::vector<int>& original, const GaugeFit& gauge,
                                  const Box& view);

}  // namespace cellembed
