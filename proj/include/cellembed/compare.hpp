#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cellembed/cell_config.hpp"
#include "cellembed/circle_pack.hpp"
#include "cellembed/corrector.hpp"
#include "cellembed/surface.hpp"
#include "cellembed/walks.hpp"

namespace cellembed {

// Cells whose centroid lies in [inner, outer) calibrate the gauge; evaluation radii must be >= outer.
struct Calibration {
  double inner = 4.0;
  double outer = 8.0;
};

struct TrendVerdict {
  bool decreasing = false;  // strictly, along the grid
  double ratio = 0.0;       // last / first
  bool pass = false;        // decreasing and ratio < threshold
};
TrendVerdict trend_verdict(const std::vector<double>& values, double threshold = 0.5);

struct ComparisonReport {
  std::string pipeline;  // packing | uniformization
  std::uint64_t seed = 0;
  std::vector<std::string> provenance;  // key = value lines
  Calibration calibration;
  int calibration_pairs = 0;
  GaugeFit gauge;
  bool gauge_fitted = true;
  std::vector<double> radii;
  std::vector<int> cells;               // |H(B(0;r))|
  std::vector<double> vertex_metric;
  std::vector<double> edge_metric;      // uniformization only
  double max_face_diameter = 0.0;       // largest sub-face image diameter in cell units (uniformization)
  TrendVerdict vertex_trend, edge_trend;

  std::string text() const;
  std::string csv() const;  // one row per radius
};

// Image of each cell (NaN where the cell is not covered).
using CellImages = std::vector<Vec2>;

// L minimizing sum |L image - c(H)|^2 over calibration cells.
GaugeFit calibrate_gauge(const CellConfiguration& config, const CellImages& images, const Calibration& cal,
                         int* pairs = nullptr);
// (1/r) max over cells meeting B(0;r) of |A^-1 c(H) - scale R_theta image(H)|
double closeness_metric(const CellConfiguration& config, const CellImages& images, const GaugeFit& gauge, double r,
                        int* cells = nullptr);
// gauge with theta shifted by dtheta
GaugeFit rotated_gauge(const GaugeFit& g, double dtheta);

// `original` maps packing vertices to cells.
ComparisonReport compare_packing(const CellConfiguration& config, const CirclePacking& packing,
                                 const std::vector<int>& original, const std::vector<double>& radii,
                                 const Calibration& cal = {}, const std::optional<GaugeFit>& gauge = {});

// `original` maps surface vertices to cells (empty: identity). The edge metric is
// (1/r) max over surface edges between cells meeting B(0;r) of scale * diam(image of the edge).
ComparisonReport compare_uniformization(const CellConfiguration& config, const EquilateralSurface& s,
                                        const SurfacePortion& p, const PLMap& map, const std::vector<int>& original,
                                        const std::vector<double>& radii, const Calibration& cal = {},
                                        const std::optional<GaugeFit>& gauge = {});
PLMap as_plmap(const DiscreteConformalMap& m);

// A = Sigma^{-1/2} det(Sigma)^{1/4}; theta = 0, scale = 1.
GaugeFit covariance_gauge(const Mat2& sigma);
GaugeFit covariance_gauge(const WalkReport& report);

}  // namespace cellembed
