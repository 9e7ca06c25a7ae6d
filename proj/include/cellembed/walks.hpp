#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cellembed/cell_config.hpp"
#include "cellembed/circle_pack.hpp"
#include "cellembed/geometry.hpp"

namespace cellembed {

// Weighted graph with embedded vertices. Walks must never visit a boundary vertex.
class WeightedGraph {
 public:
  WeightedGraph() = default;
  // undirected edges (u,v) with conductance c > 0
  WeightedGraph(std::vector<Vec2> positions, const std::vector<std::array<int, 2>>& edges,
                const std::vector<double>& conductance, std::vector<char> boundary);

  int num_vertices() const { return static_cast<int>(pos_.size()); }
  const Vec2& position(int v) const { return pos_[v]; }
  const std::vector<Vec2>& positions() const { return pos_; }
  bool is_boundary(int v) const { return boundary_[v]; }
  double pi(int v) const { return pi_[v]; }
  int degree(int v) const { return offset_[v + 1] - offset_[v]; }
  int neighbor(int v, int i) const { return nbr_[offset_[v] + i]; }
  double conductance(int v, int i) const { return cond_[offset_[v] + i]; }
  std::optional<double> conductance_between(int u, int v) const;
  // next vertex given u ~ Uniform[0,1)
  int step(int v, double u) const;

  // edges with fewer than two incident triangles (Dubejko graphs)
  std::vector<std::array<int, 2>> flagged_edges;

 private:
  std::vector<Vec2> pos_;
  std::vector<int> offset_, nbr_;
  std::vector<double> cond_, cum_, pi_;
  std::vector<char> boundary_;
};

// `SwappedFactor` is a deliberately wrong formula used to check that the
// verification suite detects a broken conductance.
enum class DubejkoVariant { Correct, SwappedFactor };

double dubejko_conductance(double ru, double rv, double rw1, double rw2);
// Graph on the circle centers of a packing; boundary circles are boundary vertices.
WeightedGraph dubejko_weights(const CirclePacking& packing, DubejkoVariant variant = DubejkoVariant::Correct);

struct DubejkoCheck {
  double max_conductance = 0.0;
  double min_conductance = 0.0;
  double max_first_factor = 0.0;
  int edges = 0;
  int violations = 0;  // conductance outside (0,1) or first factor above 1/2
  // max over interior vertices of |sum_v c(u,v)/pi(u) (z_v - z_u)| / r_u
  double martingale_residual = 0.0;
  bool pass(double tol = 1e-6) const { return violations == 0 && martingale_residual < tol; }
};
DubejkoCheck dubejko_check(const CirclePacking& packing, const WeightedGraph& graph);

// Cells of a configuration at their centroids (or sites when `use_sites`),
// with the configuration's conductances (unit when `unit`); map-boundary cells are boundary.
WeightedGraph config_graph(const CellConfiguration& config, bool unit = true, bool use_sites = false);
// Graph of a triangulation with unit conductances.
WeightedGraph triangulation_graph(const Triangulation& tri, const std::vector<Vec2>& positions);

struct StopRule {
  long max_steps = 10000;
  std::optional<double> exit_radius;  // stop on reaching |z - center| >= exit_radius
  Vec2 center{0, 0};
};

struct WalkPath {
  std::vector<int> vertices;
  std::vector<Vec2> curve;
  std::uint64_t seed = 0;
  std::uint64_t walk_index = 0;
  bool exited = false;
};

// Substream keyed by (seed, walk_index). Throws DomainTooSmall if a boundary vertex is reached.
WalkPath random_walk(const WeightedGraph& g, int start, const StopRule& stop, std::uint64_t seed,
                     std::uint64_t walk_index = 0);

// Visit counts of one long walk (finite graph without boundary vertices).
std::vector<long> visit_counts(const WeightedGraph& g, int start, long steps, std::uint64_t seed);

// Discrete Frechet distance between polylines.
double cmp_distance(const std::vector<Vec2>& a, const std::vector<Vec2>& b);

struct WalkRecord {
  std::uint64_t walk_index = 0;
  Vec2 end;
  long steps = 0;
  bool exited = false;
  double exit_angle = 0.0;
};

struct WalkReport {
  std::uint64_t seed = 0;
  int n_walks = 0;
  StopRule stop;
  int start = -1;
  Vec2 mean_displacement;
  double standard_error = 0.0;  // sqrt((var_x + var_y) / n)
  double drift_z = 0.0;         // |mean| / SE
  std::array<double, 4> sigma{};  // per-step covariance (xx, xy, yx, yy)
  std::vector<long> msd_steps;
  std::vector<double> msd;
  double msd_slope = 0.0, msd_intercept = 0.0, msd_r2 = 0.0;
  std::vector<long> exit_histogram;
  int exits = 0;
  double exit_chi2 = 0.0;
  double exit_p_value = 0.0;  // NaN without exits
  std::vector<WalkRecord> walks;

  std::string text() const;
  std::string csv() const;
};

WalkReport walk_statistics(const WeightedGraph& g, int start, int n_walks, const StopRule& stop, std::uint64_t seed,
                           int angle_bins = 12);

// Chi-square goodness of fit p-value of counts against expected probabilities.
double chi_square_p(const std::vector<long>& counts, const std::vector<double>& probs, double* statistic = nullptr);

// Vertex extremal length.
struct VelBound {
  double lower_bound = 0.0;
  double upper_bound = 0.0;  // 4 |z_v| / r_v
  bool pass = false;
  std::string best_metric;
};
VelBound vel_bound_check(const CirclePacking& packing, int v, int v0);

// Explicit path family on a small graph (vertex sequences).
struct PathFamily {
  int num_vertices = 0;
  std::vector<std::vector<int>> paths;
  // all simple paths from s to t in the graph given by adjacency lists
  static PathFamily simple_paths(const std::vector<std::vector<int>>& adjacency, int s, int t);
};
double vel_exact_small(const PathFamily& family, std::vector<double>* optimal_metric = nullptr);

// max diameter of circles meeting B(0; r), divided by r, for each r.
std::vector<double> macroscopic_disk_scan(const CirclePacking& packing, const std::vector<double>& radii,
                                          double scale = 1.0);

}  // namespace cellembed
