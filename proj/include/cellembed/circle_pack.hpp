#pragma once

#include <complex>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "cellembed/geometry.hpp"
#include "cellembed/triangulation.hpp"

namespace cellembed {

using cplx = std::complex<double>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Circle2 {
  Vec2 center;
  double radius = 0.0;
};

// Boundary condition for the radius solve.
struct PackingBoundary {
  enum class Mode { FixedRadii, MaximalDisk };
  Mode mode = Mode::MaximalDisk;
  std::vector<double> radii;  // FixedRadii: per vertex (only boundary entries are read)

  static PackingBoundary maximal() { return {}; }
  static PackingBoundary fixed(std::vector<double> r) { return {Mode::FixedRadii, std::move(r)}; }
  static PackingBoundary fixed_uniform(int n, double r) { return {Mode::FixedRadii, std::vector<double>(n, r)}; }
};

struct SolveOptions {
  double tol = 1e-10;
  int max_iterations = 200;  // Newton iterations
  int relax_sweeps = 30;     // uniform-neighbor sweeps before Newton
};

struct RadiiSolution {
  bool hyperbolic = false;
  // Euclidean radii (FixedRadii) or hyperbolic radii (MaximalDisk; +inf on the boundary)
  std::vector<double> radii;
  int iterations = 0;
  double residual = 0.0;  // max |angle sum - 2 pi| over interior vertices
  std::vector<double> history;
};

// Angle at the vertex of radius `rv` in the triangle of mutually tangent circles.
double euclidean_angle(double rv, double ru, double rw);
double hyperbolic_angle(double hv, double hu, double hw);
std::vector<double> angle_sums(const Triangulation& tri, const RadiiSolution& sol);

RadiiSolution solve_radii(const Triangulation& tri, const PackingBoundary& boundary, const SolveOptions& opt = {});

struct CirclePacking {
  Triangulation tri;
  std::vector<Vec2> centers;
  std::vector<double> radii;       // Euclidean
  std::vector<double> hyperbolic;  // hyperbolic radii for maximal packings (empty otherwise)
  bool maximal = false;
  int root = 0;
  double solve_residual = 0.0;
  int solve_iterations = 0;

  int num_vertices() const { return static_cast<int>(radii.size()); }
};

// Root at the origin, `root_neighbor` (default: first petal) on the ray of angle `direction`.
CirclePacking layout(const Triangulation& tri, const RadiiSolution& sol, int root, std::optional<int> root_neighbor = {},
                     double direction = 0.0);

CirclePacking pack(const Triangulation& tri, const PackingBoundary& boundary, int root, const SolveOptions& opt = {});

struct PackingCheck {
  double tangency = 0.0;  // max relative | |c_u - c_v| - (r_u + r_v) |
  double angle_sum = 0.0; // max |sum of Euclidean angles - 2 pi| at interior vertices
  int overlaps = 0;       // non-adjacent pairs overlapping beyond tol
  double worst_overlap = 0.0;
  bool ok(double tangency_tol = 1e-8, double angle_tol = 1e-8) const {
    return tangency <= tangency_tol && angle_sum <= angle_tol && overlaps == 0;
  }
};
PackingCheck check_packing(const CirclePacking& p, double overlap_tol = 1e-8);

// Descartes: curvature of a circle tangent to three mutually tangent circles.
// Radii may be +inf (lines). inner = plus sign (the circle in the bounded interstice).
struct DescartesResult {
  double curvature = 0.0;
  double radius = kInf;       // +inf for a line
  bool line = false;          // curvature 0
  bool enclosing = false;     // negative curvature: the circle encloses the other three
};
DescartesResult descartes_fourth(double r1, double r2, double r3, bool inner = true);

// Radii ratios r_d / r_0 of the chain D_0 = unit disk, D_1, D_2 parallel lines,
// D_3 = B(2;1), D_{n+2} tangent to D_0, D_n, D_{n+1}. Entry d holds r_d (d >= 3).
std::vector<double> descartes_chain(int dmax);
std::uint64_t fibonacci(int n);

// Circle tangent externally to three circles, found geometrically (Apollonius).
std::optional<Circle2> inner_tangent_circle(const Circle2& a, const Circle2& b, const Circle2& c);

struct FlowerReport {
  int vertex = -1;
  int degree = 0;
  double min_ratio = 0.0;          // min_j r_j / r_0
  double min_three_circle = 0.0;   // min over consecutive pairs of r_b / min(r_0, r_a), both orders
  double bound = 0.0;              // 0.01 d^{-2}
  int violations = 0;
  bool pass() const { return violations == 0; }
};
FlowerReport flower_checks(const CirclePacking& p, int v);
// Same checks from radii alone (petals in cyclic order; +inf allowed for lines).
FlowerReport flower_checks_radii(double r0, const std::vector<double>& petals);

struct StabilityReport {
  std::vector<std::int64_t> labels;               // B_k vertices (original labels, ascending)
  std::vector<std::vector<double>> radii;          // per truncation, renormalized so the root radius is 1
  std::vector<double> differences;                // max relative difference between successive truncations
};
// Each truncation carries original labels (Triangulation::labels) and its root vertex.
StabilityReport nested_radii_stability(const std::vector<std::pair<Triangulation, int>>& truncations, int k,
                                       const SolveOptions& opt = {});

std::string packing_csv(const CirclePacking& p);

}  // namespace cellembed
