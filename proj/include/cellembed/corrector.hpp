#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "cellembed/cell_config.hpp"
#include "cellembed/dyadic.hpp"
#include "cellembed/surface.hpp"

namespace cellembed {

// Piecewise-linear map on a subdivision of a surface portion (linear on each sub-face).
struct PLMap {
  std::shared_ptr<const Subdivision> sub;
  std::vector<Vec2> values;  // per sub-vertex
  std::string provenance;

  Vec2 evaluate(const SurfacePoint& x) const;
  Vec2 vertex_value(int surface_vertex) const;
  // sub-faces whose image has zero signed area (allowed, reported)
  std::vector<int> degenerate_faces(double tol = 0.0) const;
  std::string dump() const;
};

std::shared_ptr<const Subdivision> share(Subdivision s);

// c~(H): one uniform point per cell, substream keyed by (seed, cell).
std::vector<Vec2> sample_cell_points(const CellConfiguration& config, std::uint64_t seed);

// Map with the given values at surface vertices, linear on surface faces; p-gon
// centers take the mean of their corners.
PLMap lift_vertex_values(const EquilateralSurface& s, std::shared_ptr<const Subdivision> sub,
                         const std::vector<Vec2>& vertex_values, std::string provenance);

PLMap sample_phi0(const CellConfiguration& config, const EquilateralSurface& s, std::shared_ptr<const Subdivision> sub,
                  std::uint64_t seed);

// Energy of the linear map from a unit equilateral triangle (corners (0,0),(1,0),(1/2,sqrt3/2))
// onto the triangle p0 p1 p2, via the explicit matrix with entries x1, (-x1+2x2)/sqrt3, 2y2/sqrt3.
double equilateral_energy_closed_form(const Vec2& p0, const Vec2& p1, const Vec2& p2);
// Same integral by quadrature of finite-difference gradients.
double equilateral_energy_quadrature(const Vec2& p0, const Vec2& p1, const Vec2& p2);
// General domain triangle (cotangent formula).
double face_energy(const std::array<Vec2, 3>& domain, const std::array<Vec2, 3>& image);

// Sum over the listed sub-faces (all when empty).
double dirichlet_energy(const PLMap& f, const std::vector<int>& faces = {});
double dirichlet_inner(const PLMap& f, const PLMap& g, const std::vector<int>& faces = {});

struct RegionReport {
  DyadicSquare square;
  int vertices = 0;
  int interior = 0;
  std::vector<int> faces;  // sub-faces with all corners in the region
  double energy_before = 0.0;
  double energy_after = 0.0;
  double residual = 0.0;
  bool max_principle = true;
};

struct HarmonicExtension {
  PLMap map;
  double m = 0.0;
  std::vector<RegionReport> regions;
  double max_residual = 0.0;
  bool energy_monotone() const;
  bool max_principle() const;
};

// phi_m: on each region {x : phi0(x) in S}, S in the partition by largest dyadic squares of
// mass <= m, the discrete harmonic function (cotangent weights of the face charts) with
// the values of phi0 off the region interior.
HarmonicExtension harmonic_extend(const CellConfiguration& config, const PLMap& phi0, const DyadicSystem& dyadic,
                                  double m);

// max over regions of `outer` of |D_R(phi_outer, phi_a - phi_b)|
double orthogonal_increment_residual(const HarmonicExtension& outer, const PLMap& a, const PLMap& b);

// integral of |grad A - grad B|^2 over sub-faces whose phi0-image centroid lies in cell cap clip,
// divided by area(cell cap clip)
double se_statistic(const PLMap& a, const PLMap& b, const PLMap& phi0, const CellRegion& cell, const Box& clip);

// Subdivision level doubled from n0 until the SE change between successive levels is below tol.
struct MeshLevelChoice {
  int n = 0;
  std::vector<int> levels;
  std::vector<double> se_change;
};
MeshLevelChoice choose_mesh_level(const CellConfiguration& config, const EquilateralSurface& s,
                                  const SurfacePortion& p, const DyadicSystem& dyadic, double m, std::uint64_t seed,
                                  const Box& clip, int n0 = 8, int n_max = 32, double tol = 1e-3);

using Mat2 = Eigen::Matrix2d;

// L = scale * A * R_theta with A symmetric positive definite, det A = 1, theta in [0, 2 pi).
struct GaugeFit {
  Mat2 L = Mat2::Identity();
  Mat2 A = Mat2::Identity();
  double theta = 0.0;
  double scale = 1.0;
  double residual = 0.0;  // RMS of |L s - t|
  Vec2 apply(const Vec2& x) const;
  Mat2 compose() const;
};
GaugeFit fit_linear_gauge(const std::vector<Vec2>& sources, const std::vector<Vec2>& targets);
GaugeFit decompose_gauge(const Mat2& L);
Mat2 rotation(double theta);

// (1/2^k) sup over vertices of |phi0(x) - gauge(target(x))|
double sublinearity_metric(const std::vector<Vec2>& phi0, const std::vector<Vec2>& target, const GaugeFit& gauge,
                           int k);
// convenience: surface-vertex values of a map on the portion
std::vector<Vec2> portion_vertex_values(const SurfacePortion& p, const PLMap& f);
std::vector<Vec2> portion_vertex_values(const SurfacePortion& p, const DiscreteConformalMap& f);

}  // namespace cellembed
