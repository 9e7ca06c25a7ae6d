#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cellembed/cell_config.hpp"
#include "cellembed/circle_pack.hpp"
#include "cellembed/planar_map.hpp"
#include "cellembed/triangulation.hpp"

namespace cellembed {

// Faces glued as regular polygons of unit side.
struct EquilateralSurface {
  int num_vertices = 0;
  std::vector<std::vector<int>> faces;  // counter-clockwise vertex cycles
  std::vector<double> cone_angle;       // sum of incident face angles
  std::vector<int> face_degree_sum;     // number of incident face corners
  std::vector<char> boundary;           // vertex fan not closed

  static double face_angle(int p) { return M_PI * (p - 2) / p; }
  // face index for each directed edge (u,v) on its left, -1 if absent
  int face_left(int u, int v) const;

  std::vector<std::vector<std::pair<int, int>>> edge_face_;  // per u: (v, face)
};

EquilateralSurface build_surface(int num_vertices, std::vector<std::vector<int>> faces);  // CCW faces
EquilateralSurface build_surface(const Triangulation& tri);
EquilateralSurface build_surface(const HalfEdgeMap& map);  // bounded faces; loops rejected
// Surface on the cells of a configuration: bounded triangular faces of its map.
EquilateralSurface surface_from_config(const CellConfiguration& config);

// Corner k of the regular p-gon with unit side: corner 0 at the origin, corner 1 at (1,0).
Vec2 chart_corner(int p, int k);
Vec2 chart_center(int p);

// Geodesic distance between points in two faces sharing an edge (or the same face), by unfolding.
double face_pair_distance(const EquilateralSurface& s, int f1, const Vec2& x1, int f2, const Vec2& x2);

struct GaussBonnet {
  double interior_curvature = 0.0;  // sum of (2 pi - cone angle)
  double boundary_turning = 0.0;    // sum of (pi - cone angle)
  int euler_characteristic = 0;
  double lhs() const { return interior_curvature + boundary_turning; }
  double rhs() const { return 2 * M_PI * euler_characteristic; }
};
// over the sub-surface made of the listed faces (all faces when empty)
GaussBonnet gauss_bonnet(const EquilateralSurface& s, const std::vector<int>& faces = {});

struct SurfacePortion {
  std::vector<int> faces;          // surface face indices, ascending
  std::vector<int> vertices;       // surface vertex ids, ascending
  std::vector<int> boundary_loop;  // counter-clockwise
  Box square;
  double a = 0.0;
  int root = -1;  // surface vertex of the cell containing the square's center
  std::string diagnostic;

  bool empty() const { return faces.empty(); }
  bool contains_vertex(int v) const;
  bool is_interior(int v) const;
};

// M(S;a): faces with a vertex among cells meeting the open concentric square of side a,
// plus the bounded components of the complement. Empty with a diagnostic when invalid.
SurfacePortion portion_for_side(const CellConfiguration& config, const EquilateralSurface& s, const Box& S, double a);
// M(S): largest M(S;a), a on a 2^-32 |S| grid, whose cells all lie in S.
SurfacePortion build_M_S(const CellConfiguration& config, const EquilateralSurface& s, const Box& S);
// Whole surface as a portion (requires disk topology).
SurfacePortion whole_portion(const EquilateralSurface& s, int root);
std::string portion_text(const SurfacePortion& p);

struct SurfacePoint {
  int face = -1;
  Vec2 chart;
};

// Level-n refinement of a portion. Triangles split into n^2 triangles; p-gons
// are first split by a fan from the center.
struct Subdivision {
  int n = 1;
  Triangulation tri;
  std::vector<int> face_of;                   // sub-face -> surface face
  std::vector<std::array<Vec2, 3>> corners;   // sub-face corners in that face's chart
  std::vector<SurfacePoint> vertex_point;     // one chart location per sub-vertex
  std::vector<int> original;                  // sub-vertex -> surface vertex or -1
  std::vector<int> sub_of_vertex;             // surface vertex -> sub-vertex or -1

  // piece tables: per (surface face, fan index)
  std::vector<int> piece_offset;              // indexed by position of the face in `faces`
  std::vector<int> piece_face;                // surface face of each position
  std::vector<int> table;                     // (piece, i, j, up/down) -> sub-face
  std::vector<std::array<Vec2, 3>> piece_corners;
  std::vector<int> face_pos;                  // surface face -> position or -1
  std::vector<int> face_p;                    // surface face -> polygon degree

  // sub-face containing the point and barycentric coordinates in it
  std::pair<int, std::array<double, 3>> locate(const SurfacePoint& x) const;
};
Subdivision subdivide(const EquilateralSurface& s, const SurfacePortion& p, int n);

// Barycentric coordinates of x in triangle (a,b,c).
std::array<double, 3> barycentric(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& x);

inline constexpr long kUniformizeVertexCap = 5000000;

struct DiscreteConformalMap {
  Subdivision sub;
  std::vector<Vec2> image;  // per sub-vertex
  double radius = 1.0;      // target disk radius |S|
  int root = -1;            // sub-vertex sent to 0; the first boundary-loop vertex lies on the positive real axis
  double solve_residual = 0.0;
  int solve_iterations = 0;

  Vec2 evaluate(const SurfacePoint& x) const;
  Vec2 vertex_image(int surface_vertex) const;
};

struct UniformizeOptions {
  double tol = 1e-10;
  std::optional<int> root_subvertex;  // default: the portion root
  double radius = 0.0;                // default: side of the portion square (1 when unset)
};
DiscreteConformalMap uniformize_approx(const EquilateralSurface& s, const SurfacePortion& p, int n,
                                       const UniformizeOptions& opt = {});

// min signed area of sub-face images (positive = orientation preserved)
double min_image_orientation(const DiscreteConformalMap& m);
// sup over portion vertices of |image_a - image_b|
double refinement_difference(const DiscreteConformalMap& a, const DiscreteConformalMap& b);
// max over sub-faces inside faces away from the portion boundary of sigma_max/sigma_min - 1
double affine_distortion(const EquilateralSurface& s, const SurfacePortion& p, const DiscreteConformalMap& m);

struct SemiFlowerGeometry {
  double outradius = 0.0;
  double inradius = 0.0;
  int degree = 0;
};
// Image of P_v (the closest-vertex region of v) about the image of v.
SemiFlowerGeometry semi_flower_geometry(const EquilateralSurface& s, const SurfacePortion& p,
                                        const DiscreteConformalMap& m, int v, int samples_per_edge = 8);

struct SemiFlowerAreas {
  std::vector<double> area;  // per portion vertex (ordered as p.vertices)
  double total = 0.0;
  double portion_area = 0.0;
};
SemiFlowerAreas semi_flower_areas(const EquilateralSurface& s, const SurfacePortion& p);

struct LengthAreaRow {
  double delta = 0.0;
  Vec2 center;
  double square_diameter = 0.0;  // diam of union of semi-flower images over cells meeting the square, / |S|
  double ball_diameter = 0.0;    // diam of union of cells whose semi-flower image meets B(z; delta |S|), / |S|
  double log_reference = 0.0;    // (-log delta)^{-1/2}
  double ball_reference = 0.0;   // (log(1 - lambda) - log(16 delta))^{-1/2} (NaN when undefined)
};
// Squares of side delta |S| centered at `centers` (cell side) and balls of radius delta |S|
// centered at the images `ball_centers` (|z| <= lambda |S|).
std::vector<LengthAreaRow> length_area_diagnostic(const CellConfiguration& config, const EquilateralSurface& s,
                                                  const SurfacePortion& p, const DiscreteConformalMap& m,
                                                  const std::vector<double>& deltas, const std::vector<Vec2>& centers,
                                                  const std::vector<Vec2>& ball_centers, double lambda);

}  // namespace cellembed
