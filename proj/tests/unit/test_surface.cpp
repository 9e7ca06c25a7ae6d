#include <gtest/gtest.h>

#include <cmath>

#include "cellembed/error.hpp"
#include "cellembed/generators.hpp"
#include "cellembed/rng.hpp"
#include "cellembed/surface.hpp"

using namespace cellembed;

namespace {

CellConfiguration voronoi(std::uint64_t seed, double window) {
  GeneratorSpec s;
  s.window = window;
  s.seed = seed;
  return poisson_voronoi(s);
}

bool cells_inside(const CellConfiguration& c, const SurfacePortion& p) {
  for (int v : p.vertices)
    if (!p.square.contains(c.cell(v).bbox())) return false;
  return true;
}

// wheel with n petals around vertex 0
Triangulation wheel(int n) {
  std::vector<std::array<int, 3>> f;
  for (int i = 0; i < n; ++i) f.push_back({0, 1 + i, 1 + (i + 1) % n});
  return Triangulation(n + 1, f);
}

EquilateralSurface single_triangle() { return build_surface(3, {{0, 1, 2}}); }

SurfacePortion triangle_portion(const EquilateralSurface& s) {
  SurfacePortion p;
  p.faces = {0};
  p.vertices = {0, 1, 2};
  p.boundary_loop = {0, 1, 2};
  p.square = Box::centered({0, 0}, 1.0);
  return p;
}

}  // namespace

TEST(BuildSurface, SingleTriangleAndCones) {
  auto s = single_triangle();
  for (int v = 0; v < 3; ++v) {
    EXPECT_TRUE(s.boundary[v]);
    EXPECT_NEAR(s.cone_angle[v], M_PI / 3, 1e-15);
  }
  auto w6 = build_surface(wheel(6));
  EXPECT_FALSE(w6.boundary[0]);
  EXPECT_NEAR(w6.cone_angle[0], 2 * M_PI, 1e-14);
  auto w7 = build_surface(wheel(7));
  EXPECT_NEAR(w7.cone_angle[0], 7 * M_PI / 3, 1e-14);
  EXPECT_GT(w7.cone_angle[0], 2 * M_PI);
  EXPECT_LT(gauss_bonnet(w7, {0, 1, 2, 3, 4, 5, 6}).interior_curvature, 0);
}

TEST(BuildSurface, LoopsAndBadFacesRejected) {
  EXPECT_THROW(build_surface(2, {{0, 0, 1}}), Error);
  EXPECT_THROW(build_surface(3, {{0, 1}}), Error);
  EXPECT_THROW(build_surface(3, {{0, 1, 2}, {0, 1, 2}}), Error);
  try {
    HalfEdgeMap::from_rotations({{0, 1}, {0}});
    FAIL() << "loop accepted";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidInput);
  }
}

TEST(BuildSurface, SquareLatticeIsFlatQuadrangulation) {
  auto cfg = lattice_config(GeneratorKind::SquareLattice, 8);
  auto s = build_surface(cfg.map());
  int interior = 0;
  for (int v = 0; v < s.num_vertices; ++v)
    if (!s.boundary[v]) {
      ++interior;
      EXPECT_NEAR(s.cone_angle[v], 2 * M_PI, 1e-14);
    }
  EXPECT_GT(interior, 0);
  for (auto& f : s.faces) EXPECT_EQ(f.size(), 4u);
}

TEST(BuildSurface, ChartsAreRegularUnitPolygons) {
  for (int p = 3; p <= 8; ++p) {
    for (int k = 0; k < p; ++k) {
      EXPECT_NEAR(dist(chart_corner(p, k), chart_corner(p, (k + 1) % p)), 1.0, 1e-13);
      EXPECT_NEAR(dist(chart_corner(p, k), chart_center(p)), 0.5 / std::sin(M_PI / p), 1e-13);
    }
  }
}

TEST(FacePairDistance, StraightAndThroughVertex) {
  auto s = build_surface(4, {{0, 1, 2}, {1, 0, 3}});
  Vec2 c3 = (chart_corner(3, 0) + chart_corner(3, 1) + chart_corner(3, 2)) / 3.0;
  EXPECT_NEAR(face_pair_distance(s, 0, c3, 1, c3), 1 / std::sqrt(3.0), 1e-14);
  EXPECT_NEAR(face_pair_distance(s, 0, chart_corner(3, 2), 1, chart_corner(3, 2)), std::sqrt(3.0), 1e-14);
  EXPECT_NEAR(face_pair_distance(s, 0, c3, 0, chart_corner(3, 0)), 1 / std::sqrt(3.0), 1e-14);
  // two pentagons: the segment between the far neighbors of the shared vertex leaves the union
  auto pent = build_surface(8, {{0, 1, 2, 3, 4}, {1, 0, 5, 6, 7}});
  EXPECT_NEAR(face_pair_distance(pent, 0, chart_corner(5, 4), 1, chart_corner(5, 2)), 2.0, 1e-13);
  auto far = build_surface(6, {{0, 1, 2}, {3, 4, 5}});
  EXPECT_THROW(face_pair_distance(far, 0, c3, 1, c3), Error);
}

TEST(GaussBonnet, HoldsOnPortions) {
  auto t = single_triangle();
  auto g = gauss_bonnet(t);
  EXPECT_EQ(g.euler_characteristic, 1);
  EXPECT_NEAR(g.lhs(), g.rhs(), 1e-12);
  auto patch = build_surface(triangular_lattice_patch(5));
  g = gauss_bonnet(patch);
  EXPECT_NEAR(g.lhs(), g.rhs(), 1e-10);
  EXPECT_NEAR(g.interior_curvature, 0.0, 1e-10);
  auto cfg = voronoi(3, 40);
  auto s = surface_from_config(cfg);
  auto p = build_M_S(cfg, s, Box::centered({0, 0}, 24));
  ASSERT_FALSE(p.empty()) << p.diagnostic;
  g = gauss_bonnet(s, p.faces);
  EXPECT_EQ(g.euler_characteristic, 1);
  EXPECT_NEAR(g.lhs(), g.rhs(), 1e-9);
  auto sq = build_surface(lattice_config(GeneratorKind::SquareLattice, 6).map());
  g = gauss_bonnet(sq);
  EXPECT_NEAR(g.lhs(), g.rhs(), 1e-10);
  // annulus: chi = 0
  auto big = build_surface(triangular_lattice_patch(3));
  std::vector<int> ring;
  for (int f = 0; f < static_cast<int>(big.faces.size()); ++f) {
    bool touches_root = false;
    for (int v : big.faces[f]) touches_root |= (v == 0);
    if (!touches_root) ring.push_back(f);
  }
  g = gauss_bonnet(big, ring);
  EXPECT_EQ(g.euler_characteristic, 0);
  EXPECT_NEAR(g.lhs(), g.rhs(), 1e-10);
}

TEST(BuildMS, VoronoiPortionIsDiskInsideS) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    auto cfg = voronoi(seed, 48);
    auto s = surface_from_config(cfg);
    Box S = Box::centered({0, 0}, 32);
    auto p = build_M_S(cfg, s, S);
    ASSERT_FALSE(p.empty()) << p.diagnostic;
    EXPECT_TRUE(cells_inside(cfg, p));
    EXPECT_TRUE(p.is_interior(p.root));
    EXPECT_EQ(*cfg.cell_containing({0, 0}), p.root);
    EXPECT_GT(p.a, 0);
    EXPECT_LT(p.a, 32);
    // reported a lies on the 2^-32 |S| grid
    double units = p.a / 32 * 4294967296.0;
    EXPECT_EQ(units, std::floor(units));
    // triangulation constructor accepts the portion as a disk
    std::vector<int> local(s.num_vertices, -1);
    for (size_t i = 0; i < p.vertices.size(); ++i) local[p.vertices[i]] = static_cast<int>(i);
    std::vector<std::array<int, 3>> tris;
    for (int f : p.faces) tris.push_back({local[s.faces[f][0]], local[s.faces[f][1]], local[s.faces[f][2]]});
    EXPECT_NO_THROW(Triangulation(static_cast<int>(p.vertices.size()), tris));
    // M(S;a) at the reported a reproduces the portion
    auto again = portion_for_side(cfg, s, S, p.a);
    EXPECT_EQ(again.faces, p.faces);
    // no larger a gives a valid portion with cells inside S
    for (int k = 1; k <= 40; ++k) {
      double a = p.a + (32 - p.a) * k / 41.0;
      auto q = portion_for_side(cfg, s, S, a);
      if (q.empty()) continue;
      if (q.faces == p.faces) continue;
      EXPECT_FALSE(cells_inside(cfg, q)) << "a=" << a;
    }
  }
}

TEST(BuildMS, PortionInclusion) {
  for (std::uint64_t seed : {4u, 5u}) {
    auto cfg = voronoi(seed, 160);
    auto s = surface_from_config(cfg);
    Box S = Box::centered({0, 0}, 128);
    auto p = build_M_S(cfg, s, S);
    ASSERT_FALSE(p.empty()) << p.diagnostic;
    EXPECT_GE(p.a, 0.9 * 128);
    auto inner = portion_for_side(cfg, s, S, 0.9 * 128);
    ASSERT_FALSE(inner.empty()) << inner.diagnostic;
    EXPECT_TRUE(std::includes(p.faces.begin(), p.faces.end(), inner.faces.begin(), inner.faces.end()));
  }
}

TEST(BuildMS, TinySquareIsEmptyWithDiagnostic) {
  auto cfg = voronoi(1, 24);
  auto s = surface_from_config(cfg);
  auto p = build_M_S(cfg, s, Box::centered({0.1, 0.2}, 0.05));
  EXPECT_TRUE(p.empty());
  EXPECT_FALSE(p.diagnostic.empty());
  EXPECT_THROW(build_M_S(cfg, s, Box{{0, 0}, {1, 2}}), Error);
}

TEST(BuildMS, PortionSerialization) {
  auto cfg = voronoi(1, 32);
  auto s = surface_from_config(cfg);
  auto p = build_M_S(cfg, s, Box::centered({0, 0}, 16));
  auto text = portion_text(p);
  EXPECT_EQ(text, portion_text(build_M_S(cfg, s, Box::centered({0, 0}, 16))));
  EXPECT_NE(text.find("boundary " + std::to_string(p.boundary_loop.size())), std::string::npos);
}

TEST(Subdivide, Counts) {
  auto t = single_triangle();
  auto tp = triangle_portion(t);
  auto s2 = subdivide(t, tp, 2);
  EXPECT_EQ(s2.tri.num_faces(), 4);
  EXPECT_EQ(s2.tri.num_vertices(), 6);
  EXPECT_THROW(subdivide(t, tp, 0), Error);

  auto cfg = voronoi(2, 32);
  auto s = surface_from_config(cfg);
  auto p = build_M_S(cfg, s, Box::centered({0, 0}, 20));
  ASSERT_FALSE(p.empty());
  const long F = static_cast<long>(p.faces.size()), V = static_cast<long>(p.vertices.size());
  const long E = V + F - 1;
  for (int n : {1, 2, 4}) {
    auto sub = subdivide(s, p, n);
    EXPECT_EQ(sub.tri.num_faces(), n * n * F);
    EXPECT_EQ(sub.tri.num_vertices(), V + E * (n - 1) + F * (n - 1) * (n - 2) / 2);
  }
  // n = 1 is the portion itself
  auto one = subdivide(s, p, 1);
  std::vector<std::array<int, 3>> orig;
  for (int f = 0; f < one.tri.num_faces(); ++f) {
    auto t3 = one.tri.face(f);
    orig.push_back({one.original[t3[0]], one.original[t3[1]], one.original[t3[2]]});
    EXPECT_EQ(s.faces[one.face_of[f]], (std::vector<int>{orig.back()[0], orig.back()[1], orig.back()[2]}));
  }
  for (int v : one.original) EXPECT_GE(v, 0);
}

TEST(Subdivide, PolygonFacesUseCenterFan) {
  auto cfg = lattice_config(GeneratorKind::SquareLattice, 8);
  auto s = build_surface(cfg.map());
  int root = *cfg.cell_containing({0.5, 0.5});
  auto p = whole_portion(s, root);
  auto sub = subdivide(s, p, 3);
  EXPECT_EQ(sub.tri.num_faces(), static_cast<int>(p.faces.size()) * 4 * 9);
  // pentagons
  auto pent = build_surface(8, {{0, 1, 2, 3, 4}, {1, 0, 5, 6, 7}});
  SurfacePortion pp;
  pp.faces = {0, 1};
  pp.vertices = {0, 1, 2, 3, 4, 5, 6, 7};
  auto ps = subdivide(pent, pp, 2);
  EXPECT_EQ(ps.tri.num_faces(), 2 * 5 * 4);
}

TEST(Subdivide, LocateRoundTrip) {
  auto pent = build_surface(5, {{0, 1, 2, 3, 4}});
  SurfacePortion pp;
  pp.faces = {0};
  pp.vertices = {0, 1, 2, 3, 4};
  auto sub = subdivide(pent, pp, 5);
  CounterRng rng(7);
  int checked = 0;
  Polygon poly;
  for (int k = 0; k < 5; ++k) poly.push_back(chart_corner(5, k));
  while (checked < 500) {
    Vec2 x{rng.uniform(-0.2, 1.2), rng.uniform(0, 1.6)};
    if (!point_in_polygon(poly, x)) continue;
    auto [sf, b] = sub.locate({0, x});
    auto& c = sub.corners[sf];
    Vec2 y = c[0] * b[0] + c[1] * b[1] + c[2] * b[2];
    EXPECT_NEAR(dist(x, y), 0.0, 1e-12);
    EXPECT_GE(std::min({b[0], b[1], b[2]}), -1e-9);
    ++checked;
  }
  EXPECT_THROW(sub.locate({0, {5, 5}}), Error);
}

TEST(Uniformize, SingleTriangleSymmetric) {
  auto t = single_triangle();
  auto tp = triangle_portion(t);
  for (int n : {3, 6}) {
    auto sub = subdivide(t, tp, n);
    // centroid vertex
    int centroid = -1;
    Vec2 c = (chart_corner(3, 0) + chart_corner(3, 1) + chart_corner(3, 2)) / 3.0;
    for (int v = 0; v < sub.tri.num_vertices(); ++v)
      if (dist(sub.vertex_point[v].chart, c) < 1e-12) centroid = v;
    ASSERT_GE(centroid, 0);
    UniformizeOptions opt;
    opt.root_subvertex = centroid;
    auto m = uniformize_approx(t, tp, n, opt);
    EXPECT_EQ(m.image[centroid], Vec2(0, 0));
    Vec2 a = m.vertex_image(0), b = m.vertex_image(1), cc = m.vertex_image(2);
    EXPECT_NEAR(dist(rotate(a, 2 * M_PI / 3), b), 0.0, 1e-8);
    EXPECT_NEAR(dist(rotate(b, 2 * M_PI / 3), cc), 0.0, 1e-8);
    EXPECT_GT(min_image_orientation(m), 0);
  }
}

TEST(Uniformize, NormalizationAndOrientationOnVoronoi) {
  auto cfg = voronoi(6, 40);
  auto s = surface_from_config(cfg);
  auto p = build_M_S(cfg, s, Box::centered({0, 0}, 24));
  ASSERT_FALSE(p.empty());
  auto m = uniformize_approx(s, p, 2);
  EXPECT_DOUBLE_EQ(m.radius, 24);
  EXPECT_LT(norm(m.vertex_image(p.root)), 1e-12 * 24);
  for (auto& z : m.image) EXPECT_LE(norm(z), 24 * (1 + 1e-9));
  EXPECT_GT(min_image_orientation(m), 0);
  EXPECT_LT(m.solve_residual, 1e-9);
  // boundary images lie on the circle of radius |S| up to the boundary radii
  for (int v : p.boundary_loop) EXPECT_GT(norm(m.vertex_image(v)), 0.5 * 24);
  SurfacePoint mid{p.faces[0], {0.5, 0.2}};
  auto [sf, b] = m.sub.locate(mid);
  auto& tr = m.sub.tri.face(sf);
  Vec2 expect = m.image[tr[0]] * b[0] + m.image[tr[1]] * b[1] + m.image[tr[2]] * b[2];
  EXPECT_NEAR(dist(m.evaluate(mid), expect), 0.0, 1e-12);
}

TEST(Uniformize, FlatHexNearAffineAndRefines) {
  auto s = build_surface(triangular_lattice_patch(6));
  auto p = whole_portion(s, 0);
  double prev = 1e9;
  std::vector<DiscreteConformalMap> maps;
  for (int n : {1, 2, 4}) {
    maps.push_back(uniformize_approx(s, p, n));
    double d = affine_distortion(s, p, maps.back());
    EXPECT_LT(d, prev) << "n=" << n;
    prev = d;
  }
  EXPECT_LT(prev, 0.2);
  double d12 = refinement_difference(maps[0], maps[1]);
  double d24 = refinement_difference(maps[1], maps[2]);
  RecordProperty("refinement_ratio", std::to_string(d12 / d24));
  EXPECT_LT(d24, d12);
}

TEST(Uniformize, SizeCapAndBadRoot) {
  auto s = build_surface(triangular_lattice_patch(3));
  auto p = whole_portion(s, 0);
  try {
    uniformize_approx(s, p, 600);
    FAIL() << "size cap not enforced";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SizeCap);
  }
  UniformizeOptions opt;
  opt.root_subvertex = s.num_vertices + 1000;
  EXPECT_THROW(uniformize_approx(s, p, 1, opt), Error);
  EXPECT_THROW(whole_portion(s, p.boundary_loop.front()), Error);
}

TEST(SemiFlower, FlatFlowerRatio) {
  auto s = build_surface(triangular_lattice_patch(8));
  auto p = whole_portion(s, 0);
  auto m = uniformize_approx(s, p, 2);
  auto g = semi_flower_geometry(s, p, m, 0);
  EXPECT_EQ(g.degree, 6);
  EXPECT_GT(g.inradius, 0);
  double ratio = g.outradius / g.inradius;
  EXPECT_LE(ratio, 2 * 2 / std::sqrt(3.0));
  EXPECT_NEAR(ratio, 2 / std::sqrt(3.0), 0.05);
  EXPECT_THROW(semi_flower_geometry(s, p, m, p.boundary_loop.front()), Error);
}

TEST(SemiFlower, VoronoiScan) {
  double worst = 0;
  for (std::uint64_t seed : {1u, 2u}) {
    auto cfg = voronoi(seed, 40);
    auto s = surface_from_config(cfg);
    auto p = build_M_S(cfg, s, Box::centered({0, 0}, 24));
    ASSERT_FALSE(p.empty());
    auto m = uniformize_approx(s, p, 1);
    for (int v : p.vertices) {
      if (!p.is_interior(v)) continue;
      auto g = semi_flower_geometry(s, p, m, v);
      ASSERT_GT(g.inradius, 0) << "vertex " << v;
      worst = std::max(worst, g.outradius / g.inradius / (g.degree * g.degree));
    }
  }
  RecordProperty("max_ratio_over_deg2", std::to_string(worst));
  EXPECT_LT(worst, 1.0);
}

TEST(SemiFlower, AreasPartitionPortion) {
  auto cfg = voronoi(8, 40);
  auto s = surface_from_config(cfg);
  auto p = build_M_S(cfg, s, Box::centered({0, 0}, 24));
  auto a = semi_flower_areas(s, p);
  EXPECT_NEAR(a.total, a.portion_area, 1e-12 * a.portion_area);
  EXPECT_NEAR(a.portion_area, p.faces.size() * std::sqrt(3.0) / 4, 1e-9);
  for (double x : a.area) EXPECT_GT(x, 0);
  auto pent = build_surface(8, {{0, 1, 2, 3, 4}, {1, 0, 5, 6, 7}});
  SurfacePortion pp;
  pp.faces = {0, 1};
  pp.vertices = {0, 1, 2, 3, 4, 5, 6, 7};
  auto pa = semi_flower_areas(pent, pp);
  EXPECT_NEAR(pa.total, 2 * 5 / (4 * std::tan(M_PI / 5)), 1e-12);
  EXPECT_NEAR(pa.area[0], 2 * 0.25 / std::tan(M_PI / 5), 1e-12);
}

TEST(LengthArea, MonotoneAndContainment) {
  auto cfg = voronoi(9, 72);
  auto s = surface_from_config(cfg);
  auto p = build_M_S(cfg, s, Box::centered({0, 0}, 48));
  ASSERT_FALSE(p.empty());
  auto m = uniformize_approx(s, p, 1);
  std::vector<double> deltas{1.0 / 4, 1.0 / 8, 1.0 / 16, 1.0 / 32};
  std::vector<Vec2> centers;
  CounterRng rng(11);
  for (int i = 0; i < 20; ++i) centers.push_back({rng.uniform(-8, 8), rng.uniform(-8, 8)});
  std::vector<Vec2> balls;
  for (int i = 0; i < 20; ++i) balls.push_back({rng.uniform(-0.3, 0.3) * 48, rng.uniform(-0.3, 0.3) * 48});
  auto rows = length_area_diagnostic(cfg, s, p, m, deltas, centers, balls, 0.5);
  ASSERT_EQ(rows.size(), deltas.size() * centers.size());
  int ok = 0, total = 0, ok_ball = 0;
  for (size_t d = 0; d + 1 < deltas.size(); ++d)
    for (size_t i = 0; i < centers.size(); ++i) {
      const auto& a = rows[d * centers.size() + i];
      const auto& b = rows[(d + 1) * centers.size() + i];
      ++total;
      if (b.square_diameter <= a.square_diameter + 1e-12) ++ok;
      if (b.ball_diameter <= a.ball_diameter + 1e-12) ++ok_ball;
    }
  EXPECT_GE(ok * 10, total * 9);
  EXPECT_GE(ok_ball * 10, total * 9);
  EXPECT_NEAR(rows[0].log_reference, std::pow(std::log(4.0), -0.5), 1e-15);
  EXPECT_TRUE(std::isnan(rows[0].ball_reference));  // 16 delta > 1 - lambda
  // a square covering the portion
  double whole = 0;
  for (auto& z : m.image)
    for (auto& w : m.image) whole = std::max(whole, dist(z, w));
  auto big = length_area_diagnostic(cfg, s, p, m, {36.0 / 48}, {{0, 0}}, {}, 0.0);
  EXPECT_LE(big[0].square_diameter, whole / 48 + 1e-12);
  EXPECT_THROW(length_area_diagnostic(cfg, s, p, m, {2.0}, {{0, 0}}, {}, 0.0), Error);
}

TEST(LengthArea, FlatLatticeScalesWithDelta) {
  auto cfg = lattice_config(GeneratorKind::TriangularLattice, 120);
  auto s = surface_from_config(cfg);
  auto p = build_M_S(cfg, s, Box::centered({0, 0}, 96));
  ASSERT_FALSE(p.empty()) << p.diagnostic;
  auto m = uniformize_approx(s, p, 1);
  std::vector<double> deltas{1.0 / 4, 1.0 / 8, 1.0 / 16};
  auto rows = length_area_diagnostic(cfg, s, p, m, deltas, {{0, 0}}, {}, 0.0);
  for (size_t i = 0; i + 1 < rows.size(); ++i) {
    double r = rows[i].square_diameter / rows[i + 1].square_diameter;
    EXPECT_GT(r, 1.5);
    EXPECT_LT(r, 2.5);
    // far below the logarithmic reference
    EXPECT_LT(rows[i].square_diameter, rows[i].log_reference);
  }
}
