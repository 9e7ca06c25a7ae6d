#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "cellembed/corrector.hpp"
#include "cellembed/error.hpp"
#include "cellembed/generators.hpp"

using namespace cellembed;

namespace {

struct Setup {
  CellConfiguration config;
  EquilateralSurface s;
  SurfacePortion p;
};

Setup voronoi_setup(std::uint64_t seed, double half) {
  GeneratorSpec g;
  g.window = 40;
  g.seed = seed;
  Setup st;
  st.config = poisson_voronoi(g);
  st.s = surface_from_config(st.config);
  st.p = build_M_S(st.config, st.s, Box{{-half, -half}, {half, half}});
  return st;
}

const Setup& small_voronoi() {
  static Setup st = voronoi_setup(5, 8);
  return st;
}

}  // namespace

TEST(Phi0, DeterministicAndInsideCells) {
  const auto& st = small_voronoi();
  auto a = sample_cell_points(st.config, 11);
  auto b = sample_cell_points(st.config, 11);
  auto c = sample_cell_points(st.config, 12);
  ASSERT_EQ(a.size(), static_cast<size_t>(st.config.num_cells()));
  int differ = 0;
  for (size_t h = 0; h < a.size(); ++h) {
    EXPECT_EQ(a[h].x, b[h].x);
    EXPECT_EQ(a[h].y, b[h].y);
    EXPECT_TRUE(st.config.cell(static_cast<int>(h)).contains(a[h]));
    differ += dist(a[h], c[h]) > 0;
  }
  EXPECT_GT(differ, 0);
}

TEST(Phi0, SampleMeanIsCentroid) {
  auto config = lattice_config(GeneratorKind::SquareLattice, 2);
  const int N = 10000;
  const int h = 3;
  double sx = 0, sy = 0, sxx = 0, syy = 0;
  for (int seed = 0; seed < N; ++seed) {
    Vec2 z = sample_cell_points(config, seed)[h];
    sx += z.x;
    sy += z.y;
    sxx += z.x * z.x;
    syy += z.y * z.y;
  }
  double mx = sx / N, my = sy / N;
  double sex = std::sqrt((sxx / N - mx * mx) / N), sey = std::sqrt((syy / N - my * my) / N);
  Vec2 c = config.cell(h).centroid();
  EXPECT_LT(std::abs(mx - c.x), 3 * sex);
  EXPECT_LT(std::abs(my - c.y), 3 * sey);
}

TEST(Phi0, LiftMatchesVertexValues) {
  const auto& st = small_voronoi();
  auto sub = share(subdivide(st.s, st.p, 3));
  auto phi0 = sample_phi0(st.config, st.s, sub, 4);
  auto pts = sample_cell_points(st.config, 4);
  for (int v : st.p.vertices) {
    Vec2 z = phi0.vertex_value(v);
    EXPECT_EQ(z.x, pts[v].x);
    EXPECT_EQ(z.y, pts[v].y);
  }
  int outside = -1;
  for (int v = 0; v < st.s.num_vertices && outside < 0; ++v)
    if (!st.p.contains_vertex(v)) outside = v;
  ASSERT_GE(outside, 0);
  EXPECT_THROW(phi0.vertex_value(outside), Error);
  EXPECT_EQ(phi0.dump(), sample_phi0(st.config, st.s, sub, 4).dump());
  // evaluation at a corner equals the vertex value
  int f = st.p.faces.front();
  SurfacePoint x{f, chart_corner(static_cast<int>(st.s.faces[f].size()), 0)};
  Vec2 z = phi0.evaluate(x);
  EXPECT_NEAR(dist(z, pts[st.s.faces[f][0]]), 0.0, 1e-12);
}

TEST(Phi0, CollapsedMapIsReportedDegenerate) {
  const auto& st = small_voronoi();
  auto sub = share(subdivide(st.s, st.p, 2));
  auto f = lift_vertex_values(st.s, sub, std::vector<Vec2>(st.s.num_vertices, Vec2{1, 1}), "const");
  EXPECT_EQ(f.degenerate_faces().size(), static_cast<size_t>(sub->tri.num_faces()));
  EXPECT_DOUBLE_EQ(dirichlet_energy(f), 0.0);
}

TEST(Energy, ClosedFormValues) {
  const double s3 = std::sqrt(3.0);
  Vec2 a{0, 0}, b{1, 0}, c{0.5, s3 / 2};
  EXPECT_NEAR(equilateral_energy_closed_form(a, b, c), s3 / 2, 1e-14);
  // congruent copy, rotated and translated
  Vec2 t{3, -2};
  EXPECT_NEAR(equilateral_energy_closed_form(rotate(a, 1.1) + t, rotate(b, 1.1) + t, rotate(c, 1.1) + t), s3 / 2, 1e-13);
  EXPECT_DOUBLE_EQ(equilateral_energy_closed_form(t, t, t), 0.0);
}

TEST(Energy, ClosedFormAgreesWithQuadratureAndCotangent) {
  std::mt19937_64 gen(99);
  std::uniform_real_distribution<double> U(-1, 1);
  const std::array<Vec2, 3> dom{chart_corner(3, 0), chart_corner(3, 1), chart_corner(3, 2)};
  double worst_q = 0, worst_c = 0;
  for (int it = 0; it < 100000; ++it) {
    Vec2 p0{U(gen), U(gen)}, p1{U(gen), U(gen)}, p2{U(gen), U(gen)};
    double e = equilateral_energy_closed_form(p0, p1, p2);
    worst_q = std::max(worst_q, std::abs(e - equilateral_energy_quadrature(p0, p1, p2)));
    worst_c = std::max(worst_c, std::abs(e - face_energy(dom, {p0, p1, p2})));
    double l2 = norm2(p1 - p0) + norm2(p2 - p1) + norm2(p0 - p2);
    ASSERT_LE(e, 3 * l2 + 1e-12);
    ASSERT_NEAR(e, l2 / (2 * std::sqrt(3.0)), 1e-12);
  }
  EXPECT_LT(worst_q, 1e-10);
  EXPECT_LT(worst_c, 1e-12);
}

TEST(Energy, DegenerateDomainThrows) {
  EXPECT_THROW(face_energy({Vec2{0, 0}, Vec2{1, 0}, Vec2{2, 0}}, {Vec2{0, 0}, Vec2{1, 0}, Vec2{0, 1}}), Error);
}

TEST(Harmonic, AffineDataIsFixed) {
  auto config = lattice_config(GeneratorKind::TriangularLattice, 30);
  auto s = surface_from_config(config);
  auto p = build_M_S(config, s, Box{{-8, -8}, {8, 8}});
  ASSERT_FALSE(p.empty()) << p.diagnostic;
  auto sub = share(subdivide(s, p, 2));
  std::vector<Vec2> vv(s.num_vertices);
  for (int v = 0; v < s.num_vertices; ++v) {
    Vec2 q = config.sites()[v];
    vv[v] = Vec2{1.05 * q.x - 0.1 * q.y + 0.2, 0.1 * q.x + 0.95 * q.y - 0.1};
  }
  auto phi0 = lift_vertex_values(s, sub, vv, "affine");
  auto ext = harmonic_extend(config, phi0, sample_dyadic_system(3), 8);
  double worst = 0;
  int interior = 0;
  for (auto& r : ext.regions) interior += r.interior;
  EXPECT_GT(interior, 0);
  for (size_t i = 0; i < phi0.values.size(); ++i) worst = std::max(worst, dist(phi0.values[i], ext.map.values[i]));
  EXPECT_LT(worst, 1e-9);
}

TEST(Harmonic, EnergyMaxPrincipleAndOrthogonality) {
  const auto& st = small_voronoi();
  auto sub = share(subdivide(st.s, st.p, 3));
  auto phi0 = sample_phi0(st.config, st.s, sub, 7);
  auto dy = sample_dyadic_system(7);
  auto e1 = harmonic_extend(st.config, phi0, dy, 3);
  auto e2 = harmonic_extend(st.config, phi0, dy, 12);
  for (auto* e : {&e1, &e2}) {
    EXPECT_TRUE(e->energy_monotone());
    EXPECT_TRUE(e->max_principle());
    EXPECT_LT(e->max_residual, 1e-9);
  }
  double total_interior = 0;
  for (auto& r : e2.regions) total_interior += r.interior;
  EXPECT_GT(total_interior, 0);
  EXPECT_LT(dirichlet_energy(e2.map), dirichlet_energy(phi0));
  EXPECT_LT(orthogonal_increment_residual(e2, e1.map, phi0), 1e-8);
  EXPECT_LT(orthogonal_increment_residual(e2, e2.map, e1.map), 1e-8);
  // unchanged outside the region interiors
  EXPECT_EQ(e1.map.vertex_value(st.p.boundary_loop.front()).x, phi0.vertex_value(st.p.boundary_loop.front()).x);
}

TEST(SE, ZeroScaledAndMismatch) {
  const auto& st = small_voronoi();
  auto sub = share(subdivide(st.s, st.p, 2));
  auto phi0 = sample_phi0(st.config, st.s, sub, 2);
  Box clip{{-4, -4}, {4, 4}};
  int h = *st.config.cell_containing({0, 0});
  const auto& cell = st.config.cell(h);
  EXPECT_DOUBLE_EQ(se_statistic(phi0, phi0, phi0, cell, clip), 0.0);
  PLMap shifted = phi0, scaled = phi0, zero = phi0;
  for (size_t i = 0; i < phi0.values.size(); ++i) {
    shifted.values[i] = phi0.values[i] + Vec2{5, -3};
    scaled.values[i] = phi0.values[i] * 1.7;
    zero.values[i] = Vec2{0, 0};
  }
  EXPECT_NEAR(se_statistic(shifted, phi0, phi0, cell, clip), 0.0, 1e-10);
  double base = se_statistic(phi0, zero, phi0, cell, clip);
  EXPECT_GT(base, 0);
  EXPECT_NEAR(se_statistic(scaled, phi0, phi0, cell, clip), 0.49 * base, 1e-9 * base);
  auto other = sample_phi0(st.config, st.s, share(subdivide(st.s, st.p, 3)), 2);
  EXPECT_THROW(se_statistic(phi0, other, phi0, cell, clip), Error);
  EXPECT_THROW(se_statistic(phi0, phi0, phi0, cell, Box{{100, 100}, {101, 101}}), Error);
}

TEST(SE, MeshLevelChoiceStops) {
  const auto& st = small_voronoi();
  auto choice = choose_mesh_level(st.config, st.s, st.p, sample_dyadic_system(1), 6, 1, Box{{-3, -3}, {3, 3}}, 1, 4, 1e9);
  EXPECT_EQ(choice.n, 2);
  ASSERT_EQ(choice.levels.size(), 2u);
  EXPECT_EQ(choice.se_change.size(), 1u);
  auto full = choose_mesh_level(st.config, st.s, st.p, sample_dyadic_system(1), 6, 1, Box{{-3, -3}, {3, 3}}, 1, 4, 0.0);
  EXPECT_EQ(full.n, 4);
  EXPECT_THROW(choose_mesh_level(st.config, st.s, st.p, sample_dyadic_system(1), 6, 1, Box{{-3, -3}, {3, 3}}, 0, 4), Error);
}

TEST(Gauge, RotationAndAnisotropy) {
  std::vector<Vec2> src{{1, 0}, {0, 1}, {-1, 2}, {3, 1}, {0.5, -2}};
  auto fit_of = [&](const Mat2& L) {
    std::vector<Vec2> t;
    for (auto& x : src) t.push_back({L(0, 0) * x.x + L(0, 1) * x.y, L(1, 0) * x.x + L(1, 1) * x.y});
    return fit_linear_gauge(src, t);
  };
  auto g = fit_of(rotation(4.0));
  EXPECT_NEAR(g.theta, 4.0, 1e-10);
  EXPECT_NEAR(g.scale, 1.0, 1e-10);
  EXPECT_LT((g.A - Mat2::Identity()).norm(), 1e-10);
  EXPECT_LT(g.residual, 1e-10);

  Mat2 D;
  D << 2, 0, 0, 0.5;
  auto d = fit_of(D);
  EXPECT_NEAR(d.theta, 0.0, 1e-10);
  EXPECT_NEAR(d.scale, 1.0, 1e-10);
  EXPECT_LT((d.A - D).norm(), 1e-10);

  Mat2 A;
  A << 1.5, 0.4, 0.4, (1 + 0.16) / 1.5;  // det 1, SPD
  Mat2 L = 3.0 * A * rotation(2.5);
  auto c = fit_of(L);
  EXPECT_NEAR(c.scale, 3.0, 1e-10);
  EXPECT_NEAR(c.theta, 2.5, 1e-10);
  EXPECT_LT((c.A - A).norm(), 1e-10);
  EXPECT_LT((c.compose() - L).norm(), 1e-10);
  EXPECT_NEAR(c.A.determinant(), 1.0, 1e-12);
}

TEST(Gauge, DegenerateInputs) {
  std::vector<Vec2> line{{0, 0}, {1, 1}, {2, 2}, {-3, -3}};
  EXPECT_THROW(fit_linear_gauge(line, line), Error);
  std::vector<Vec2> src{{1, 0}, {0, 1}, {1, 1}};
  std::vector<Vec2> mirror{{1, 0}, {0, -1}, {1, -1}};
  EXPECT_THROW(fit_linear_gauge(src, mirror), Error);
  EXPECT_THROW(fit_linear_gauge(src, {{1, 0}}), Error);
}

TEST(Sublinearity, ZeroAndShift) {
  const auto& st = small_voronoi();
  auto sub = share(subdivide(st.s, st.p, 1));
  auto phi0 = sample_phi0(st.config, st.s, sub, 8);
  auto v = portion_vertex_values(st.p, phi0);
  GaugeFit id;
  EXPECT_DOUBLE_EQ(sublinearity_metric(v, v, id, 3), 0.0);
  auto w = v;
  for (auto& z : w) z += Vec2{3, 4};
  EXPECT_NEAR(sublinearity_metric(v, w, id, 3), 5.0 / 8, 1e-12);
  EXPECT_THROW(sublinearity_metric(v, {}, id, 3), Error);
}
