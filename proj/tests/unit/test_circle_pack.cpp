#include <gtest/gtest.h>

#include <chrono>
#include <cmath>

#include "cellembed/circle_pack.hpp"
#include "cellembed/delaunay.hpp"
#include "cellembed/error.hpp"
#include "cellembed/generators.hpp"
#include "cellembed/rng.hpp"

using namespace cellembed;

namespace {

Triangulation hex_flower() {
  std::vector<std::array<int, 3>> f;
  for (int k = 0; k < 6; ++k) f.push_back({0, 1 + k, 1 + (k + 1) % 6});
  return Triangulation(7, f);
}

Triangulation random_disk(int n, std::uint64_t seed) {
  CounterRng rng(seed);
  std::vector<Vec2> pts;
  while (static_cast<int>(pts.size()) < n) {
    Vec2 p{2 * rng.uniform() - 1, 2 * rng.uniform() - 1};
    if (norm2(p) < 1) pts.push_back(p);
  }
  auto d = delaunay_triangulate(pts);
  return Triangulation(n, d.triangles);
}

int central_interior(const Triangulation& t) {
  for (int v = 0; v < t.num_vertices(); ++v)
    if (t.is_interior(v)) return v;
  return -1;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

TEST(Angles, EqualRadiiGiveSixtyDegrees) {
  EXPECT_NEAR(euclidean_angle(1, 1, 1), M_PI / 3, 1e-15);
  EXPECT_NEAR(euclidean_angle(5e-3, 5e-3, 5e-3), M_PI / 3, 1e-15);
  // tiny hyperbolic circles look Euclidean
  EXPECT_NEAR(hyperbolic_angle(1e-5, 2e-5, 3e-5), euclidean_angle(1, 2, 3), 1e-9);
  // horocycle petals around a circle of hyperbolic radius h
  double h = 0.7;
  EXPECT_NEAR(hyperbolic_angle(h, kInf, kInf), 2 * std::atan(std::exp(-h) / std::sqrt(1 - std::exp(-2 * h))), 1e-14);
}

TEST(SolveRadii, HexFlowerUnitBoundary) {
  auto t = hex_flower();
  auto sol = solve_radii(t, PackingBoundary::fixed_uniform(7, 1.0));
  EXPECT_NEAR(sol.radii[0], 1.0, 1e-12);
  EXPECT_LT(sol.residual, 1e-10);
}

TEST(SolveRadii, TwoRingPatchAllOnes) {
  auto t = triangular_lattice_patch(2);
  auto sol = solve_radii(t, PackingBoundary::fixed_uniform(t.num_vertices(), 1.0));
  for (double r : sol.radii) EXPECT_NEAR(r, 1.0, 1e-12);
}

TEST(SolveRadii, DelaunayDisk500UnderOneSecond) {
  auto t = random_disk(500, 7);
  auto t0 = std::chrono::steady_clock::now();
  auto sol = solve_radii(t, PackingBoundary::fixed_uniform(500, 0.05));
  EXPECT_LT(seconds_since(t0), 1.0);
  EXPECT_LT(sol.residual, 1e-10);
  auto sums = angle_sums(t, sol);
  for (int v = 0; v < t.num_vertices(); ++v)
    if (t.is_interior(v)) EXPECT_NEAR(sums[v], 2 * M_PI, 1e-10);
}

TEST(SolveRadii, MaximalDelaunayDisk) {
  auto t = random_disk(500, 11);
  auto t0 = std::chrono::steady_clock::now();
  auto sol = solve_radii(t, PackingBoundary::maximal());
  EXPECT_LT(seconds_since(t0), 1.0);
  EXPECT_LT(sol.residual, 1e-10);
  EXPECT_TRUE(sol.hyperbolic);
}

TEST(SolveRadii, ScalingCovariance) {
  auto t = random_disk(300, 3);
  const int n = t.num_vertices();
  CounterRng rng(5);
  std::vector<double> b(n);
  for (auto& x : b) x = 0.02 + 0.05 * rng.uniform();
  auto s1 = solve_radii(t, PackingBoundary::fixed(b));
  const double lam = 3.7;
  for (auto& x : b) x *= lam;
  auto s2 = solve_radii(t, PackingBoundary::fixed(b));
  for (int v = 0; v < n; ++v) EXPECT_NEAR(s2.radii[v] / s1.radii[v], lam, 1e-12 * lam);
}

TEST(SolveRadii, RejectsBadInput) {
  auto t = hex_flower();
  SolveOptions o;
  o.tol = 1e-3;
  EXPECT_THROW(solve_radii(t, PackingBoundary::maximal(), o), Error);
  o.tol = 1e-15;
  EXPECT_THROW(solve_radii(t, PackingBoundary::maximal(), o), Error);
  std::vector<double> r(7, 1.0);
  r[3] = -1;
  EXPECT_THROW(solve_radii(t, PackingBoundary::fixed(r)), Error);
  Triangulation single(3, {{0, 1, 2}});
  EXPECT_THROW(solve_radii(single, PackingBoundary::maximal()), Error);
}

TEST(Layout, HexFlowerPetalAngles) {
  auto t = hex_flower();
  auto p = pack(t, PackingBoundary::fixed_uniform(7, 1.0), 0);
  EXPECT_NEAR(norm(p.centers[0]), 0, 1e-15);
  const auto& pet = t.petals(0);
  for (int k = 0; k < 6; ++k) {
    Vec2 c = p.centers[pet[k]];
    EXPECT_NEAR(c.x, 2 * std::cos(k * M_PI / 3), 1e-12);
    EXPECT_NEAR(c.y, 2 * std::sin(k * M_PI / 3), 1e-12);
  }
  EXPECT_TRUE(check_packing(p).ok());
}

TEST(Layout, Deterministic) {
  auto t = random_disk(400, 9);
  int root = central_interior(t);
  auto a = pack(t, PackingBoundary::maximal(), root);
  auto b = pack(t, PackingBoundary::maximal(), root);
  EXPECT_EQ(packing_csv(a), packing_csv(b));
}

TEST(Layout, MaximalPackingFillsUnitDisk) {
  auto t = triangular_lattice_patch(6);
  auto p = pack(t, PackingBoundary::maximal(), 0);
  auto c = check_packing(p);
  EXPECT_LT(c.tangency, 1e-8);
  EXPECT_LT(c.angle_sum, 1e-8);
  EXPECT_EQ(c.overlaps, 0);
  EXPECT_NEAR(norm(p.centers[0]), 0, 1e-15);
  for (int v = 0; v < t.num_vertices(); ++v) {
    double out = norm(p.centers[v]) + p.radii[v];
    if (t.is_boundary(v))
      EXPECT_NEAR(out, 1.0, 1e-9);
    else
      EXPECT_LT(out, 1.0);
  }
  // six-fold symmetry of the root flower
  for (int u : t.petals(0)) EXPECT_NEAR(p.radii[u], p.radii[t.petals(0)[0]], 1e-10);
}

TEST(Layout, MaximalDelaunayChecks) {
  auto t = random_disk(2000, 21);
  int root = central_interior(t);
  auto p = pack(t, PackingBoundary::maximal(), root);
  auto c = check_packing(p);
  EXPECT_LT(c.tangency, 1e-8);
  EXPECT_LT(c.angle_sum, 1e-8);
  EXPECT_EQ(c.overlaps, 0);
  // the second placed circle lies on the positive real axis
  Vec2 nb = p.centers[t.petals(root)[0]];
  EXPECT_NEAR(nb.y, 0, 1e-14);
  EXPECT_GT(nb.x, 0);
}

TEST(Layout, RejectsInconsistentRadii) {
  auto t = hex_flower();
  RadiiSolution s;
  s.radii.assign(7, 1.0);
  s.radii[0] = 2.0;
  s.residual = 0;
  EXPECT_THROW(layout(t, s, 0), Error);
  s.radii[0] = 1.0;
  EXPECT_THROW(layout(t, s, 3), Error);  // boundary root
}

TEST(Descartes, Examples) {
  EXPECT_NEAR(descartes_fourth(1, 1, 1, true).radius, 0.154700538, 1e-9);
  auto enc = descartes_fourth(1, 1, 1, false);
  EXPECT_TRUE(enc.enclosing);
  EXPECT_NEAR(enc.radius, 1 + 2 / std::sqrt(3.0), 1e-12);
  EXPECT_NEAR(descartes_fourth(1, kInf, kInf).radius, 1.0, 1e-15);
  auto line = descartes_fourth(1, 1, kInf, false);
  EXPECT_TRUE(line.line);
  auto chain = descartes_chain(5);
  EXPECT_NEAR(chain[5], 1.0 / 12, 1e-15);
  EXPECT_THROW(descartes_fourth(0, 1, 1), Error);
}

TEST(Descartes, FibonacciChain) {
  EXPECT_EQ(fibonacci(1), 1u);
  EXPECT_EQ(fibonacci(10), 55u);
  auto chain = descartes_chain(10);
  for (int d = 3; d <= 10; ++d) {
    double expect = 1.0 / (static_cast<double>(fibonacci(2 * d - 3)) - 1);
    EXPECT_NEAR(chain[d] / chain[0], expect, 1e-12 * expect) << d;
  }
}

TEST(Descartes, MatchesApollonius) {
  CounterRng rng(3);
  for (int i = 0; i < 200; ++i) {
    double r1 = std::exp(3 * rng.uniform() - 1.5), r2 = std::exp(3 * rng.uniform() - 1.5),
           r3 = std::exp(3 * rng.uniform() - 1.5);
    Circle2 A{{0, 0}, r1}, B{{r1 + r2, 0}, r2};
    double al = euclidean_angle(r1, r2, r3);
    Circle2 C{{(r1 + r3) * std::cos(al), (r1 + r3) * std::sin(al)}, r3};
    auto g = inner_tangent_circle(A, B, C);
    ASSERT_TRUE(g.has_value());
    double d = descartes_fourth(r1, r2, r3, true).radius;
    EXPECT_NEAR(g->radius, d, 1e-9 * d);
  }
}

TEST(Descartes, IncirclesOfPackedFaces) {
  auto t = random_disk(300, 4);
  auto p = pack(t, PackingBoundary::maximal(), central_interior(t));
  int checked = 0;
  for (auto f : t.faces()) {
    bool interior = t.is_interior(f[0]) && t.is_interior(f[1]) && t.is_interior(f[2]);
    if (!interior) continue;
    Circle2 a{p.centers[f[0]], p.radii[f[0]]}, b{p.centers[f[1]], p.radii[f[1]]}, c{p.centers[f[2]], p.radii[f[2]]};
    auto g = inner_tangent_circle(a, b, c);
    ASSERT_TRUE(g.has_value());
    double d = descartes_fourth(a.radius, b.radius, c.radius, true).radius;
    EXPECT_NEAR(g->radius, d, 1e-9 * d);
    ++checked;
  }
  EXPECT_GT(checked, 100);
}

TEST(Flower, FibonacciFlowerNoViolations) {
  for (int d = 3; d <= 10; ++d) {
    auto chain = descartes_chain(d);
    std::vector<double> petals;
    for (int j = 1; j <= d; j += 2) petals.push_back(chain[j]);
    for (int j = (d % 2 == 0 ? d : d - 1); j >= 2; j -= 2) petals.push_back(chain[j]);
    auto rep = flower_checks_radii(1.0, petals);
    EXPECT_TRUE(rep.pass()) << d;
    EXPECT_NEAR(rep.bound, 0.01 / (d * d), 1e-18);
  }
}

TEST(Flower, PackedFlowersAndBoundaryError) {
  auto t = random_disk(400, 8);
  auto p = pack(t, PackingBoundary::maximal(), central_interior(t));
  int n = 0;
  for (int v = 0; v < t.num_vertices(); ++v) {
    if (t.is_boundary(v)) {
      EXPECT_THROW(flower_checks(p, v), Error);
      continue;
    }
    EXPECT_TRUE(flower_checks(p, v).pass());
    ++n;
  }
  EXPECT_GT(n, 300);
}

TEST(Stability, TriangularLatticeDifferencesShrink) {
  std::vector<std::pair<Triangulation, int>> tr;
  for (int m : {5, 10, 20}) tr.push_back({triangular_lattice_patch(m), 0});
  auto rep = nested_radii_stability(tr, 2);
  ASSERT_EQ(rep.differences.size(), 2u);
  EXPECT_LT(rep.differences[1], rep.differences[0]);
  EXPECT_EQ(rep.labels.size(), 19u);
}

TEST(Stability, SameTruncationTwiceIsZero) {
  auto t = triangular_lattice_patch(6);
  auto rep = nested_radii_stability({{t, 0}, {t, 0}}, 2);
  EXPECT_EQ(rep.differences[0], 0.0);
}

TEST(Stability, RejectsNonNested) {
  auto a = triangular_lattice_patch(6);
  auto b = random_disk(300, 1);
  EXPECT_THROW(nested_radii_stability({{a, 0}, {b, central_interior(b)}}, 2), Error);
  // ball reaching the boundary
  EXPECT_THROW(nested_radii_stability({{a, 0}, {a, 0}}, 7), Error);
}

TEST(Stability, VoronoiDifferencesHalve) {
  GeneratorSpec spec;
  spec.window = 140;
  spec.seed = 3;
  auto cfg = poisson_voronoi(spec);
  std::vector<std::pair<Triangulation, int>> tr;
  for (double R : {16.0, 32.0, 64.0}) {
    auto d = config_disk_truncation(cfg, {0, 0}, R);
    tr.push_back({d.tri, d.root});
  }
  auto rep = nested_radii_stability(tr, 3);
  ASSERT_EQ(rep.differences.size(), 2u);
  EXPECT_LT(rep.differences[1], 0.5 * rep.differences[0]);
}

TEST(PackingCsv, Format) {
  auto p = pack(hex_flower(), PackingBoundary::fixed_uniform(7, 1.0), 0);
  auto csv = packing_csv(p);
  EXPECT_EQ(csv.substr(0, 13), "id,x,y,r\n0,0,");
}
