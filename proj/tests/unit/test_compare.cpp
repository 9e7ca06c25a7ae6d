#include <gtest/gtest.h>

#include <cmath>

#include "cellembed/compare.hpp"
#include "cellembed/error.hpp"
#include "cellembed/generators.hpp"

using namespace cellembed;

namespace {

// hexagonal cells with the exact lattice packing (centers at the sites)
struct LatticeCase {
  CellConfiguration config;
  CirclePacking packing;
  std::vector<int> original;
  double spacing = 0;
};

LatticeCase lattice_case(double window) {
  LatticeCase c;
  c.config = lattice_config(GeneratorKind::TriangularLattice, window);
  const auto& sites = c.config.sites();
  int a = *c.config.cell_containing({0.01, 0.01});
  c.spacing = 1e300;
  for (int b : c.config.map().neighbors(a)) c.spacing = std::min(c.spacing, dist(sites[a], sites[b]));
  for (int h = 0; h < c.config.num_cells(); ++h) {
    // similarity: scale 1/10 and a quarter turn
    c.packing.centers.push_back(rotate(sites[h] * 0.1, M_PI / 2));
    c.packing.radii.push_back(0.05 * c.spacing);
    c.original.push_back(h);
  }
  return c;
}

}  // namespace

TEST(Trend, Verdicts) {
  auto t = trend_verdict({0.4, 0.3, 0.2, 0.1});
  EXPECT_TRUE(t.decreasing);
  EXPECT_DOUBLE_EQ(t.ratio, 0.25);
  EXPECT_TRUE(t.pass);
  auto u = trend_verdict({0.4, 0.3, 0.35, 0.1});
  EXPECT_FALSE(u.decreasing);
  EXPECT_FALSE(u.pass);
  auto v = trend_verdict({0.4, 0.3, 0.25});
  EXPECT_TRUE(v.decreasing);
  EXPECT_FALSE(v.pass);
}

TEST(ComparePacking, LatticeIsItsOwnPacking) {
  auto c = lattice_case(150);
  auto rep = compare_packing(c.config, c.packing, c.original, {8, 16, 32, 64});
  for (double v : rep.vertex_metric) EXPECT_LT(v, 1e-10);
  EXPECT_NEAR(rep.gauge.scale, 10.0, 1e-9);
  EXPECT_NEAR(rep.gauge.theta, 1.5 * M_PI, 1e-9);
  EXPECT_GT(rep.calibration_pairs, 10);
  EXPECT_GT(rep.cells.back(), rep.cells.front());
  // mis-rotation by 10 degrees: every cell center at distance |c| is off by 2 sin(5 deg) |c|
  auto mis = compare_packing(c.config, c.packing, c.original, {8, 16, 32, 64}, {}, rotated_gauge(rep.gauge, M_PI / 18));
  for (size_t i = 0; i < mis.radii.size(); ++i) {
    EXPECT_GT(mis.vertex_metric[i], rep.vertex_metric[i]);
    EXPECT_GT(mis.vertex_metric[i], 2 * std::sin(M_PI / 36) * 0.9);
  }
  EXPECT_FALSE(mis.gauge_fitted);
  EXPECT_EQ(rep.text(), compare_packing(c.config, c.packing, c.original, {8, 16, 32, 64}).text());
}

TEST(ComparePacking, Errors) {
  auto c = lattice_case(60);
  EXPECT_THROW(compare_packing(c.config, c.packing, c.original, {6, 16}), Error);   // overlaps calibration
  EXPECT_THROW(compare_packing(c.config, c.packing, c.original, {16, 8}), Error);   // not increasing
  EXPECT_THROW(compare_packing(c.config, c.packing, c.original, {}), Error);
  // drop the packing to cells near the origin: B(0;16) is not covered
  CirclePacking small;
  std::vector<int> orig;
  for (int h = 0; h < c.config.num_cells(); ++h)
    if (norm(c.config.cell(h).centroid()) < 10) {
      small.centers.push_back(c.packing.centers[h]);
      small.radii.push_back(c.packing.radii[h]);
      orig.push_back(h);
    }
  EXPECT_NO_THROW(compare_packing(c.config, small, orig, {8}));
  EXPECT_THROW(compare_packing(c.config, small, orig, {8, 16}), Error);
}

TEST(CompareUniformization, FlatLatticeAffineMap) {
  auto config = lattice_config(GeneratorKind::TriangularLattice, 100);
  auto s = surface_from_config(config);
  auto p = build_M_S(config, s, Box{{-40, -40}, {40, 40}});
  ASSERT_FALSE(p.empty()) << p.diagnostic;
  auto sub = share(subdivide(s, p, 2));
  std::vector<Vec2> vv(s.num_vertices);
  for (int v = 0; v < s.num_vertices; ++v) vv[v] = rotate(config.sites()[v] * 0.25, 0.3);
  auto map = lift_vertex_values(s, sub, vv, "developing map");
  auto rep = compare_uniformization(config, s, p, map, {}, {8, 16, 32});
  for (double v : rep.vertex_metric) EXPECT_LT(v, 1e-10);
  double spacing = 4 * norm(map.vertex_value(s.faces[p.faces[0]][0]) - map.vertex_value(s.faces[p.faces[0]][1]));
  for (size_t i = 0; i < rep.radii.size(); ++i) {
    EXPECT_NEAR(rep.edge_metric[i], spacing / rep.radii[i], 1e-9);
    EXPECT_GE(rep.edge_metric[i], 0.0);
    EXPECT_LE(rep.edge_metric[i], 2 * rep.max_face_diameter / rep.radii[i]);
  }
  EXPECT_TRUE(rep.edge_trend.pass);
  EXPECT_NE(rep.csv().find("edge_metric"), std::string::npos);
}

TEST(CompareUniformization, ConformalMapOfLatticeDisk) {
  auto config = lattice_config(GeneratorKind::TriangularLattice, 90);
  auto tr = config_disk_truncation(config, {0.01, 0.01}, 40);
  auto s = build_surface(tr.tri);
  auto p = whole_portion(s, tr.root);
  auto m = uniformize_approx(s, p, 2);
  auto rep = compare_uniformization(config, s, p, as_plmap(m), tr.original, {8, 16});
  EXPECT_LT(rep.vertex_metric.back(), 0.05);
  for (size_t i = 0; i < rep.radii.size(); ++i) EXPECT_LE(rep.edge_metric[i], 2 * rep.max_face_diameter / rep.radii[i]);
  EXPECT_LT((rep.gauge.A - Mat2::Identity()).norm(), 0.02);
  // disks beyond the truncation are not covered
  EXPECT_THROW(compare_uniformization(config, s, p, as_plmap(m), tr.original, {8, 60}), Error);
}

TEST(CovarianceGauge, MatrixAlgebra) {
  auto id = covariance_gauge(Mat2::Identity() * 3.0);
  EXPECT_LT((id.A - Mat2::Identity()).norm(), 1e-14);
  Mat2 s;
  s << 4, 0, 0, 1;
  auto d = covariance_gauge(s);
  EXPECT_NEAR(d.A(0, 0), 1 / std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(d.A(1, 1), std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(d.A.determinant(), 1.0, 1e-12);
  // whitening: A Sigma A^T is a multiple of the identity
  Mat2 t;
  t << 2, 0.7, 0.7, 1;
  auto g = covariance_gauge(t);
  Mat2 w = g.A * t * g.A.transpose();
  EXPECT_NEAR(w(0, 1), 0.0, 1e-12);
  EXPECT_NEAR(w(0, 0), w(1, 1), 1e-12);
  Mat2 bad;
  bad << 1, 2, 2, 1;
  EXPECT_THROW(covariance_gauge(bad), Error);
  Mat2 asym;
  asym << 1, 0.5, 0, 1;
  EXPECT_THROW(covariance_gauge(asym), Error);
  WalkReport rep;
  rep.sigma = {4, 0, 0, 1};
  EXPECT_NEAR(covariance_gauge(rep).A(1, 1), std::sqrt(2.0), 1e-14);
}
