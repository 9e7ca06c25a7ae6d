#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "cellembed/error.hpp"
#include "cellembed/generators.hpp"
#include "cellembed/rng.hpp"

using namespace cellembed;

namespace {
GeneratorSpec pv(std::uint64_t seed, double window, double buffer = -1) {
  GeneratorSpec s;
  s.kind = GeneratorKind::PoissonVoronoi;
  s.seed = seed;
  s.window = window;
  s.buffer = buffer;
  return s;
}
GeneratorSpec hex(std::uint64_t seed, double window, double p, bool collapse) {
  GeneratorSpec s;
  s.kind = GeneratorKind::HexPercolation;
  s.seed = seed;
  s.window = window;
  s.percolation_p = p;
  s.collapse = collapse;
  return s;
}
}  // namespace

TEST(PoissonVoronoi, CountAndMeanArea) {
  auto cfg = poisson_voronoi(pv(1, 64));
  Box w = Box::centered({0, 0}, 64);
  int n = 0;
  double area = 0;
  for (int i = 0; i < cfg.num_cells(); ++i)
    if (w.contains(cfg.sites()[i])) {
      ++n;
      area += cfg.cell(i).area();
    }
  EXPECT_NEAR(n, 4096, 3 * 64);
  EXPECT_NEAR(area / n, 1.0, 0.05);
  auto v = cfg.validate();
  EXPECT_TRUE(v.ok) << (v.problems.empty() ? "" : v.problems[0]);
  EXPECT_TRUE(cfg.map().validate().type_iii);
}

TEST(PoissonVoronoi, MeanDegreeSix) {
  double sum = 0;
  int n = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto cfg = poisson_voronoi(pv(seed, 64));
    Box w = Box::centered({0, 0}, 64);
    for (int i = 0; i < cfg.num_cells(); ++i)
      if (w.contains(cfg.sites()[i])) {
        sum += cfg.degree(i);
        ++n;
      }
  }
  EXPECT_NEAR(sum / n, 6.0, 0.06);
}

TEST(PoissonVoronoi, Deterministic) {
  auto a = poisson_voronoi(pv(9, 24)).serialize();
  auto b = poisson_voronoi(pv(9, 24)).serialize();
  EXPECT_EQ(a, b);
  EXPECT_NE(a, poisson_voronoi(pv(10, 24)).serialize());
}

TEST(PoissonVoronoi, AdjacencyIffSharedEdge) {
  auto cfg = poisson_voronoi(pv(4, 16));
  const auto& m = cfg.map();
  for (int i = 0; i < cfg.num_cells(); ++i) {
    if (!cfg.cell(i).meets_box(cfg.carrier())) continue;
    auto nb = m.neighbors(i);
    std::set<int> nbs(nb.begin(), nb.end());
    for (int j : cfg.cells_meeting(cfg.cell(i).bbox())) {
      if (j == i) continue;
      // shared Voronoi edge = two common polygon vertices
      int common = 0;
      for (auto& p : cfg.cell(i).vertices())
        for (auto& q : cfg.cell(j).vertices())
          if (dist(p, q) < 1e-9) ++common;
      EXPECT_EQ(common >= 2, nbs.count(j) > 0) << i << " " << j;
    }
  }
}

TEST(PoissonVoronoi, BufferEnlargementIsBitExact) {
  auto a = poisson_voronoi(pv(21, 12, 10));
  auto b = poisson_voronoi(pv(21, 12, 16));
  Box w = Box::centered({0, 0}, 12);
  std::map<std::pair<double, double>, int> ib;
  for (int j = 0; j < b.num_cells(); ++j) ib[{b.sites()[j].x, b.sites()[j].y}] = j;
  for (int i = 0; i < a.num_cells(); ++i) {
    if (!a.cell(i).meets_box(w)) continue;
    auto it = ib.find({a.sites()[i].x, a.sites()[i].y});
    ASSERT_NE(it, ib.end());
    const auto& pa = a.cell(i).pieces()[0];
    const auto& pb = b.cell(it->second).pieces()[0];
    ASSERT_EQ(pa.size(), pb.size());
    for (size_t k = 0; k < pa.size(); ++k) {
      EXPECT_EQ(pa[k].x, pb[k].x);
      EXPECT_EQ(pa[k].y, pb[k].y);
    }
    EXPECT_EQ(a.cell(i).area(), b.cell(it->second).area());
  }
}

TEST(PoissonVoronoi, LineConnectivity) {
  auto cfg = poisson_voronoi(pv(2, 32));
  CounterRng rng(99, 0);
  for (int k = 0; k < 40; ++k) {
    double len = rng.uniform(3.2, 30);
    double x = rng.uniform(-16, 16 - len), y = rng.uniform(-16, 16);
    Vec2 a = k % 2 ? Vec2{x, y} : Vec2{y, x};
    Vec2 b = k % 2 ? Vec2{x + len, y} : Vec2{y, x + len};
    auto lc = line_connectivity_check(cfg, a, b);
    EXPECT_TRUE(lc.connected);
    EXPECT_EQ(lc.components, 1);
  }
}

TEST(PoissonVoronoi, RejectsBadSpec) {
  auto s = pv(1, 16);
  s.intensity = 0;
  EXPECT_THROW(poisson_voronoi(s), Error);
  auto t = pv(1, 16, 1.0);
  EXPECT_THROW(poisson_voronoi(t), Error);
}

TEST(HexPercolation, ZeroIsTriangularLattice) {
  auto cfg = hex_percolation(hex(3, 10, 0.0, false));
  auto d = cfg.map().validate();
  EXPECT_TRUE(d.type_iii);
  EXPECT_EQ(d.face_degree_histogram.size(), 1u);
  for (int i = 0; i < cfg.num_cells(); ++i) {
    EXPECT_EQ(cfg.cell(i).pieces().size(), 1u);
    EXPECT_NEAR(cfg.cell(i).area(), std::sqrt(3.0) / 2, 1e-12);
    if (!cfg.map().is_boundary_vertex(i)) EXPECT_EQ(cfg.degree(i), 6);
  }
}

TEST(HexPercolation, CollapseGivesSimpleTriangulation) {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    auto cfg = hex_percolation(hex(seed, 24, 0.25, true));
    auto d = cfg.map().validate();
    EXPECT_TRUE(d.type_iii) << seed;
    EXPECT_EQ(d.face_degree_histogram.size(), 1u) << seed;
    EXPECT_EQ(d.face_degree_histogram.begin()->first, 3) << seed;
    EXPECT_TRUE(cfg.validate().ok);
  }
}

TEST(HexPercolation, MultiEdgesWithoutCollapse) {
  int multi = 0;
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    auto cfg = hex_percolation(hex(seed, 24, 0.25, false));
    auto d = cfg.map().validate();
    EXPECT_TRUE(d.type_ii);
    multi += d.multi_edges;
    EXPECT_TRUE(cfg.validate().ok);
  }
  EXPECT_GT(multi, 0);
}

TEST(HexPercolation, ClusterDiameterGrowsSlowly) {
  auto mean_max = [](double window) {
    double s = 0;
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
      auto cfg = hex_percolation(hex(seed, window, 0.2, false));
      double m = 0;
      for (int i = 0; i < cfg.num_cells(); ++i)
        if (cfg.carrier().contains(cfg.cell(i).centroid())) m = std::max(m, cfg.cell(i).diameter());
      s += m;
    }
    return s / 50;
  };
  double d16 = mean_max(16), d64 = mean_max(64);
  // log growth: quadrupling the window adds O(log 16) to the maximum, far from the 4x of linear growth
  EXPECT_GT(d64, d16);
  EXPECT_LT(d64 / d16, 2.0);
}

TEST(HexPercolation, RejectsSupercritical) {
  EXPECT_THROW(hex_percolation(hex(1, 16, 0.5, false)), Error);
}

TEST(Lattice, TriangularInteriorDegreeSix) {
  auto cfg = lattice_config(GeneratorKind::TriangularLattice, 10);
  for (int i = 0; i < cfg.num_cells(); ++i)
    if (!cfg.map().is_boundary_vertex(i)) EXPECT_EQ(cfg.degree(i), 6);
  EXPECT_TRUE(cfg.cell_containing({0, 0}).has_value());
  EXPECT_NEAR(norm(cfg.cell(*cfg.cell_containing({0, 0})).centroid()), 0.0, 1e-12);
}

TEST(Lattice, SquareCells) {
  auto cfg = lattice_config(GeneratorKind::SquareLattice, 8);
  EXPECT_TRUE(cfg.validate().ok);
  for (int i = 0; i < cfg.num_cells(); ++i) {
    EXPECT_DOUBLE_EQ(cfg.cell(i).area(), 1.0);
    if (!cfg.map().is_boundary_vertex(i)) EXPECT_EQ(cfg.degree(i), 4);
  }
}

TEST(Truncation, ConfigDiskTruncation) {
  auto cfg = poisson_voronoi(pv(5, 32));
  auto dt = config_disk_truncation(cfg, {0, 0}, 10);
  EXPECT_TRUE(dt.tri.is_interior(dt.root));
  EXPECT_TRUE(cfg.cell(dt.original[dt.root]).contains({0, 0}));
  EXPECT_GT(dt.tri.num_vertices(), 250);
  EXPECT_LT(dt.tri.num_vertices(), 400);
}
