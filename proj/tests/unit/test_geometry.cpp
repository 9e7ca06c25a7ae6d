#include <gtest/gtest.h>

#include <cmath>

#include "cellembed/delaunay.hpp"
#include "cellembed/error.hpp"
#include "cellembed/geometry.hpp"
#include "cellembed/rng.hpp"

using namespace cellembed;

TEST(Geometry, PolygonBasics) {
  Polygon sq{{0, 0}, {2, 0}, {2, 2}, {0, 2}};
  EXPECT_DOUBLE_EQ(signed_area(sq), 4.0);
  EXPECT_NEAR(polygon_centroid(sq).x, 1.0, 1e-15);
  EXPECT_TRUE(point_in_polygon(sq, {1, 1}));
  EXPECT_FALSE(point_in_polygon(sq, {3, 1}));
  Polygon c = clip_to_box(sq, {{1, 1}, {5, 5}});
  EXPECT_DOUBLE_EQ(signed_area(c), 1.0);
  EXPECT_DOUBLE_EQ(dist_point_polygon(sq, {4, 1}), 2.0);
  EXPECT_DOUBLE_EQ(dist_point_polygon(sq, {1, 1}), 0.0);
  EXPECT_TRUE(segment_meets_polygon(sq, {-1, 1}, {3, 1}));
  EXPECT_FALSE(segment_meets_polygon(sq, {-1, 3}, {3, 3}));
  Polygon tri{{1, -1}, {3, 1}, {1, 3}};
  EXPECT_NEAR(convex_intersection_area(sq, tri), signed_area(clip_to_box(tri, {{0, 0}, {2, 2}})), 1e-12);
}

TEST(Geometry, RegularPolygonSideAndArea) {
  for (int p = 3; p <= 8; ++p) {
    Polygon q = regular_polygon(p, 1.0, {0.3, -0.2}, 0.1);
    ASSERT_EQ(static_cast<int>(q.size()), p);
    for (int i = 0; i < p; ++i) EXPECT_NEAR(dist(q[i], q[(i + 1) % p]), 1.0, 1e-12);
    EXPECT_NEAR(signed_area(q), p / (4.0 * std::tan(M_PI / p)), 1e-12);
  }
}

TEST(Geometry, CellRegionUnion) {
  CellRegion r(std::vector<Polygon>{{{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {{1, 0}, {2, 0}, {2, 1}, {1, 1}}});
  EXPECT_DOUBLE_EQ(r.area(), 2.0);
  EXPECT_NEAR(r.centroid().x, 1.0, 1e-15);
  EXPECT_NEAR(r.diameter(), std::sqrt(5.0), 1e-15);
  EXPECT_DOUBLE_EQ(r.clipped_area({{0.5, 0}, {1.5, 5}}), 1.0);
  EXPECT_TRUE(r.contains({1.5, 0.5}));
  EXPECT_GE(r.diameter(), std::sqrt(r.area() / M_PI));
  CounterRng rng(3, 0);
  for (int i = 0; i < 100; ++i) EXPECT_TRUE(r.contains(r.sample_uniform(rng)));
}

TEST(Geometry, HausdorffPolylineRegion) {
  CellRegion sq(Polygon{{0, 0}, {1, 0}, {1, 1}, {0, 1}});
  // segment inside: distance is the farthest region vertex from the segment
  double h = hausdorff_polyline_region({{0.5, 0.5}, {0.5, 0.5}}, sq);
  EXPECT_NEAR(h, std::sqrt(0.5), 1e-12);
  double h2 = hausdorff_polyline_region({{0.5, 0.5}, {3.5, 0.5}}, sq);
  EXPECT_NEAR(h2, 2.5, 1e-12);
}

TEST(Rng, DeterministicAndOrderIndependent) {
  CounterRng a(7, 3), b(7, 3), c(7, 4);
  for (int i = 0; i < 10; ++i) {
    auto x = a.next_u64();
    EXPECT_EQ(x, b.next_u64());
    EXPECT_NE(x, c.next_u64());
  }
  CounterRng d({1, 2, 3}), e({1, 2, 3}), f({1, 3, 2});
  EXPECT_EQ(d.next_u64(), e.next_u64());
  EXPECT_NE(CounterRng({1, 2, 3}).next_u64(), f.next_u64());
  CounterRng u(11, 0);
  double s = 0, s2 = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    double x = u.uniform();
    ASSERT_GE(x, 0.0);
    ASSERT_LT(x, 1.0);
    s += x;
    s2 += x * x;
  }
  EXPECT_NEAR(s / n, 0.5, 4 * std::sqrt(1.0 / 12 / n));
  CounterRng p(12, 0);
  double ps = 0;
  for (int i = 0; i < n; ++i) ps += static_cast<double>(p.poisson(2.5));
  EXPECT_NEAR(ps / n, 2.5, 4 * std::sqrt(2.5 / n));
  CounterRng q(13, 0);
  int counts[5] = {0, 0, 0, 0, 0};
  for (int i = 0; i < 50000; ++i) counts[q.below(5)]++;
  for (int k = 0; k < 5; ++k) EXPECT_NEAR(counts[k], 10000, 500);
}

namespace {
bool is_delaunay(const DelaunayResult& D) {
  for (auto& t : D.triangles) {
    if (orient(D.points[t[0]], D.points[t[1]], D.points[t[2]]) <= 0) return false;
    for (size_t p = 0; p < D.points.size(); ++p) {
      if (static_cast<int>(p) == t[0] || static_cast<int>(p) == t[1] || static_cast<int>(p) == t[2]) continue;
      if (incircle(D.points[t[0]], D.points[t[1]], D.points[t[2]], D.points[p]) > 1e-9) return false;
    }
  }
  return true;
}
}  // namespace

TEST(Delaunay, RandomPointsEmptyCircumcircles) {
  CounterRng rng(5, 1);
  std::vector<Vec2> pts;
  for (int i = 0; i < 400; ++i) pts.push_back({rng.uniform(0, 10), rng.uniform(0, 10)});
  auto D = delaunay_triangulate(pts);
  EXPECT_TRUE(is_delaunay(D));
  int hull = 0;
  for (char c : D.on_hull) hull += c;
  // Euler: T = 2n - 2 - h
  EXPECT_EQ(static_cast<int>(D.triangles.size()), 2 * 400 - 2 - hull);
  for (int v = 0; v < 400; ++v) {
    const auto& st = D.star[v];
    for (size_t k = 0; k + 1 < st.size(); ++k) {
      // consecutive star triangles share an edge at v
      auto& a = D.triangles[st[k]];
      auto& b = D.triangles[st[k + 1]];
      int shared = 0;
      for (int x : a)
        for (int y : b)
          if (x == y && x != v) ++shared;
      EXPECT_EQ(shared, 1);
    }
  }
}

TEST(Delaunay, CocircularGridStaysValid) {
  std::vector<Vec2> pts;
  for (int i = 0; i < 12; ++i)
    for (int j = 0; j < 12; ++j) pts.push_back({double(i), double(j)});
  auto D = delaunay_triangulate(pts);
  EXPECT_EQ(D.triangles.size(), 2u * 11 * 11);
  EXPECT_TRUE(is_delaunay(D));
}

TEST(Delaunay, Degenerate) {
  EXPECT_THROW(delaunay_triangulate({{0, 0}, {1, 1}}), Error);
  EXPECT_THROW(delaunay_triangulate({{0, 0}, {0, 0}, {1, 0}}), Error);
}

TEST(Delaunay, CircumcenterCanonical) {
  Vec2 a{0.1, 0.2}, b{3.3, 0.7}, c{1.9, 4.1};
  Vec2 o1 = circumcenter(a, b, c), o2 = circumcenter(c, a, b), o3 = circumcenter(b, a, c);
  EXPECT_EQ(o1.x, o2.x);
  EXPECT_EQ(o1.y, o3.y);
  EXPECT_NEAR(dist(o1, a), dist(o1, b), 1e-12);
  EXPECT_NEAR(dist(o1, a), dist(o1, c), 1e-12);
}
