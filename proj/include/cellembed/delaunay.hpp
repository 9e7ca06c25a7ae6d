#pragma once

#include <array>
#include <vector>

#include "cellembed/geometry.hpp"

namespace cellembed {

struct DelaunayResult {
  std::vector<Vec2> points;
  std::vector<std::array<int, 3>> triangles;  // CCW, real vertices only
  std::vector<char> on_hull;                  // vertex touches the unbounded region
  // per vertex: incident triangles in CCW order (indices into triangles); open fans for hull vertices
  std::vector<std::vector<int>> star;
};

// Incremental Bowyer-Watson. Exact-zero incircle ties are broken by a fixed
// symbolic rule (treated as outside), so cocircular input still yields a
// valid triangulation.
DelaunayResult delaunay_triangulate(const std::vector<Vec2>& points);

Vec2 circumcenter(const Vec2& a, const Vec2& b, const Vec2& c);
double incircle(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d);

}  // namespace cellembed
