#pragma once

#include <array>
#include <cmath>
#include <vector>

namespace cellembed {

class CounterRng;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2() = default;
  constexpr Vec2(double x_, double y_) : x(x_), y(y_) {}

  Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
  Vec2 operator-() const { return {-x, -y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
  Vec2 operator/(double s) const { return {x / s, y / s}; }
  Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
  Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }
  Vec2& operator*=(double s) { x *= s; y *= s; return *this; }
  bool operator==(const Vec2& o) const { return x == o.x && y == o.y; }
  bool operator!=(const Vec2& o) const { return !(*this == o); }
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }
inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
inline double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Vec2& a) { return std::hypot(a.x, a.y); }
inline double norm2(const Vec2& a) { return a.x * a.x + a.y * a.y; }
inline double dist(const Vec2& a, const Vec2& b) { return norm(a - b); }
inline Vec2 rotate(const Vec2& v, double ang) {
  double c = std::cos(ang), s = std::sin(ang);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}
inline double orient(const Vec2& a, const Vec2& b, const Vec2& c) { return cross(b - a, c - a); }

// axis-parallel box [lo.x,hi.x] x [lo.y,hi.y]
struct Box {
  Vec2 lo;
  Vec2 hi;

  static Box centered(const Vec2& c, double side) {
    return {{c.x - side / 2, c.y - side / 2}, {c.x + side / 2, c.y + side / 2}};
  }
  double width() const { return hi.x - lo.x; }
  double height() const { return hi.y - lo.y; }
  double area() const { return width() * height(); }
  Vec2 center() const { return (lo + hi) * 0.5; }
  bool contains(const Vec2& p) const { return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y; }
  bool contains(const Box& b) const { return b.lo.x >= lo.x && b.hi.x <= hi.x && b.lo.y >= lo.y && b.hi.y <= hi.y; }
  bool intersects(const Box& b) const {
    return !(b.hi.x < lo.x || b.lo.x > hi.x || b.hi.y < lo.y || b.lo.y > hi.y);
  }
  Box inflated(double d) const { return {{lo.x - d, lo.y - d}, {hi.x + d, hi.y + d}}; }
  Box translated(const Vec2& t) const { return {lo + t, hi + t}; }
};

using Polygon = std::vector<Vec2>;

double signed_area(const Polygon& poly);
Vec2 polygon_centroid(const Polygon& poly);
bool point_in_polygon(const Polygon& poly, const Vec2& p);
Polygon clip_to_box(const Polygon& poly, const Box& box);
Box polygon_bbox(const Polygon& poly);
double dist_point_segment(const Vec2& p, const Vec2& a, const Vec2& b);
bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d);
double dist_point_polygon(const Polygon& poly, const Vec2& p);  // 0 inside
bool segment_meets_polygon(const Polygon& poly, const Vec2& a, const Vec2& b);
// area of the intersection of two convex polygons
double convex_intersection_area(const Polygon& a, const Polygon& b);
Polygon convex_hull(std::vector<Vec2> pts);
Polygon regular_polygon(int p, double side, const Vec2& center, double phase);

// A cell region: union of simple polygons with disjoint interiors, each CCW.
class CellRegion {
 public:
  CellRegion() = default;
  explicit CellRegion(Polygon poly);
  explicit CellRegion(std::vector<Polygon> pieces);

  const std::vector<Polygon>& pieces() const { return pieces_; }
  double area() const { return area_; }
  Vec2 centroid() const { return centroid_; }
  double diameter() const { return diameter_; }
  const Box& bbox() const { return bbox_; }

  bool contains(const Vec2& p) const;
  double distance(const Vec2& p) const;
  double clipped_area(const Box& box) const;
  bool meets_box(const Box& box) const;
  bool meets_segment(const Vec2& a, const Vec2& b) const;
  std::vector<Vec2> vertices() const;
  Vec2 sample_uniform(CounterRng& rng) const;
  CellRegion translated(const Vec2& t) const;

 private:
  void recompute();
  std::vector<Polygon> pieces_;
  double area_ = 0.0;
  Vec2 centroid_;
  double diameter_ = 0.0;
  Box bbox_;
};

// Hausdorff distance between a polyline and a region; exact on region vertices,
// the polyline side is sampled with `samples` points per segment.
double hausdorff_polyline_region(const std::vector<Vec2>& curve, const CellRegion& region, int samples = 64);

}  // namespace cellembed
