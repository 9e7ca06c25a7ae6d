#include "cellembed/geometry.hpp"

#include <algorithm>
#include <limits>

#include "cellembed/error.hpp"
#include "cellembed/rng.hpp"

namespace cellembed {

const char* error_kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::InvalidInput: return "invalid input";
    case ErrorKind::InconsistentRotation: return "inconsistent rotation";
    case ErrorKind::Structural: return "structural error";
    case ErrorKind::InsufficientWindow: return "insufficient window";
    case ErrorKind::Carrier: return "carrier violation";
    case ErrorKind::NonConvergence: return "non-convergence";
    case ErrorKind::DomainTooSmall: return "domain too small";
    case ErrorKind::Degenerate: return "degenerate input";
    case ErrorKind::SizeCap: return "size cap exceeded";
    case ErrorKind::Usage: return "usage error";
  }
  return "error";
}

double signed_area(const Polygon& poly) {
  double a = 0.0;
  size_t n = poly.size();
  for (size_t i = 0; i < n; ++i) a += cross(poly[i], poly[(i + 1) % n]);
  return 0.5 * a;
}

Vec2 polygon_centroid(const Polygon& poly) {
  // shift to the first vertex for conditioning
  if (poly.empty()) return {};
  Vec2 o = poly[0];
  double a = 0.0, cx = 0.0, cy = 0.0;
  size_t n = poly.size();
  for (size_t i = 0; i < n; ++i) {
    Vec2 p = poly[i] - o, q = poly[(i + 1) % n] - o;
    double c = cross(p, q);
    a += c;
    cx += (p.x + q.x) * c;
    cy += (p.y + q.y) * c;
  }
  if (a == 0.0) {
    Vec2 s;
    for (auto& p : poly) s += p;
    return s / static_cast<double>(n);
  }
  return o + Vec2{cx / (3.0 * a), cy / (3.0 * a)};
}

bool point_in_polygon(const Polygon& poly, const Vec2& p) {
  bool in = false;
  size_t n = poly.size();
  for (size_t i = 0, j = n - 1; i < n; j = i++) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      double xi = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < xi) in = !in;
    }
  }
  return in;
}

namespace {

template <class Inside, class Cut>
Polygon clip_half(const Polygon& in, Inside inside, Cut cut) {
  Polygon out;
  size_t n = in.size();
  if (n == 0) return out;
  out.reserve(n + 2);
  for (size_t i = 0; i < n; ++i) {
    const Vec2& cur = in[i];
    const Vec2& prev = in[(i + n - 1) % n];
    bool ci = inside(cur), pi = inside(prev);
    if (ci) {
      if (!pi) out.push_back(cut(prev, cur));
      out.push_back(cur);
    } else if (pi) {
      out.push_back(cut(prev, cur));
    }
  }
  return out;
}

}  // namespace

Polygon clip_to_box(const Polygon& poly, const Box& box) {
  Polygon p = poly;
  auto cut_x = [](double x) {
    return [x](const Vec2& a, const Vec2& b) {
      double t = (x - a.x) / (b.x - a.x);
      return Vec2{x, a.y + t * (b.y - a.y)};
    };
  };
  auto cut_y = [](double y) {
    return [y](const Vec2& a, const Vec2& b) {
      double t = (y - a.y) / (b.y - a.y);
      return Vec2{a.x + t * (b.x - a.x), y};
    };
  };
  p = clip_half(p, [&](const Vec2& v) { return v.x >= box.lo.x; }, cut_x(box.lo.x));
  p = clip_half(p, [&](const Vec2& v) { return v.x <= box.hi.x; }, cut_x(box.hi.x));
  p = clip_half(p, [&](const Vec2& v) { return v.y >= box.lo.y; }, cut_y(box.lo.y));
  p = clip_half(p, [&](const Vec2& v) { return v.y <= box.hi.y; }, cut_y(box.hi.y));
  return p;
}

Box polygon_bbox(const Polygon& poly) {
  Box b{{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()},
        {-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()}};
  for (auto& p : poly) {
    b.lo.x = std::min(b.lo.x, p.x);
    b.lo.y = std::min(b.lo.y, p.y);
    b.hi.x = std::max(b.hi.x, p.x);
    b.hi.y = std::max(b.hi.y, p.y);
  }
  return b;
}

double dist_point_segment(const Vec2& p, const Vec2& a, const Vec2& b) {
  Vec2 d = b - a;
  double l2 = norm2(d);
  if (l2 == 0.0) return dist(p, a);
  double t = std::clamp(dot(p - a, d) / l2, 0.0, 1.0);
  return dist(p, a + d * t);
}

bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  double d1 = orient(c, d, a), d2 = orient(c, d, b);
  double d3 = orient(a, b, c), d4 = orient(a, b, d);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) return true;
  auto on = [](const Vec2& p, const Vec2& q, const Vec2& r) {
    return std::min(p.x, q.x) <= r.x && r.x <= std::max(p.x, q.x) && std::min(p.y, q.y) <= r.y &&
           r.y <= std::max(p.y, q.y);
  };
  if (d1 == 0 && on(c, d, a)) return true;
  if (d2 == 0 && on(c, d, b)) return true;
  if (d3 == 0 && on(a, b, c)) return true;
  if (d4 == 0 && on(a, b, d)) return true;
  return false;
}

double dist_point_polygon(const Polygon& poly, const Vec2& p) {
  if (point_in_polygon(poly, p)) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  size_t n = poly.size();
  for (size_t i = 0; i < n; ++i) best = std::min(best, dist_point_segment(p, poly[i], poly[(i + 1) % n]));
  return best;
}

bool segment_meets_polygon(const Polygon& poly, const Vec2& a, const Vec2& b) {
  if (point_in_polygon(poly, a) || point_in_polygon(poly, b)) return true;
  size_t n = poly.size();
  for (size_t i = 0; i < n; ++i)
    if (segments_intersect(a, b, poly[i], poly[(i + 1) % n])) return true;
  return false;
}

double convex_intersection_area(const Polygon& a, const Polygon& b) {
  // clip a against each edge of b (b convex, CCW)
  Polygon p = a;
  size_t n = b.size();
  for (size_t i = 0; i < n && !p.empty(); ++i) {
    Vec2 e0 = b[i], e1 = b[(i + 1) % n];
    p = clip_half(
        p, [&](const Vec2& v) { return orient(e0, e1, v) >= 0; },
        [&](const Vec2& s, const Vec2& t) {
          double ds = orient(e0, e1, s), dt = orient(e0, e1, t);
          double u = ds / (ds - dt);
          return s + (t - s) * u;
        });
  }
  return p.size() < 3 ? 0.0 : std::abs(signed_area(p));
}

Polygon convex_hull(std::vector<Vec2> pts) {
  std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) { return a.x < b.x || (a.x == b.x && a.y < b.y); });
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;
  Polygon h(2 * pts.size());
  size_t k = 0;
  for (size_t i = 0; i < pts.size(); ++i) {
    while (k >= 2 && orient(h[k - 2], h[k - 1], pts[i]) <= 0) --k;
    h[k++] = pts[i];
  }
  for (size_t i = pts.size() - 1, t = k + 1; i > 0; --i) {
    while (k >= t && orient(h[k - 2], h[k - 1], pts[i - 1]) <= 0) --k;
    h[k++] = pts[i - 1];
  }
  h.resize(k - 1);
  return h;
}

Polygon regular_polygon(int p, double side, const Vec2& center, double phase) {
  double R = side / (2.0 * std::sin(M_PI / p));
  Polygon poly;
  for (int i = 0; i < p; ++i) {
    double t = phase + 2.0 * M_PI * i / p;
    poly.push_back(center + Vec2{R * std::cos(t), R * std::sin(t)});
  }
  return poly;
}

CellRegion::CellRegion(Polygon poly) { pieces_.push_back(std::move(poly)); recompute(); }

CellRegion::CellRegion(std::vector<Polygon> pieces) : pieces_(std::move(pieces)) { recompute(); }

void CellRegion::recompute() {
  area_ = 0.0;
  Vec2 m;
  bbox_ = {{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()},
           {-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()}};
  for (auto& p : pieces_) {
    if (signed_area(p) < 0) std::reverse(p.begin(), p.end());
    double a = signed_area(p);
    area_ += a;
    m += polygon_centroid(p) * a;
    Box b = polygon_bbox(p);
    bbox_.lo.x = std::min(bbox_.lo.x, b.lo.x);
    bbox_.lo.y = std::min(bbox_.lo.y, b.lo.y);
    bbox_.hi.x = std::max(bbox_.hi.x, b.hi.x);
    bbox_.hi.y = std::max(bbox_.hi.y, b.hi.y);
  }
  centroid_ = area_ > 0 ? m / area_ : bbox_.center();
  // the diameter of a polygon union is attained between vertices
  std::vector<Vec2> v = vertices();
  Polygon hull = convex_hull(v);
  diameter_ = 0.0;
  for (size_t i = 0; i < hull.size(); ++i)
    for (size_t j = i + 1; j < hull.size(); ++j) diameter_ = std::max(diameter_, dist(hull[i], hull[j]));
}

bool CellRegion::contains(const Vec2& p) const {
  if (!bbox_.contains(p)) return false;
  for (auto& poly : pieces_)
    if (point_in_polygon(poly, p)) return true;
  return false;
}

double CellRegion::distance(const Vec2& p) const {
  double best = std::numeric_limits<double>::infinity();
  for (auto& poly : pieces_) best = std::min(best, dist_point_polygon(poly, p));
  return best;
}

double CellRegion::clipped_area(const Box& box) const {
  if (box.contains(bbox_)) return area_;
  if (!box.intersects(bbox_)) return 0.0;
  double a = 0.0;
  for (auto& poly : pieces_) {
    Polygon c = clip_to_box(poly, box);
    if (c.size() >= 3) a += std::abs(signed_area(c));
  }
  return a;
}

bool CellRegion::meets_box(const Box& box) const {
  if (!box.intersects(bbox_)) return false;
  if (box.contains(bbox_)) return true;
  for (auto& poly : pieces_) {
    for (auto& v : poly)
      if (box.contains(v)) return true;
    Vec2 c[4] = {box.lo, {box.hi.x, box.lo.y}, box.hi, {box.lo.x, box.hi.y}};
    for (int i = 0; i < 4; ++i)
      if (point_in_polygon(poly, c[i])) return true;
    for (int i = 0; i < 4; ++i)
      for (size_t j = 0; j < poly.size(); ++j)
        if (segments_intersect(c[i], c[(i + 1) % 4], poly[j], poly[(j + 1) % poly.size()])) return true;
  }
  return false;
}

bool CellRegion::meets_segment(const Vec2& a, const Vec2& b) const {
  Box sb{{std::min(a.x, b.x), std::min(a.y, b.y)}, {std::max(a.x, b.x), std::max(a.y, b.y)}};
  if (!sb.intersects(bbox_)) return false;
  for (auto& poly : pieces_)
    if (segment_meets_polygon(poly, a, b)) return true;
  return false;
}

std::vector<Vec2> CellRegion::vertices() const {
  std::vector<Vec2> v;
  for (auto& p : pieces_) v.insert(v.end(), p.begin(), p.end());
  return v;
}

Vec2 CellRegion::sample_uniform(CounterRng& rng) const {
  for (int it = 0; it < 1000000; ++it) {
    Vec2 p{rng.uniform(bbox_.lo.x, bbox_.hi.x), rng.uniform(bbox_.lo.y, bbox_.hi.y)};
    if (contains(p)) return p;
  }
  return centroid_;
}

CellRegion CellRegion::translated(const Vec2& t) const {
  std::vector<Polygon> q = pieces_;
  for (auto& p : q)
    for (auto& v : p) v += t;
  return CellRegion(std::move(q));
}

double hausdorff_polyline_region(const std::vector<Vec2>& curve, const CellRegion& region, int samples) {
  double h = 0.0;
  if (curve.empty()) return std::numeric_limits<double>::infinity();
  // region -> curve; convex in each piece for straight segments, so vertices suffice
  for (auto& v : region.vertices()) {
    double d = std::numeric_limits<double>::infinity();
    if (curve.size() == 1) d = dist(v, curve[0]);
    for (size_t i = 0; i + 1 < curve.size(); ++i) d = std::min(d, dist_point_segment(v, curve[i], curve[i + 1]));
    h = std::max(h, d);
  }
  // curve -> region, sampled
  if (curve.size() == 1) return std::max(h, region.distance(curve[0]));
  for (size_t i = 0; i + 1 < curve.size(); ++i)
    for (int s = 0; s <= samples; ++s) {
      Vec2 p = curve[i] + (curve[i + 1] - curve[i]) * (static_cast<double>(s) / samples);
      h = std::max(h, region.distance(p));
    }
  return h;
}

}  // namespace cellembed
