#include "cellembed/delaunay.hpp"

#include <algorithm>
#include <cstdint>
#include <numeric>

#include "cellembed/error.hpp"

namespace cellembed {

double incircle(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
  long double adx = a.x - static_cast<long double>(d.x), ady = a.y - static_cast<long double>(d.y);
  long double bdx = b.x - static_cast<long double>(d.x), bdy = b.y - static_cast<long double>(d.y);
  long double cdx = c.x - static_cast<long double>(d.x), cdy = c.y - static_cast<long double>(d.y);
  long double ad = adx * adx + ady * ady;
  long double bd = bdx * bdx + bdy * bdy;
  long double cd = cdx * cdx + cdy * cdy;
  long double det = ad * (bdx * cdy - bdy * cdx) + bd * (cdx * ady - cdy * adx) + cd * (adx * bdy - ady * bdx);
  return static_cast<double>(det);
}

static double orient_ld(const Vec2& a, const Vec2& b, const Vec2& c) {
  long double r = (static_cast<long double>(b.x) - a.x) * (static_cast<long double>(c.y) - a.y) -
                  (static_cast<long double>(b.y) - a.y) * (static_cast<long double>(c.x) - a.x);
  return static_cast<double>(r);
}

Vec2 circumcenter(const Vec2& a0, const Vec2& b0, const Vec2& c0) {
  // canonical vertex order so that every cell sharing the vertex computes the same bits
  std::array<Vec2, 3> v{a0, b0, c0};
  std::sort(v.begin(), v.end(), [](const Vec2& p, const Vec2& q) { return p.y < q.y || (p.y == q.y && p.x < q.x); });
  const Vec2& a = v[0];
  long double bx = v[1].x - static_cast<long double>(a.x), by = v[1].y - static_cast<long double>(a.y);
  long double cx = v[2].x - static_cast<long double>(a.x), cy = v[2].y - static_cast<long double>(a.y);
  long double d = 2 * (bx * cy - by * cx);
  long double b2 = bx * bx + by * by, c2 = cx * cx + cy * cy;
  long double ux = (cy * b2 - by * c2) / d;
  long double uy = (bx * c2 - cx * b2) / d;
  return {static_cast<double>(a.x + ux), static_cast<double>(a.y + uy)};
}

namespace {

struct Tri {
  int v[3];
  int nb[3];  // nb[i] is across the edge opposite v[i]
  bool alive;
};

std::uint64_t hilbert_d(std::uint32_t n, std::uint32_t x, std::uint32_t y) {
  std::uint64_t d = 0;
  for (std::uint32_t s = n / 2; s > 0; s /= 2) {
    std::uint32_t rx = (x & s) > 0;
    std::uint32_t ry = (y & s) > 0;
    d += static_cast<std::uint64_t>(s) * s * ((3 * rx) ^ ry);
    if (ry == 0) {
      if (rx == 1) {
        x = s - 1 - x;
        y = s - 1 - y;
      }
      std::swap(x, y);
    }
  }
  return d;
}

}  // namespace

DelaunayResult delaunay_triangulate(const std::vector<Vec2>& input) {
  const int N = static_cast<int>(input.size());
  DelaunayResult res;
  res.points = input;
  if (N < 3) throw Error(ErrorKind::Degenerate, "Delaunay needs at least 3 points");
  Box bb = polygon_bbox(input);
  double M = std::max(bb.width(), bb.height());
  if (!(M > 0)) throw Error(ErrorKind::Degenerate, "all points coincide");
  Vec2 c = bb.center();
  std::vector<Vec2> P = input;
  P.push_back({c.x - 40 * M, c.y - 30 * M});
  P.push_back({c.x + 40 * M, c.y - 30 * M});
  P.push_back({c.x, c.y + 40 * M});

  std::vector<Tri> T;
  T.reserve(2 * N + 16);
  T.push_back({{N, N + 1, N + 2}, {-1, -1, -1}, true});
  std::vector<int> free_list;

  std::vector<int> order(N);
  std::iota(order.begin(), order.end(), 0);
  {
    const std::uint32_t G = 1u << 16;
    std::vector<std::uint64_t> key(N);
    for (int i = 0; i < N; ++i) {
      auto gx = static_cast<std::uint32_t>(std::clamp((input[i].x - bb.lo.x) / M * (G - 1), 0.0, G - 1.0));
      auto gy = static_cast<std::uint32_t>(std::clamp((input[i].y - bb.lo.y) / M * (G - 1), 0.0, G - 1.0));
      key[i] = hilbert_d(G, gx, gy);
    }
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return key[a] < key[b]; });
  }

  std::vector<int> mark(T.capacity(), -1);
  std::vector<int> cavity, stack;
  struct Bnd {
    int a, b, out;
  };
  std::vector<Bnd> boundary;
  std::vector<int> created;
  int last = 0;
  int stamp = 0;

  for (int pi : order) {
    const Vec2& p = P[pi];
    // walk to the containing triangle
    int t = last;
    if (!T[t].alive) {
      for (t = static_cast<int>(T.size()) - 1; t >= 0 && !T[t].alive; --t) {
      }
    }
    int guard = 0;
    int rot = 0;
    while (true) {
      bool moved = false;
      for (int k = 0; k < 3; ++k) {
        int i = (k + rot) % 3;
        int a = T[t].v[(i + 1) % 3], b = T[t].v[(i + 2) % 3];
        if (orient_ld(P[a], P[b], p) < 0 && T[t].nb[i] >= 0) {
          t = T[t].nb[i];
          moved = true;
          break;
        }
      }
      rot = (rot + 1) % 3;
      if (!moved) break;
      if (++guard > 4 * static_cast<int>(T.size()) + 100) {
        // fall back to a linear scan
        for (t = 0; t < static_cast<int>(T.size()); ++t) {
          if (!T[t].alive) continue;
          bool in = true;
          for (int i = 0; i < 3; ++i)
            if (orient_ld(P[T[t].v[(i + 1) % 3]], P[T[t].v[(i + 2) % 3]], p) < 0) in = false;
          if (in) break;
        }
        if (t == static_cast<int>(T.size())) throw Error(ErrorKind::Degenerate, "point location failed");
        break;
      }
    }
    for (int i = 0; i < 3; ++i)
      if (P[T[t].v[i]] == p) throw Error(ErrorKind::Degenerate, "duplicate point");

    // grow the cavity
    ++stamp;
    if (mark.size() < T.size() + 64) mark.resize(2 * T.size() + 64, -1);
    cavity.assign(1, t);
    mark[t] = stamp;
    stack.assign(1, t);
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      for (int i = 0; i < 3; ++i) {
        int n = T[u].nb[i];
        if (n < 0 || mark[n] == stamp) continue;
        const Tri& tn = T[n];
        if (incircle(P[tn.v[0]], P[tn.v[1]], P[tn.v[2]], p) > 0) {
          mark[n] = stamp;
          cavity.push_back(n);
          stack.push_back(n);
        }
      }
    }
    // star-shapedness repair
    for (bool fixed = false; !fixed;) {
      fixed = true;
      for (size_t k = 0; k < cavity.size(); ++k) {
        int u = cavity[k];
        for (int i = 0; i < 3; ++i) {
          int n = T[u].nb[i];
          if (n >= 0 && mark[n] == stamp) continue;
          int a = T[u].v[(i + 1) % 3], b = T[u].v[(i + 2) % 3];
          if (orient_ld(P[a], P[b], p) <= 0) {
            if (n < 0) throw Error(ErrorKind::Degenerate, "cavity reached the super triangle boundary");
            mark[n] = stamp;
            cavity.push_back(n);
            fixed = false;
          }
        }
      }
    }
    boundary.clear();
    for (int u : cavity)
      for (int i = 0; i < 3; ++i) {
        int n = T[u].nb[i];
        if (n >= 0 && mark[n] == stamp) continue;
        boundary.push_back({T[u].v[(i + 1) % 3], T[u].v[(i + 2) % 3], n});
      }
    for (int u : cavity) {
      T[u].alive = false;
      free_list.push_back(u);
    }
    created.clear();
    for (auto& e : boundary) {
      int id;
      if (!free_list.empty()) {
        id = free_list.back();
        free_list.pop_back();
        T[id] = {{e.a, e.b, pi}, {-1, -1, e.out}, true};
      } else {
        id = static_cast<int>(T.size());
        T.push_back({{e.a, e.b, pi}, {-1, -1, e.out}, true});
      }
      created.push_back(id);
      if (e.out >= 0) {
        Tri& o = T[e.out];
        for (int j = 0; j < 3; ++j)
          if (o.v[(j + 1) % 3] == e.b && o.v[(j + 2) % 3] == e.a) o.nb[j] = id;
      }
    }
    for (int id : created) {
      int a = T[id].v[0], b = T[id].v[1];
      for (int other : created) {
        if (T[other].v[0] == b) T[id].nb[0] = other;
        if (T[other].v[1] == a) T[id].nb[1] = other;
      }
    }
    last = created.front();
  }

  // collect
  std::vector<int> newid(T.size(), -1);
  res.on_hull.assign(N, 0);
  for (size_t t = 0; t < T.size(); ++t) {
    if (!T[t].alive) continue;
    bool super = false;
    for (int i = 0; i < 3; ++i)
      if (T[t].v[i] >= N) super = true;
    if (super) {
      for (int i = 0; i < 3; ++i)
        if (T[t].v[i] < N) res.on_hull[T[t].v[i]] = 1;
      continue;
    }
    newid[t] = static_cast<int>(res.triangles.size());
    res.triangles.push_back({T[t].v[0], T[t].v[1], T[t].v[2]});
  }
  // stars in CCW order
  std::vector<int> any(N + 3, -1);
  for (size_t t = 0; t < T.size(); ++t)
    if (T[t].alive)
      for (int i = 0; i < 3; ++i) any[T[t].v[i]] = static_cast<int>(t);
  res.star.assign(N, {});
  auto idx_of = [&](int t, int v) { return T[t].v[0] == v ? 0 : (T[t].v[1] == v ? 1 : 2); };
  for (int v = 0; v < N; ++v) {
    int t0 = any[v];
    if (t0 < 0) continue;
    // ccw successor of t around v: neighbor across edge (v, v[k+2]) = nb[k+1]
    std::vector<int> ring;
    int t = t0;
    do {
      ring.push_back(t);
      int k = idx_of(t, v);
      t = T[t].nb[(k + 1) % 3];
    } while (t != t0 && t >= 0 && ring.size() <= T.size());
    // rotate so that for hull vertices the real triangles form a contiguous open fan
    std::vector<int> real;
    if (res.on_hull[v]) {
      size_t n = ring.size();
      size_t start = 0;
      for (size_t i = 0; i < n; ++i)
        if (newid[ring[i]] >= 0 && newid[ring[(i + n - 1) % n]] < 0) {
          start = i;
          break;
        }
      for (size_t i = 0; i < n; ++i) {
        int tt = ring[(start + i) % n];
        if (newid[tt] < 0) break;
        real.push_back(newid[tt]);
      }
    } else {
      for (int tt : ring) real.push_back(newid[tt]);
    }
    res.star[v] = std::move(real);
  }
  return res;
}

}  // namespace cellembed
