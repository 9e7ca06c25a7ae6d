#include "cellembed/surface.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <sstream>
#include <unordered_map>

#include "cellembed/error.hpp"
#include "cellembed/format.hpp"
#include "cellembed/generators.hpp"

namespace cellembed {

namespace {

double apothem(int p) { return 0.5 / std::tan(M_PI / p); }

void finalize_surface(EquilateralSurface& s) {
  const int n = s.num_vertices;
  s.edge_face_.assign(n, {});
  s.cone_angle.assign(n, 0.0);
  s.face_degree_sum.assign(n, 0);
  for (int f = 0; f < static_cast<int>(s.faces.size()); ++f) {
    const auto& fv = s.faces[f];
    const int p = static_cast<int>(fv.size());
    if (p < 3) throw Error(ErrorKind::InvalidInput, "face with fewer than 3 vertices");
    for (int k = 0; k < p; ++k) {
      int u = fv[k], v = fv[(k + 1) % p];
      if (u < 0 || u >= n) throw Error(ErrorKind::InvalidInput, "face vertex out of range");
      if (u == v) throw Error(ErrorKind::InvalidInput, "loop edge in face");
      for (auto& e : s.edge_face_[u])
        if (e.first == v) throw Error(ErrorKind::Structural, "directed edge used by two faces");
      s.edge_face_[u].push_back({v, f});
      s.cone_angle[u] += EquilateralSurface::face_angle(p);
      s.face_degree_sum[u] += 1;
    }
  }
  s.boundary.assign(n, 0);
  for (int u = 0; u < n; ++u) {
    if (s.edge_face_[u].empty()) s.boundary[u] = 1;
    for (auto [v, f] : s.edge_face_[u])
      if (s.face_left(v, u) < 0) s.boundary[u] = s.boundary[v] = 1;
  }
}

// L-infinity distance from c to segment ab
double linf_point_segment(const Vec2& c, const Vec2& a, const Vec2& b) {
  Vec2 d0 = a - c, dd = b - a;
  auto f = [&](double t) {
    Vec2 q = d0 + dd * t;
    return std::max(std::abs(q.x), std::abs(q.y));
  };
  double best = std::min(f(0), f(1));
  auto consider = [&](double num, double den) {
    if (den == 0) return;
    double t = num / den;
    if (t > 0 && t < 1) best = std::min(best, f(t));
  };
  consider(-d0.x, dd.x);
  consider(-d0.y, dd.y);
  consider(-(d0.x - d0.y), dd.x - dd.y);
  consider(-(d0.x + d0.y), dd.x + dd.y);
  return best;
}

double linf_cell_distance(const CellRegion& cell, const Vec2& c) {
  if (cell.contains(c)) return 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& poly : cell.pieces())
    for (size_t i = 0; i < poly.size(); ++i)
      best = std::min(best, linf_point_segment(c, poly[i], poly[(i + 1) % poly.size()]));
  return best;
}

double diameter_of(std::vector<Vec2> pts) {
  if (pts.size() < 2) return 0.0;
  Polygon h = convex_hull(std::move(pts));
  double d = 0;
  for (size_t i = 0; i < h.size(); ++i)
    for (size_t j = i + 1; j < h.size(); ++j) d = std::max(d, dist(h[i], h[j]));
  return d;
}

// Faces of the surface incident to each vertex.
std::vector<std::vector<int>> vertex_faces(const EquilateralSurface& s) {
  std::vector<std::vector<int>> out(s.num_vertices);
  for (int f = 0; f < static_cast<int>(s.faces.size()); ++f)
    for (int v : s.faces[f]) out[v].push_back(f);
  return out;
}

struct FaceSetInfo {
  bool disk = false;
  std::vector<int> boundary_loop;
  std::vector<int> vertices;
  std::string problem;
};

// Checks that a face set is a closed disk (one simple boundary cycle, chi = 1, connected).
FaceSetInfo analyze_face_set(const EquilateralSurface& s, const std::vector<char>& in, const std::vector<int>& faces) {
  FaceSetInfo info;
  if (faces.empty()) {
    info.problem = "no faces";
    return info;
  }
  std::vector<int> bnext(s.num_vertices, -1);
  std::vector<int> bcount(s.num_vertices, 0);
  std::vector<char> vseen(s.num_vertices, 0);
  long half_edges = 0, boundary_edges = 0;
  for (int f : faces) {
    const auto& fv = s.faces[f];
    const int p = static_cast<int>(fv.size());
    for (int k = 0; k < p; ++k) {
      int u = fv[k], v = fv[(k + 1) % p];
      if (!vseen[u]) {
        vseen[u] = 1;
        info.vertices.push_back(u);
      }
      ++half_edges;
      int g = s.face_left(v, u);
      if (g < 0 || !in[g]) {
        ++boundary_edges;
        ++bcount[u];
        ++bcount[v];
        bnext[u] = v;
      }
    }
  }
  std::sort(info.vertices.begin(), info.vertices.end());
  const long V = static_cast<long>(info.vertices.size());
  const long E = (half_edges + boundary_edges) / 2;
  const long F = static_cast<long>(faces.size());
  for (int v : info.vertices)
    if (bcount[v] != 0 && bcount[v] != 2) {
      info.problem = "pinched boundary at vertex " + std::to_string(v);
      return info;
    }
  if (V - E + F != 1) {
    info.problem = "Euler characteristic " + std::to_string(V - E + F) + " (not a disk)";
    return info;
  }
  int start = -1;
  for (int v : info.vertices)
    if (bcount[v]) {
      start = v;
      break;
    }
  if (start < 0) {
    info.problem = "no boundary";
    return info;
  }
  int v = start;
  do {
    info.boundary_loop.push_back(v);
    v = bnext[v];
  } while (v != start && static_cast<long>(info.boundary_loop.size()) <= boundary_edges);
  if (static_cast<long>(info.boundary_loop.size()) != boundary_edges) {
    info.problem = "boundary has several components";
    info.boundary_loop.clear();
    return info;
  }
  info.disk = true;
  return info;
}

struct PortionBuilder {
  const CellConfiguration& config;
  const EquilateralSurface& s;
  Box S;
  Vec2 c;
  std::vector<std::vector<int>> vf;
  std::vector<int> cand;      // sorted by distance
  std::vector<double> dcand;  // L-infinity distance to c
  std::optional<int> root;

  PortionBuilder(const CellConfiguration& cfg, const EquilateralSurface& surf, const Box& sq, double reach)
      : config(cfg), s(surf), S(sq), c(sq.center()) {
    if (cfg.num_cells() != surf.num_vertices)
      throw Error(ErrorKind::InvalidInput, "surface vertices must correspond to cells");
    vf = vertex_faces(s);
    auto ids = config.cells_meeting(Box::centered(c, reach));
    std::vector<std::pair<double, int>> tmp;
    for (int h : ids) tmp.push_back({linf_cell_distance(config.cell(h), c), h});
    std::sort(tmp.begin(), tmp.end());
    for (auto [d, h] : tmp) {
      cand.push_back(h);
      dcand.push_back(d);
    }
    root = config.cell_containing(c);
  }

  struct Result {
    std::vector<int> faces;
    FaceSetInfo info;
    bool connected = false;
    bool reaches_boundary = false;
    bool contained = false;
    bool root_interior = false;
    std::string problem;
  };

  // portion for H = first `count` candidates
  Result build(int count) const {
    Result r;
    std::vector<char> inH(s.num_vertices, 0);
    for (int i = 0; i < count; ++i) inH[cand[i]] = 1;
    // connectivity of H in the map
    {
      std::vector<char> seen(s.num_vertices, 0);
      std::deque<int> q{cand[0]};
      seen[cand[0]] = 1;
      int reached = 1;
      const auto& map = config.map();
      while (!q.empty()) {
        int u = q.front();
        q.pop_front();
        for (int w : map.neighbors(u))
          if (inH[w] && !seen[w]) {
            seen[w] = 1;
            ++reached;
            q.push_back(w);
          }
      }
      r.connected = reached == count;
    }
    const int F = static_cast<int>(s.faces.size());
    std::vector<char> in(F, 0);
    for (int i = 0; i < count; ++i)
      for (int f : vf[cand[i]]) in[f] = 1;
    // complement components not touching the surface boundary are filled
    std::vector<int> comp(F, -1);
    for (int f0 = 0; f0 < F; ++f0) {
      if (in[f0] || comp[f0] >= 0) continue;
      std::vector<int> members{f0};
      comp[f0] = f0;
      bool unbounded = false;
      for (size_t k = 0; k < members.size(); ++k) {
        int f = members[k];
        const auto& fv = s.faces[f];
        const int p = static_cast<int>(fv.size());
        for (int i = 0; i < p; ++i) {
          int u = fv[i], v = fv[(i + 1) % p];
          if (s.boundary[u]) unbounded = true;
          int g = s.face_left(v, u);
          if (g >= 0 && !in[g] && comp[g] < 0) {
            comp[g] = f0;
            members.push_back(g);
          }
        }
      }
      if (!unbounded)
        for (int f : members) in[f] = 2;
    }
    for (int f = 0; f < F; ++f)
      if (in[f]) r.faces.push_back(f);
    std::vector<char> inflag(F, 0);
    for (int f : r.faces) inflag[f] = 1;
    r.info = analyze_face_set(s, inflag, r.faces);
    r.contained = true;
    for (int v : r.info.vertices) {
      if (s.boundary[v]) r.reaches_boundary = true;
      if (!S.contains(config.cell(v).bbox())) r.contained = false;
    }
    if (root && r.info.disk) {
      bool on_loop = std::find(r.info.boundary_loop.begin(), r.info.boundary_loop.end(), *root) !=
                     r.info.boundary_loop.end();
      r.root_interior = std::binary_search(r.info.vertices.begin(), r.info.vertices.end(), *root) && !on_loop;
    }
    if (r.reaches_boundary)
      r.problem = "portion reaches the surface boundary";
    else if (!r.connected)
      r.problem = "H(S^a) is not connected";
    else if (!r.info.disk)
      r.problem = r.info.problem;
    else if (!root)
      r.problem = "no cell contains the center of S";
    else if (!r.root_interior)
      r.problem = "root cell is not interior to the portion";
    return r;
  }

  SurfacePortion make(const Result& r, double a) const {
    SurfacePortion p;
    p.square = S;
    p.a = a;
    if (!r.problem.empty()) {
      p.diagnostic = r.problem;
      return p;
    }
    p.faces = r.faces;
    p.vertices = r.info.vertices;
    p.boundary_loop = r.info.boundary_loop;
    p.root = *root;
    return p;
  }
};

}  // namespace

int EquilateralSurface::face_left(int u, int v) const {
  if (u < 0 || u >= num_vertices) return -1;
  for (auto& e : edge_face_[u])
    if (e.first == v) return e.second;
  return -1;
}

EquilateralSurface build_surface(int num_vertices, std::vector<std::vector<int>> faces) {
  EquilateralSurface s;
  s.num_vertices = num_vertices;
  s.faces = std::move(faces);
  finalize_surface(s);
  return s;
}

EquilateralSurface build_surface(const Triangulation& tri) {
  EquilateralSurface s;
  s.num_vertices = tri.num_vertices();
  for (auto& f : tri.faces()) s.faces.push_back({f[0], f[1], f[2]});
  finalize_surface(s);
  return s;
}

EquilateralSurface build_surface(const HalfEdgeMap& map) {
  auto diag = map.validate();
  if (diag.loops > 0) throw Error(ErrorKind::InvalidInput, "map has loops");
  EquilateralSurface s;
  s.num_vertices = map.num_vertices();
  for (int f = 0; f < map.num_faces(); ++f)
    if (map.is_bounded(f)) s.faces.push_back(map.face_vertices(f));
  finalize_surface(s);
  return s;
}

EquilateralSurface surface_from_config(const CellConfiguration& config) {
  EquilateralSurface s;
  s.num_vertices = config.num_cells();
  for (auto& f : config_triangles(config)) s.faces.push_back({f[0], f[1], f[2]});
  finalize_surface(s);
  return s;
}

Vec2 chart_corner(int p, int k) {
  Vec2 z{0, 0};
  for (int j = 0; j < k; ++j) z += Vec2{std::cos(2 * M_PI * j / p), std::sin(2 * M_PI * j / p)};
  return z;
}

Vec2 chart_center(int p) { return {0.5, apothem(p)}; }

double face_pair_distance(const EquilateralSurface& s, int f1, const Vec2& x1, int f2, const Vec2& x2) {
  const int F = static_cast<int>(s.faces.size());
  if (f1 < 0 || f2 < 0 || f1 >= F || f2 >= F) throw Error(ErrorKind::InvalidInput, "face out of range");
  if (f1 == f2) return dist(x1, x2);
  const auto& a = s.faces[f1];
  const auto& b = s.faces[f2];
  const int pa = static_cast<int>(a.size()), pb = static_cast<int>(b.size());
  for (int i = 0; i < pa; ++i) {
    int u = a[i], v = a[(i + 1) % pa];
    for (int j = 0; j < pb; ++j) {
      if (b[j] != v || b[(j + 1) % pb] != u) continue;
      // rigid motion of f2's chart taking (v,u) onto f1's corners (i+1, i)
      Vec2 A0 = chart_corner(pa, i), A1 = chart_corner(pa, (i + 1) % pa);
      Vec2 B0 = chart_corner(pb, (j + 1) % pb), B1 = chart_corner(pb, j);
      double ang = std::atan2((A1 - A0).y, (A1 - A0).x) - std::atan2((B1 - B0).y, (B1 - B0).x);
      Vec2 y = A0 + rotate(x2 - B0, ang);
      // straight segment crosses the shared edge inside it
      Vec2 e = A1 - A0, d = y - x1;
      double den = cross(d, e);
      if (std::abs(den) > 1e-15) {
        double t = cross(A0 - x1, d) / den;
        if (t >= 0 && t <= 1) return dist(x1, y);
      }
      return std::min(dist(x1, A0) + dist(A0, y), dist(x1, A1) + dist(A1, y));
    }
  }
  throw Error(ErrorKind::InvalidInput, "faces do not share an edge");
}

GaussBonnet gauss_bonnet(const EquilateralSurface& s, const std::vector<int>& faces_in) {
  std::vector<int> faces = faces_in;
  if (faces.empty())
    for (int f = 0; f < static_cast<int>(s.faces.size()); ++f) faces.push_back(f);
  std::vector<char> in(s.faces.size(), 0);
  for (int f : faces) in[f] = 1;
  std::vector<double> theta(s.num_vertices, 0.0);
  std::vector<int> bedges(s.num_vertices, 0);
  std::vector<char> used(s.num_vertices, 0);
  long half = 0, bnd = 0;
  for (int f : faces) {
    const auto& fv = s.faces[f];
    const int p = static_cast<int>(fv.size());
    for (int k = 0; k < p; ++k) {
      int u = fv[k], v = fv[(k + 1) % p];
      used[u] = 1;
      theta[u] += EquilateralSurface::face_angle(p);
      ++half;
      int g = s.face_left(v, u);
      if (g < 0 || !in[g]) {
        ++bnd;
        ++bedges[u];
        ++bedges[v];
      }
    }
  }
  GaussBonnet gb;
  long V = 0;
  for (int v = 0; v < s.num_vertices; ++v) {
    if (!used[v]) continue;
    ++V;
    int k = bedges[v] / 2;  // boundary corners at v
    if (k == 0)
      gb.interior_curvature += 2 * M_PI - theta[v];
    else
      gb.boundary_turning += 2 * M_PI - k * M_PI - theta[v];
  }
  gb.euler_characteristic = static_cast<int>(V - (half + bnd) / 2 + static_cast<long>(faces.size()));
  return gb;
}

bool SurfacePortion::contains_vertex(int v) const { return std::binary_search(vertices.begin(), vertices.end(), v); }

bool SurfacePortion::is_interior(int v) const {
  return contains_vertex(v) && std::find(boundary_loop.begin(), boundary_loop.end(), v) == boundary_loop.end();
}

SurfacePortion portion_for_side(const CellConfiguration& config, const EquilateralSurface& s, const Box& S, double a) {
  if (!(a > 0)) throw Error(ErrorKind::InvalidInput, "a must be positive");
  PortionBuilder pb(config, s, S, a);
  int count = 0;
  while (count < static_cast<int>(pb.cand.size()) && pb.dcand[count] < a / 2) ++count;
  if (count == 0) {
    SurfacePortion p;
    p.square = S;
    p.a = a;
    p.diagnostic = "no cell meets the open square";
    return p;
  }
  return pb.make(pb.build(count), a);
}

SurfacePortion build_M_S(const CellConfiguration& config, const EquilateralSurface& s, const Box& S) {
  const double side = S.width();
  if (!(side > 0) || std::abs(S.height() - side) > 1e-12 * side)
    throw Error(ErrorKind::InvalidInput, "S must be a square of positive side");
  PortionBuilder pb(config, s, S, side);
  SurfacePortion empty;
  empty.square = S;
  // prefix groups of equal distance below |S|/2
  std::vector<int> ends;  // prefix lengths at group ends
  std::vector<double> dval;
  for (size_t i = 0; i < pb.cand.size(); ++i) {
    if (!(pb.dcand[i] < side / 2)) break;
    if (i + 1 == pb.cand.size() || pb.dcand[i + 1] != pb.dcand[i] || !(pb.dcand[i + 1] < side / 2)) {
      ends.push_back(static_cast<int>(i + 1));
      dval.push_back(pb.dcand[i]);
    }
  }
  if (ends.empty()) {
    empty.diagnostic = "no cell meets the open square";
    return empty;
  }
  const int K = static_cast<int>(ends.size());
  const double grid = 4294967296.0;
  // largest grid value in (2 d_i, 2 d_{i+1}] (or (2 d_K, |S|)); NaN if none
  auto grid_a = [&](int i) {
    double upper_units = i + 1 < K ? std::floor(2 * dval[i + 1] / side * grid) : grid - 1;
    upper_units = std::min(upper_units, grid - 1);
    double a = upper_units / grid * side;
    return a > 2 * dval[i] ? a : std::numeric_limits<double>::quiet_NaN();
  };
  auto ok_containment = [&](int i) {
    auto r = pb.build(ends[i]);
    return r.contained && !r.reaches_boundary;
  };
  if (!ok_containment(0)) {
    empty.diagnostic = "no valid a: cells of M(S;a) are not contained in S for any a";
    return empty;
  }
  int lo = 0, hi = K - 1;
  while (lo < hi) {
    int mid = (lo + hi + 1) / 2;
    if (ok_containment(mid))
      lo = mid;
    else
      hi = mid - 1;
  }
  std::string last = "no valid a";
  for (int i = lo; i >= 0; --i) {
    double a = grid_a(i);
    if (std::isnan(a)) continue;
    auto r = pb.build(ends[i]);
    if (r.problem.empty() && r.contained) return pb.make(r, a);
    last = r.problem.empty() ? "cells not contained in S" : r.problem;
  }
  empty.diagnostic = "no valid a: " + last;
  return empty;
}

SurfacePortion whole_portion(const EquilateralSurface& s, int root) {
  SurfacePortion p;
  std::vector<char> in(s.faces.size(), 1);
  for (int f = 0; f < static_cast<int>(s.faces.size()); ++f) p.faces.push_back(f);
  auto info = analyze_face_set(s, in, p.faces);
  if (!info.disk) throw Error(ErrorKind::Structural, "surface is not a disk: " + info.problem);
  p.vertices = info.vertices;
  p.boundary_loop = info.boundary_loop;
  p.root = root;
  if (!p.is_interior(root)) throw Error(ErrorKind::InvalidInput, "root must be an interior vertex");
  return p;
}

std::string portion_text(const SurfacePortion& p) {
  std::ostringstream os;
  os << "portion\n";
  os << "square " << fmt_double(p.square.lo.x) << ' ' << fmt_double(p.square.lo.y) << ' ' << fmt_double(p.square.hi.x)
     << ' ' << fmt_double(p.square.hi.y) << '\n';
  os << "a " << fmt_double(p.a) << '\n';
  os << "root " << p.root << '\n';
  if (!p.diagnostic.empty()) os << "diagnostic " << p.diagnostic << '\n';
  os << "faces " << p.faces.size() << '\n';
  for (int f : p.faces) os << f << '\n';
  os << "boundary " << p.boundary_loop.size() << '\n';
  for (size_t i = 0; i < p.boundary_loop.size(); ++i) os << (i ? " " : "") << p.boundary_loop[i];
  os << '\n';
  return os.str();
}

std::array<double, 3> barycentric(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& x) {
  double area = orient(a, b, c);
  double l1 = orient(a, x, c) / area;
  double l2 = orient(a, b, x) / area;
  return {1 - l1 - l2, l1, l2};
}

Subdivision subdivide(const EquilateralSurface& s, const SurfacePortion& p, int n) {
  if (n < 1) throw Error(ErrorKind::InvalidInput, "subdivision level must be at least 1");
  if (p.faces.empty()) throw Error(ErrorKind::InvalidInput, "empty portion");
  Subdivision sub;
  sub.n = n;
  const int F = static_cast<int>(s.faces.size());
  const std::int64_t NV = s.num_vertices + static_cast<std::int64_t>(F);
  sub.face_pos.assign(F, -1);
  sub.face_p.assign(F, 0);
  sub.sub_of_vertex.assign(s.num_vertices, -1);
  std::unordered_map<std::int64_t, int> corner_map, edge_map;
  std::vector<std::array<int, 3>> tris;

  auto new_vertex = [&](int face, const Vec2& x, int orig) {
    int id = static_cast<int>(sub.vertex_point.size());
    sub.vertex_point.push_back({face, x});
    sub.original.push_back(orig);
    if (orig >= 0) sub.sub_of_vertex[orig] = id;
    return id;
  };
  const int per_piece = 2 * n * n;
  for (int pos = 0; pos < static_cast<int>(p.faces.size()); ++pos) {
    const int f = p.faces[pos];
    const auto& fv = s.faces[f];
    const int q = static_cast<int>(fv.size());
    sub.face_pos[f] = pos;
    sub.face_p[f] = q;
    sub.piece_face.push_back(f);
    sub.piece_offset.push_back(static_cast<int>(sub.piece_corners.size()));
    const int npieces = q == 3 ? 1 : q;
    for (int k = 0; k < npieces; ++k) {
      std::array<std::int64_t, 3> cid;
      std::array<Vec2, 3> cx;
      if (q == 3) {
        for (int t = 0; t < 3; ++t) {
          cid[t] = fv[t];
          cx[t] = chart_corner(3, t);
        }
      } else {
        cid = {fv[k], fv[(k + 1) % q], s.num_vertices + static_cast<std::int64_t>(f)};
        cx = {chart_corner(q, k), chart_corner(q, (k + 1) % q), chart_center(q)};
      }
      const int piece = static_cast<int>(sub.piece_corners.size());
      sub.piece_corners.push_back(cx);
      std::vector<int> grid((n + 1) * (n + 1), -1);
      auto point = [&](int i, int j) { return cx[0] + (cx[1] - cx[0]) * (double(i) / n) + (cx[2] - cx[0]) * (double(j) / n); };
      auto corner_vertex = [&](int t) {
        auto it = corner_map.find(cid[t]);
        if (it != corner_map.end()) return it->second;
        int orig = cid[t] < s.num_vertices ? static_cast<int>(cid[t]) : -1;
        int id = new_vertex(f, cx[t], orig);
        corner_map[cid[t]] = id;
        return id;
      };
      auto edge_vertex = [&](int ta, int tb, int t, const Vec2& x) {
        std::int64_t a = cid[ta], b = cid[tb];
        if (a > b) {
          std::swap(a, b);
          t = n - t;
        }
        std::int64_t key = (a * NV + b) * (n + 1) + t;
        auto it = edge_map.find(key);
        if (it != edge_map.end()) return it->second;
        int id = new_vertex(f, x, -1);
        edge_map[key] = id;
        return id;
      };
      for (int j = 0; j <= n; ++j)
        for (int i = 0; i + j <= n; ++i) {
          int id;
          Vec2 x = point(i, j);
          if (i == 0 && j == 0)
            id = corner_vertex(0);
          else if (i == n)
            id = corner_vertex(1);
          else if (j == n)
            id = corner_vertex(2);
          else if (j == 0)
            id = edge_vertex(0, 1, i, x);
          else if (i == 0)
            id = edge_vertex(0, 2, j, x);
          else if (i + j == n)
            id = edge_vertex(1, 2, j, x);
          else
            id = new_vertex(f, x, -1);
          grid[j * (n + 1) + i] = id;
        }
      sub.table.resize(static_cast<size_t>(piece + 1) * per_piece, -1);
      auto g = [&](int i, int j) { return grid[j * (n + 1) + i]; };
      for (int j = 0; j < n; ++j)
        for (int i = 0; i + j < n; ++i) {
          sub.table[static_cast<size_t>(piece) * per_piece + (j * n + i) * 2] = static_cast<int>(tris.size());
          tris.push_back({g(i, j), g(i + 1, j), g(i, j + 1)});
          sub.face_of.push_back(f);
          sub.corners.push_back({point(i, j), point(i + 1, j), point(i, j + 1)});
          if (i + j + 2 <= n) {
            sub.table[static_cast<size_t>(piece) * per_piece + (j * n + i) * 2 + 1] = static_cast<int>(tris.size());
            tris.push_back({g(i + 1, j), g(i + 1, j + 1), g(i, j + 1)});
            sub.face_of.push_back(f);
            sub.corners.push_back({point(i + 1, j), point(i + 1, j + 1), point(i, j + 1)});
          }
        }
    }
  }
  sub.tri = Triangulation(static_cast<int>(sub.vertex_point.size()), std::move(tris));
  return sub;
}

std::pair<int, std::array<double, 3>> Subdivision::locate(const SurfacePoint& x) const {
  if (x.face < 0 || x.face >= static_cast<int>(face_pos.size()) || face_pos[x.face] < 0)
    throw Error(ErrorKind::InvalidInput, "point outside the subdivided portion");
  const int pos = face_pos[x.face];
  const int q = face_p[x.face];
  const int first = piece_offset[pos];
  const int npieces = q == 3 ? 1 : q;
  int best_face = -1;
  double best_score = -std::numeric_limits<double>::infinity();
  std::array<double, 3> best_bary{};
  const int per_piece = 2 * n * n;
  for (int k = 0; k < npieces; ++k) {
    const auto& cx = piece_corners[first + k];
    auto l = barycentric(cx[0], cx[1], cx[2], x.chart);
    if (std::min({l[0], l[1], l[2]}) < -1e-9) continue;
    double si = l[1] * n, sj = l[2] * n;
    int i0 = std::clamp(static_cast<int>(std::floor(si)), 0, n - 1);
    int j0 = std::clamp(static_cast<int>(std::floor(sj)), 0, n - 1);
    for (int di = -1; di <= 0; ++di)
      for (int dj = -1; dj <= 0; ++dj)
        for (int d = 0; d < 2; ++d) {
          int i = i0 + di, j = j0 + dj;
          if (i < 0 || j < 0 || i + j >= n) continue;
          int sf = table[static_cast<size_t>(first + k) * per_piece + (j * n + i) * 2 + d];
          if (sf < 0) continue;
          const auto& c = corners[sf];
          auto b = barycentric(c[0], c[1], c[2], x.chart);
          double score = std::min({b[0], b[1], b[2]});
          if (score > best_score) {
            best_score = score;
            best_face = sf;
            best_bary = b;
          }
        }
  }
  if (best_face < 0 || best_score < -1e-9) throw Error(ErrorKind::InvalidInput, "chart point outside its face");
  return {best_face, best_bary};
}

Vec2 DiscreteConformalMap::evaluate(const SurfacePoint& x) const {
  auto [sf, b] = sub.locate(x);
  const auto& t = sub.tri.face(sf);
  return image[t[0]] * b[0] + image[t[1]] * b[1] + image[t[2]] * b[2];
}

Vec2 DiscreteConformalMap::vertex_image(int v) const {
  if (v < 0 || v >= static_cast<int>(sub.sub_of_vertex.size()) || sub.sub_of_vertex[v] < 0)
    throw Error(ErrorKind::InvalidInput, "vertex not in the portion");
  return image[sub.sub_of_vertex[v]];
}

DiscreteConformalMap uniformize_approx(const EquilateralSurface& s, const SurfacePortion& p, int n,
                                       const UniformizeOptions& opt) {
  if (n < 1) throw Error(ErrorKind::InvalidInput, "subdivision level must be at least 1");
  if (p.faces.empty()) throw Error(ErrorKind::InvalidInput, "empty portion");
  // exact vertex count of the subdivision
  long edges = 0, centers = 0, pieces = 0, half = 0;
  std::vector<char> in(s.faces.size(), 0);
  for (int f : p.faces) in[f] = 1;
  for (int f : p.faces) {
    const int q = static_cast<int>(s.faces[f].size());
    for (int k = 0; k < q; ++k) {
      int u = s.faces[f][k], v = s.faces[f][(k + 1) % q];
      int g = s.face_left(v, u);
      half += (g >= 0 && in[g]) ? 1 : 2;
    }
    if (q != 3) {
      ++centers;
      edges += q;
      pieces += q;
    } else {
      pieces += 1;
    }
  }
  edges += half / 2;
  const long nn = n;
  const long count = static_cast<long>(p.vertices.size()) + centers + edges * (nn - 1) + pieces * (nn - 1) * (nn - 2) / 2;
  if (count > kUniformizeVertexCap)
    throw Error(ErrorKind::SizeCap, "subdivision has " + std::to_string(count) + " vertices (cap " +
                                        std::to_string(kUniformizeVertexCap) + ")");
  DiscreteConformalMap m;
  m.sub = subdivide(s, p, n);
  m.radius = opt.radius > 0 ? opt.radius : (p.square.width() > 0 ? p.square.width() : 1.0);
  int root = opt.root_subvertex ? *opt.root_subvertex : (p.root >= 0 ? m.sub.sub_of_vertex[p.root] : -1);
  if (root < 0 || root >= m.sub.tri.num_vertices() || !m.sub.tri.is_interior(root))
    throw Error(ErrorKind::InvalidInput, "designated root must be an interior subdivision vertex");
  SolveOptions so;
  so.tol = opt.tol;
  so.relax_sweeps = 0;  // Newton from the uniform start is faster on refined meshes
  CirclePacking packing;
  try {
    packing = pack(m.sub.tri, PackingBoundary::maximal(), root, so);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NonConvergence) throw;
    so.relax_sweeps = SolveOptions{}.relax_sweeps;
    packing = pack(m.sub.tri, PackingBoundary::maximal(), root, so);
  }
  m.root = root;
  m.solve_residual = packing.solve_residual;
  m.solve_iterations = packing.solve_iterations;
  m.image.resize(packing.centers.size());
  // rotation fixed by an original vertex so that maps at different n are comparable
  int anchor = -1;
  for (int v : p.boundary_loop)
    if (m.sub.sub_of_vertex[v] != root) {
      anchor = m.sub.sub_of_vertex[v];
      break;
    }
  double turn = anchor >= 0 ? -std::atan2(packing.centers[anchor].y, packing.centers[anchor].x) : 0.0;
  for (size_t i = 0; i < packing.centers.size(); ++i) m.image[i] = rotate(packing.centers[i], turn) * m.radius;
  m.image[root] = {0, 0};
  return m;
}

double min_image_orientation(const DiscreteConformalMap& m) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& t : m.sub.tri.faces()) best = std::min(best, orient(m.image[t[0]], m.image[t[1]], m.image[t[2]]));
  return best;
}

double refinement_difference(const DiscreteConformalMap& a, const DiscreteConformalMap& b) {
  double d = 0;
  const auto& sa = a.sub.sub_of_vertex;
  const auto& sb = b.sub.sub_of_vertex;
  if (sa.size() != sb.size()) throw Error(ErrorKind::InvalidInput, "maps come from different surfaces");
  for (size_t v = 0; v < sa.size(); ++v) {
    if ((sa[v] < 0) != (sb[v] < 0)) throw Error(ErrorKind::InvalidInput, "maps come from different portions");
    if (sa[v] >= 0) d = std::max(d, dist(a.image[sa[v]], b.image[sb[v]]));
  }
  return d;
}

double affine_distortion(const EquilateralSurface& s, const SurfacePortion& p, const DiscreteConformalMap& m) {
  std::vector<char> bnd(s.num_vertices, 0);
  for (int v : p.boundary_loop) bnd[v] = 1;
  double worst = 0;
  for (int sf = 0; sf < m.sub.tri.num_faces(); ++sf) {
    bool away = true;
    for (int v : s.faces[m.sub.face_of[sf]])
      if (bnd[v]) away = false;
    if (!away) continue;
    const auto& c = m.sub.corners[sf];
    const auto& t = m.sub.tri.face(sf);
    Vec2 e1 = c[1] - c[0], e2 = c[2] - c[0];
    Vec2 f1 = m.image[t[1]] - m.image[t[0]], f2 = m.image[t[2]] - m.image[t[0]];
    double det = cross(e1, e2);
    // J = [f1 f2] [e1 e2]^{-1}
    double a = (f1.x * e2.y - f2.x * e1.y) / det, b = (-f1.x * e2.x + f2.x * e1.x) / det;
    double cc = (f1.y * e2.y - f2.y * e1.y) / det, d = (-f1.y * e2.x + f2.y * e1.x) / det;
    double fro = a * a + b * b + cc * cc + d * d, dt = std::abs(a * d - b * cc);
    double disc = std::sqrt(std::max(fro * fro / 4 - dt * dt, 0.0));
    double s1 = std::sqrt(fro / 2 + disc), s2 = std::sqrt(std::max(fro / 2 - disc, 0.0));
    worst = std::max(worst, s2 > 0 ? s1 / s2 - 1 : std::numeric_limits<double>::infinity());
  }
  return worst;
}

namespace {

// Sampled image of the kite of corner k of face f (closed polygon P_k, mid, center, mid).
std::vector<Vec2> kite_image(const EquilateralSurface& s, const DiscreteConformalMap& m, int f, int k, int samples) {
  const int q = static_cast<int>(s.faces[f].size());
  Vec2 P = chart_corner(q, k);
  Vec2 M1 = (P + chart_corner(q, (k + 1) % q)) * 0.5;
  Vec2 C = chart_center(q);
  Vec2 M0 = (P + chart_corner(q, (k + q - 1) % q)) * 0.5;
  std::array<Vec2, 5> loop{P, M1, C, M0, P};
  std::vector<Vec2> out;
  for (int e = 0; e < 4; ++e)
    for (int t = 0; t < samples; ++t) {
      Vec2 x = loop[e] + (loop[e + 1] - loop[e]) * (double(t) / samples);
      out.push_back(m.evaluate({f, x}));
    }
  return out;
}

int corner_index(const std::vector<int>& fv, int v) {
  for (size_t k = 0; k < fv.size(); ++k)
    if (fv[k] == v) return static_cast<int>(k);
  return -1;
}

}  // namespace

SemiFlowerGeometry semi_flower_geometry(const EquilateralSurface& s, const SurfacePortion& p,
                                        const DiscreteConformalMap& m, int v, int samples_per_edge) {
  if (!p.is_interior(v)) throw Error(ErrorKind::Carrier, "semi-flower of vertex " + std::to_string(v) + " is clipped by the portion boundary");
  if (samples_per_edge < 1) throw Error(ErrorKind::InvalidInput, "samples_per_edge must be positive");
  // faces around v in counter-clockwise order
  auto& ef = s.edge_face_[v];
  if (ef.empty()) throw Error(ErrorKind::InvalidInput, "isolated vertex");
  std::vector<int> order;
  int f = ef.front().second;
  for (size_t guard = 0; guard <= ef.size(); ++guard) {
    order.push_back(f);
    const auto& fv = s.faces[f];
    const int q = static_cast<int>(fv.size());
    int k = corner_index(fv, v);
    int w = fv[(k + q - 1) % q];
    f = s.face_left(v, w);
    if (f < 0) throw Error(ErrorKind::Carrier, "open flower");
    if (f == order.front()) break;
  }
  Vec2 z = m.vertex_image(v);
  // boundary of P_v: mid(v, next) -> center -> mid(prev, v) in each face
  std::vector<Vec2> boundary;
  for (int g : order) {
    const auto& fv = s.faces[g];
    const int q = static_cast<int>(fv.size());
    int k = corner_index(fv, v);
    Vec2 P = chart_corner(q, k);
    Vec2 M1 = (P + chart_corner(q, (k + 1) % q)) * 0.5;
    Vec2 C = chart_center(q);
    Vec2 M0 = (P + chart_corner(q, (k + q - 1) % q)) * 0.5;
    for (int t = 0; t < samples_per_edge; ++t) boundary.push_back(m.evaluate({g, M1 + (C - M1) * (double(t) / samples_per_edge)}));
    for (int t = 0; t < samples_per_edge; ++t) boundary.push_back(m.evaluate({g, C + (M0 - C) * (double(t) / samples_per_edge)}));
  }
  SemiFlowerGeometry out;
  out.degree = static_cast<int>(order.size());
  double inr = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < boundary.size(); ++i) {
    out.outradius = std::max(out.outradius, dist(boundary[i], z));
    inr = std::min(inr, dist_point_segment(z, boundary[i], boundary[(i + 1) % boundary.size()]));
  }
  out.inradius = point_in_polygon(boundary, z) ? inr : 0.0;
  return out;
}

SemiFlowerAreas semi_flower_areas(const EquilateralSurface& s, const SurfacePortion& p) {
  SemiFlowerAreas out;
  out.area.assign(p.vertices.size(), 0.0);
  for (int f : p.faces) {
    const int q = static_cast<int>(s.faces[f].size());
    const double kite = apothem(q) / 2;
    out.portion_area += q * kite;
    for (int v : s.faces[f]) {
      auto it = std::lower_bound(p.vertices.begin(), p.vertices.end(), v);
      out.area[it - p.vertices.begin()] += kite;
    }
  }
  for (double a : out.area) out.total += a;
  return out;
}

std::vector<LengthAreaRow> length_area_diagnostic(const CellConfiguration& config, const EquilateralSurface& s,
                                                  const SurfacePortion& p, const DiscreteConformalMap& m,
                                                  const std::vector<double>& deltas, const std::vector<Vec2>& centers,
                                                  const std::vector<Vec2>& ball_centers, double lambda) {
  if (config.num_cells() != s.num_vertices) throw Error(ErrorKind::InvalidInput, "surface vertices must correspond to cells");
  if (!ball_centers.empty() && ball_centers.size() != centers.size())
    throw Error(ErrorKind::InvalidInput, "ball centers must match square centers");
  if (!(lambda >= 0 && lambda < 1)) throw Error(ErrorKind::InvalidInput, "lambda must lie in [0,1)");
  const double S = m.radius;
  const int samples = 4;
  // per portion vertex: sampled image of its (possibly partial) semi-flower
  std::vector<std::vector<Vec2>> flower(s.num_vertices);
  std::vector<char> have(s.num_vertices, 0);
  auto vf = vertex_faces(s);
  std::vector<char> in(s.faces.size(), 0);
  for (int f : p.faces) in[f] = 1;
  auto flower_of = [&](int v) -> const std::vector<Vec2>& {
    if (!have[v]) {
      for (int f : vf[v])
        if (in[f]) {
          auto pts = kite_image(s, m, f, corner_index(s.faces[f], v), samples);
          flower[v].insert(flower[v].end(), pts.begin(), pts.end());
        }
      have[v] = 1;
    }
    return flower[v];
  };
  std::vector<char> bnd(s.num_vertices, 0);
  for (int v : p.boundary_loop) bnd[v] = 1;
  std::vector<LengthAreaRow> rows;
  for (double delta : deltas) {
    if (!(delta > 0)) throw Error(ErrorKind::InvalidInput, "delta must be positive");
    for (size_t i = 0; i < centers.size(); ++i) {
      LengthAreaRow row;
      row.delta = delta;
      row.center = centers[i];
      row.log_reference = delta < 1 ? std::pow(-std::log(delta), -0.5) : std::numeric_limits<double>::quiet_NaN();
      double arg = std::log(1 - lambda) - std::log(16 * delta);
      row.ball_reference = arg > 0 ? std::pow(arg, -0.5) : std::numeric_limits<double>::quiet_NaN();
      std::vector<Vec2> pts;
      for (int h : config.cells_meeting(Box::centered(centers[i], delta * S))) {
        if (!p.contains_vertex(h))
          throw Error(ErrorKind::Carrier, "coverage violation: cell " + std::to_string(h) + " is outside the portion");
        const auto& fl = flower_of(h);
        pts.insert(pts.end(), fl.begin(), fl.end());
      }
      row.square_diameter = diameter_of(pts) / S;
      row.ball_diameter = std::numeric_limits<double>::quiet_NaN();
      if (!ball_centers.empty()) {
        Vec2 z = ball_centers[i];
        if (norm(z) > lambda * S * (1 + 1e-12))
          throw Error(ErrorKind::InvalidInput, "ball center outside lambda |S|");
        std::vector<Vec2> cellpts;
        for (int v : p.vertices) {
          const auto& fl = flower_of(v);
          double dmin = std::numeric_limits<double>::infinity();
          for (const auto& x : fl) dmin = std::min(dmin, dist(x, z));
          bool inside = false;
          const size_t block = 4 * samples;
          for (size_t b = 0; b + block <= fl.size() && !inside; b += block)
            inside = point_in_polygon(Polygon(fl.begin() + b, fl.begin() + b + block), z);
          if (dmin > delta * S && !inside) continue;
          if (bnd[v]) throw Error(ErrorKind::Carrier, "coverage violation: ball meets the image of the portion boundary");
          for (auto& x : config.cell(v).vertices()) cellpts.push_back(x);
        }
        row.ball_diameter = diameter_of(cellpts) / S;
      }
      rows.push_back(row);
    }
  }
  return rows;
}

}  // namespace cellembed
