#include "cellembed/planar_map.hpp"

#include <algorithm>
#include <cstdio>
#include <deque>
#include <sstream>
#include <unordered_map>

#include "cellembed/error.hpp"

namespace cellembed {

namespace {

struct DirKey {
  int from, to, edge;
  bool operator==(const DirKey& o) const { return from == o.from && to == o.to && edge == o.edge; }
};
struct DirKeyHash {
  size_t operator()(const DirKey& k) const {
    std::uint64_t h = static_cast<std::uint64_t>(k.from) * 0x9E3779B97F4A7C15ULL;
    h ^= static_cast<std::uint64_t>(k.to) + 0x7F4A7C159E3779B9ULL + (h << 6) + (h >> 2);
    h ^= static_cast<std::uint64_t>(k.edge + 1) * 0xC2B2AE3D27D4EB4FULL;
    return static_cast<size_t>(h);
  }
};

std::string pair_name(int u, int v) {
  return "(" + std::to_string(u) + "," + std::to_string(v) + ")";
}

}  // namespace

std::string MapDiagnostics::summary() const {
  std::ostringstream os;
  os << "V=" << vertices << " E=" << edges << " F=" << faces << " chi=" << euler << " components=" << components
     << " loops=" << loops << " multi_edges=" << multi_edges << " type_ii=" << type_ii << " type_iii=" << type_iii
     << " outer_degree=" << outer_degree << " hist={";
  bool first = true;
  for (auto& [d, c] : face_degree_histogram) {
    os << (first ? "" : ",") << d << ":" << c;
    first = false;
  }
  os << "}";
  return os.str();
}

HalfEdgeMap HalfEdgeMap::from_rotations(const std::vector<std::vector<int>>& rotations, OuterSpec outer) {
  RotationSystem rs(rotations.size());
  for (size_t v = 0; v < rotations.size(); ++v)
    for (int u : rotations[v]) rs[v].push_back({u, -1});
  return from_rotation_entries(rs, outer);
}

HalfEdgeMap HalfEdgeMap::from_rotation_entries(const RotationSystem& rot, OuterSpec outer) {
  const int n = static_cast<int>(rot.size());
  // multiplicity bookkeeping per ordered pair
  std::unordered_map<DirKey, int, DirKeyHash> where;  // (v,u,edge) -> position in v's list
  std::unordered_map<DirKey, int, DirKeyHash> mult;   // (v,u,-2) -> count
  for (int v = 0; v < n; ++v) {
    for (size_t i = 0; i < rot[v].size(); ++i) {
      const RotationEntry& e = rot[v][i];
      if (e.neighbor < 0 || e.neighbor >= n)
        throw Error(ErrorKind::InconsistentRotation, "vertex " + std::to_string(v) + " lists unknown neighbor " +
                                                         std::to_string(e.neighbor));
      if (e.neighbor == v) throw Error(ErrorKind::InvalidInput, "loop at vertex " + std::to_string(v));
      mult[{v, e.neighbor, -2}]++;
      DirKey k{v, e.neighbor, e.edge};
      if (where.count(k))
        throw Error(ErrorKind::InconsistentRotation,
                    "pair " + pair_name(v, e.neighbor) + " listed twice without distinct edge ids");
      where[k] = static_cast<int>(i);
    }
  }
  for (auto& [k, c] : mult) {
    auto it = mult.find({k.to, k.from, -2});
    int other = it == mult.end() ? 0 : it->second;
    if (other != c)
      throw Error(ErrorKind::InconsistentRotation, "multiplicity mismatch for pair " + pair_name(k.from, k.to));
  }

  HalfEdgeMap m;
  m.rotation_.assign(n, {});
  std::vector<std::vector<int>> assigned(n);
  for (int v = 0; v < n; ++v) {
    assigned[v].assign(rot[v].size(), -1);
    m.rotation_[v].assign(rot[v].size(), -1);
  }
  for (int v = 0; v < n; ++v) {
    for (size_t i = 0; i < rot[v].size(); ++i) {
      if (assigned[v][i] >= 0) continue;
      const RotationEntry& e = rot[v][i];
      int u = e.neighbor;
      if (mult[{v, u, -2}] > 1 && e.edge < 0)
        throw Error(ErrorKind::InconsistentRotation,
                    "parallel edges " + pair_name(v, u) + " require explicit edge ids");
      auto it = where.find({u, v, e.edge});
      if (it == where.end())
        throw Error(ErrorKind::InconsistentRotation, "no matching entry for " + pair_name(v, u) +
                                                         (e.edge >= 0 ? " edge " + std::to_string(e.edge) : ""));
      int j = it->second;
      if (assigned[u][j] >= 0)
        throw Error(ErrorKind::InconsistentRotation, "entry for " + pair_name(u, v) + " matched twice");
      int h = static_cast<int>(m.half_edges_.size());
      m.half_edges_.push_back({h + 1, -1, v, -1});
      m.half_edges_.push_back({h, -1, u, -1});
      assigned[v][i] = h;
      assigned[u][j] = h + 1;
      m.rotation_[v][i] = h;
      m.rotation_[u][j] = h + 1;
    }
  }
  m.labels_.resize(n);
  for (int v = 0; v < n; ++v) m.labels_[v] = v;
  m.compute_faces(outer);
  return m;
}

void HalfEdgeMap::compute_faces(OuterSpec outer) {
  const int H = num_half_edges();
  std::vector<int> pos(H, -1);
  for (int v = 0; v < num_vertices(); ++v)
    for (size_t i = 0; i < rotation_[v].size(); ++i) pos[rotation_[v][i]] = static_cast<int>(i);
  for (int h = 0; h < H; ++h) {
    int t = half_edges_[h].twin;
    int v = half_edges_[t].origin;
    int d = static_cast<int>(rotation_[v].size());
    half_edges_[h].next = rotation_[v][(pos[t] - 1 + d) % d];
  }
  face_start_.clear();
  face_degree_.clear();
  for (int h = 0; h < H; ++h) {
    if (half_edges_[h].face >= 0) continue;
    int f = static_cast<int>(face_start_.size());
    int deg = 0;
    int g = h;
    do {
      half_edges_[g].face = f;
      ++deg;
      g = half_edges_[g].next;
    } while (g != h && deg <= H);
    face_start_.push_back(h);
    face_degree_.push_back(deg);
  }
  outer_face_ = -1;
  if (outer.mode == OuterSpec::Mode::Edge) {
    auto h = find_half_edge(outer.u, outer.v);
    if (!h) throw Error(ErrorKind::InvalidInput, "outer face edge " + pair_name(outer.u, outer.v) + " not in map");
    outer_face_ = half_edges_[*h].face;
  } else if (outer.mode == OuterSpec::Mode::Auto && !face_start_.empty()) {
    int best = 0;
    for (int f = 0; f < num_faces(); ++f)
      if (face_degree_[f] >= face_degree_[best]) best = f;
    outer_face_ = best;
  }
}

void HalfEdgeMap::set_outer_face(int f) {
  if (f < -1 || f >= num_faces()) throw Error(ErrorKind::InvalidInput, "no face " + std::to_string(f));
  outer_face_ = f;
}

void HalfEdgeMap::set_labels(std::vector<std::int64_t> labels) {
  if (static_cast<int>(labels.size()) != num_vertices())
    throw Error(ErrorKind::InvalidInput, "label count does not match vertex count");
  labels_ = std::move(labels);
}

std::vector<int> HalfEdgeMap::neighbors(int v) const {
  std::vector<int> r;
  r.reserve(rotation_[v].size());
  for (int h : rotation_[v]) r.push_back(target(h));
  return r;
}

std::optional<int> HalfEdgeMap::find_half_edge(int u, int v) const {
  if (u < 0 || u >= num_vertices()) return std::nullopt;
  for (int h : rotation_[u])
    if (target(h) == v) return h;
  return std::nullopt;
}

std::vector<int> HalfEdgeMap::face_vertices(int f) const {
  std::vector<int> r;
  for (int h : face_half_edges(f)) r.push_back(origin(h));
  return r;
}

std::vector<int> HalfEdgeMap::face_half_edges(int f) const {
  std::vector<int> r;
  int h = face_start_[f];
  int g = h;
  do {
    r.push_back(g);
    g = next(g);
  } while (g != h);
  return r;
}

bool HalfEdgeMap::is_boundary_vertex(int v) const {
  if (outer_face_ < 0) return false;
  for (int h : rotation_[v])
    if (face(h) == outer_face_ || face(twin(h)) == outer_face_) return true;
  return false;
}

RotationSystem HalfEdgeMap::rotation_system() const {
  RotationSystem rs(num_vertices());
  for (int v = 0; v < num_vertices(); ++v)
    for (int h : rotation_[v]) rs[v].push_back({target(h), edge_id(h)});
  return rs;
}

MapDiagnostics HalfEdgeMap::validate() const {
  MapDiagnostics d;
  const int H = num_half_edges();
  d.vertices = num_vertices();
  d.edges = num_edges();
  d.faces = H == 0 ? 1 : num_faces();
  d.outer_face = outer_face_;
  std::vector<int> pre(H, 0);
  for (int h = 0; h < H; ++h) {
    int t = half_edges_[h].twin;
    if (t < 0 || t >= H || t == h || half_edges_[t].twin != h) d.twin_involution = false;
    int nx = half_edges_[h].next;
    if (nx < 0 || nx >= H) {
      d.next_permutation = false;
      continue;
    }
    pre[nx]++;
    if (half_edges_[nx].origin != target(h)) d.next_permutation = false;
    if (half_edges_[h].origin == target(h)) d.loops++;
  }
  for (int h = 0; h < H; ++h)
    if (pre[h] != 1) d.next_permutation = false;
  long fsum = 0;
  for (int f = 0; f < num_faces(); ++f) {
    fsum += face_degree_[f];
    if (f == outer_face_)
      d.outer_degree = face_degree_[f];
    else
      d.face_degree_histogram[face_degree_[f]]++;
  }
  long vsum = 0;
  for (int v = 0; v < num_vertices(); ++v) vsum += degree(v);
  d.degree_sums_ok = (fsum == H || H == 0) && vsum == H;
  // parallel edges
  for (int v = 0; v < num_vertices(); ++v) {
    std::vector<int> nb = neighbors(v);
    std::sort(nb.begin(), nb.end());
    for (size_t i = 1; i < nb.size(); ++i)
      if (nb[i] == nb[i - 1] && nb[i] > v) d.multi_edges++;
  }
  d.type_ii = d.loops == 0;
  d.type_iii = d.type_ii && d.multi_edges == 0;
  // components
  std::vector<int> comp(num_vertices(), -1);
  for (int s = 0; s < num_vertices(); ++s) {
    if (comp[s] >= 0) continue;
    std::deque<int> q{s};
    comp[s] = d.components;
    while (!q.empty()) {
      int v = q.front();
      q.pop_front();
      for (int u : neighbors(v))
        if (comp[u] < 0) {
          comp[u] = d.components;
          q.push_back(u);
        }
    }
    d.components++;
  }
  d.euler = d.vertices - d.edges + d.faces;
  return d;
}

std::string HalfEdgeMap::serialize() const {
  std::ostringstream os;
  os << "cellembed-map 1\n";
  os << "vertices " << num_vertices() << "\n";
  for (int v = 0; v < num_vertices(); ++v) {
    os << v << ":";
    std::vector<int> nb = neighbors(v);
    for (int h : rotation_[v]) {
      int u = target(h);
      os << " " << u;
      if (std::count(nb.begin(), nb.end(), u) > 1) os << "#" << edge_id(h);
    }
    os << "\n";
  }
  if (outer_face_ >= 0)
    os << "outer " << outer_face_ << "\n";
  else
    os << "outer none\n";
  if (root_) os << "root " << *root_ << "\n";
  bool identity = true;
  for (int v = 0; v < num_vertices(); ++v)
    if (labels_[v] != v) identity = false;
  if (!identity) {
    os << "labels";
    for (auto l : labels_) os << " " << l;
    os << "\n";
  }
  os << "faces " << num_faces() << "\n";
  for (int f = 0; f < num_faces(); ++f) {
    os << f << ":";
    for (int v : face_vertices(f)) os << " " << v;
    os << "\n";
  }
  os << "end\n";
  return os.str();
}

HalfEdgeMap HalfEdgeMap::parse(const std::string& text) {
  std::istringstream is(text);
  std::string line, word;
  auto fail = [](const std::string& msg) { return Error(ErrorKind::InvalidInput, "map parse: " + msg); };
  if (!std::getline(is, line) || line != "cellembed-map 1") throw fail("bad header");
  int n = 0;
  if (!std::getline(is, line) || std::sscanf(line.c_str(), "vertices %d", &n) != 1 || n < 0)
    throw fail("missing vertex count");
  RotationSystem rs(n);
  for (int v = 0; v < n; ++v) {
    if (!std::getline(is, line)) throw fail("truncated rotation table");
    auto colon = line.find(':');
    if (colon == std::string::npos || std::stoi(line.substr(0, colon)) != v) throw fail("bad rotation line " + line);
    std::istringstream ls(line.substr(colon + 1));
    while (ls >> word) {
      RotationEntry e;
      auto hash = word.find('#');
      e.neighbor = std::stoi(word.substr(0, hash));
      if (hash != std::string::npos) e.edge = std::stoi(word.substr(hash + 1));
      rs[v].push_back(e);
    }
  }
  OuterSpec outer = OuterSpec::none();
  int outer_face = -1;
  std::optional<int> root;
  std::vector<std::int64_t> labels;
  std::vector<std::vector<int>> faces;
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    ls >> word;
    if (word == "outer") {
      std::string v;
      ls >> v;
      if (v != "none") outer_face = std::stoi(v);
    } else if (word == "root") {
      int r;
      ls >> r;
      root = r;
    } else if (word == "labels") {
      std::int64_t l;
      while (ls >> l) labels.push_back(l);
    } else if (word == "faces") {
      int F;
      ls >> F;
      for (int f = 0; f < F; ++f) {
        if (!std::getline(is, line)) throw fail("truncated face table");
        auto colon = line.find(':');
        if (colon == std::string::npos) throw fail("bad face line");
        std::istringstream fs(line.substr(colon + 1));
        std::vector<int> fv;
        int x;
        while (fs >> x) fv.push_back(x);
        faces.push_back(fv);
      }
    } else if (word == "end") {
      break;
    } else if (!word.empty()) {
      throw fail("unknown record '" + word + "'");
    }
  }
  HalfEdgeMap m = from_rotation_entries(rs, outer);
  if (static_cast<int>(faces.size()) != m.num_faces()) throw fail("face table does not match rotations");
  for (int f = 0; f < m.num_faces(); ++f)
    if (m.face_vertices(f) != faces[f]) throw fail("face " + std::to_string(f) + " does not match rotations");
  if (outer_face >= 0) m.set_outer_face(outer_face);
  if (root) m.set_root(*root);
  if (!labels.empty()) m.set_labels(labels);
  return m;
}

std::vector<int> bfs_distances(const HalfEdgeMap& map, int source) {
  std::vector<int> d(map.num_vertices(), -1);
  std::deque<int> q{source};
  d[source] = 0;
  while (!q.empty()) {
    int v = q.front();
    q.pop_front();
    for (int h : map.rotation(v)) {
      int u = map.target(h);
      if (d[u] < 0) {
        d[u] = d[v] + 1;
        q.push_back(u);
      }
    }
  }
  return d;
}

namespace {

// canonical rotation of a cyclic sequence so that its smallest element comes first
std::vector<int> canonical_cycle(std::vector<int> c) {
  if (c.empty()) return c;
  auto it = std::min_element(c.begin(), c.end());
  std::rotate(c.begin(), it, c.end());
  return c;
}

}  // namespace

RootedBall bs_ball(const HalfEdgeMap& map, int v0, int m) {
  if (v0 < 0 || v0 >= map.num_vertices()) throw Error(ErrorKind::InvalidInput, "root vertex out of range");
  std::vector<int> d = bfs_distances(map, v0);
  RootedBall ball;
  ball.radius = m;
  std::vector<int> idx(map.num_vertices(), -1);
  for (int v = 0; v < map.num_vertices(); ++v)
    if (d[v] >= 0 && d[v] <= m) {
      idx[v] = static_cast<int>(ball.original.size());
      ball.original.push_back(v);
    }
  RotationSystem rs(ball.original.size());
  std::vector<std::int64_t> labels;
  for (size_t i = 0; i < ball.original.size(); ++i) {
    int v = ball.original[i];
    labels.push_back(map.labels()[v]);
    for (int h : map.rotation(v)) {
      int u = map.target(h);
      if (idx[u] >= 0) rs[i].push_back({idx[u], map.edge_id(h)});
    }
  }
  ball.submap = HalfEdgeMap::from_rotation_entries(rs, OuterSpec::none());
  ball.submap.set_labels(labels);
  ball.root = idx[v0];
  int outer = -1;
  if (map.outer_face() >= 0) {
    std::vector<int> ov = map.face_vertices(map.outer_face());
    bool kept = std::all_of(ov.begin(), ov.end(), [&](int v) { return idx[v] >= 0; });
    if (kept) {
      for (int& v : ov) v = idx[v];
      ov = canonical_cycle(ov);
      for (int f = 0; f < ball.submap.num_faces(); ++f)
        if (canonical_cycle(ball.submap.face_vertices(f)) == ov) outer = f;
    }
  }
  if (outer < 0 && ball.submap.num_faces() > 0) {
    outer = 0;
    for (int f = 0; f < ball.submap.num_faces(); ++f)
      if (ball.submap.face_degree(f) >= ball.submap.face_degree(outer)) outer = f;
  }
  if (outer >= 0) ball.submap.set_outer_face(outer);
  if (!ball.submap.rotation(ball.root).empty()) ball.submap.set_root(ball.submap.rotation(ball.root)[0]);
  return ball;
}

AugmentedMap augment_faces(const HalfEdgeMap& map, bool include_outer) {
  MapDiagnostics diag = map.validate();
  if (!diag.type_iii) throw Error(ErrorKind::Structural, "face augmentation needs a simple map");
  const int n = map.num_vertices();
  AugmentedMap out;
  out.face_vertex.assign(map.num_faces(), -1);
  int next_id = n;
  for (int f = 0; f < map.num_faces(); ++f) {
    if (!include_outer && f == map.outer_face()) continue;
    std::vector<int> fv = map.face_vertices(f);
    std::vector<int> sorted = fv;
    std::sort(sorted.begin(), sorted.end());
    auto dup = std::adjacent_find(sorted.begin(), sorted.end());
    if (dup != sorted.end())
      throw Error(ErrorKind::Structural, "map is not 2-connected: face " + std::to_string(f) + " revisits vertex " +
                                             std::to_string(*dup));
    out.face_vertex[f] = next_id++;
  }
  RotationSystem rs(next_id);
  for (int v = 0; v < n; ++v) {
    for (int h : map.rotation(v)) {
      rs[v].push_back({map.target(h), -1});
      int fv = out.face_vertex[map.face(h)];
      if (fv >= 0) rs[v].push_back({fv, -1});
    }
  }
  for (int f = 0; f < map.num_faces(); ++f) {
    int fv = out.face_vertex[f];
    if (fv < 0) continue;
    for (int v : map.face_vertices(f)) rs[fv].push_back({v, -1});
  }
  OuterSpec outer = OuterSpec::none();
  if (!include_outer && map.outer_face() >= 0) {
    int h = map.face_start(map.outer_face());
    outer = OuterSpec::left_of(map.origin(h), map.target(h));
  }
  out.map = HalfEdgeMap::from_rotation_entries(rs, outer);
  std::vector<std::int64_t> labels(next_id);
  for (int v = 0; v < n; ++v) labels[v] = map.labels()[v];
  for (int f = 0; f < map.num_faces(); ++f)
    if (out.face_vertex[f] >= 0) labels[out.face_vertex[f]] = -1 - f;
  out.map.set_labels(labels);
  for (int f = 0; f < out.map.num_faces(); ++f)
    if (out.map.is_bounded(f) && out.map.face_degree(f) != 3)
      throw Error(ErrorKind::Structural, "augmented face " + std::to_string(f) + " is not a triangle");
  if (!out.map.validate().type_iii) throw Error(ErrorKind::Structural, "augmented map is not simple");
  return out;
}

}  // namespace cellembed
