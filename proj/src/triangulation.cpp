#include "cellembed/triangulation.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <unordered_map>

#include "cellembed/error.hpp"

namespace cellembed {

namespace {

inline std::uint64_t dkey(int u, int v) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(u)) << 32) | static_cast<std::uint32_t>(v);
}

struct LinkResult {
  std::vector<int> petals;
  std::vector<int> faces;
  bool boundary = false;
  bool ok = true;
};

// chain the link arcs a->b of one vertex
LinkResult chain_link(const std::vector<std::array<int, 3>>& arcs_in) {
  // arcs: (a, b, face)
  LinkResult r;
  std::unordered_map<int, int> out;  // a -> arc index
  std::unordered_map<int, int> indeg;
  for (size_t i = 0; i < arcs_in.size(); ++i) {
    if (out.count(arcs_in[i][0])) {
      r.ok = false;
      return r;
    }
    out[arcs_in[i][0]] = static_cast<int>(i);
    indeg[arcs_in[i][1]]++;
  }
  int start = -1, starts = 0;
  for (auto& a : arcs_in)
    if (!indeg.count(a[0])) {
      ++starts;
      if (start < 0 || a[0] < start) start = a[0];
    }
  for (auto& [v, d] : indeg)
    if (d > 1) {
      r.ok = false;
      return r;
    }
  if (starts > 1) {
    r.ok = false;
    return r;
  }
  r.boundary = starts == 1;
  int a = r.boundary ? start : arcs_in[0][0];
  size_t steps = 0;
  r.petals.push_back(a);
  while (steps < arcs_in.size()) {
    auto it = out.find(a);
    if (it == out.end()) break;
    const auto& arc = arcs_in[it->second];
    r.faces.push_back(arc[2]);
    a = arc[1];
    ++steps;
    if (!r.boundary && a == r.petals[0]) break;
    r.petals.push_back(a);
  }
  if (steps != arcs_in.size()) r.ok = false;
  if (!r.boundary && a != r.petals[0]) r.ok = false;
  return r;
}

}  // namespace

Triangulation::Triangulation(int n, std::vector<std::array<int, 3>> faces) : faces_(std::move(faces)) {
  if (n <= 0) throw Error(ErrorKind::Structural, "empty triangulation");
  std::vector<std::vector<std::array<int, 3>>> arcs(n);
  std::unordered_map<std::uint64_t, int> dir;
  dir.reserve(faces_.size() * 3);
  for (size_t f = 0; f < faces_.size(); ++f) {
    auto& t = faces_[f];
    for (int i = 0; i < 3; ++i) {
      if (t[i] < 0 || t[i] >= n) throw Error(ErrorKind::Structural, "face vertex out of range");
    }
    if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2])
      throw Error(ErrorKind::Structural, "degenerate face " + std::to_string(f));
    for (int i = 0; i < 3; ++i) {
      int u = t[i], v = t[(i + 1) % 3], w = t[(i + 2) % 3];
      if (!dir.emplace(dkey(u, v), static_cast<int>(f)).second)
        throw Error(ErrorKind::Structural, "directed edge (" + std::to_string(u) + "," + std::to_string(v) +
                                               ") in two faces: not an oriented manifold");
      arcs[u].push_back({v, w, static_cast<int>(f)});
    }
  }
  petals_.assign(n, {});
  petal_faces_.assign(n, {});
  boundary_.assign(n, 0);
  for (int v = 0; v < n; ++v) {
    if (arcs[v].empty()) throw Error(ErrorKind::Structural, "vertex " + std::to_string(v) + " has no faces");
    LinkResult lr = chain_link(arcs[v]);
    if (!lr.ok) throw Error(ErrorKind::Structural, "vertex " + std::to_string(v) + " link is not a disk");
    petals_[v] = std::move(lr.petals);
    petal_faces_[v] = std::move(lr.faces);
    boundary_[v] = lr.boundary;
  }
  // boundary edges: u->v without v->u
  std::unordered_map<int, int> bnext;
  long E = 0;
  for (auto& [k, f] : dir) {
    int u = static_cast<int>(k >> 32), v = static_cast<int>(k & 0xffffffffu);
    if (!dir.count(dkey(v, u))) {
      if (bnext.count(u)) throw Error(ErrorKind::Structural, "boundary pinched at vertex " + std::to_string(u));
      bnext[u] = v;
      ++E;
    } else if (u < v) {
      ++E;
    }
  }
  if (bnext.empty()) throw Error(ErrorKind::Structural, "closed surface: not a disk triangulation");
  int start = n;
  for (auto& [u, v] : bnext) start = std::min(start, u);
  int u = start;
  do {
    boundary_cycle_.push_back(u);
    u = bnext.at(u);
  } while (u != start && boundary_cycle_.size() <= bnext.size());
  if (boundary_cycle_.size() != bnext.size())
    throw Error(ErrorKind::Structural, "boundary is not a single cycle");
  long chi = static_cast<long>(n) - E + static_cast<long>(faces_.size());
  if (chi != 1) throw Error(ErrorKind::Structural, "Euler characteristic " + std::to_string(chi) + " != 1");
  labels_.resize(n);
  for (int v = 0; v < n; ++v) labels_[v] = v;
}

Triangulation Triangulation::from_map(const HalfEdgeMap& map) {
  std::vector<std::array<int, 3>> faces;
  for (int f = 0; f < map.num_faces(); ++f) {
    if (!map.is_bounded(f)) continue;
    if (map.face_degree(f) != 3)
      throw Error(ErrorKind::Structural, "bounded face " + std::to_string(f) + " is not a triangle");
    auto fv = map.face_vertices(f);
    faces.push_back({fv[0], fv[1], fv[2]});
  }
  Triangulation t(map.num_vertices(), std::move(faces));
  t.set_labels(map.labels());
  return t;
}

int Triangulation::num_interior() const {
  int c = 0;
  for (char b : boundary_) c += !b;
  return c;
}

std::vector<std::array<int, 2>> Triangulation::edges() const {
  std::vector<std::array<int, 2>> e;
  for (int v = 0; v < num_vertices(); ++v)
    for (int u : petals_[v])
      if (v < u) e.push_back({v, u});
  return e;
}

std::array<int, 2> Triangulation::edge_faces(int u, int v) const {
  std::array<int, 2> r{-1, -1};
  const auto& p = petals_[u];
  const auto& pf = petal_faces_[u];
  for (size_t i = 0; i < pf.size(); ++i) {
    // face (u, p[i], p[i+1]): left of u->p[i] is this face; left of p[i+1]->u too
    if (p[i] == v) r[0] = pf[i];
    if (p[(i + 1) % p.size()] == v) r[1] = pf[i];
  }
  return r;
}

int Triangulation::opposite(int f, int u, int v) const {
  for (int x : faces_[f])
    if (x != u && x != v) return x;
  return -1;
}

void Triangulation::set_labels(std::vector<std::int64_t> labels) {
  if (static_cast<int>(labels.size()) != num_vertices())
    throw Error(ErrorKind::InvalidInput, "label count does not match vertex count");
  labels_ = std::move(labels);
}

HalfEdgeMap Triangulation::to_map() const {
  std::vector<std::vector<int>> rot(num_vertices());
  for (int v = 0; v < num_vertices(); ++v) rot[v] = petals_[v];
  int u = boundary_cycle_[0], w = boundary_cycle_[1 % boundary_cycle_.size()];
  // the outer face is to the left of w -> u
  HalfEdgeMap m = HalfEdgeMap::from_rotations(rot, OuterSpec::left_of(w, u));
  m.set_labels(labels_);
  return m;
}

DiskTruncation disk_truncation(int n, const std::vector<std::array<int, 3>>& faces, int root,
                               const std::function<bool(int)>& keep) {
  const int F = static_cast<int>(faces.size());
  std::unordered_map<std::uint64_t, int> dir;
  dir.reserve(F * 3);
  for (int f = 0; f < F; ++f)
    for (int i = 0; i < 3; ++i) dir[dkey(faces[f][i], faces[f][(i + 1) % 3])] = f;
  auto nbr = [&](int f, int i) {
    auto it = dir.find(dkey(faces[f][(i + 1) % 3], faces[f][i]));
    return it == dir.end() ? -1 : it->second;
  };
  std::vector<char> in(F, 0);
  for (int f = 0; f < F; ++f) in[f] = keep(faces[f][0]) && keep(faces[f][1]) && keep(faces[f][2]);

  std::vector<std::vector<int>> vfaces(n);
  for (int f = 0; f < F; ++f)
    for (int x : faces[f]) vfaces[x].push_back(f);

  for (int round = 0; round < 1000; ++round) {
    // component of root
    int seed = -1;
    for (int f : vfaces[root])
      if (in[f]) {
        seed = f;
        break;
      }
    if (seed < 0) throw Error(ErrorKind::Structural, "root has no retained faces");
    std::vector<char> comp(F, 0);
    std::deque<int> q{seed};
    comp[seed] = 1;
    while (!q.empty()) {
      int f = q.front();
      q.pop_front();
      for (int i = 0; i < 3; ++i) {
        int g = nbr(f, i);
        if (g >= 0 && in[g] && !comp[g]) {
          comp[g] = 1;
          q.push_back(g);
        }
      }
    }
    // fill holes: complement components not reaching the original boundary
    std::vector<int> hole(F, -1);
    for (int f = 0; f < F; ++f) {
      if (comp[f] || hole[f] >= 0) continue;
      std::vector<int> members{f};
      hole[f] = f;
      bool open = false;
      for (size_t k = 0; k < members.size(); ++k) {
        int g = members[k];
        for (int i = 0; i < 3; ++i) {
          int h = nbr(g, i);
          if (h < 0) {
            open = true;
            continue;
          }
          if (!comp[h] && hole[h] < 0) {
            hole[h] = f;
            members.push_back(h);
          }
        }
      }
      if (!open)
        for (int g : members) comp[g] = 2;
    }
    // pinch check
    bool changed = false;
    for (int v = 0; v < n && !changed; ++v) {
      std::vector<std::array<int, 3>> arcs;
      for (int f : vfaces[v]) {
        if (!comp[f]) continue;
        auto& t = faces[f];
        int i = t[0] == v ? 0 : (t[1] == v ? 1 : 2);
        arcs.push_back({t[(i + 1) % 3], t[(i + 2) % 3], f});
      }
      if (arcs.empty()) continue;
      LinkResult lr = chain_link(arcs);
      if (lr.ok) continue;
      if (v == root) throw Error(ErrorKind::Structural, "root is a pinch point of the truncation");
      // drop every retained face at the pinch vertex except the fan containing the most faces
      std::vector<char> used(arcs.size(), 0);
      std::vector<std::vector<int>> fans;
      std::unordered_map<int, int> from;
      for (size_t i = 0; i < arcs.size(); ++i) from[arcs[i][0]] = static_cast<int>(i);
      for (size_t i = 0; i < arcs.size(); ++i) {
        if (used[i]) continue;
        std::vector<int> fan;
        size_t j = i;
        while (!used[j]) {
          used[j] = 1;
          fan.push_back(arcs[j][2]);
          auto it = from.find(arcs[j][1]);
          if (it == from.end()) break;
          j = it->second;
        }
        fans.push_back(fan);
      }
      size_t best = 0;
      for (size_t i = 0; i < fans.size(); ++i)
        if (fans[i].size() > fans[best].size()) best = i;
      for (size_t i = 0; i < fans.size(); ++i)
        if (i != best)
          for (int f : fans[i]) in[f] = 0;
      changed = true;
    }
    if (changed) continue;
    std::vector<int> idx(n, -1);
    DiskTruncation out;
    std::vector<std::array<int, 3>> kept;
    for (int f = 0; f < F; ++f)
      if (comp[f])
        for (int x : faces[f]) idx[x] = 0;
    for (int v = 0; v < n; ++v)
      if (idx[v] == 0) {
        idx[v] = static_cast<int>(out.original.size());
        out.original.push_back(v);
      }
    for (int f = 0; f < F; ++f)
      if (comp[f]) kept.push_back({idx[faces[f][0]], idx[faces[f][1]], idx[faces[f][2]]});
    out.tri = Triangulation(static_cast<int>(out.original.size()), std::move(kept));
    std::vector<std::int64_t> labels;
    for (int v : out.original) labels.push_back(v);
    out.tri.set_labels(labels);
    out.root = idx[root];
    if (out.tri.is_boundary(out.root)) throw Error(ErrorKind::Structural, "root lies on the truncation boundary");
    return out;
  }
  throw Error(ErrorKind::Structural, "disk truncation did not stabilize");
}

}  // namespace cellembed
