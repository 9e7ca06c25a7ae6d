#include "cellembed/generators.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <numeric>
#include <set>
#include <unordered_map>

#include "cellembed/delaunay.hpp"
#include "cellembed/error.hpp"
#include "cellembed/rng.hpp"

namespace cellembed {

const char* generator_kind_name(GeneratorKind k) {
  switch (k) {
    case GeneratorKind::PoissonVoronoi: return "poisson-voronoi";
    case GeneratorKind::HexPercolation: return "hex-percolation";
    case GeneratorKind::TriangularLattice: return "lattice-triangular";
    case GeneratorKind::SquareLattice: return "lattice-square";
  }
  return "?";
}

GeneratorKind parse_generator_kind(const std::string& s) {
  if (s == "poisson-voronoi") return GeneratorKind::PoissonVoronoi;
  if (s == "hex-percolation") return GeneratorKind::HexPercolation;
  if (s == "lattice-triangular" || s == "triangular") return GeneratorKind::TriangularLattice;
  if (s == "lattice-square" || s == "unit-square") return GeneratorKind::SquareLattice;
  throw Error(ErrorKind::Usage, "unknown generator kind '" + s + "'");
}

void GeneratorSpec::check() const {
  if (!(intensity > 0)) throw Error(ErrorKind::InvalidInput, "intensity must be positive");
  if (!(window > 0)) throw Error(ErrorKind::InvalidInput, "window must be positive");
  if (kind == GeneratorKind::HexPercolation && !(percolation_p >= 0 && percolation_p < kPercolationBound))
    throw Error(ErrorKind::InvalidInput, "percolation parameter must lie in [0, p_c)");
  double b = effective_buffer();
  double need = kind == GeneratorKind::PoissonVoronoi ? 4.0 / std::sqrt(intensity) : 2.0;
  if (b < need) throw Error(ErrorKind::InvalidInput, "buffer below the documented minimum");
}

double GeneratorSpec::effective_buffer() const {
  if (buffer >= 0) return buffer;
  return kind == GeneratorKind::PoissonVoronoi ? 10.0 / std::sqrt(intensity) : 10.0;
}

// ---------------------------------------------------------------- Voronoi

CellConfiguration poisson_voronoi(const GeneratorSpec& spec) {
  spec.check();
  const double L = spec.window, b = spec.effective_buffer();
  const double outer = L / 2 + b;
  const double inner = L / 2 + b / 2;
  auto in_region = [&](const Vec2& p, double r) {
    return spec.disk_window ? norm(p) <= r : (std::abs(p.x) <= r && std::abs(p.y) <= r);
  };
  // Poisson counts per lattice tile, keyed by tile coordinates
  const double t = 1.0 / std::sqrt(spec.intensity);
  const auto i0 = static_cast<std::int64_t>(std::floor(-outer / t)), i1 = static_cast<std::int64_t>(std::floor(outer / t));
  std::vector<Vec2> pts;
  for (std::int64_t j = i0; j <= i1; ++j)
    for (std::int64_t i = i0; i <= i1; ++i) {
      CounterRng rng({spec.seed, 0x5EEDu, static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(j)});
      std::uint64_t n = rng.poisson(spec.intensity * t * t);
      for (std::uint64_t k = 0; k < n; ++k) {
        Vec2 p{(i + rng.uniform()) * t, (j + rng.uniform()) * t};
        if (in_region(p, outer)) pts.push_back(p);
      }
    }
  std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& c) { return a.y < c.y || (a.y == c.y && a.x < c.x); });
  DelaunayResult D = delaunay_triangulate(pts);
  const int N = static_cast<int>(pts.size());

  std::vector<Vec2> cc(D.triangles.size());
  for (size_t k = 0; k < D.triangles.size(); ++k)
    cc[k] = circumcenter(pts[D.triangles[k][0]], pts[D.triangles[k][1]], pts[D.triangles[k][2]]);
  auto disk_inside = [&](size_t k) {
    double r = dist(cc[k], pts[D.triangles[k][0]]);
    if (spec.disk_window) return norm(cc[k]) + r <= outer;
    return std::abs(cc[k].x) + r <= outer && std::abs(cc[k].y) + r <= outer;
  };
  std::vector<int> id(N, -1);
  std::vector<int> order;
  for (int v = 0; v < N; ++v) {
    if (D.on_hull[v] || !in_region(pts[v], inner)) continue;
    bool ok = true;
    for (int k : D.star[v])
      if (!disk_inside(k)) ok = false;
    if (ok) order.push_back(v);
  }
  for (size_t k = 0; k < order.size(); ++k) id[order[k]] = static_cast<int>(k);

  Box carrier = spec.disk_window ? Box::centered({0, 0}, L / std::sqrt(2.0)) : Box::centered({0, 0}, L);
  std::vector<CellRegion> cells;
  std::vector<std::vector<int>> rot(order.size());
  std::vector<Vec2> sites;
  for (size_t k = 0; k < order.size(); ++k) {
    int v = order[k];
    // start the cycle at the lowest Voronoi vertex so the polygon does not depend on the triangulation history
    std::vector<int> star = D.star[v];
    auto low = std::min_element(star.begin(), star.end(), [&](int a, int c) {
      return cc[a].y < cc[c].y || (cc[a].y == cc[c].y && cc[a].x < cc[c].x);
    });
    std::rotate(star.begin(), low, star.end());
    Polygon poly;
    for (int tri : star) {
      poly.push_back(cc[tri]);
      const auto& T = D.triangles[tri];
      int i = T[0] == v ? 0 : (T[1] == v ? 1 : 2);
      int a = T[(i + 1) % 3];
      if (id[a] >= 0) rot[k].push_back(id[a]);
    }
    cells.emplace_back(std::move(poly));
    sites.push_back(pts[v]);
  }
  // every cell meeting the carrier must have its full neighborhood
  for (size_t k = 0; k < order.size(); ++k) {
    if (!cells[k].meets_box(carrier)) continue;
    if (static_cast<int>(rot[k].size()) != static_cast<int>(D.star[order[k]].size()))
      throw Error(ErrorKind::Carrier, "buffer too small: a window cell has an uncertified neighbor");
  }
  HalfEdgeMap map = HalfEdgeMap::from_rotations(rot, OuterSpec::automatic());
  CellConfiguration cfg(std::move(cells), std::move(map), carrier);
  cfg.set_sites(std::move(sites));
  cfg.generator = generator_kind_name(spec.kind);
  cfg.seed = spec.seed;
  cfg.meta["intensity"] = std::to_string(spec.intensity);
  cfg.meta["window"] = std::to_string(spec.window);
  cfg.meta["buffer"] = std::to_string(b);
  cfg.meta["shape"] = spec.disk_window ? "disk" : "square";
  return cfg;
}

// ---------------------------------------------------------------- hexagons

namespace {

constexpr int kDi[6] = {1, 0, -1, -1, 0, 1};
constexpr int kDj[6] = {0, 1, 1, 0, -1, -1};
// lattice vertex k of a hex, in doubled coordinates (2x, 2*sqrt(3)*y)
constexpr int kVx[6] = {1, 0, -1, -1, 0, 1};
constexpr int kVy[6] = {1, 2, 1, -1, -2, -1};

struct HexGrid {
  Vec2 w;
  std::int64_t imin = 0, jmin = 0;
  int ni = 0, nj = 0;
  std::vector<int> index;             // (i,j) -> hex id or -1
  std::vector<std::array<std::int64_t, 2>> ij;  // hex id -> lattice coords

  Vec2 center(std::int64_t i, std::int64_t j) const {
    return w + Vec2{static_cast<double>(i) + 0.5 * static_cast<double>(j), static_cast<double>(j) * std::sqrt(3.0) / 2};
  }
  int at(std::int64_t i, std::int64_t j) const {
    if (i < imin || j < jmin || i >= imin + ni || j >= jmin + nj) return -1;
    return index[static_cast<size_t>((j - jmin) * ni + (i - imin))];
  }
  int neighbor(int h, int d) const { return at(ij[h][0] + kDi[d], ij[h][1] + kDj[d]); }
  Polygon polygon(int h) const {
    Vec2 c = center(ij[h][0], ij[h][1]);
    const double rho = 1.0 / std::sqrt(3.0);
    Polygon p;
    for (int k = 0; k < 6; ++k) {
      double a = M_PI / 6 + k * M_PI / 3;
      p.push_back(c + Vec2{rho * std::cos(a), rho * std::sin(a)});
    }
    return p;
  }
  std::pair<std::int64_t, std::int64_t> vertex_key(int h, int k) const {
    std::int64_t i = ij[h][0], j = ij[h][1];
    return {2 * i + j + kVx[k], 3 * j + kVy[k]};
  }
};

HexGrid make_hex_grid(double half, Vec2 w) {
  HexGrid g;
  g.w = w;
  const double s3 = std::sqrt(3.0) / 2;
  std::int64_t j0 = static_cast<std::int64_t>(std::floor((-half - w.y) / s3)) - 1;
  std::int64_t j1 = static_cast<std::int64_t>(std::ceil((half - w.y) / s3)) + 1;
  std::int64_t i0 = static_cast<std::int64_t>(std::floor(-half - w.x - 0.5 * j1)) - 2;
  std::int64_t i1 = static_cast<std::int64_t>(std::ceil(half - w.x - 0.5 * j0)) + 2;
  g.imin = i0;
  g.jmin = j0;
  g.ni = static_cast<int>(i1 - i0 + 1);
  g.nj = static_cast<int>(j1 - j0 + 1);
  g.index.assign(static_cast<size_t>(g.ni) * g.nj, -1);
  for (std::int64_t j = j0; j <= j1; ++j)
    for (std::int64_t i = i0; i <= i1; ++i) {
      Vec2 c = g.center(i, j);
      if (std::abs(c.x) <= half && std::abs(c.y) <= half) {
        g.index[static_cast<size_t>((j - j0) * g.ni + (i - i0))] = static_cast<int>(g.ij.size());
        g.ij.push_back({i, j});
      }
    }
  return g;
}

// bounded components of the complement of `inside` hexes, searched in a
// lattice-coordinate box around them
std::vector<std::vector<std::array<std::int64_t, 2>>> enclosed_regions(
    const std::vector<std::array<std::int64_t, 2>>& members) {
  std::int64_t i0 = members[0][0], i1 = i0, j0 = members[0][1], j1 = j0;
  std::set<std::pair<std::int64_t, std::int64_t>> in;
  for (auto& m : members) {
    i0 = std::min(i0, m[0]);
    i1 = std::max(i1, m[0]);
    j0 = std::min(j0, m[1]);
    j1 = std::max(j1, m[1]);
    in.insert({m[0], m[1]});
  }
  --i0;
  --j0;
  ++i1;
  ++j1;
  const int ni = static_cast<int>(i1 - i0 + 1), nj = static_cast<int>(j1 - j0 + 1);
  std::vector<int> comp(static_cast<size_t>(ni) * nj, -1);
  auto idx = [&](std::int64_t i, std::int64_t j) { return static_cast<size_t>((j - j0) * ni + (i - i0)); };
  std::vector<std::vector<std::array<std::int64_t, 2>>> regions;
  std::vector<char> open;
  for (std::int64_t j = j0; j <= j1; ++j)
    for (std::int64_t i = i0; i <= i1; ++i) {
      if (in.count({i, j}) || comp[idx(i, j)] >= 0) continue;
      int c = static_cast<int>(regions.size());
      regions.emplace_back();
      open.push_back(0);
      std::deque<std::array<std::int64_t, 2>> q{{i, j}};
      comp[idx(i, j)] = c;
      while (!q.empty()) {
        auto [a, b] = q.front();
        q.pop_front();
        regions[c].push_back({a, b});
        if (a == i0 || a == i1 || b == j0 || b == j1) open[c] = 1;
        for (int d = 0; d < 6; ++d) {
          std::int64_t x = a + kDi[d], y = b + kDj[d];
          if (x < i0 || x > i1 || y < j0 || y > j1) continue;
          if (in.count({x, y}) || comp[idx(x, y)] >= 0) continue;
          comp[idx(x, y)] = c;
          q.push_back({x, y});
        }
      }
    }
  std::vector<std::vector<std::array<std::int64_t, 2>>> bounded;
  for (size_t c = 0; c < regions.size(); ++c)
    if (!open[c]) bounded.push_back(std::move(regions[c]));
  return bounded;
}

struct HexCells {
  std::vector<int> owner;  // hex -> cell label (arbitrary ints)
};

// Build the configuration from an owner labelling. Returns also the pair list
// with multiple contacts.
struct HexBuild {
  CellConfiguration config;
  std::vector<int> cell_of_hex;
  std::vector<std::vector<int>> hexes_of_cell;
  std::vector<std::pair<int, int>> multi_pairs;
};

HexBuild build_hex_config(const HexGrid& g, const std::vector<int>& owner, const std::vector<char>& truncated_hex,
                          Box carrier) {
  const int H = static_cast<int>(g.ij.size());
  // cells ordered by their first hex in (j,i) order; hex ids are already in that order
  std::map<int, int> label_to_cell;
  HexBuild out;
  out.cell_of_hex.assign(H, -1);
  for (int h = 0; h < H; ++h) {
    auto it = label_to_cell.find(owner[h]);
    if (it == label_to_cell.end()) {
      int c = static_cast<int>(out.hexes_of_cell.size());
      label_to_cell[owner[h]] = c;
      out.hexes_of_cell.emplace_back();
      it = label_to_cell.find(owner[h]);
    }
    out.cell_of_hex[h] = it->second;
    out.hexes_of_cell[it->second].push_back(h);
  }
  const int C = static_cast<int>(out.hexes_of_cell.size());
  using Key = std::pair<std::int64_t, std::int64_t>;
  std::map<std::pair<Key, Key>, int> contact_id;  // canonical min hex-edge of a contact run -> edge id
  RotationSystem rot(C);
  for (int c = 0; c < C; ++c) {
    // directed boundary edges keyed by start vertex
    std::map<Key, std::pair<int, int>> bnd;  // start vertex -> (hex, dir)
    for (int h : out.hexes_of_cell[c])
      for (int d = 0; d < 6; ++d) {
        int n = g.neighbor(h, d);
        if (n >= 0 && out.cell_of_hex[n] == c) continue;
        Key s = g.vertex_key(h, (d + 5) % 6);
        bnd[s] = {h, d};
      }
    // single boundary cycle starting at the smallest key
    std::vector<std::pair<int, std::pair<Key, Key>>> seq;  // (neighbor cell, canonical edge)
    Key start = bnd.begin()->first;
    Key v = start;
    size_t steps = 0;
    do {
      auto [h, d] = bnd.at(v);
      Key e = g.vertex_key(h, d);
      int n = g.neighbor(h, d);
      int nc = n >= 0 ? out.cell_of_hex[n] : -1;
      seq.push_back({nc, std::minmax(v, e)});
      v = e;
      ++steps;
    } while (v != start && steps <= bnd.size());
    if (steps != bnd.size()) throw Error(ErrorKind::Structural, "hex cell boundary is not a single cycle");
    // rotate so the sequence starts at a run boundary
    size_t n = seq.size();
    size_t s0 = 0;
    for (size_t i = 0; i < n; ++i)
      if (seq[i].first != seq[(i + n - 1) % n].first) {
        s0 = i;
        break;
      }
    for (size_t i = 0; i < n;) {
      int nc = seq[(s0 + i) % n].first;
      auto mn = seq[(s0 + i) % n].second;
      size_t j = i;
      while (j < n && seq[(s0 + j) % n].first == nc) {
        mn = std::min(mn, seq[(s0 + j) % n].second);
        ++j;
      }
      if (nc >= 0) {
        auto it = contact_id.find(mn);
        int id;
        if (it == contact_id.end()) {
          id = static_cast<int>(contact_id.size());
          contact_id[mn] = id;
        } else {
          id = it->second;
        }
        rot[c].push_back({nc, id});
      }
      i = j;
    }
  }
  HalfEdgeMap map = HalfEdgeMap::from_rotation_entries(rot, OuterSpec::automatic());
  std::vector<CellRegion> cells;
  std::vector<Vec2> sites;
  for (int c = 0; c < C; ++c) {
    std::vector<Polygon> pieces;
    for (int h : out.hexes_of_cell[c]) pieces.push_back(g.polygon(h));
    cells.emplace_back(std::move(pieces));
    sites.push_back(g.center(g.ij[out.hexes_of_cell[c][0]][0], g.ij[out.hexes_of_cell[c][0]][1]));
  }
  // shrink the carrier away from cells that may be cut by the sampling region
  double half = carrier.width() / 2;
  for (int c = 0; c < C; ++c) {
    bool trunc = false;
    for (int h : out.hexes_of_cell[c]) trunc = trunc || truncated_hex[h];
    if (!trunc) continue;
    while (half > 0 && cells[c].meets_box(Box::centered({0, 0}, 2 * half))) half -= 0.5;
  }
  if (!(half > 0)) throw Error(ErrorKind::Carrier, "percolation clusters cut every carrier window");
  for (int c = 0; c < C; ++c) {
    const auto& nb = map.neighbors(c);
    std::vector<int> s = nb;
    std::sort(s.begin(), s.end());
    for (size_t i = 1; i < s.size(); ++i)
      if (s[i] == s[i - 1] && c < s[i]) out.multi_pairs.push_back({c, s[i]});
  }
  std::sort(out.multi_pairs.begin(), out.multi_pairs.end());
  out.multi_pairs.erase(std::unique(out.multi_pairs.begin(), out.multi_pairs.end()), out.multi_pairs.end());
  out.config = CellConfiguration(std::move(cells), std::move(map), Box::centered({0, 0}, 2 * half));
  out.config.set_sites(std::move(sites));
  return out;
}

CellConfiguration hex_config(double L, double buffer, Vec2 w, double p, std::uint64_t seed, bool collapse,
                             GeneratorKind kind) {
  HexGrid g = make_hex_grid(L / 2 + buffer, w);
  const int H = static_cast<int>(g.ij.size());
  std::vector<int> parent(H);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<int(int)> find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  if (p > 0) {
    for (int h = 0; h < H; ++h)
      for (int d = 0; d < 3; ++d) {
        int n = g.neighbor(h, d);
        if (n < 0) continue;
        CounterRng rng({seed, 0xB0DDu, static_cast<std::uint64_t>(g.ij[h][0]), static_cast<std::uint64_t>(g.ij[h][1]),
                        static_cast<std::uint64_t>(d)});
        if (rng.uniform() < p) {
          int a = find(h), b = find(n);
          if (a != b) parent[std::max(a, b)] = std::min(a, b);
        }
      }
  }
  std::vector<int> owner(H);
  for (int h = 0; h < H; ++h) owner[h] = find(h);
  std::vector<char> rim(H, 0);
  for (int h = 0; h < H; ++h)
    for (int d = 0; d < 6; ++d)
      if (g.neighbor(h, d) < 0) rim[h] = 1;

  auto fill_holes = [&]() {
    std::map<int, std::vector<int>> members;
    for (int h = 0; h < H; ++h) members[owner[h]].push_back(h);
    std::vector<std::pair<size_t, int>> by_size;
    for (auto& [lab, hs] : members)
      if (hs.size() >= 6) by_size.push_back({hs.size(), lab});
    std::sort(by_size.begin(), by_size.end(), [](auto& a, auto& b) { return a.first > b.first || (a.first == b.first && a.second < b.second); });
    for (auto& [sz, lab] : by_size) {
      std::vector<std::array<std::int64_t, 2>> cur;
      for (int h = 0; h < H; ++h)
        if (owner[h] == lab) cur.push_back(g.ij[h]);
      if (cur.size() < 6) continue;
      for (auto& region : enclosed_regions(cur))
        for (auto& ij : region) {
          int h = g.at(ij[0], ij[1]);
          if (h >= 0) owner[h] = lab;
        }
    }
  };
  fill_holes();
  auto truncated = [&]() {
    std::vector<char> t(H, 0);
    std::set<int> bad;
    for (int h = 0; h < H; ++h)
      if (rim[h]) bad.insert(owner[h]);
    for (int h = 0; h < H; ++h) t[h] = bad.count(owner[h]) > 0;
    return t;
  };
  Box carrier = Box::centered({0, 0}, L);
  HexBuild hb = build_hex_config(g, owner, truncated(), carrier);
  int rounds = 0;
  while (collapse && !hb.multi_pairs.empty()) {
    if (++rounds > 10000) throw Error(ErrorKind::Structural, "collapse did not terminate");
    auto [a, b] = hb.multi_pairs.front();
    std::vector<std::array<std::int64_t, 2>> ab;
    for (int h : hb.hexes_of_cell[a]) ab.push_back(g.ij[h]);
    for (int h : hb.hexes_of_cell[b]) ab.push_back(g.ij[h]);
    int la = owner[hb.hexes_of_cell[a][0]], lb = owner[hb.hexes_of_cell[b][0]];
    bool any = false;
    for (auto& region : enclosed_regions(ab)) {
      auto mn = *std::min_element(region.begin(), region.end());
      CounterRng rng({seed, 0xC011u, static_cast<std::uint64_t>(mn[0]), static_cast<std::uint64_t>(mn[1])});
      int lab = rng.below(2) == 0 ? la : lb;
      for (auto& ij : region) {
        int h = g.at(ij[0], ij[1]);
        if (h >= 0) {
          owner[h] = lab;
          any = true;
        }
      }
    }
    if (!any) throw Error(ErrorKind::Structural, "parallel contacts without an enclosed region");
    fill_holes();
    hb = build_hex_config(g, owner, truncated(), carrier);
  }
  CellConfiguration cfg = std::move(hb.config);
  cfg.generator = generator_kind_name(kind);
  cfg.seed = seed;
  cfg.meta["window"] = std::to_string(L);
  cfg.meta["buffer"] = std::to_string(buffer);
  if (kind == GeneratorKind::HexPercolation) {
    cfg.meta["p"] = std::to_string(p);
    cfg.meta["collapse"] = collapse ? "true" : "false";
  }
  return cfg;
}

}  // namespace

CellConfiguration hex_percolation(const GeneratorSpec& spec) {
  spec.check();
  CounterRng rng(spec.seed, 0x5A1F7u);
  // uniform shift over a fundamental domain of the hexagon lattice
  Vec2 w{rng.uniform(), rng.uniform() * std::sqrt(3.0) / 2};
  w.x -= 0.5 * w.y / (std::sqrt(3.0) / 2);
  return hex_config(spec.window, spec.effective_buffer(), w, spec.percolation_p, spec.seed, spec.collapse,
                    GeneratorKind::HexPercolation);
}

CellConfiguration lattice_config(GeneratorKind kind, double window) {
  if (!(window > 0)) throw Error(ErrorKind::InvalidInput, "window must be positive");
  if (kind == GeneratorKind::TriangularLattice)
    return hex_config(window, 2.0, {0, 0}, 0.0, 0, false, GeneratorKind::TriangularLattice);
  if (kind != GeneratorKind::SquareLattice) throw Error(ErrorKind::InvalidInput, "not a lattice kind");
  const int k = static_cast<int>(std::ceil(window / 2)) + 1;
  std::vector<CellRegion> cells;
  std::vector<Vec2> sites;
  std::map<std::pair<int, int>, int> id;
  for (int j = -k; j < k; ++j)
    for (int i = -k; i < k; ++i) {
      id[{i, j}] = static_cast<int>(cells.size());
      cells.emplace_back(Polygon{{double(i), double(j)}, {i + 1.0, double(j)}, {i + 1.0, j + 1.0}, {double(i), j + 1.0}});
      sites.push_back({i + 0.5, j + 0.5});
    }
  std::vector<std::vector<int>> rot(cells.size());
  const int di[4] = {1, 0, -1, 0}, dj[4] = {0, 1, 0, -1};
  for (auto& [ij, c] : id)
    for (int d = 0; d < 4; ++d) {
      auto it = id.find({ij.first + di[d], ij.second + dj[d]});
      if (it != id.end()) rot[c].push_back(it->second);
    }
  HalfEdgeMap map = HalfEdgeMap::from_rotations(rot, OuterSpec::automatic());
  CellConfiguration cfg(std::move(cells), std::move(map), Box::centered({0, 0}, window));
  cfg.set_sites(std::move(sites));
  cfg.generator = generator_kind_name(kind);
  cfg.meta["window"] = std::to_string(window);
  return cfg;
}

CellConfiguration generate(const GeneratorSpec& spec) {
  switch (spec.kind) {
    case GeneratorKind::PoissonVoronoi: return poisson_voronoi(spec);
    case GeneratorKind::HexPercolation: return hex_percolation(spec);
    default: return lattice_config(spec.kind, spec.window);
  }
}

std::vector<std::array<int, 3>> config_triangles(const CellConfiguration& config) {
  std::vector<std::array<int, 3>> t;
  const HalfEdgeMap& m = config.map();
  for (int f = 0; f < m.num_faces(); ++f)
    if (m.is_triangulated_face(f)) {
      auto v = m.face_vertices(f);
      t.push_back({v[0], v[1], v[2]});
    }
  return t;
}

DiskTruncation config_disk_truncation(const CellConfiguration& config, const Vec2& center, double radius) {
  const auto& sites = config.sites();
  auto ref = [&](int i) { return sites.empty() ? config.cell(i).centroid() : sites[i]; };
  auto root = config.cell_containing(center);
  if (!root) throw Error(ErrorKind::Carrier, "no cell contains the truncation center");
  return disk_truncation(config.num_cells(), config_triangles(config), *root,
                         [&](int i) { return dist(ref(i), center) <= radius; });
}

Triangulation triangular_lattice_patch(int m, std::vector<Vec2>* positions) {
  std::map<std::pair<int, int>, int> id;
  std::vector<Vec2> pos;
  std::vector<std::int64_t> labels;
  // labels encode lattice coordinates so that patches of different size share them
  auto key = [](int i, int j) { return (static_cast<std::int64_t>(i) + (1 << 20)) * (1 << 21) + (j + (1 << 20)); };
  auto inside = [&](int i, int j) { return std::max({std::abs(i), std::abs(j), std::abs(i + j)}) <= m; };
  // root first
  id[{0, 0}] = 0;
  pos.push_back({0, 0});
  labels.push_back(key(0, 0));
  for (int j = -m; j <= m; ++j)
    for (int i = -m; i <= m; ++i)
      if (inside(i, j) && !(i == 0 && j == 0)) {
        id[{i, j}] = static_cast<int>(pos.size());
        pos.push_back({i + 0.5 * j, j * std::sqrt(3.0) / 2});
        labels.push_back(key(i, j));
      }
  std::vector<std::array<int, 3>> faces;
  for (int j = -m; j <= m; ++j)
    for (int i = -m; i <= m; ++i) {
      if (inside(i, j) && inside(i + 1, j) && inside(i, j + 1)) faces.push_back({id[{i, j}], id[{i + 1, j}], id[{i, j + 1}]});
      if (inside(i + 1, j) && inside(i + 1, j + 1) && inside(i, j + 1))
        faces.push_back({id[{i + 1, j}], id[{i + 1, j + 1}], id[{i, j + 1}]});
    }
  if (positions) *positions = pos;
  Triangulation tri(static_cast<int>(pos.size()), std::move(faces));
  tri.set_labels(std::move(labels));
  return tri;
}

}  // namespace cellembed
