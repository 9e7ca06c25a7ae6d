#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <queue>

#include "cellembed/error.hpp"
#include "cellembed/walks.hpp"

namespace cellembed {

namespace {

constexpr double kBig = std::numeric_limits<double>::infinity();

// Shortest loop through v with odd winding around the origin, in the vertex metric m.
// Vertex v0 is removed; winding parity is tracked by crossings of a ray from the origin.
struct LoopFinder {
  const CirclePacking& p;
  int v, v0;
  Vec2 origin, ray_end;
  std::vector<std::vector<std::pair<int, char>>> adj;  // neighbor, crosses ray

  LoopFinder(const CirclePacking& pk, int vv, int vv0) : p(pk), v(vv), v0(vv0) {
    origin = p.centers[v0];
    double extent = 0;
    for (int w = 0; w < p.num_vertices(); ++w) extent = std::max(extent, dist(p.centers[w], origin) + p.radii[w]);
    Vec2 zv = p.centers[v] - origin;
    double base = std::atan2(zv.y, zv.x) + M_PI;
    // a ray direction that passes through no center
    for (int attempt = 0; attempt < 64; ++attempt) {
      double ang = base + 0.1234567 * (attempt + 1);
      Vec2 dir{std::cos(ang), std::sin(ang)};
      bool clean = true;
      for (int w = 0; w < p.num_vertices() && clean; ++w) {
        if (w == v0) continue;
        Vec2 q = p.centers[w] - origin;
        if (dot(q, dir) > 0 && std::abs(cross(dir, q)) < 1e-9 * (norm(q) + 1e-300)) clean = false;
      }
      if (clean) {
        ray_end = origin + dir * (4 * extent + 1);
        break;
      }
    }
    adj.assign(p.num_vertices(), {});
    for (auto e : p.tri.edges()) {
      if (e[0] == v0 || e[1] == v0) continue;
      char c = segments_intersect(p.centers[e[0]], p.centers[e[1]], origin, ray_end) ? 1 : 0;
      adj[e[0]].push_back({e[1], c});
      adj[e[1]].push_back({e[0], c});
    }
  }

  // returns length (v counted once) and the loop's vertex set; length = inf when no loop exists
  double shortest(const std::vector<double>& m, std::vector<int>* loop) const {
    const int n = p.num_vertices();
    std::vector<double> d(2 * n, kBig);
    std::vector<int> prev(2 * n, -1);
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    d[2 * v] = m[v];
    pq.push({m[v], 2 * v});
    while (!pq.empty()) {
      auto [dd, node] = pq.top();
      pq.pop();
      if (dd > d[node]) continue;
      int w = node / 2, par = node % 2;
      if (node == 2 * v + 1) break;
      for (auto [x, c] : adj[w]) {
        int nx = 2 * x + (par ^ c);
        double nd = dd + m[x];
        if (nd < d[nx]) {
          d[nx] = nd;
          prev[nx] = node;
          pq.push({nd, nx});
        }
      }
    }
    if (d[2 * v + 1] == kBig) return kBig;
    if (loop) {
      loop->clear();
      for (int node = 2 * v + 1; node >= 0; node = prev[node]) {
        loop->push_back(node / 2);
        if (node == 2 * v) break;
      }
    }
    return d[2 * v + 1] - m[v];
  }
};

}  // namespace

VelBound vel_bound_check(const CirclePacking& p, int v, int v0) {
  const int n = p.num_vertices();
  if (v < 0 || v0 < 0 || v >= n || v0 >= n) throw Error(ErrorKind::InvalidInput, "vertex out of range");
  if (v == v0) throw Error(ErrorKind::InvalidInput, "v must differ from v0");
  LoopFinder lf(p, v, v0);
  VelBound out;
  Vec2 zv = p.centers[v] - p.centers[v0];
  out.upper_bound = 4 * norm(zv) / p.radii[v];
  // reachability of the odd-winding copy
  if (lf.shortest(std::vector<double>(n, 1.0), nullptr) == kBig)
    throw Error(ErrorKind::DomainTooSmall, "ball too small: no loop around v0 through v");

  auto evaluate = [&](const std::vector<double>& m, const std::string& name, std::vector<int>* loop) {
    double area = 0;
    for (double x : m) area += x * x;
    if (area <= 0) return;
    double len = lf.shortest(m, loop);
    double ratio = len * len / area;
    if (ratio > out.lower_bound) {
      out.lower_bound = ratio;
      out.best_metric = name;
    }
  };

  // overlap of each circle's radial extent with the annulus of D_v
  const double lo = norm(zv) - p.radii[v], hi = norm(zv) + p.radii[v];
  std::vector<double> overlap(n, 0.0), annulus(n, 0.0);
  for (int w = 0; w < n; ++w) {
    if (w == v0) continue;
    double rw = norm(p.centers[w] - p.centers[v0]);
    double a = std::max(rw - p.radii[w], lo), b = std::min(rw + p.radii[w], hi);
    overlap[w] = std::max(b - a, 0.0);
    annulus[w] = overlap[w] > 0 ? 1.0 : 0.0;
  }
  std::vector<int> loop;
  evaluate(overlap, "annulus-overlap", &loop);
  evaluate(annulus, "annulus-indicator", nullptr);
  // graph ring through v
  {
    std::vector<int> dist(n, -1);
    std::deque<int> q{v0};
    dist[v0] = 0;
    while (!q.empty()) {
      int a = q.front();
      q.pop_front();
      for (int b : p.tri.petals(a))
        if (dist[b] < 0) {
          dist[b] = dist[a] + 1;
          q.push_back(b);
        }
    }
    std::vector<double> ring(n, 0.0);
    for (int w = 0; w < n; ++w) ring[w] = dist[w] == dist[v] ? 1.0 : 0.0;
    evaluate(ring, "graph-ring", nullptr);
  }
  // accumulate shortest loops starting from the overlap metric
  std::vector<double> acc = overlap;
  double scale = 0;
  for (double x : overlap) scale = std::max(scale, x);
  for (int round = 0; round < 8 && !loop.empty(); ++round) {
    for (int w : loop) acc[w] += scale;
    evaluate(acc, "loop-accumulated", &loop);
  }
  out.pass = out.lower_bound <= out.upper_bound * (1 + 1e-12);
  return out;
}

PathFamily PathFamily::simple_paths(const std::vector<std::vector<int>>& adjacency, int s, int t) {
  PathFamily fam;
  fam.num_vertices = static_cast<int>(adjacency.size());
  if (s < 0 || t < 0 || s >= fam.num_vertices || t >= fam.num_vertices)
    throw Error(ErrorKind::InvalidInput, "endpoint out of range");
  if (s == t) throw Error(ErrorKind::Degenerate, "single-vertex loop is degenerate");
  std::vector<int> path{s};
  std::vector<char> on(fam.num_vertices, 0);
  on[s] = 1;
  std::function<void(int)> dfs = [&](int u) {
    if (u == t) {
      fam.paths.push_back(path);
      return;
    }
    for (int w : adjacency[u])
      if (!on[w]) {
        on[w] = 1;
        path.push_back(w);
        dfs(w);
        path.pop_back();
        on[w] = 0;
      }
  };
  dfs(s);
  return fam;
}

double vel_exact_small(const PathFamily& fam, std::vector<double>* optimal_metric) {
  const int n = fam.num_vertices;
  if (n <= 0 || n > 12) throw Error(ErrorKind::InvalidInput, "exact VEL needs between 1 and 12 vertices");
  if (fam.paths.empty()) throw Error(ErrorKind::InvalidInput, "empty path family");
  // constraint rows: vertex indicator of each path
  std::vector<std::vector<double>> A;
  for (auto& p : fam.paths) {
    if (p.size() < 2) throw Error(ErrorKind::Degenerate, "single-vertex loop is degenerate");
    std::vector<double> row(n, 0.0);
    for (int v : p) {
      if (v < 0 || v >= n) throw Error(ErrorKind::InvalidInput, "path vertex out of range");
      row[v] = 1.0;
    }
    A.push_back(row);
  }
  // min |m|^2 subject to A m >= 1 (Hildreth); m stays nonnegative since A >= 0
  const size_t k = A.size();
  std::vector<double> lam(k, 0.0), m(n, 0.0), nrm(k, 0.0);
  for (size_t j = 0; j < k; ++j)
    for (double a : A[j]) nrm[j] += a * a;
  for (int sweep = 0; sweep < 2000000; ++sweep) {
    double change = 0;
    for (size_t j = 0; j < k; ++j) {
      double am = 0;
      for (int i = 0; i < n; ++i) am += A[j][i] * m[i];
      double nl = std::max(0.0, lam[j] + (1 - am) / nrm[j]);
      double dl = nl - lam[j];
      if (dl != 0) {
        for (int i = 0; i < n; ++i) m[i] += dl * A[j][i];
        lam[j] = nl;
        change = std::max(change, std::abs(dl));
      }
    }
    if (change < 1e-15) break;
  }
  double area = 0, len = kBig;
  for (double x : m) area += x * x;
  for (size_t j = 0; j < k; ++j) {
    double l = 0;
    for (int i = 0; i < n; ++i) l += A[j][i] * m[i];
    len = std::min(len, l);
  }
  if (optimal_metric) *optimal_metric = m;
  return len * len / area;
}

}  // namespace cellembed
