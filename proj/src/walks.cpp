#include "cellembed/walks.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <limits>
#include <sstream>

#include "cellembed/error.hpp"
#include "cellembed/format.hpp"
#include "cellembed/rng.hpp"

namespace cellembed {

WeightedGraph::WeightedGraph(std::vector<Vec2> positions, const std::vector<std::array<int, 2>>& edges,
                             const std::vector<double>& conductance, std::vector<char> boundary)
    : pos_(std::move(positions)), boundary_(std::move(boundary)) {
  const int n = num_vertices();
  if (static_cast<int>(boundary_.size()) != n) throw Error(ErrorKind::InvalidInput, "boundary flags size mismatch");
  if (edges.size() != conductance.size()) throw Error(ErrorKind::InvalidInput, "conductance size mismatch");
  std::vector<int> deg(n, 0);
  for (size_t i = 0; i < edges.size(); ++i) {
    auto [u, v] = edges[i];
    if (u < 0 || v < 0 || u >= n || v >= n || u == v) throw Error(ErrorKind::InvalidInput, "bad edge");
    if (!(conductance[i] > 0) || !std::isfinite(conductance[i]))
      throw Error(ErrorKind::InvalidInput, "conductance must be finite and positive");
    deg[u]++;
    deg[v]++;
  }
  offset_.assign(n + 1, 0);
  for (int v = 0; v < n; ++v) offset_[v + 1] = offset_[v] + deg[v];
  nbr_.assign(offset_[n], 0);
  cond_.assign(offset_[n], 0.0);
  std::vector<int> fill(offset_.begin(), offset_.end() - 1);
  for (size_t i = 0; i < edges.size(); ++i) {
    auto [u, v] = edges[i];
    nbr_[fill[u]] = v;
    cond_[fill[u]++] = conductance[i];
    nbr_[fill[v]] = u;
    cond_[fill[v]++] = conductance[i];
  }
  cum_.assign(offset_[n], 0.0);
  pi_.assign(n, 0.0);
  for (int v = 0; v < n; ++v) {
    double s = 0;
    for (int i = offset_[v]; i < offset_[v + 1]; ++i) {
      s += cond_[i];
      cum_[i] = s;
    }
    pi_[v] = s;
  }
}

std::optional<double> WeightedGraph::conductance_between(int u, int v) const {
  double s = 0;
  bool found = false;
  for (int i = offset_[u]; i < offset_[u + 1]; ++i)
    if (nbr_[i] == v) {
      s += cond_[i];
      found = true;
    }
  if (!found) return std::nullopt;
  return s;
}

int WeightedGraph::step(int v, double u) const {
  const int b = offset_[v], e = offset_[v + 1];
  if (b == e) throw Error(ErrorKind::Structural, "isolated vertex " + std::to_string(v));
  double target = u * pi_[v];
  auto it = std::upper_bound(cum_.begin() + b, cum_.begin() + e, target);
  int i = static_cast<int>(it - cum_.begin());
  if (i >= e) i = e - 1;
  return nbr_[i];
}

double dubejko_conductance(double ru, double rv, double rw1, double rw2) {
  double s = ru + rv;
  double first = std::sqrt(ru * rv) / s;
  double second = std::sqrt(rw1 / (rw1 + s)) + std::sqrt(rw2 / (rw2 + s));
  return first * second;
}

namespace {

double dubejko_variant(double ru, double rv, double rw1, double rw2, DubejkoVariant var) {
  if (var == DubejkoVariant::Correct) return dubejko_conductance(ru, rv, rw1, rw2);
  // the edge's own radius stands in for the opposite one
  double s = ru + rv;
  return std::sqrt(ru * rv) / s * (std::sqrt(ru / (rw1 + s)) + std::sqrt(ru / (rw2 + s)));
}

}  // namespace

WeightedGraph dubejko_weights(const CirclePacking& packing, DubejkoVariant variant) {
  const auto& tri = packing.tri;
  const auto& r = packing.radii;
  std::vector<std::array<int, 2>> edges;
  std::vector<double> cond;
  std::vector<std::array<int, 2>> flagged;
  for (auto e : tri.edges()) {
    auto f = tri.edge_faces(e[0], e[1]);
    std::vector<double> opp;
    for (int fi : f)
      if (fi >= 0) opp.push_back(r[tri.opposite(fi, e[0], e[1])]);
    double c;
    if (opp.size() == 2) {
      c = dubejko_variant(r[e[0]], r[e[1]], opp[0], opp[1], variant);
    } else {
      flagged.push_back(e);
      double s = r[e[0]] + r[e[1]];
      c = std::sqrt(r[e[0]] * r[e[1]]) / s * std::sqrt(opp[0] / (opp[0] + s));
    }
    edges.push_back(e);
    cond.push_back(c);
  }
  std::vector<char> bnd(tri.num_vertices());
  for (int v = 0; v < tri.num_vertices(); ++v) bnd[v] = tri.is_boundary(v);
  WeightedGraph g(packing.centers, edges, cond, bnd);
  g.flagged_edges = std::move(flagged);
  return g;
}

DubejkoCheck dubejko_check(const CirclePacking& packing, const WeightedGraph& g) {
  DubejkoCheck c;
  c.min_conductance = std::numeric_limits<double>::infinity();
  const auto& r = packing.radii;
  for (int u = 0; u < g.num_vertices(); ++u)
    for (int i = 0; i < g.degree(u); ++i) {
      int v = g.neighbor(u, i);
      if (v < u) continue;
      double cc = g.conductance(u, i);
      double first = std::sqrt(r[u] * r[v]) / (r[u] + r[v]);
      c.edges++;
      c.max_conductance = std::max(c.max_conductance, cc);
      c.min_conductance = std::min(c.min_conductance, cc);
      c.max_first_factor = std::max(c.max_first_factor, first);
      if (!(cc > 0 && cc < 1) || first > 0.5 + 1e-15) c.violations++;
    }
  for (int u = 0; u < g.num_vertices(); ++u) {
    if (g.is_boundary(u)) continue;
    Vec2 s{0, 0};
    for (int i = 0; i < g.degree(u); ++i) s = s + (g.position(g.neighbor(u, i)) - g.position(u)) * g.conductance(u, i);
    c.martingale_residual = std::max(c.martingale_residual, norm(s) / g.pi(u) / r[u]);
  }
  return c;
}

WeightedGraph config_graph(const CellConfiguration& config, bool unit, bool use_sites) {
  const auto& m = config.map();
  const int n = config.num_cells();
  std::vector<Vec2> pos(n);
  for (int i = 0; i < n; ++i) {
    if (use_sites && static_cast<int>(config.sites().size()) == n)
      pos[i] = config.sites()[i];
    else
      pos[i] = config.cell(i).centroid();
  }
  std::vector<std::array<int, 2>> edges;
  std::vector<double> cond;
  for (int e = 0; e < m.num_edges(); ++e) {
    int h = 2 * e;
    edges.push_back({m.origin(h), m.target(h)});
    cond.push_back(unit ? 1.0 : config.conductance(e));
  }
  std::vector<char> bnd(n);
  for (int v = 0; v < n; ++v) bnd[v] = m.is_boundary_vertex(v);
  return WeightedGraph(pos, edges, cond, bnd);
}

WeightedGraph triangulation_graph(const Triangulation& tri, const std::vector<Vec2>& positions) {
  auto edges = tri.edges();
  std::vector<char> bnd(tri.num_vertices());
  for (int v = 0; v < tri.num_vertices(); ++v) bnd[v] = tri.is_boundary(v);
  return WeightedGraph(positions, edges, std::vector<double>(edges.size(), 1.0), bnd);
}

namespace {

CounterRng walk_rng(std::uint64_t seed, std::uint64_t index) { return CounterRng({seed, 0x3A1CULL, index}); }

void domain_error(int v, long t, std::uint64_t index) {
  throw Error(ErrorKind::DomainTooSmall, "walk " + std::to_string(index) + " reached boundary vertex " +
                                             std::to_string(v) + " at step " + std::to_string(t));
}

bool outside(const Vec2& p, const StopRule& s) { return s.exit_radius && dist(p, s.center) >= *s.exit_radius; }

}  // namespace

WalkPath random_walk(const WeightedGraph& g, int start, const StopRule& stop, std::uint64_t seed,
                     std::uint64_t walk_index) {
  if (start < 0 || start >= g.num_vertices()) throw Error(ErrorKind::InvalidInput, "start vertex out of range");
  if (stop.max_steps < 0) throw Error(ErrorKind::InvalidInput, "negative step count");
  WalkPath w;
  w.seed = seed;
  w.walk_index = walk_index;
  w.vertices.push_back(start);
  auto rng = walk_rng(seed, walk_index);
  int v = start;
  if (outside(g.position(v), stop)) w.exited = true;
  for (long t = 1; t <= stop.max_steps && !w.exited; ++t) {
    if (g.is_boundary(v)) domain_error(v, t - 1, walk_index);
    v = g.step(v, rng.uniform());
    w.vertices.push_back(v);
    if (outside(g.position(v), stop)) w.exited = true;
  }
  if (!w.exited && stop.max_steps > 0 && g.is_boundary(v)) domain_error(v, stop.max_steps, walk_index);
  for (int u : w.vertices) w.curve.push_back(g.position(u));
  return w;
}

std::vector<long> visit_counts(const WeightedGraph& g, int start, long steps, std::uint64_t seed) {
  std::vector<long> c(g.num_vertices(), 0);
  auto rng = walk_rng(seed, 0);
  int v = start;
  for (long t = 0; t < steps; ++t) {
    if (g.is_boundary(v)) domain_error(v, t, 0);
    v = g.step(v, rng.uniform());
    c[v]++;
  }
  return c;
}

double cmp_distance(const std::vector<Vec2>& a, const std::vector<Vec2>& b) {
  if (a.empty() || b.empty()) throw Error(ErrorKind::InvalidInput, "empty curve");
  const size_t m = b.size();
  std::vector<double> prev(m), cur(m);
  for (size_t i = 0; i < a.size(); ++i) {
    for (size_t j = 0; j < m; ++j) {
      double d = dist(a[i], b[j]);
      double best;
      if (i == 0 && j == 0)
        best = d;
      else if (i == 0)
        best = std::max(d, cur[j - 1]);
      else if (j == 0)
        best = std::max(d, prev[0]);
      else
        best = std::max(d, std::min({prev[j], cur[j - 1], prev[j - 1]}));
      cur[j] = best;
    }
    std::swap(prev, cur);
  }
  return prev[m - 1];
}

double chi_square_p(const std::vector<long>& counts, const std::vector<double>& probs, double* statistic) {
  if (counts.size() != probs.size()) throw Error(ErrorKind::InvalidInput, "chi-square size mismatch");
  double total = 0;
  for (long c : counts) total += c;
  double stat = 0;
  int used = 0;
  for (size_t i = 0; i < counts.size(); ++i) {
    double e = total * probs[i];
    if (e <= 0) {
      if (counts[i] > 0) {
        if (statistic) *statistic = std::numeric_limits<double>::infinity();
        return 0.0;
      }
      continue;
    }
    stat += (counts[i] - e) * (counts[i] - e) / e;
    ++used;
  }
  if (statistic) *statistic = stat;
  if (used < 2 || total <= 0) return std::numeric_limits<double>::quiet_NaN();
  boost::math::chi_squared dist(used - 1);
  return boost::math::cdf(boost::math::complement(dist, stat));
}

WalkReport walk_statistics(const WeightedGraph& g, int start, int n_walks, const StopRule& stop, std::uint64_t seed,
                           int angle_bins) {
  if (n_walks < 2) throw Error(ErrorKind::InvalidInput, "need at least two walks");
  if (start < 0 || start >= g.num_vertices()) throw Error(ErrorKind::InvalidInput, "start vertex out of range");
  if (angle_bins < 2) throw Error(ErrorKind::InvalidInput, "need at least two angle bins");
  WalkReport rep;
  rep.seed = seed;
  rep.n_walks = n_walks;
  rep.stop = stop;
  rep.start = start;
  const long T = stop.max_steps;
  std::vector<double> msd_sum(T + 1, 0.0);
  std::vector<long> alive(T + 1, 0);
  double sxx = 0, sxy = 0, syy = 0;
  long total_steps = 0;
  rep.exit_histogram.assign(angle_bins, 0);
  const Vec2 z0 = g.position(start);
  for (int i = 0; i < n_walks; ++i) {
    auto rng = walk_rng(seed, static_cast<std::uint64_t>(i));
    int v = start;
    Vec2 z = z0;
    WalkRecord rec;
    rec.walk_index = static_cast<std::uint64_t>(i);
    bool exited = outside(z, stop);
    long t = 0;
    alive[0]++;
    while (t < T && !exited) {
      if (g.is_boundary(v)) domain_error(v, t, rec.walk_index);
      int w = g.step(v, rng.uniform());
      Vec2 zn = g.position(w);
      Vec2 d = zn - z;
      sxx += d.x * d.x;
      sxy += d.x * d.y;
      syy += d.y * d.y;
      v = w;
      z = zn;
      ++t;
      alive[t]++;
      msd_sum[t] += norm2(z - z0);
      exited = outside(z, stop);
    }
    if (!exited && t > 0 && g.is_boundary(v)) domain_error(v, t, rec.walk_index);
    total_steps += t;
    rec.end = z;
    rec.steps = t;
    rec.exited = exited;
    if (stop.exit_radius) {
      Vec2 d = z - stop.center;
      rec.exit_angle = std::atan2(d.y, d.x);
      if (exited) {
        int b = static_cast<int>(std::floor((rec.exit_angle + M_PI) / (2 * M_PI) * angle_bins));
        rep.exit_histogram[std::clamp(b, 0, angle_bins - 1)]++;
        rep.exits++;
      }
    }
    rep.walks.push_back(rec);
  }
  // displacement statistics
  double mx = 0, my = 0;
  for (auto& w : rep.walks) {
    mx += w.end.x - z0.x;
    my += w.end.y - z0.y;
  }
  mx /= n_walks;
  my /= n_walks;
  double vx = 0, vy = 0;
  for (auto& w : rep.walks) {
    vx += (w.end.x - z0.x - mx) * (w.end.x - z0.x - mx);
    vy += (w.end.y - z0.y - my) * (w.end.y - z0.y - my);
  }
  vx /= (n_walks - 1);
  vy /= (n_walks - 1);
  rep.mean_displacement = {mx, my};
  rep.standard_error = std::sqrt((vx + vy) / n_walks);
  rep.drift_z = rep.standard_error > 0 ? std::hypot(mx, my) / rep.standard_error : 0.0;
  if (total_steps > 0) rep.sigma = {sxx / total_steps, sxy / total_steps, sxy / total_steps, syy / total_steps};
  // MSD over the range where at least 99% of walks are still running
  long cutoff = 0;
  for (long t = 1; t <= T; ++t) {
    if (alive[t] < 0.99 * n_walks) break;
    cutoff = t;
  }
  const long stride = std::max(1L, cutoff / 200);
  for (long t = stride; t <= cutoff; t += stride) {
    rep.msd_steps.push_back(t);
    rep.msd.push_back(msd_sum[t] / alive[t]);
  }
  if (rep.msd.size() >= 3) {
    const size_t k = rep.msd.size();
    double st = 0, sm = 0;
    for (size_t i = 0; i < k; ++i) {
      st += rep.msd_steps[i];
      sm += rep.msd[i];
    }
    st /= k;
    sm /= k;
    double ctt = 0, ctm = 0, cmm = 0;
    for (size_t i = 0; i < k; ++i) {
      double a = rep.msd_steps[i] - st, b = rep.msd[i] - sm;
      ctt += a * a;
      ctm += a * b;
      cmm += b * b;
    }
    rep.msd_slope = ctm / ctt;
    rep.msd_intercept = sm - rep.msd_slope * st;
    rep.msd_r2 = cmm > 0 ? ctm * ctm / (ctt * cmm) : 1.0;
  }
  if (rep.exits > 0) {
    rep.exit_p_value = chi_square_p(rep.exit_histogram, std::vector<double>(angle_bins, 1.0 / angle_bins), &rep.exit_chi2);
  } else {
    rep.exit_p_value = std::numeric_limits<double>::quiet_NaN();
  }
  return rep;
}

std::string WalkReport::text() const {
  std::ostringstream os;
  os << "seed = " << seed << "\n";
  os << "walks = " << n_walks << "\n";
  os << "start = " << start << "\n";
  os << "max_steps = " << stop.max_steps << "\n";
  os << "exit_radius = " << (stop.exit_radius ? fmt_double(*stop.exit_radius) : std::string("none")) << "\n";
  os << "mean_displacement = " << fmt_double(mean_displacement.x) << " " << fmt_double(mean_displacement.y) << "\n";
  os << "standard_error = " << fmt_double(standard_error) << "\n";
  os << "drift_z = " << fmt_double(drift_z) << "\n";
  os << "sigma = " << fmt_double(sigma[0]) << " " << fmt_double(sigma[1]) << " " << fmt_double(sigma[2]) << " "
     << fmt_double(sigma[3]) << "\n";
  os << "msd_slope = " << fmt_double(msd_slope) << "\n";
  os << "msd_intercept = " << fmt_double(msd_intercept) << "\n";
  os << "msd_r2 = " << fmt_double(msd_r2) << "\n";
  os << "exits = " << exits << "\n";
  os << "exit_histogram =";
  for (long c : exit_histogram) os << " " << c;
  os << "\n";
  os << "exit_chi2 = " << fmt_double(exit_chi2) << "\n";
  os << "exit_p_value = " << fmt_double(exit_p_value) << "\n";
  return os.str();
}

std::string WalkReport::csv() const {
  std::ostringstream os;
  os << "walk,end_x,end_y,steps,exited,exit_angle\n";
  for (auto& w : walks)
    os << w.walk_index << "," << fmt_double(w.end.x) << "," << fmt_double(w.end.y) << "," << w.steps << ","
       << (w.exited ? 1 : 0) << "," << fmt_double(w.exit_angle) << "\n";
  return os.str();
}

std::vector<double> macroscopic_disk_scan(const CirclePacking& packing, const std::vector<double>& radii, double scale) {
  if (!(scale > 0)) throw Error(ErrorKind::InvalidInput, "scale must be positive");
  std::vector<double> out;
  for (double r : radii) {
    if (!(r > 0)) throw Error(ErrorKind::InvalidInput, "window radius must be positive");
    double best = 0;
    for (int v = 0; v < packing.num_vertices(); ++v) {
      double rad = packing.radii[v] * scale;
      if (norm(packing.centers[v] * scale) - rad >= r) continue;
      if (packing.tri.is_boundary(v))
        throw Error(ErrorKind::Carrier, "packing does not cover the disk of radius " + fmt_double(r));
      best = std::max(best, 2 * rad);
    }
    out.push_back(best / r);
  }
  return out;
}

}  // namespace cellembed
