#include "cellembed/circle_pack.hpp"

#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <set>
#include <sstream>

#include "cellembed/error.hpp"
#include "cellembed/format.hpp"

namespace cellembed {

namespace {

constexpr double kTwoPi = 2 * M_PI;

inline double s_of(double h) { return std::isinf(h) ? 0.0 : std::exp(-h); }
inline double a_of(double h) { return std::isinf(h) ? 1.0 : -std::expm1(-2 * h); }
inline double c_of(double hv, double hu, double hw) {
  double t = hv + hu + hw;
  return std::isinf(t) ? 1.0 : -std::expm1(-2 * t);
}

// log tanh(h/2) and back
inline double x_of_h(double h) { return std::log(std::tanh(h / 2)); }
inline double h_of_x(double x) {
  double t = std::exp(x);
  return std::log1p(t) - std::log(-std::expm1(x));
}

cplx to_c(const Vec2& v) { return {v.x, v.y}; }
Vec2 to_v(const cplx& z) { return {z.real(), z.imag()}; }

struct Mobius {
  cplx a, b, c, d;
  cplx operator()(const cplx& z) const { return (a * z + b) / (c * z + d); }
  Circle2 image(const Circle2& C) const {
    cplx z0 = to_c(C.center);
    double r = C.radius;
    cplx den = c * z0 + d;
    double D = std::norm(den) - std::norm(c) * r * r;
    cplx ctr = ((a * z0 + b) * std::conj(den) - a * std::conj(c) * r * r) / D;
    double rad = r * std::abs(a * d - b * c) / std::abs(D);
    return {to_v(ctr), rad};
  }
};

// disk automorphism sending 0 to p, and its inverse
Mobius to_point(const cplx& p) { return {1.0, p, std::conj(p), 1.0}; }
Mobius from_point(const cplx& p) { return {1.0, -p, -std::conj(p), 1.0}; }

void require_packable(const Triangulation& tri) {
  if (tri.num_vertices() == 0) throw Error(ErrorKind::Structural, "empty triangulation");
  if (tri.num_interior() < 1) throw Error(ErrorKind::Structural, "triangulation has no interior vertex");
}

struct Solver {
  const Triangulation& tri;
  bool hyp;
  std::vector<int> interior;  // interior vertex list
  std::vector<int> index;     // vertex -> interior index or -1
  std::vector<double> r;      // Euclidean radius or hyperbolic radius

  Solver(const Triangulation& t, bool hyperbolic) : tri(t), hyp(hyperbolic) {
    index.assign(t.num_vertices(), -1);
    for (int v = 0; v < t.num_vertices(); ++v)
      if (t.is_interior(v)) {
        index[v] = static_cast<int>(interior.size());
        interior.push_back(v);
      }
  }

  double angle(double rv, double ru, double rw) const {
    return hyp ? hyperbolic_angle(rv, ru, rw) : euclidean_angle(rv, ru, rw);
  }
  double angle_sum(int v) const {
    const auto& p = tri.petals(v);
    double s = 0;
    for (size_t i = 0; i < p.size(); ++i) s += angle(r[v], r[p[i]], r[p[(i + 1) % p.size()]]);
    return s;
  }
  Eigen::VectorXd residual() const {
    Eigen::VectorXd F(interior.size());
    for (size_t i = 0; i < interior.size(); ++i) F[i] = angle_sum(interior[i]) - kTwoPi;
    return F;
  }
  double xval(int v) const { return hyp ? x_of_h(r[v]) : std::log(r[v]); }
  double rval(double x) const { return hyp ? h_of_x(x) : std::exp(x); }

  // uniform-neighbor update for one interior vertex
  double relaxed(int v) const {
    const double theta = angle_sum(v);
    const int k = tri.degree(v);
    if (!hyp) {
      double beta = std::sin(theta / (2 * k));
      double delta = std::sin(M_PI / k);
      double rhat = r[v] * beta / (1 - beta);
      return rhat * (1 - delta) / delta;
    }
    double sv = s_of(r[v]);
    double sigma = sv * sv, A = a_of(r[v]);
    double U = std::tan(std::min(theta / (2 * k), M_PI / 2 - 1e-12));
    double UA = U * U * A;
    double disc = 1 - (1 + UA) * (1 - UA / sigma);
    double y = disc <= 0 ? 1.0 : (1 - std::sqrt(disc)) / (1 + UA);
    y = std::clamp(y, 0.0, 1.0);
    double T = std::tan(M_PI / k);
    double B = T * T * (1 + y * y) + (1 - y) * (1 - y);
    double sig2 = 2 * T * T / (B + std::sqrt(std::max(0.0, B * B - 4 * T * T * T * T * y * y)));
    sig2 = std::clamp(sig2, 1e-300, 1 - 1e-16);
    return -0.5 * std::log(sig2);
  }

  Eigen::SparseMatrix<double> jacobian() const {
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(interior.size() * 14);
    for (size_t i = 0; i < interior.size(); ++i) {
      int v = interior[i];
      const auto& p = tri.petals(v);
      const size_t d = p.size();
      for (size_t j = 0; j < d; ++j) {
        int u = p[j], w = p[(j + 1) % d];
        double al = angle(r[v], r[u], r[w]);
        double sa = std::sin(al);
        double gv, gu, gw;
        if (!hyp) {
          double R = r[v] + r[u] + r[w];
          gv = 0.5 * (-1 - r[v] / R);
          gu = 0.5 * (1 - r[u] / R);
          gw = 0.5 * (1 - r[w] / R);
        } else {
          double sv = s_of(r[v]), su = s_of(r[u]), sw = s_of(r[w]);
          double av = a_of(r[v]), au = a_of(r[u]), aw = a_of(r[w]);
          double c = c_of(r[v], r[u], r[w]);
          double q = (sv * sv * su * su * sw * sw) / c;  // (1-c)/c
          // derivative in x = log tanh(h/2): d/dx = sinh(h) d/dh, sinh h = a/(2s)
          gv = (-1 - q) * av / (2 * sv) - sv / 2;
          gu = index[u] >= 0 ? su / 2 - q * au / (2 * su) : 0.0;
          gw = index[w] >= 0 ? sw / 2 - q * aw / (2 * sw) : 0.0;
        }
        trip.emplace_back(i, i, sa * gv);
        if (index[u] >= 0) trip.emplace_back(i, index[u], sa * gu);
        if (index[w] >= 0) trip.emplace_back(i, index[w], sa * gw);
      }
    }
    Eigen::SparseMatrix<double> J(interior.size(), interior.size());
    J.setFromTriplets(trip.begin(), trip.end());
    return J;
  }
};

}  // namespace

double euclidean_angle(double rv, double ru, double rw) {
  return 2 * std::atan2(std::sqrt(ru * rw), std::sqrt(rv * (rv + ru + rw)));
}

double hyperbolic_angle(double hv, double hu, double hw) {
  double sv = s_of(hv);
  return 2 * std::atan2(sv * std::sqrt(a_of(hu) * a_of(hw)), std::sqrt(a_of(hv) * c_of(hv, hu, hw)));
}

std::vector<double> angle_sums(const Triangulation& tri, const RadiiSolution& sol) {
  Solver S(tri, sol.hyperbolic);
  S.r = sol.radii;
  std::vector<double> out(tri.num_vertices(), 0.0);
  for (int v = 0; v < tri.num_vertices(); ++v) out[v] = S.angle_sum(v);
  return out;
}

RadiiSolution solve_radii(const Triangulation& tri, const PackingBoundary& boundary, const SolveOptions& opt) {
  require_packable(tri);
  if (!(opt.tol > 1e-14 && opt.tol < 1e-4)) throw Error(ErrorKind::InvalidInput, "tolerance must lie in (1e-14, 1e-4)");
  const int n = tri.num_vertices();
  const bool hyp = boundary.mode == PackingBoundary::Mode::MaximalDisk;
  Solver S(tri, hyp);
  S.r.assign(n, 0.0);
  if (hyp) {
    for (int v = 0; v < n; ++v) S.r[v] = tri.is_boundary(v) ? kInf : 0.5;
  } else {
    if (static_cast<int>(boundary.radii.size()) != n) throw Error(ErrorKind::InvalidInput, "boundary radii size mismatch");
    double mean = 0;
    int nb = 0;
    for (int v = 0; v < n; ++v)
      if (tri.is_boundary(v)) {
        if (!(boundary.radii[v] > 0) || std::isinf(boundary.radii[v]))
          throw Error(ErrorKind::InvalidInput, "boundary radii must be positive and finite");
        mean += boundary.radii[v];
        ++nb;
      }
    mean /= nb;
    for (int v = 0; v < n; ++v) S.r[v] = tri.is_boundary(v) ? boundary.radii[v] : mean;
  }
  RadiiSolution sol;
  sol.hyperbolic = hyp;
  const size_t m = S.interior.size();
  auto maxabs = [](const Eigen::VectorXd& F) { return F.size() ? F.cwiseAbs().maxCoeff() : 0.0; };

  // phase 1: uniform-neighbor sweeps with extrapolation along a steady change direction
  Eigen::VectorXd prev_delta;
  for (int sweep = 0; sweep < opt.relax_sweeps; ++sweep) {
    Eigen::VectorXd before(m), after(m);
    for (size_t i = 0; i < m; ++i) before[i] = S.xval(S.interior[i]);
    for (int v : S.interior) S.r[v] = S.relaxed(v);
    for (size_t i = 0; i < m; ++i) after[i] = S.xval(S.interior[i]);
    Eigen::VectorXd delta = after - before;
    if (prev_delta.size() == delta.size() && prev_delta.norm() > 0) {
      double lam = delta.norm() / prev_delta.norm();
      double cosang = delta.dot(prev_delta) / (delta.norm() * prev_delta.norm());
      if (lam < 1 && cosang > 0.99) {
        double f = std::min(lam / (1 - lam), 10.0);
        double base = maxabs(S.residual());
        std::vector<double> keep = S.r;
        for (size_t i = 0; i < m; ++i) {
          double x = after[i] + f * delta[i];
          if (hyp && x >= -1e-12) x = after[i];
          S.r[S.interior[i]] = S.rval(x);
        }
        if (!(maxabs(S.residual()) < base)) S.r = keep;
      }
    }
    prev_delta = delta;
    double res = maxabs(S.residual());
    sol.history.push_back(res);
    if (res < 1e-3) break;
  }

  // phase 2: damped Newton in log variables
  Eigen::VectorXd F = S.residual();
  double res = maxabs(F);
  int polish = 0;
  int it = 0;
  for (; it < opt.max_iterations; ++it) {
    if (res < opt.tol) {
      if (polish >= 2) break;
      ++polish;
    }
    Eigen::SparseMatrix<double> J = S.jacobian();
    Eigen::SparseMatrix<double> K = -J;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(K);
    Eigen::VectorXd step;
    if (ldlt.info() == Eigen::Success) step = ldlt.solve(F);
    if (ldlt.info() != Eigen::Success || !step.allFinite()) {
      Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
      lu.compute(K);
      if (lu.info() != Eigen::Success)
        throw Error(ErrorKind::NonConvergence, "singular packing Jacobian (residual " + fmt_double(res) + ")");
      step = lu.solve(F);
    }
    Eigen::VectorXd x0(m);
    for (size_t i = 0; i < m; ++i) x0[i] = S.xval(S.interior[i]);
    const double fnorm = F.norm();
    std::vector<double> keep = S.r;
    double t = 1.0;
    bool accepted = false;
    Eigen::VectorXd Fn;
    for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
      bool valid = true;
      for (size_t i = 0; i < m; ++i) {
        double x = x0[i] + t * step[i];
        if (hyp && x >= -1e-14) valid = false;
        S.r[S.interior[i]] = S.rval(x);
      }
      if (!valid) continue;
      Fn = S.residual();
      if (Fn.allFinite() && Fn.norm() < (1 - 1e-4 * t) * fnorm) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      S.r = keep;
      break;
    }
    F = Fn;
    res = maxabs(F);
    sol.history.push_back(res);
  }
  sol.iterations = it;
  sol.residual = res;
  sol.radii = S.r;
  if (!(res < opt.tol))
    throw Error(ErrorKind::NonConvergence, "radius solve stalled at residual " + fmt_double(res));
  return sol;
}

CirclePacking layout(const Triangulation& tri, const RadiiSolution& sol, int root, std::optional<int> root_neighbor,
                     double direction) {
  const int n = tri.num_vertices();
  if (root < 0 || root >= n || !tri.is_interior(root)) throw Error(ErrorKind::InvalidInput, "root must be interior");
  if (!(sol.residual < 1e-6)) throw Error(ErrorKind::InvalidInput, "radii do not solve the angle-sum equations");
  {
    auto sums = angle_sums(tri, sol);
    for (int v = 0; v < n; ++v)
      if (tri.is_interior(v) && std::abs(sums[v] - kTwoPi) > 1e-6)
        throw Error(ErrorKind::InvalidInput, "inconsistent radii: angle sum at vertex " + std::to_string(v));
  }
  const bool hyp = sol.hyperbolic;
  const auto& R = sol.radii;
  int nb = root_neighbor ? *root_neighbor : tri.petals(root)[0];
  {
    const auto& p = tri.petals(root);
    if (std::find(p.begin(), p.end(), nb) == p.end()) throw Error(ErrorKind::InvalidInput, "root neighbor not adjacent");
  }
  CirclePacking out;
  out.tri = tri;
  out.root = root;
  out.maximal = hyp;
  out.solve_residual = sol.residual;
  out.solve_iterations = sol.iterations;
  out.centers.assign(n, {0, 0});
  out.radii.assign(n, 0.0);
  if (hyp) out.hyperbolic = R;

  std::vector<char> placed(n, 0);
  std::vector<cplx> hc(n);  // hyperbolic center (finite) or tangency point (horocycle)
  std::vector<Circle2> circ(n);

  auto finite = [&](int v) { return !std::isinf(R[v]); };
  auto set_finite = [&](int v, cplx p) {
    hc[v] = p;
    double t = std::tanh(R[v] / 2);
    circ[v] = to_point(p).image({{0, 0}, t});
    placed[v] = 1;
  };
  cplx e = std::polar(1.0, direction);
  if (hyp) {
    set_finite(root, 0.0);
    if (finite(nb)) {
      set_finite(nb, std::tanh((R[root] + R[nb]) / 2) * e);
    } else {
      double tr = std::tanh(R[root] / 2);
      hc[nb] = e;
      circ[nb] = {to_v((1 + tr) / 2 * e), (1 - tr) / 2};
      placed[nb] = 1;
    }
  } else {
    circ[root] = {{0, 0}, R[root]};
    circ[nb] = {to_v((R[root] + R[nb]) * e), R[nb]};
    placed[root] = placed[nb] = 1;
  }

  // face adjacency
  const auto& faces = tri.faces();
  const int F = tri.num_faces();
  std::map<std::pair<int, int>, int> left;
  for (int f = 0; f < F; ++f)
    for (int i = 0; i < 3; ++i) left[{faces[f][i], faces[f][(i + 1) % 3]}] = f;
  auto place = [&](int a, int b, int c) {
    // face (a,b,c) counter-clockwise, a and b placed
    if (!hyp) {
      Vec2 ab = circ[b].center - circ[a].center;
      double al = euclidean_angle(R[a], R[b], R[c]);
      double ang = std::atan2(ab.y, ab.x) + al;
      circ[c] = {circ[a].center + Vec2{std::cos(ang), std::sin(ang)} * (R[a] + R[c]), R[c]};
      placed[c] = 1;
      return;
    }
    int pivot = finite(a) ? a : (finite(b) ? b : -1);
    if (pivot >= 0) {
      int other = pivot == a ? b : a;
      Mobius T = from_point(hc[pivot]);
      cplx q = T(hc[other]);
      double phi = std::arg(q);
      double psi = pivot == a ? phi + hyperbolic_angle(R[a], R[b], R[c]) : phi - hyperbolic_angle(R[b], R[c], R[a]);
      Mobius Ti = to_point(hc[pivot]);
      cplx dirn = std::polar(1.0, psi);
      if (finite(c)) {
        set_finite(c, Ti(std::tanh((R[pivot] + R[c]) / 2) * dirn));
      } else {
        double tp = std::tanh(R[pivot] / 2);
        hc[c] = Ti(dirn);
        hc[c] /= std::abs(hc[c]);
        circ[c] = Ti.image({to_v((1 + tp) / 2 * dirn), (1 - tp) / 2});
        placed[c] = 1;
      }
      return;
    }
    // both horocycles: upper half-plane with a at infinity
    cplx za = hc[a];
    Mobius C{cplx(0, 1), cplx(0, 1) * za, -1.0, za};
    Mobius Ci{za, cplx(0, -1) * za, 1.0, cplx(0, 1)};
    cplx far = (1.0 - 2 * circ[a].radius) * za;
    double Y = C(far).imag();
    double xb = C(hc[b]).real();
    if (finite(c)) {
      double s = s_of(R[c]);
      double xc = xb + Y * std::sqrt(a_of(R[c]));
      set_finite(c, Ci(cplx(xc, Y * s)));
    } else {
      double xc = xb + Y;
      hc[c] = Ci(cplx(xc, 0));
      hc[c] /= std::abs(hc[c]);
      circ[c] = Ci.image({{xc, Y / 2}, Y / 2});
      placed[c] = 1;
    }
  };

  std::deque<int> q;
  std::vector<char> done(F, 0);
  q.push_back(left.at({root, nb}));
  while (!q.empty()) {
    int f = q.front();
    q.pop_front();
    if (done[f]) continue;
    auto t = faces[f];
    int cnt = placed[t[0]] + placed[t[1]] + placed[t[2]];
    if (cnt < 2) continue;
    if (cnt == 2) {
      int k = !placed[t[0]] ? 0 : (!placed[t[1]] ? 1 : 2);
      place(t[(k + 1) % 3], t[(k + 2) % 3], t[k]);
    }
    done[f] = 1;
    for (int i = 0; i < 3; ++i) {
      auto it = left.find({t[(i + 1) % 3], t[i]});
      if (it != left.end() && !done[it->second]) q.push_back(it->second);
    }
  }
  for (int v = 0; v < n; ++v) {
    if (!placed[v]) throw Error(ErrorKind::Structural, "layout did not reach vertex " + std::to_string(v));
    out.centers[v] = circ[v].center;
    out.radii[v] = circ[v].radius;
  }
  return out;
}

CirclePacking pack(const Triangulation& tri, const PackingBoundary& boundary, int root, const SolveOptions& opt) {
  return layout(tri, solve_radii(tri, boundary, opt), root);
}

PackingCheck check_packing(const CirclePacking& p, double overlap_tol) {
  PackingCheck c;
  const auto& tri = p.tri;
  for (auto [u, v] : tri.edges()) {
    double s = p.radii[u] + p.radii[v];
    c.tangency = std::max(c.tangency, std::abs(dist(p.centers[u], p.centers[v]) - s) / s);
  }
  for (int v = 0; v < tri.num_vertices(); ++v) {
    if (!tri.is_interior(v)) continue;
    const auto& pt = tri.petals(v);
    double sum = 0;
    for (size_t i = 0; i < pt.size(); ++i)
      sum += euclidean_angle(p.radii[v], p.radii[pt[i]], p.radii[pt[(i + 1) % pt.size()]]);
    c.angle_sum = std::max(c.angle_sum, std::abs(sum - kTwoPi));
  }
  // sweep over x for non-adjacent overlaps
  const int n = p.num_vertices();
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return p.centers[a].x - p.radii[a] < p.centers[b].x - p.radii[b];
  });
  for (int i = 0; i < n; ++i) {
    int a = order[i];
    double right = p.centers[a].x + p.radii[a];
    const auto& pa = tri.petals(a);
    for (int j = i + 1; j < n; ++j) {
      int b = order[j];
      if (p.centers[b].x - p.radii[b] > right) break;
      double s = p.radii[a] + p.radii[b];
      double d = dist(p.centers[a], p.centers[b]);
      if (d >= s * (1 - overlap_tol)) continue;
      if (std::find(pa.begin(), pa.end(), b) != pa.end()) continue;
      c.overlaps++;
      c.worst_overlap = std::max(c.worst_overlap, (s - d) / s);
    }
  }
  return c;
}

DescartesResult descartes_fourth(double r1, double r2, double r3, bool inner) {
  for (double r : {r1, r2, r3})
    if (!(r > 0)) throw Error(ErrorKind::InvalidInput, "radii must be positive (use +inf for lines)");
  double k1 = 1 / r1, k2 = 1 / r2, k3 = 1 / r3;
  double root = 2 * std::sqrt(k1 * k2 + k2 * k3 + k3 * k1);
  DescartesResult d;
  d.curvature = k1 + k2 + k3 + (inner ? root : -root);
  if (std::abs(d.curvature) <= 1e-15 * (k1 + k2 + k3)) {
    d.curvature = 0;
    d.line = true;
    d.radius = kInf;
  } else if (d.curvature < 0) {
    d.enclosing = true;
    d.radius = -1 / d.curvature;
  } else {
    d.radius = 1 / d.curvature;
  }
  return d;
}

std::uint64_t fibonacci(int n) {
  std::uint64_t a = 0, b = 1;
  for (int i = 0; i < n; ++i) {
    std::uint64_t t = a + b;
    a = b;
    b = t;
  }
  return a;
}

std::vector<double> descartes_chain(int dmax) {
  std::vector<double> r(std::max(dmax + 1, 4), kInf);
  r[0] = 1.0;
  r[3] = 1.0;
  for (int d = 4; d <= dmax; ++d) r[d] = descartes_fourth(r[0], r[d - 2], r[d - 1], true).radius;
  r.resize(dmax + 1);
  return r;
}

std::optional<Circle2> inner_tangent_circle(const Circle2& A, const Circle2& B, const Circle2& Cc) {
  // coordinates relative to A's center
  Vec2 b = B.center - A.center, c = Cc.center - A.center;
  double r1 = A.radius, r2 = B.radius, r3 = Cc.radius;
  double k2 = 0.5 * (norm2(b) - r2 * r2 + r1 * r1);
  double k3 = 0.5 * (norm2(c) - r3 * r3 + r1 * r1);
  double det = b.x * c.y - b.y * c.x;
  if (std::abs(det) < 1e-300) return std::nullopt;
  // [x y] = P + rho Q
  Vec2 P{(k2 * c.y - b.y * k3) / det, (b.x * k3 - k2 * c.x) / det};
  double e2 = r2 - r1, e3 = r3 - r1;
  Vec2 Q{-(e2 * c.y - b.y * e3) / det, -(b.x * e3 - e2 * c.x) / det};
  double qa = norm2(Q) - 1, qb = 2 * (dot(Q, P) - r1), qc = norm2(P) - r1 * r1;
  double disc = qb * qb - 4 * qa * qc;
  if (disc < 0) return std::nullopt;
  double sq = std::sqrt(disc);
  double q = -0.5 * (qb + (qb >= 0 ? sq : -sq));
  double best = kInf;
  for (double rho : {q / qa, qc / q})
    if (std::isfinite(rho) && rho > 0) best = std::min(best, rho);
  if (!std::isfinite(best)) return std::nullopt;
  return Circle2{A.center + P + Q * best, best};
}

FlowerReport flower_checks_radii(double r0, const std::vector<double>& petals) {
  FlowerReport rep;
  const int d = static_cast<int>(petals.size());
  if (d < 3) throw Error(ErrorKind::InvalidInput, "a flower needs at least 3 petals");
  rep.degree = d;
  rep.bound = 0.01 / (static_cast<double>(d) * d);
  rep.min_ratio = kInf;
  rep.min_three_circle = kInf;
  for (int j = 0; j < d; ++j) {
    rep.min_ratio = std::min(rep.min_ratio, petals[j] / r0);
    double a = petals[j], b = petals[(j + 1) % d];
    for (auto [x, y] : {std::pair{a, b}, std::pair{b, a}}) {
      double ratio = y / std::min(r0, x);
      rep.min_three_circle = std::min(rep.min_three_circle, ratio);
      if (ratio < rep.bound) rep.violations++;
    }
  }
  return rep;
}

FlowerReport flower_checks(const CirclePacking& p, int v) {
  if (v < 0 || v >= p.num_vertices() || !p.tri.is_interior(v))
    throw Error(ErrorKind::InvalidInput, "flower check needs an interior vertex");
  std::vector<double> petals;
  for (int u : p.tri.petals(v)) petals.push_back(p.radii[u]);
  FlowerReport rep = flower_checks_radii(p.radii[v], petals);
  rep.vertex = v;
  return rep;
}

StabilityReport nested_radii_stability(const std::vector<std::pair<Triangulation, int>>& truncations, int k,
                                       const SolveOptions& opt) {
  if (truncations.empty()) throw Error(ErrorKind::InvalidInput, "no truncations");
  StabilityReport rep;
  std::vector<std::map<std::int64_t, double>> tables;
  std::set<std::pair<std::int64_t, std::int64_t>> ref_edges;
  for (size_t t = 0; t < truncations.size(); ++t) {
    const auto& [tri, root] = truncations[t];
    std::vector<int> dist(tri.num_vertices(), -1);
    std::deque<int> q{root};
    dist[root] = 0;
    std::vector<int> ball;
    while (!q.empty()) {
      int v = q.front();
      q.pop_front();
      ball.push_back(v);
      if (dist[v] == k) continue;
      for (int u : tri.petals(v))
        if (dist[u] < 0) {
          dist[u] = dist[v] + 1;
          q.push_back(u);
        }
    }
    for (int v : ball)
      if (dist[v] < k && tri.is_boundary(v))
        throw Error(ErrorKind::InvalidInput, "truncation does not contain the full ball around the root");
    std::set<std::pair<std::int64_t, std::int64_t>> edges;
    const auto& lab = tri.labels();
    for (int v : ball)
      for (int u : tri.petals(v))
        if (dist[u] >= 0 && lab[v] < lab[u]) edges.insert({lab[v], lab[u]});
    if (t == 0) {
      ref_edges = edges;
    } else if (edges != ref_edges) {
      throw Error(ErrorKind::InvalidInput, "truncations are not nested on the ball of radius " + std::to_string(k));
    }
    auto sol = solve_radii(tri, PackingBoundary::maximal(), opt);
    CirclePacking p = layout(tri, sol, root);
    std::map<std::int64_t, double> tab;
    for (int v : ball) tab[lab[v]] = p.radii[v] / p.radii[root];
    tables.push_back(std::move(tab));
  }
  for (auto& [l, r] : tables[0]) rep.labels.push_back(l);
  for (auto& tab : tables) {
    if (tab.size() != rep.labels.size())
      throw Error(ErrorKind::InvalidInput, "truncations are not nested on the ball of radius " + std::to_string(k));
    std::vector<double> row;
    for (auto l : rep.labels) row.push_back(tab.at(l));
    rep.radii.push_back(std::move(row));
  }
  for (size_t t = 1; t < rep.radii.size(); ++t) {
    double d = 0;
    for (size_t i = 0; i < rep.labels.size(); ++i)
      d = std::max(d, std::abs(rep.radii[t][i] - rep.radii[t - 1][i]) / rep.radii[t - 1][i]);
    rep.differences.push_back(d);
  }
  return rep;
}

std::string packing_csv(const CirclePacking& p) {
  std::ostringstream os;
  os << "id,x,y,r\n";
  for (int v = 0; v < p.num_vertices(); ++v)
    os << v << "," << fmt_double(p.centers[v].x) << "," << fmt_double(p.centers[v].y) << "," << fmt_double(p.radii[v])
       << "\n";
  return os.str();
}

}  // namespace cellembed
