#include "cellembed/corrector.hpp"

#include <Eigen/Sparse>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "cellembed/error.hpp"
#include "cellembed/format.hpp"
#include "cellembed/rng.hpp"

namespace cellembed {

namespace {

constexpr std::uint64_t kPhi0Stream = 0x70A1;

std::array<Vec2, 3> image_of(const PLMap& f, int sf) {
  const auto& t = f.sub->tri.face(sf);
  return {f.values[t[0]], f.values[t[1]], f.values[t[2]]};
}

// |grad f|_F^2 * area for the linear map domain -> image
double face_energy_impl(const std::array<Vec2, 3>& d, const std::array<Vec2, 3>& img) {
  double e = 0;
  for (int k = 0; k < 3; ++k) {
    const Vec2& a = d[k];
    const Vec2& b = d[(k + 1) % 3];
    const Vec2& c = d[(k + 2) % 3];
    double cot = dot(b - a, c - a) / std::abs(cross(b - a, c - a));
    e += 0.5 * cot * norm2(img[(k + 1) % 3] - img[(k + 2) % 3]);
  }
  return e;
}

double face_inner_impl(const std::array<Vec2, 3>& d, const std::array<Vec2, 3>& f, const std::array<Vec2, 3>& g) {
  double e = 0;
  for (int k = 0; k < 3; ++k) {
    const Vec2& a = d[k];
    const Vec2& b = d[(k + 1) % 3];
    const Vec2& c = d[(k + 2) % 3];
    double cot = dot(b - a, c - a) / std::abs(cross(b - a, c - a));
    e += 0.5 * cot * dot(f[(k + 1) % 3] - f[(k + 2) % 3], g[(k + 1) % 3] - g[(k + 2) % 3]);
  }
  return e;
}

void require_same_domain(const PLMap& a, const PLMap& b) {
  if (!a.sub || !b.sub) throw Error(ErrorKind::InvalidInput, "map without a domain");
  if (a.sub != b.sub && (a.sub->tri.num_vertices() != b.sub->tri.num_vertices() ||
                         a.sub->tri.faces() != b.sub->tri.faces()))
    throw Error(ErrorKind::InvalidInput, "maps are defined on different domains");
}

}  // namespace

Vec2 PLMap::evaluate(const SurfacePoint& x) const {
  auto [sf, b] = sub->locate(x);
  const auto& t = sub->tri.face(sf);
  return values[t[0]] * b[0] + values[t[1]] * b[1] + values[t[2]] * b[2];
}

Vec2 PLMap::vertex_value(int v) const {
  if (v < 0 || v >= static_cast<int>(sub->sub_of_vertex.size()) || sub->sub_of_vertex[v] < 0)
    throw Error(ErrorKind::InvalidInput, "vertex outside the map domain");
  return values[sub->sub_of_vertex[v]];
}

std::vector<int> PLMap::degenerate_faces(double tol) const {
  std::vector<int> out;
  for (int sf = 0; sf < sub->tri.num_faces(); ++sf) {
    auto im = image_of(*this, sf);
    if (std::abs(orient(im[0], im[1], im[2])) <= tol) out.push_back(sf);
  }
  return out;
}

std::string PLMap::dump() const {
  std::ostringstream os;
  os << "plmap\nprovenance " << provenance << "\nlevel " << (sub ? sub->n : 0) << "\nvertices " << values.size()
     << "\n";
  for (size_t i = 0; i < values.size(); ++i) {
    int orig = sub ? sub->original[i] : -1;
    os << i << ' ' << orig << ' ' << fmt_double(values[i].x) << ' ' << fmt_double(values[i].y) << '\n';
  }
  return os.str();
}

std::shared_ptr<const Subdivision> share(Subdivision s) { return std::make_shared<const Subdivision>(std::move(s)); }

std::vector<Vec2> sample_cell_points(const CellConfiguration& config, std::uint64_t seed) {
  std::vector<Vec2> out(config.num_cells());
  for (int h = 0; h < config.num_cells(); ++h) {
    if (!(config.cell(h).area() > 0)) throw Error(ErrorKind::Degenerate, "cell " + std::to_string(h) + " has zero area");
    CounterRng rng({seed, kPhi0Stream, static_cast<std::uint64_t>(h)});
    out[h] = config.cell(h).sample_uniform(rng);
  }
  return out;
}

PLMap lift_vertex_values(const EquilateralSurface& s, std::shared_ptr<const Subdivision> sub,
                         const std::vector<Vec2>& vv, std::string provenance) {
  if (static_cast<int>(vv.size()) != s.num_vertices) throw Error(ErrorKind::InvalidInput, "one value per surface vertex");
  PLMap f;
  f.provenance = std::move(provenance);
  f.values.resize(sub->tri.num_vertices());
  for (int x = 0; x < sub->tri.num_vertices(); ++x) {
    const auto& sp = sub->vertex_point[x];
    const auto& fv = s.faces[sp.face];
    const int q = static_cast<int>(fv.size());
    if (q == 3) {
      auto b = barycentric(chart_corner(3, 0), chart_corner(3, 1), chart_corner(3, 2), sp.chart);
      f.values[x] = vv[fv[0]] * b[0] + vv[fv[1]] * b[1] + vv[fv[2]] * b[2];
      continue;
    }
    Vec2 center{0, 0};
    for (int v : fv) center += vv[v];
    center = center / q;
    double best = -1e300;
    for (int k = 0; k < q; ++k) {
      auto b = barycentric(chart_corner(q, k), chart_corner(q, (k + 1) % q), chart_center(q), sp.chart);
      double score = std::min({b[0], b[1], b[2]});
      if (score > best) {
        best = score;
        f.values[x] = vv[fv[k]] * b[0] + vv[fv[(k + 1) % q]] * b[1] + center * b[2];
      }
    }
  }
  f.sub = std::move(sub);
  return f;
}

PLMap sample_phi0(const CellConfiguration& config, const EquilateralSurface& s, std::shared_ptr<const Subdivision> sub,
                  std::uint64_t seed) {
  if (config.num_cells() != s.num_vertices) throw Error(ErrorKind::InvalidInput, "surface vertices must correspond to cells");
  return lift_vertex_values(s, std::move(sub), sample_cell_points(config, seed), "phi0 seed=" + std::to_string(seed));
}

double equilateral_energy_closed_form(const Vec2& p0, const Vec2& p1, const Vec2& p2) {
  Vec2 e = p1 - p0;
  double x1 = norm(e);
  double ang = x1 > 0 ? std::atan2(e.y, e.x) : 0.0;
  Vec2 q = rotate(p2 - p0, -ang);
  const double s3 = std::sqrt(3.0);
  double m00 = x1, m01 = (-x1 + 2 * q.x) / s3, m11 = 2 * q.y / s3;
  return s3 / 4 * (m00 * m00 + m01 * m01 + m11 * m11);
}

double equilateral_energy_quadrature(const Vec2& p0, const Vec2& p1, const Vec2& p2) {
  const Vec2 a{0, 0}, b{1, 0}, c{0.5, std::sqrt(3.0) / 2};
  auto f = [&](const Vec2& x) {
    auto l = barycentric(a, b, c, x);
    return p0 * l[0] + p1 * l[1] + p2 * l[2];
  };
  const double h = 1e-3;
  // degree-2 rule with three interior nodes
  const double nodes[3][3] = {{2.0 / 3, 1.0 / 6, 1.0 / 6}, {1.0 / 6, 2.0 / 3, 1.0 / 6}, {1.0 / 6, 1.0 / 6, 2.0 / 3}};
  const double area = std::sqrt(3.0) / 4;
  double sum = 0;
  for (auto& nd : nodes) {
    Vec2 x = a * nd[0] + b * nd[1] + c * nd[2];
    Vec2 fx = (f(x + Vec2{h, 0}) - f(x - Vec2{h, 0})) / (2 * h);
    Vec2 fy = (f(x + Vec2{0, h}) - f(x - Vec2{0, h})) / (2 * h);
    sum += (norm2(fx) + norm2(fy)) / 3;
  }
  return area * sum;
}

double face_energy(const std::array<Vec2, 3>& domain, const std::array<Vec2, 3>& image) {
  if (!(std::abs(orient(domain[0], domain[1], domain[2])) > 0)) throw Error(ErrorKind::Degenerate, "degenerate domain triangle");
  return face_energy_impl(domain, image);
}

double dirichlet_energy(const PLMap& f, const std::vector<int>& faces) {
  double e = 0;
  auto one = [&](int sf) { e += face_energy_impl(f.sub->corners[sf], image_of(f, sf)); };
  if (faces.empty())
    for (int sf = 0; sf < f.sub->tri.num_faces(); ++sf) one(sf);
  else
    for (int sf : faces) one(sf);
  return e;
}

double dirichlet_inner(const PLMap& f, const PLMap& g, const std::vector<int>& faces) {
  require_same_domain(f, g);
  double e = 0;
  auto one = [&](int sf) { e += face_inner_impl(f.sub->corners[sf], image_of(f, sf), image_of(g, sf)); };
  if (faces.empty())
    for (int sf = 0; sf < f.sub->tri.num_faces(); ++sf) one(sf);
  else
    for (int sf : faces) one(sf);
  return e;
}

bool HarmonicExtension::energy_monotone() const {
  for (auto& r : regions)
    if (r.energy_after > r.energy_before * (1 + 1e-12) + 1e-12) return false;
  return true;
}

bool HarmonicExtension::max_principle() const {
  for (auto& r : regions)
    if (!r.max_principle) return false;
  return true;
}

HarmonicExtension harmonic_extend(const CellConfiguration& config, const PLMap& phi0, const DyadicSystem& dyadic,
                                  double m) {
  if (!phi0.sub) throw Error(ErrorKind::InvalidInput, "phi0 has no domain");
  const Subdivision& sub = *phi0.sub;
  const Triangulation& tri = sub.tri;
  const int N = tri.num_vertices();
  HarmonicExtension out;
  out.m = m;
  // cotangent edge weights from the face charts
  std::vector<std::vector<std::pair<int, double>>> w(N);
  auto add = [&](int u, int v, double c) {
    for (auto& e : w[u])
      if (e.first == v) {
        e.second += c;
        return;
      }
    w[u].push_back({v, c});
  };
  for (int sf = 0; sf < tri.num_faces(); ++sf) {
    const auto& d = sub.corners[sf];
    const auto& t = tri.face(sf);
    for (int k = 0; k < 3; ++k) {
      const Vec2& a = d[k];
      const Vec2& b = d[(k + 1) % 3];
      const Vec2& c = d[(k + 2) % 3];
      double cot = dot(b - a, c - a) / std::abs(cross(b - a, c - a));
      add(t[(k + 1) % 3], t[(k + 2) % 3], 0.5 * cot);
      add(t[(k + 2) % 3], t[(k + 1) % 3], 0.5 * cot);
    }
  }
  // regions by hat square of phi0(x)
  HatSquareOracle oracle(config, dyadic);
  std::map<std::tuple<int, std::int64_t, std::int64_t>, int> region_id;
  std::vector<int> region(N, -1);
  for (int x = 0; x < N; ++x) {
    auto hs = oracle(phi0.values[x], m);
    auto key = std::make_tuple(hs.square.level, hs.square.i, hs.square.j);
    auto it = region_id.find(key);
    if (it == region_id.end()) {
      it = region_id.emplace(key, static_cast<int>(out.regions.size())).first;
      RegionReport r;
      r.square = hs.square;
      out.regions.push_back(r);
    }
    region[x] = it->second;
    out.regions[it->second].vertices++;
  }
  for (int sf = 0; sf < tri.num_faces(); ++sf) {
    const auto& t = tri.face(sf);
    if (region[t[0]] == region[t[1]] && region[t[1]] == region[t[2]]) out.regions[region[t[0]]].faces.push_back(sf);
  }
  std::vector<char> interior(N, 0);
  for (int x = 0; x < N; ++x) {
    if (tri.is_boundary(x)) continue;
    bool all = true;
    for (int y : tri.petals(x))
      if (region[y] != region[x]) all = false;
    interior[x] = all;
  }
  out.map = phi0;
  std::vector<std::vector<int>> members(out.regions.size());
  for (int x = 0; x < N; ++x)
    if (interior[x]) members[region[x]].push_back(x);
  std::vector<int> local(N, -1);
  for (size_t r = 0; r < out.regions.size(); ++r) {
    auto& rep = out.regions[r];
    const auto& I = members[r];
    rep.interior = static_cast<int>(I.size());
    rep.energy_before = dirichlet_energy(phi0, rep.faces);
    if (I.empty()) {
      rep.energy_after = rep.energy_before;
      continue;
    }
    for (size_t i = 0; i < I.size(); ++i) local[I[i]] = static_cast<int>(i);
    // every interior component must reach a fixed vertex
    {
      std::vector<char> seen(I.size(), 0);
      for (size_t s0 = 0; s0 < I.size(); ++s0) {
        if (seen[s0]) continue;
        std::vector<int> stack{static_cast<int>(s0)};
        seen[s0] = 1;
        bool anchored = false;
        while (!stack.empty()) {
          int i = stack.back();
          stack.pop_back();
          for (auto [y, c] : w[I[i]]) {
            if (local[y] < 0)
              anchored = true;
            else if (!seen[local[y]]) {
              seen[local[y]] = 1;
              stack.push_back(local[y]);
            }
          }
        }
        if (!anchored) {
          for (int x : I) local[x] = -1;
          throw Error(ErrorKind::Structural, "region mesh disconnected from its boundary");
        }
      }
    }
    const int n = static_cast<int>(I.size());
    std::vector<Eigen::Triplet<double>> trip;
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(n, 2);
    double bmin[2] = {1e300, 1e300}, bmax[2] = {-1e300, -1e300};
    for (int i = 0; i < n; ++i) {
      double diag = 0;
      for (auto [y, c] : w[I[i]]) {
        diag += c;
        if (local[y] >= 0) {
          trip.emplace_back(i, local[y], -c);
        } else {
          rhs(i, 0) += c * phi0.values[y].x;
          rhs(i, 1) += c * phi0.values[y].y;
          bmin[0] = std::min(bmin[0], phi0.values[y].x);
          bmax[0] = std::max(bmax[0], phi0.values[y].x);
          bmin[1] = std::min(bmin[1], phi0.values[y].y);
          bmax[1] = std::max(bmax[1], phi0.values[y].y);
        }
      }
      trip.emplace_back(i, i, diag);
    }
    Eigen::SparseMatrix<double> K(n, n);
    K.setFromTriplets(trip.begin(), trip.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(K);
    Eigen::MatrixXd sol;
    if (ldlt.info() == Eigen::Success) sol = ldlt.solve(rhs);
    double scale = std::max(rhs.cwiseAbs().maxCoeff(), 1e-300);
    double res = ldlt.info() == Eigen::Success ? (K * sol - rhs).cwiseAbs().maxCoeff() / scale : INFINITY;
    if (!(res < 1e-9)) {
      for (int x : I) local[x] = -1;
      throw Error(ErrorKind::NonConvergence, "harmonic solve failed, relative residual " + fmt_double(res));
    }
    rep.residual = res;
    out.max_residual = std::max(out.max_residual, res);
    const double span = std::max({bmax[0] - bmin[0], bmax[1] - bmin[1], 1e-300});
    for (int i = 0; i < n; ++i) {
      Vec2 z{sol(i, 0), sol(i, 1)};
      out.map.values[I[i]] = z;
      double slack = 1e-9 * span;
      if (z.x < bmin[0] - slack || z.x > bmax[0] + slack || z.y < bmin[1] - slack || z.y > bmax[1] + slack)
        rep.max_principle = false;
    }
    for (int x : I) local[x] = -1;
    rep.energy_after = dirichlet_energy(out.map, rep.faces);
  }
  std::ostringstream prov;
  prov << "phi_m m=" << fmt_double(m) << " n=" << sub.n << " regions=" << out.regions.size()
       << " max_residual=" << fmt_double(out.max_residual) << " from " << phi0.provenance;
  out.map.provenance = prov.str();
  return out;
}

double orthogonal_increment_residual(const HarmonicExtension& outer, const PLMap& a, const PLMap& b) {
  require_same_domain(outer.map, a);
  require_same_domain(a, b);
  PLMap diff = a;
  for (size_t i = 0; i < diff.values.size(); ++i) diff.values[i] = a.values[i] - b.values[i];
  double worst = 0;
  for (auto& r : outer.regions) worst = std::max(worst, std::abs(dirichlet_inner(outer.map, diff, r.faces)));
  return worst;
}

double se_statistic(const PLMap& a, const PLMap& b, const PLMap& phi0, const CellRegion& cell, const Box& clip) {
  require_same_domain(a, b);
  require_same_domain(a, phi0);
  double area = cell.clipped_area(clip);
  if (!(area > 0)) throw Error(ErrorKind::InvalidInput, "cell does not meet the clip square");
  double sum = 0;
  for (int sf = 0; sf < a.sub->tri.num_faces(); ++sf) {
    auto im = image_of(phi0, sf);
    Vec2 c = (im[0] + im[1] + im[2]) / 3.0;
    if (!clip.contains(c) || !cell.contains(c)) continue;
    auto ia = image_of(a, sf), ib = image_of(b, sf);
    std::array<Vec2, 3> d{ia[0] - ib[0], ia[1] - ib[1], ia[2] - ib[2]};
    sum += face_energy_impl(a.sub->corners[sf], d);
  }
  return sum / area;
}

MeshLevelChoice choose_mesh_level(const CellConfiguration& config, const EquilateralSurface& s,
                                  const SurfacePortion& p, const DyadicSystem& dyadic, double m, std::uint64_t seed,
                                  const Box& clip, int n0, int n_max, double tol) {
  if (n0 < 1 || n_max < n0) throw Error(ErrorKind::InvalidInput, "bad mesh level range");
  MeshLevelChoice out;
  CellRegion window(Polygon{clip.lo, {clip.hi.x, clip.lo.y}, clip.hi, {clip.lo.x, clip.hi.y}});
  double prev = std::numeric_limits<double>::quiet_NaN();
  for (int n = n0; n <= n_max; n *= 2) {
    auto sub = share(subdivide(s, p, n));
    auto phi0 = sample_phi0(config, s, sub, seed);
    auto ext = harmonic_extend(config, phi0, dyadic, m);
    double se = se_statistic(ext.map, phi0, phi0, window, clip);
    out.levels.push_back(n);
    out.n = n;
    if (!std::isnan(prev)) {
      out.se_change.push_back(std::abs(se - prev));
      if (out.se_change.back() < tol) return out;
    }
    prev = se;
  }
  return out;
}

Mat2 rotation(double theta) {
  Mat2 r;
  r << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  return r;
}

Vec2 GaugeFit::apply(const Vec2& x) const { return {L(0, 0) * x.x + L(0, 1) * x.y, L(1, 0) * x.x + L(1, 1) * x.y}; }

Mat2 GaugeFit::compose() const { return scale * A * rotation(theta); }

GaugeFit decompose_gauge(const Mat2& L) {
  double det = L.determinant();
  if (!(det > 0)) throw Error(ErrorKind::Degenerate, "gauge must preserve orientation (det L = " + fmt_double(det) + ")");
  // P = (L L^T)^{1/2}
  Eigen::SelfAdjointEigenSolver<Mat2> es(L * L.transpose());
  Mat2 P = es.eigenvectors() * es.eigenvalues().cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
  Mat2 R = P.inverse() * L;
  GaugeFit g;
  g.L = L;
  g.scale = std::sqrt(det);
  g.A = P / g.scale;
  g.theta = std::atan2(R(1, 0), R(0, 0));
  if (g.theta < 0) g.theta += 2 * M_PI;
  if (g.theta >= 2 * M_PI) g.theta -= 2 * M_PI;
  return g;
}

GaugeFit fit_linear_gauge(const std::vector<Vec2>& s, const std::vector<Vec2>& t) {
  if (s.size() != t.size()) throw Error(ErrorKind::InvalidInput, "source and target counts differ");
  if (s.size() < 3) throw Error(ErrorKind::InvalidInput, "at least 3 pairs are needed");
  Mat2 SS = Mat2::Zero(), TS = Mat2::Zero();
  double scale = 0;
  for (size_t i = 0; i < s.size(); ++i) {
    Eigen::Vector2d a(s[i].x, s[i].y), b(t[i].x, t[i].y);
    SS += a * a.transpose();
    TS += b * a.transpose();
    scale = std::max(scale, a.squaredNorm());
  }
  if (!(std::abs(SS.determinant()) > 1e-12 * scale * scale))
    throw Error(ErrorKind::Degenerate, "source points are collinear");
  Mat2 L = TS * SS.inverse();
  GaugeFit g = decompose_gauge(L);
  double r2 = 0;
  for (size_t i = 0; i < s.size(); ++i) r2 += norm2(g.apply(s[i]) - t[i]);
  g.residual = std::sqrt(r2 / s.size());
  return g;
}

double sublinearity_metric(const std::vector<Vec2>& phi0, const std::vector<Vec2>& target, const GaugeFit& gauge, int k) {
  if (phi0.size() != target.size()) throw Error(ErrorKind::InvalidInput, "coverage mismatch");
  if (phi0.empty()) throw Error(ErrorKind::InvalidInput, "no vertices");
  double sup = 0;
  for (size_t i = 0; i < phi0.size(); ++i) sup = std::max(sup, dist(phi0[i], gauge.apply(target[i])));
  return sup / std::ldexp(1.0, k);
}

std::vector<Vec2> portion_vertex_values(const SurfacePortion& p, const PLMap& f) {
  std::vector<Vec2> out;
  for (int v : p.vertices) out.push_back(f.vertex_value(v));
  return out;
}

std::vector<Vec2> portion_vertex_values(const SurfacePortion& p, const DiscreteConformalMap& f) {
  std::vector<Vec2> out;
  for (int v : p.vertices) out.push_back(f.vertex_image(v));
  return out;
}

}  // namespace cellembed
