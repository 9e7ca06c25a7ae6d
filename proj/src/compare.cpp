#include "cellembed/compare.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "cellembed/error.hpp"
#include "cellembed/format.hpp"

namespace cellembed {

namespace {

bool covered(const Vec2& z) { return std::isfinite(z.x) && std::isfinite(z.y); }

void check_radii(const std::vector<double>& radii, const Calibration& cal) {
  if (radii.empty()) throw Error(ErrorKind::InvalidInput, "empty radius grid");
  if (!(cal.inner >= 0 && cal.outer > cal.inner)) throw Error(ErrorKind::InvalidInput, "bad calibration annulus");
  for (size_t i = 0; i < radii.size(); ++i) {
    if (i > 0 && !(radii[i] > radii[i - 1])) throw Error(ErrorKind::InvalidInput, "radius grid must be increasing");
    if (radii[i] < cal.outer)
      throw Error(ErrorKind::InvalidInput, "evaluation radius " + fmt_double(radii[i]) + " overlaps the calibration annulus");
  }
}

Vec2 inverse_apply(const Mat2& M, const Vec2& z) {
  Eigen::Vector2d v = M.inverse() * Eigen::Vector2d(z.x, z.y);
  return {v(0), v(1)};
}

double diameter(const std::vector<Vec2>& pts) {
  double d = 0;
  for (size_t i = 0; i < pts.size(); ++i)
    for (size_t j = i + 1; j < pts.size(); ++j) d = std::max(d, dist(pts[i], pts[j]));
  return d;
}

void finish(ComparisonReport& rep) {
  rep.vertex_trend = trend_verdict(rep.vertex_metric);
  if (!rep.edge_metric.empty()) rep.edge_trend = trend_verdict(rep.edge_metric);
}

}  // namespace

TrendVerdict trend_verdict(const std::vector<double>& v, double threshold) {
  TrendVerdict t;
  if (v.empty()) return t;
  t.decreasing = true;
  for (size_t i = 1; i < v.size(); ++i)
    if (!(v[i] < v[i - 1])) t.decreasing = false;
  t.ratio = v.front() > 0 ? v.back() / v.front() : std::numeric_limits<double>::quiet_NaN();
  t.pass = v.size() > 1 && t.decreasing && t.ratio < threshold;
  return t;
}

GaugeFit calibrate_gauge(const CellConfiguration& config, const CellImages& images, const Calibration& cal, int* pairs) {
  if (static_cast<int>(images.size()) != config.num_cells()) throw Error(ErrorKind::InvalidInput, "one image per cell");
  std::vector<Vec2> src, dst;
  for (int h = 0; h < config.num_cells(); ++h) {
    Vec2 c = config.cell(h).centroid();
    double r = norm(c);
    if (r < cal.inner || r >= cal.outer) continue;
    if (!covered(images[h])) throw Error(ErrorKind::Carrier, "calibration cell " + std::to_string(h) + " is not covered");
    src.push_back(images[h]);
    dst.push_back(c);
  }
  if (pairs) *pairs = static_cast<int>(src.size());
  return fit_linear_gauge(src, dst);
}

double closeness_metric(const CellConfiguration& config, const CellImages& images, const GaugeFit& g, double r,
                        int* cells) {
  auto hs = config.cells_meeting_disk({0, 0}, r);
  if (hs.empty()) throw Error(ErrorKind::InvalidInput, "no cell meets the disk");
  double worst = 0;
  for (int h : hs) {
    if (!covered(images[h])) throw Error(ErrorKind::Carrier, "cell " + std::to_string(h) + " meets B(0;" + fmt_double(r) + ") but has no image");
    Vec2 e = config.cell(h).centroid() - g.apply(images[h]);
    worst = std::max(worst, norm(inverse_apply(g.A, e)));
  }
  if (cells) *cells = static_cast<int>(hs.size());
  return worst / r;
}

GaugeFit rotated_gauge(const GaugeFit& g, double dtheta) {
  GaugeFit out = g;
  out.theta = std::fmod(g.theta + dtheta, 2 * M_PI);
  if (out.theta < 0) out.theta += 2 * M_PI;
  out.L = out.compose();
  return out;
}

ComparisonReport compare_packing(const CellConfiguration& config, const CirclePacking& packing,
                                 const std::vector<int>& original, const std::vector<double>& radii,
                                 const Calibration& cal, const std::optional<GaugeFit>& gauge) {
  check_radii(radii, cal);
  if (original.size() != packing.centers.size()) throw Error(ErrorKind::InvalidInput, "one cell per packing vertex");
  const double nan = std::numeric_limits<double>::quiet_NaN();
  CellImages img(config.num_cells(), Vec2{nan, nan});
  for (size_t v = 0; v < original.size(); ++v) {
    if (original[v] < 0 || original[v] >= config.num_cells()) throw Error(ErrorKind::InvalidInput, "bad cell index");
    img[original[v]] = packing.centers[v];
  }
  ComparisonReport rep;
  rep.pipeline = "packing";
  rep.calibration = cal;
  rep.radii = radii;
  if (gauge) {
    rep.gauge = *gauge;
    rep.gauge_fitted = false;
  } else {
    rep.gauge = calibrate_gauge(config, img, cal, &rep.calibration_pairs);
  }
  for (double r : radii) {
    int n = 0;
    rep.vertex_metric.push_back(closeness_metric(config, img, rep.gauge, r, &n));
    rep.cells.push_back(n);
  }
  rep.provenance.push_back("packing_vertices = " + std::to_string(packing.num_vertices()));
  rep.provenance.push_back("packing_residual = " + fmt_double(packing.solve_residual));
  finish(rep);
  return rep;
}

PLMap as_plmap(const DiscreteConformalMap& m) {
  PLMap f;
  f.sub = share(m.sub);
  f.values = m.image;
  f.provenance = "uniformization n=" + std::to_string(m.sub.n) + " residual=" + fmt_double(m.solve_residual);
  return f;
}

ComparisonReport compare_uniformization(const CellConfiguration& config, const EquilateralSurface& s,
                                        const SurfacePortion& p, const PLMap& map, const std::vector<int>& original,
                                        const std::vector<double>& radii, const Calibration& cal,
                                        const std::optional<GaugeFit>& gauge) {
  check_radii(radii, cal);
  if (!map.sub) throw Error(ErrorKind::InvalidInput, "map without a domain");
  if (!original.empty() && static_cast<int>(original.size()) != s.num_vertices)
    throw Error(ErrorKind::InvalidInput, "one cell per surface vertex");
  auto cell_of = [&](int v) { return original.empty() ? v : original[v]; };
  const double nan = std::numeric_limits<double>::quiet_NaN();
  CellImages img(config.num_cells(), Vec2{nan, nan});
  for (int v : p.vertices) {
    int h = cell_of(v);
    if (h < 0 || h >= config.num_cells()) throw Error(ErrorKind::InvalidInput, "bad cell index");
    img[h] = map.vertex_value(v);
  }
  ComparisonReport rep;
  rep.pipeline = "uniformization";
  rep.calibration = cal;
  rep.radii = radii;
  if (gauge) {
    rep.gauge = *gauge;
    rep.gauge_fitted = false;
  } else {
    rep.gauge = calibrate_gauge(config, img, cal, &rep.calibration_pairs);
  }
  // edge images: n+1 points along each surface edge
  const int n = map.sub->n;
  std::vector<double> dcell(config.num_cells(), -1);
  auto cell_dist = [&](int h) {
    if (dcell[h] < 0) dcell[h] = config.cell(h).distance({0, 0});
    return dcell[h];
  };
  struct EdgeImage {
    double reach;  // B(0;r) meets both cells iff r >= reach
    double diam;
  };
  std::vector<EdgeImage> edges;
  for (int f : p.faces) {
    const auto& fv = s.faces[f];
    const int q = static_cast<int>(fv.size());
    std::vector<Vec2> boundary;
    for (int k = 0; k < q; ++k) {
      int u = fv[k], w = fv[(k + 1) % q];
      std::vector<Vec2> pts;
      for (int t = 0; t <= n; ++t) {
        Vec2 x = chart_corner(q, k) * (1.0 - double(t) / n) + chart_corner(q, (k + 1) % q) * (double(t) / n);
        pts.push_back(map.evaluate({f, x}));
      }
      boundary.insert(boundary.end(), pts.begin(), pts.end() - 1);
      // each edge once: from the face on its left with u < w, or from this face if the other side is missing
      int other = s.face_left(w, u);
      bool other_in = other >= 0 && std::binary_search(p.faces.begin(), p.faces.end(), other);
      if (u > w && other_in) continue;
      edges.push_back({std::max(cell_dist(cell_of(u)), cell_dist(cell_of(w))), rep.gauge.scale * diameter(pts)});
    }
    rep.max_face_diameter = std::max(rep.max_face_diameter, rep.gauge.scale * diameter(boundary));
  }
  for (double r : radii) {
    int cnt = 0;
    rep.vertex_metric.push_back(closeness_metric(config, img, rep.gauge, r, &cnt));
    rep.cells.push_back(cnt);
    double e = 0;
    for (auto& ed : edges)
      if (ed.reach <= r) e = std::max(e, ed.diam);
    rep.edge_metric.push_back(e / r);
  }
  rep.provenance.push_back("map = " + map.provenance);
  rep.provenance.push_back("portion_faces = " + std::to_string(p.faces.size()));
  rep.provenance.push_back("mesh_level = " + std::to_string(n));
  finish(rep);
  return rep;
}

std::string ComparisonReport::text() const {
  std::ostringstream os;
  os << "[comparison]\npipeline = " << pipeline << "\nseed = " << seed << "\n";
  for (auto& l : provenance) os << l << "\n";
  os << "calibration_annulus = " << fmt_double(calibration.inner) << " " << fmt_double(calibration.outer) << "\n";
  os << "gauge_source = " << (gauge_fitted ? "fitted" : "supplied") << "\n";
  os << "calibration_pairs = " << calibration_pairs << "\n";
  os << "gauge_scale = " << fmt_double(gauge.scale) << "\ngauge_theta = " << fmt_double(gauge.theta) << "\n";
  os << "gauge_A = " << fmt_double(gauge.A(0, 0)) << " " << fmt_double(gauge.A(0, 1)) << " " << fmt_double(gauge.A(1, 0))
     << " " << fmt_double(gauge.A(1, 1)) << "\n";
  os << "gauge_residual = " << fmt_double(gauge.residual) << "\n";
  if (pipeline == "uniformization") os << "max_face_diameter = " << fmt_double(max_face_diameter) << "\n";
  auto trend = [&](const char* name, const TrendVerdict& t) {
    os << name << "_decreasing = " << (t.decreasing ? "true" : "false") << "\n"
       << name << "_ratio = " << fmt_double(t.ratio) << "\n"
       << name << "_pass = " << (t.pass ? "true" : "false") << "\n";
  };
  trend("vertex_trend", vertex_trend);
  if (!edge_metric.empty()) trend("edge_trend", edge_trend);
  os << "[metrics]\n";
  os << csv();
  return os.str();
}

std::string ComparisonReport::csv() const {
  std::ostringstream os;
  os << "seed,pipeline,r,cells,vertex_metric" << (edge_metric.empty() ? "" : ",edge_metric") << "\n";
  for (size_t i = 0; i < radii.size(); ++i) {
    os << seed << ',' << pipeline << ',' << fmt_double(radii[i]) << ',' << cells[i] << ',' << fmt_double(vertex_metric[i]);
    if (!edge_metric.empty()) os << ',' << fmt_double(edge_metric[i]);
    os << "\n";
  }
  return os.str();
}

GaugeFit covariance_gauge(const Mat2& sigma) {
  if (!sigma.allFinite() || std::abs(sigma(0, 1) - sigma(1, 0)) > 1e-12 * sigma.norm())
    throw Error(ErrorKind::InvalidInput, "covariance must be symmetric");
  Eigen::SelfAdjointEigenSolver<Mat2> es(sigma);
  if (!(es.eigenvalues()(0) > 0)) throw Error(ErrorKind::Degenerate, "covariance is not positive definite");
  Mat2 inv_sqrt = es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
                  es.eigenvectors().transpose();
  GaugeFit g;
  g.A = inv_sqrt * std::pow(sigma.determinant(), 0.25);
  g.scale = 1.0;
  g.theta = 0.0;
  g.L = g.A;
  return g;
}

GaugeFit covariance_gauge(const WalkReport& report) {
  Mat2 s;
  s << report.sigma[0], report.sigma[1], report.sigma[2], report.sigma[3];
  return covariance_gauge(s);
}

}  // namespace cellembed
