#include "cellembed/cell_config.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "cellembed/error.hpp"
#include "cellembed/format.hpp"

namespace cellembed {

using nlohmann::json;

CellConfiguration::CellConfiguration(std::vector<CellRegion> cells, HalfEdgeMap map, Box carrier)
    : cells_(std::move(cells)), map_(std::move(map)), carrier_(carrier) {
  if (static_cast<int>(cells_.size()) != map_.num_vertices())
    throw Error(ErrorKind::InvalidInput, "cell count does not match map vertex count");
  for (int i = 0; i < num_cells(); ++i)
    if (!(cells_[i].area() > 0)) throw Error(ErrorKind::InvalidInput, "cell " + std::to_string(i) + " has zero area");
  conductance_.assign(map_.num_edges(), 1.0);
  build_index();
}

void CellConfiguration::set_conductances(std::vector<double> c) {
  if (static_cast<int>(c.size()) != map_.num_edges())
    throw Error(ErrorKind::InvalidInput, "conductance count does not match edge count");
  for (double x : c)
    if (!(x > 0) || !std::isfinite(x)) throw Error(ErrorKind::InvalidInput, "conductance must be finite and positive");
  conductance_ = std::move(c);
}

void CellConfiguration::build_index() {
  index_.clear();
  if (cells_.empty()) return;
  Box u = cells_[0].bbox();
  double size = 0.0;
  for (auto& c : cells_) {
    const Box& b = c.bbox();
    u.lo.x = std::min(u.lo.x, b.lo.x);
    u.lo.y = std::min(u.lo.y, b.lo.y);
    u.hi.x = std::max(u.hi.x, b.hi.x);
    u.hi.y = std::max(u.hi.y, b.hi.y);
    size += std::max(b.width(), b.height());
  }
  index_box_ = u;
  index_cell_ = std::max(size / cells_.size(), 1e-9);
  index_nx_ = std::max(1, static_cast<int>(std::ceil(u.width() / index_cell_)));
  index_ny_ = std::max(1, static_cast<int>(std::ceil(u.height() / index_cell_)));
  while (static_cast<double>(index_nx_) * index_ny_ > 4e7) {
    index_cell_ *= 2;
    index_nx_ = std::max(1, static_cast<int>(std::ceil(u.width() / index_cell_)));
    index_ny_ = std::max(1, static_cast<int>(std::ceil(u.height() / index_cell_)));
  }
  index_.assign(static_cast<size_t>(index_nx_) * index_ny_, {});
  for (int i = 0; i < num_cells(); ++i) {
    const Box& b = cells_[i].bbox();
    int x0 = std::clamp(static_cast<int>(std::floor((b.lo.x - u.lo.x) / index_cell_)), 0, index_nx_ - 1);
    int x1 = std::clamp(static_cast<int>(std::floor((b.hi.x - u.lo.x) / index_cell_)), 0, index_nx_ - 1);
    int y0 = std::clamp(static_cast<int>(std::floor((b.lo.y - u.lo.y) / index_cell_)), 0, index_ny_ - 1);
    int y1 = std::clamp(static_cast<int>(std::floor((b.hi.y - u.lo.y) / index_cell_)), 0, index_ny_ - 1);
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x) index_[static_cast<size_t>(y) * index_nx_ + x].push_back(i);
  }
}

std::vector<int> CellConfiguration::cells_meeting(const Box& box) const {
  std::vector<int> out;
  if (index_.empty() || !box.intersects(index_box_)) return out;
  const Box& u = index_box_;
  int x0 = std::clamp(static_cast<int>(std::floor((box.lo.x - u.lo.x) / index_cell_)), 0, index_nx_ - 1);
  int x1 = std::clamp(static_cast<int>(std::floor((box.hi.x - u.lo.x) / index_cell_)), 0, index_nx_ - 1);
  int y0 = std::clamp(static_cast<int>(std::floor((box.lo.y - u.lo.y) / index_cell_)), 0, index_ny_ - 1);
  int y1 = std::clamp(static_cast<int>(std::floor((box.hi.y - u.lo.y) / index_cell_)), 0, index_ny_ - 1);
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x)
      for (int i : index_[static_cast<size_t>(y) * index_nx_ + x]) out.push_back(i);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  std::vector<int> res;
  for (int i : out)
    if (cells_[i].meets_box(box)) res.push_back(i);
  return res;
}

std::vector<int> CellConfiguration::cells_meeting_disk(const Vec2& c, double r) const {
  std::vector<int> res;
  for (int i : cells_meeting(Box::centered(c, 2 * r)))
    if (cells_[i].distance(c) <= r) res.push_back(i);
  return res;
}

std::optional<int> CellConfiguration::cell_containing(const Vec2& p) const {
  for (int i : cells_meeting(Box{p, p}))
    if (cells_[i].contains(p)) return i;
  return std::nullopt;
}

void CellConfiguration::require_inside_carrier(const Box& box, const char* what) const {
  double eps = 1e-12 * std::max(1.0, carrier_.width());
  if (!carrier_.inflated(eps).contains(box))
    throw Error(ErrorKind::Carrier, std::string(what) + ": square leaves the carrier window");
}

ConfigValidation CellConfiguration::validate(double tol) const {
  ConfigValidation v;
  for (int e = 0; e < map_.num_edges(); ++e) {
    int a = map_.origin(2 * e), b = map_.target(2 * e);
    double scale = std::max(cells_[a].diameter(), cells_[b].diameter());
    double d = std::numeric_limits<double>::infinity();
    for (auto& p : cells_[a].vertices()) d = std::min(d, cells_[b].distance(p));
    for (auto& p : cells_[b].vertices()) d = std::min(d, cells_[a].distance(p));
    if (d > tol * scale) {
      v.ok = false;
      v.adjacency_without_contact++;
      if (v.problems.size() < 20)
        v.problems.push_back("adjacent cells " + std::to_string(a) + "," + std::to_string(b) + " do not touch");
    }
  }
  for (int a = 0; a < num_cells(); ++a) {
    for (int b : cells_meeting(cells_[a].bbox())) {
      if (b <= a) continue;
      double area = 0.0;
      for (auto& pa : cells_[a].pieces())
        for (auto& pb : cells_[b].pieces()) {
          Box ba = polygon_bbox(pa), bb = polygon_bbox(pb);
          if (ba.intersects(bb)) area += convex_intersection_area(pa, pb);
        }
      if (area > tol * std::min(cells_[a].area(), cells_[b].area())) {
        v.ok = false;
        v.overlapping_pairs++;
        if (v.problems.size() < 20)
          v.problems.push_back("cells " + std::to_string(a) + "," + std::to_string(b) + " overlap");
      }
    }
  }
  return v;
}

CellConfiguration CellConfiguration::translated(const Vec2& t) const {
  std::vector<CellRegion> cells;
  cells.reserve(cells_.size());
  for (auto& c : cells_) cells.push_back(c.translated(t));
  CellConfiguration out(std::move(cells), map_, carrier_.translated(t));
  out.conductance_ = conductance_;
  out.sites_ = sites_;
  for (auto& s : out.sites_) s += t;
  out.generator = generator;
  out.seed = seed;
  out.meta = meta;
  return out;
}

std::string CellConfiguration::serialize() const {
  json j;
  j["format"] = "cellembed-config 1";
  j["generator"] = generator;
  j["seed"] = seed;
  j["meta"] = meta;
  j["carrier"] = {carrier_.lo.x, carrier_.lo.y, carrier_.hi.x, carrier_.hi.y};
  json cells = json::array();
  for (int i = 0; i < num_cells(); ++i) {
    json pieces = json::array();
    for (auto& p : cells_[i].pieces()) {
      json loop = json::array();
      for (auto& v : p) loop.push_back({v.x, v.y});
      pieces.push_back(loop);
    }
    json c = {{"id", i}, {"pieces", pieces}};
    if (!sites_.empty()) c["site"] = {sites_[i].x, sites_[i].y};
    cells.push_back(c);
  }
  j["cells"] = cells;
  j["map"] = map_.serialize();
  j["conductance"] = conductance_;
  return j.dump(1) + "\n";
}

CellConfiguration CellConfiguration::parse(const std::string& text) {
  json j = json::parse(text);
  if (j.value("format", "") != "cellembed-config 1") throw Error(ErrorKind::InvalidInput, "not a cell configuration");
  std::vector<CellRegion> cells;
  std::vector<Vec2> sites;
  for (auto& c : j["cells"]) {
    std::vector<Polygon> pieces;
    for (auto& loop : c["pieces"]) {
      Polygon p;
      for (auto& v : loop) p.push_back({v[0].get<double>(), v[1].get<double>()});
      pieces.push_back(p);
    }
    cells.emplace_back(std::move(pieces));
    if (c.contains("site")) sites.push_back({c["site"][0].get<double>(), c["site"][1].get<double>()});
  }
  auto car = j["carrier"];
  Box carrier{{car[0].get<double>(), car[1].get<double>()}, {car[2].get<double>(), car[3].get<double>()}};
  CellConfiguration out(std::move(cells), HalfEdgeMap::parse(j["map"].get<std::string>()), carrier);
  out.set_conductances(j["conductance"].get<std::vector<double>>());
  if (!sites.empty()) out.set_sites(sites);
  out.generator = j.value("generator", "");
  out.seed = j.value("seed", std::uint64_t{0});
  out.meta = j["meta"].get<std::map<std::string, std::string>>();
  return out;
}

LineConnectivity line_connectivity_check(const CellConfiguration& config, const Vec2& a, const Vec2& b) {
  if (a.x != b.x && a.y != b.y) throw Error(ErrorKind::InvalidInput, "segment must be axis-parallel");
  Box sb{{std::min(a.x, b.x), std::min(a.y, b.y)}, {std::max(a.x, b.x), std::max(a.y, b.y)}};
  config.require_inside_carrier(sb, "line connectivity");
  std::vector<int> cells;
  for (int i : config.cells_meeting(sb))
    if (config.cell(i).meets_segment(a, b)) cells.push_back(i);
  LineConnectivity r;
  r.cells = static_cast<int>(cells.size());
  std::vector<char> on(config.num_cells(), 0), seen(config.num_cells(), 0);
  for (int i : cells) on[i] = 1;
  for (int s : cells) {
    if (seen[s]) continue;
    r.components++;
    std::deque<int> q{s};
    seen[s] = 1;
    while (!q.empty()) {
      int v = q.front();
      q.pop_front();
      for (int u : config.map().neighbors(v))
        if (on[u] && !seen[u]) {
          seen[u] = 1;
          q.push_back(u);
        }
    }
  }
  r.connected = r.components <= 1;
  return r;
}

double almost_planarity_gap(const CellConfiguration& config, const CellEmbedding& emb, double r) {
  if (!(r > 0)) throw Error(ErrorKind::InvalidInput, "radius must be positive");
  const HalfEdgeMap& m = config.map();
  double worst = 0.0;
  for (int h : config.cells_meeting_disk({0, 0}, r)) {
    if (h >= static_cast<int>(emb.points.size()) || !emb.points[h])
      throw Error(ErrorKind::InvalidInput, "embedding lacks point for cell " + std::to_string(h));
    for (int he : m.rotation(h)) {
      int e = m.edge_id(he);
      std::vector<Vec2> curve;
      if (e < static_cast<int>(emb.edge_curves.size()) && !emb.edge_curves[e].empty()) {
        curve = emb.edge_curves[e];
      } else {
        int u = m.target(he);
        if (u >= static_cast<int>(emb.points.size()) || !emb.points[u])
          throw Error(ErrorKind::InvalidInput, "embedding lacks point for cell " + std::to_string(u));
        curve = {*emb.points[h], *emb.points[u]};
      }
      worst = std::max(worst, hausdorff_polyline_region(curve, config.cell(h)));
    }
    if (m.degree(h) == 0) worst = std::max(worst, hausdorff_polyline_region({*emb.points[h]}, config.cell(h)));
  }
  return worst / r;
}

double moment_statistic(const CellConfiguration& config, const Box& square, double p) {
  double side = square.width();
  if (!(side > 0) || square.height() != side) throw Error(ErrorKind::InvalidInput, "square must have positive side");
  config.require_inside_carrier(square, "moment statistic");
  double sum = 0.0;
  for (int i : config.cells_meeting(square)) {
    double d = config.cell(i).diameter();
    sum += d * d * std::pow(static_cast<double>(config.degree(i)), p);
  }
  return sum / (side * side);
}

DiameterStat max_cell_diameter(const CellConfiguration& config, const Box& square) {
  double side = square.width();
  if (!(side > 0)) throw Error(ErrorKind::InvalidInput, "square must have positive side");
  config.require_inside_carrier(square, "max cell diameter");
  DiameterStat s;
  for (int i : config.cells_meeting(square))
    if (config.cell(i).diameter() > s.max_diameter) {
      s.max_diameter = config.cell(i).diameter();
      s.cell = i;
    }
  s.ratio = s.max_diameter / side;
  return s;
}

CorrespondenceReport config_correspondence_distance(const CellConfiguration& a, const CellConfiguration& b,
                                                    const std::vector<int>& bij, const std::vector<double>& radii) {
  if (static_cast<int>(bij.size()) != a.num_cells()) throw Error(ErrorKind::InvalidInput, "bijection size mismatch");
  if (radii.empty()) throw Error(ErrorKind::InvalidInput, "empty radius grid");
  for (size_t i = 1; i < radii.size(); ++i)
    if (!(radii[i] > radii[i - 1])) throw Error(ErrorKind::InvalidInput, "radius grid must increase");
  const HalfEdgeMap& ma = a.map();
  const HalfEdgeMap& mb = b.map();
  CorrespondenceReport rep;
  rep.radii = radii;
  for (double r : radii) {
    std::vector<int> cells = a.cells_meeting_disk({0, 0}, r);
    double disp = 0.0, cond = 0.0;
    for (int h : cells) {
      int g = bij[h];
      if (g < 0 || g >= b.num_cells())
        throw Error(ErrorKind::InvalidInput, "bijection undefined on cell " + std::to_string(h));
      disp = std::max(disp, dist(a.cell(h).centroid(), b.cell(g).centroid()));
      // conductances to each neighbor, compared as sorted multisets
      std::map<int, std::vector<double>> ca, cb;
      std::map<int, int> pre;
      for (int he : ma.rotation(h)) {
        ca[bij[ma.target(he)]].push_back(a.conductance(ma.edge_id(he)));
        pre[bij[ma.target(he)]] = ma.target(he);
      }
      for (int he : mb.rotation(g)) cb[mb.target(he)].push_back(b.conductance(mb.edge_id(he)));
      for (auto& [nb, list] : ca) {
        auto it = cb.find(nb);
        if (it == cb.end() || it->second.size() != list.size())
          throw Error(ErrorKind::InvalidInput, "bijection is not an isomorphism: adjacency (" + std::to_string(h) +
                                                   "," + std::to_string(pre[nb]) + ")");
        std::vector<double> x = list, y = it->second;
        std::sort(x.begin(), x.end());
        std::sort(y.begin(), y.end());
        for (size_t k = 0; k < x.size(); ++k) cond = std::max(cond, std::abs(x[k] - y[k]));
      }
      if (ca.size() != cb.size())
        throw Error(ErrorKind::InvalidInput,
                    "bijection is not an isomorphism: image of cell " + std::to_string(h) + " has extra neighbors");
    }
    rep.defect.push_back(disp + cond);
  }
  double total = 0.0;
  for (size_t i = 0; i < radii.size(); ++i) {
    double hi = i + 1 < radii.size() ? std::exp(-radii[i + 1]) : 0.0;
    total += rep.defect[i] * (std::exp(-radii[i]) - hi);
  }
  rep.distance = total;
  return rep;
}

std::string statistic_csv(const std::vector<std::uint64_t>& seeds, const std::vector<double>& sides,
                          const std::vector<std::vector<double>>& values) {
  std::ostringstream os;
  os << "seed,side,statistic\n";
  for (size_t i = 0; i < seeds.size(); ++i)
    for (size_t k = 0; k < sides.size(); ++k)
      os << seeds[i] << "," << fmt_double(sides[k]) << "," << fmt_double(values[i][k]) << "\n";
  return os.str();
}

}  // namespace cellembed
