#include "cellembed/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "cellembed/error.hpp"
#include "cellembed/format.hpp"
#include "cellembed/walks.hpp"

namespace cellembed {

const char* pipeline_name(PipelineKind k) {
  switch (k) {
    case PipelineKind::Pack: return "pack";
    case PipelineKind::Uniformize: return "uniformize";
    case PipelineKind::Walk: return "walk";
    case PipelineKind::Verify: return "verify";
  }
  return "?";
}

namespace {

PipelineKind parse_pipeline(const std::string& s) {
  for (auto k : {PipelineKind::Pack, PipelineKind::Uniformize, PipelineKind::Walk, PipelineKind::Verify})
    if (s == pipeline_name(k)) return k;
  throw Error(ErrorKind::InvalidInput, "unknown pipeline '" + s + "'");
}

double parse_number(const std::string& s, const std::string& key) {
  try {
    size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorKind::InvalidInput, "key '" + key + "': not a number: '" + s + "'");
  }
}

long parse_integer(const std::string& s, const std::string& key) {
  double v = parse_number(s, key);
  if (v != std::floor(v) || std::abs(v) > 9e15) throw Error(ErrorKind::InvalidInput, "key '" + key + "': not an integer");
  return static_cast<long>(v);
}

bool parse_bool(const std::string& s, const std::string& key) {
  if (s == "true") return true;
  if (s == "false") return false;
  throw Error(ErrorKind::InvalidInput, "key '" + key + "': expected true or false");
}

std::vector<std::string> words(const std::string& s) {
  std::istringstream is(s);
  std::vector<std::string> out;
  for (std::string w; is >> w;) out.push_back(w);
  return out;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + fmt_double(v[i]);
  return s;
}

std::string kind_text(GeneratorKind k) {
  switch (k) {
    case GeneratorKind::PoissonVoronoi: return "poisson-voronoi";
    case GeneratorKind::HexPercolation: return "hex-percolation";
    case GeneratorKind::TriangularLattice: return "lattice-triangular";
    case GeneratorKind::SquareLattice: return "lattice-square";
  }
  return "?";
}

}  // namespace

void ExperimentConfig::check() const {
  if (seeds.empty()) throw Error(ErrorKind::InvalidInput, "seeds must be non-empty");
  if (radii.empty()) throw Error(ErrorKind::InvalidInput, "radii must be non-empty");
  for (size_t i = 1; i < radii.size(); ++i)
    if (!(radii[i] > radii[i - 1])) throw Error(ErrorKind::InvalidInput, "radii grid must be increasing");
  if (truncation.empty()) throw Error(ErrorKind::InvalidInput, "truncation must be non-empty");
  for (double t : truncation)
    if (!(t > radii.back())) throw Error(ErrorKind::InvalidInput, "truncation radius must exceed the largest radius");
  if (!(radii.front() >= calibration.outer && calibration.outer > calibration.inner && calibration.inner >= 0))
    throw Error(ErrorKind::InvalidInput, "calibration annulus must be nonempty and lie inside the smallest radius");
  if (!(solve_tol > 0) || !(trend_ratio > 0) || !(majority > 0 && majority <= 1))
    throw Error(ErrorKind::InvalidInput, "tolerances out of range");
  if (mesh_level < 1) throw Error(ErrorKind::InvalidInput, "mesh_level must be >= 1");
  if (walks < 1 || steps < 1 || min_walks < 1) throw Error(ErrorKind::InvalidInput, "walk budget must be positive");
  if (!(exit_fraction > 0 && exit_fraction < 1)) throw Error(ErrorKind::InvalidInput, "exit_fraction must lie in (0,1)");
  if (conductance != "dubejko" && conductance != "unit") throw Error(ErrorKind::InvalidInput, "conductance must be dubejko or unit");
  if (output.empty()) throw Error(ErrorKind::InvalidInput, "output directory must be set");
  auto& sc = verify_scopes();
  if (std::find(sc.begin(), sc.end(), scope) == sc.end()) throw Error(ErrorKind::InvalidInput, "unknown verify scope '" + scope + "'");
}

std::string ExperimentConfig::text(bool with_output) const {
  std::ostringstream os;
  os << "[experiment]\npipeline = " << pipeline_name(pipeline) << "\nseeds =";
  for (auto s : seeds) os << ' ' << s;
  os << "\nradii = " << join(radii) << "\ntruncation = " << join(truncation) << "\n";
  if (with_output) os << "output = " << output << "\n";
  os << "\n[generator]\nkind = " << kind_text(generator.kind) << "\nintensity = " << fmt_double(generator.intensity)
     << "\npercolation_p = " << fmt_double(generator.percolation_p) << "\nwindow = " << fmt_double(generator.window)
     << "\nbuffer = " << fmt_double(generator.buffer) << "\ncollapse = " << (generator.collapse ? "true" : "false")
     << "\ndisk_window = " << (generator.disk_window ? "true" : "false") << "\n";
  os << "\n[tolerances]\nsolve = " << fmt_double(solve_tol) << "\ntrend_ratio = " << fmt_double(trend_ratio)
     << "\nmajority = " << fmt_double(majority) << "\n";
  os << "\n[gauge]\ncalibration_inner = " << fmt_double(calibration.inner)
     << "\ncalibration_outer = " << fmt_double(calibration.outer) << "\n";
  os << "\n[uniformize]\nmesh_level = " << mesh_level << "\n";
  os << "\n[walk]\nwalks = " << walks << "\nsteps = " << steps << "\nexit_fraction = " << fmt_double(exit_fraction)
     << "\nconductance = " << conductance << "\nmin_walks = " << min_walks << "\n";
  os << "\n[verify]\nscope = " << scope << "\nmutation = " << (mutation ? "dubejko_swap" : "none") << "\n";
  return os.str();
}

ExperimentConfig default_config(PipelineKind kind) {
  ExperimentConfig c;
  c.pipeline = kind;
  c.generator.window = 0;  // sized from the truncation
  c.generator.disk_window = true;
  return c;
}

ExperimentConfig parse_experiment_config(const std::string& text) {
  ExperimentConfig c = default_config(PipelineKind::Pack);
  using Setter = std::function<void(const std::string&, const std::string&)>;
  std::map<std::string, std::map<std::string, Setter>> keys;
  keys["experiment"] = {
      {"pipeline", [&](auto& k, auto& v) { c.pipeline = parse_pipeline(v); (void)k; }},
      {"seeds", [&](auto& k, auto& v) {
         c.seeds.clear();
         for (auto& w : words(v)) {
           long s = parse_integer(w, k);
           if (s < 0) throw Error(ErrorKind::InvalidInput, "seeds must be non-negative");
           c.seeds.push_back(static_cast<std::uint64_t>(s));
         }
       }},
      {"radii", [&](auto& k, auto& v) {
         c.radii.clear();
         for (auto& w : words(v)) c.radii.push_back(parse_number(w, k));
       }},
      {"truncation", [&](auto& k, auto& v) {
         c.truncation.clear();
         for (auto& w : words(v)) c.truncation.push_back(parse_number(w, k));
       }},
      {"output", [&](auto&, auto& v) { c.output = v; }},
  };
  keys["generator"] = {
      {"kind", [&](auto&, auto& v) {
         try {
           c.generator.kind = parse_generator_kind(v);
         } catch (const Error& e) {
           throw Error(ErrorKind::InvalidInput, e.what());
         }
       }},
      {"intensity", [&](auto& k, auto& v) { c.generator.intensity = parse_number(v, k); }},
      {"percolation_p", [&](auto& k, auto& v) { c.generator.percolation_p = parse_number(v, k); }},
      {"window", [&](auto& k, auto& v) { c.generator.window = parse_number(v, k); }},
      {"buffer", [&](auto& k, auto& v) { c.generator.buffer = parse_number(v, k); }},
      {"collapse", [&](auto& k, auto& v) { c.generator.collapse = parse_bool(v, k); }},
      {"disk_window", [&](auto& k, auto& v) { c.generator.disk_window = parse_bool(v, k); }},
  };
  keys["tolerances"] = {
      {"solve", [&](auto& k, auto& v) { c.solve_tol = parse_number(v, k); }},
      {"trend_ratio", [&](auto& k, auto& v) { c.trend_ratio = parse_number(v, k); }},
      {"majority", [&](auto& k, auto& v) { c.majority = parse_number(v, k); }},
  };
  keys["gauge"] = {
      {"calibration_inner", [&](auto& k, auto& v) { c.calibration.inner = parse_number(v, k); }},
      {"calibration_outer", [&](auto& k, auto& v) { c.calibration.outer = parse_number(v, k); }},
  };
  keys["uniformize"] = {
      {"mesh_level", [&](auto& k, auto& v) { c.mesh_level = static_cast<int>(parse_integer(v, k)); }},
  };
  keys["walk"] = {
      {"walks", [&](auto& k, auto& v) { c.walks = static_cast<int>(parse_integer(v, k)); }},
      {"steps", [&](auto& k, auto& v) { c.steps = parse_integer(v, k); }},
      {"exit_fraction", [&](auto& k, auto& v) { c.exit_fraction = parse_number(v, k); }},
      {"conductance", [&](auto&, auto& v) { c.conductance = v; }},
      {"min_walks", [&](auto& k, auto& v) { c.min_walks = static_cast<int>(parse_integer(v, k)); }},
  };
  keys["verify"] = {
      {"scope", [&](auto&, auto& v) { c.scope = v; }},
      {"mutation", [&](auto&, auto& v) {
         if (v == "none")
           c.mutation = false;
         else if (v == "dubejko_swap")
           c.mutation = true;
         else
           throw Error(ErrorKind::InvalidInput, "mutation must be none or dubejko_swap");
       }},
  };
  std::string section;
  std::set<std::string> seen, sections;
  std::istringstream is(text);
  int lineno = 0;
  for (std::string line; std::getline(is, line);) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto where = "line " + std::to_string(lineno) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') throw Error(ErrorKind::InvalidInput, where + "malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (!keys.count(section)) throw Error(ErrorKind::InvalidInput, where + "unknown section [" + section + "]");
      if (!sections.insert(section).second) throw Error(ErrorKind::InvalidInput, where + "duplicate section [" + section + "]");
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos) throw Error(ErrorKind::InvalidInput, where + "expected key = value");
    std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (section.empty()) throw Error(ErrorKind::InvalidInput, where + "key outside a section");
    auto it = keys[section].find(key);
    if (it == keys[section].end()) throw Error(ErrorKind::InvalidInput, where + "unknown key '" + key + "' in [" + section + "]");
    if (!seen.insert(section + "." + key).second) throw Error(ErrorKind::InvalidInput, where + "duplicate key '" + key + "'");
    try {
      it->second(key, value);
    } catch (const Error& e) {
      throw Error(ErrorKind::InvalidInput, where + e.what());
    }
  }
  c.check();
  return c;
}

double window_for_truncation(double R) { return 2 * R + 16; }

CellConfiguration generate_for(const ExperimentConfig& cfg, std::uint64_t seed, double truncation) {
  GeneratorSpec g = cfg.generator;
  g.seed = seed;
  double need = window_for_truncation(truncation);
  if (g.window <= 0)
    g.window = need;
  else if (g.window < need)
    throw Error(ErrorKind::InsufficientWindow, "generator window " + fmt_double(g.window) + " is below " +
                                                   fmt_double(need) + " for truncation " + fmt_double(truncation));
  return generate(g);
}

namespace {

std::string seed_tag(std::uint64_t seed, double R) { return "seed" + std::to_string(seed) + "_R" + fmt_double(R); }

std::string header(const ExperimentConfig& cfg) {
  std::ostringstream os;
  os << "# cellembed experiment report\n[config]\n" << cfg.text(false) << "\n";
  return os.str();
}

struct Tally {
  int vertex = 0, edge = 0, runs = 0;
};

void append_verdict(std::ostringstream& os, const ExperimentConfig& cfg, const Tally& t, bool edges, bool& pass) {
  double need = cfg.majority * t.runs;
  bool v = t.vertex >= need - 1e-9;
  os << "[verdict]\nruns = " << t.runs << "\nvertex_trend_passes = " << t.vertex << "\n";
  if (edges) os << "edge_trend_passes = " << t.edge << "\n";
  bool e = !edges || t.edge >= need - 1e-9;
  pass = v && e;
  os << "majority_required = " << fmt_double(cfg.majority) << "\npass = " << (pass ? "true" : "false") << "\n";
}

}  // namespace

PipelineResult run_pack_pipeline(const ExperimentConfig& cfg) {
  cfg.check();
  PipelineResult out;
  std::ostringstream os, csv;
  os << header(cfg);
  csv << "seed,truncation,r,cells,vertex_metric\n";
  Tally t;
  for (auto seed : cfg.seeds)
    for (double R : cfg.truncation) {
      auto config = generate_for(cfg, seed, R);
      auto tr = config_disk_truncation(config, {0, 0}, R);
      SolveOptions so;
      so.tol = cfg.solve_tol;
      so.relax_sweeps = 0;
      auto pk = pack(tr.tri, PackingBoundary::maximal(), tr.root, so);
      auto rep = compare_packing(config, pk, tr.original, cfg.radii, cfg.calibration);
      rep.seed = seed;
      rep.vertex_trend = trend_verdict(rep.vertex_metric, cfg.trend_ratio);
      rep.provenance.insert(rep.provenance.begin(), "truncation = " + fmt_double(R));
      os << rep.text() << "\n";
      for (size_t i = 0; i < rep.radii.size(); ++i)
        csv << seed << ',' << fmt_double(R) << ',' << fmt_double(rep.radii[i]) << ',' << rep.cells[i] << ','
            << fmt_double(rep.vertex_metric[i]) << "\n";
      t.runs++;
      t.vertex += rep.vertex_trend.pass;
      out.files.push_back({"packing_" + seed_tag(seed, R) + ".csv", packing_csv(pk)});
      double w = cfg.radii.front();
      out.files.push_back({"packing_overlay_" + seed_tag(seed, R) + ".svg",
                           packing_overlay_svg(config, pk, rep.gauge, Box{{-w, -w}, {w, w}})});
    }
  append_verdict(os, cfg, t, false, out.pass);
  out.report = os.str();
  out.csv = csv.str();
  return out;
}

PipelineResult run_uniformize_pipeline(const ExperimentConfig& cfg) {
  cfg.check();
  PipelineResult out;
  std::ostringstream os, csv;
  os << header(cfg);
  csv << "seed,truncation,r,cells,vertex_metric,edge_metric\n";
  Tally t;
  for (auto seed : cfg.seeds)
    for (double R : cfg.truncation) {
      auto config = generate_for(cfg, seed, R);
      auto tr = config_disk_truncation(config, {0, 0}, R);
      auto s = build_surface(tr.tri);
      auto p = whole_portion(s, tr.root);
      UniformizeOptions uo;
      uo.tol = cfg.solve_tol;
      auto m = uniformize_approx(s, p, cfg.mesh_level, uo);
      auto map = as_plmap(m);
      auto rep = compare_uniformization(config, s, p, map, tr.original, cfg.radii, cfg.calibration);
      rep.seed = seed;
      rep.vertex_trend = trend_verdict(rep.vertex_metric, cfg.trend_ratio);
      rep.edge_trend = trend_verdict(rep.edge_metric, cfg.trend_ratio);
      rep.provenance.insert(rep.provenance.begin(), "truncation = " + fmt_double(R));
      rep.provenance.push_back("min_image_orientation = " + fmt_double(min_image_orientation(m)));
      os << rep.text() << "\n";
      for (size_t i = 0; i < rep.radii.size(); ++i)
        csv << seed << ',' << fmt_double(R) << ',' << fmt_double(rep.radii[i]) << ',' << rep.cells[i] << ','
            << fmt_double(rep.vertex_metric[i]) << ',' << fmt_double(rep.edge_metric[i]) << "\n";
      t.runs++;
      t.vertex += rep.vertex_trend.pass;
      t.edge += rep.edge_trend.pass;
      double w = cfg.radii.front();
      out.files.push_back({"embedding_overlay_" + seed_tag(seed, R) + ".svg",
                           embedding_overlay_svg(config, s, p, map, tr.original, rep.gauge, Box{{-w, -w}, {w, w}})});
    }
  append_verdict(os, cfg, t, true, out.pass);
  out.report = os.str();
  out.csv = csv.str();
  return out;
}

PipelineResult run_walk_pipeline(const ExperimentConfig& cfg) {
  cfg.check();
  PipelineResult out;
  std::ostringstream os, csv;
  os << header(cfg);
  csv << "seed,truncation,walks,drift_z,msd_r2,exit_p,A_xx,A_xy,A_yy,status\n";
  const bool powered = cfg.walks >= cfg.min_walks;
  int passes = 0, runs = 0;
  for (auto seed : cfg.seeds)
    for (double R : cfg.truncation) {
      auto config = generate_for(cfg, seed, R);
      WeightedGraph g;
      int start;
      StopRule stop;
      stop.max_steps = cfg.steps;
      if (cfg.conductance == "dubejko") {
        auto tr = config_disk_truncation(config, {0, 0}, R);
        SolveOptions so;
        so.tol = cfg.solve_tol;
        auto pk = pack(tr.tri, PackingBoundary::maximal(), tr.root, so);
        g = dubejko_weights(pk);
        start = pk.root;
        stop.exit_radius = cfg.exit_fraction;
      } else {
        g = config_graph(config);
        start = *config.cell_containing({0, 0});
        stop.exit_radius = cfg.exit_fraction * R;
        stop.center = g.position(start);
      }
      auto rep = walk_statistics(g, start, cfg.walks, stop, seed);
      auto gauge = covariance_gauge(rep);
      bool ok = rep.drift_z < 3 && rep.msd_r2 > 0.99 && !(rep.exit_p_value <= 0.01);
      std::string status = !powered ? "underpowered" : ok ? "pass" : "fail";
      runs++;
      passes += ok;
      os << "[walk]\nseed = " << seed << "\ntruncation = " << fmt_double(R) << "\nconductance = " << cfg.conductance
         << "\n"
         << rep.text() << "covariance_gauge_A = " << fmt_double(gauge.A(0, 0)) << " " << fmt_double(gauge.A(0, 1)) << " "
         << fmt_double(gauge.A(1, 0)) << " " << fmt_double(gauge.A(1, 1)) << "\n"
         << "gauge_distance_to_identity = " << fmt_double((gauge.A - Mat2::Identity()).norm()) << "\nstatus = " << status
         << "\n\n";
      csv << seed << ',' << fmt_double(R) << ',' << cfg.walks << ',' << fmt_double(rep.drift_z) << ','
          << fmt_double(rep.msd_r2) << ',' << fmt_double(rep.exit_p_value) << ',' << fmt_double(gauge.A(0, 0)) << ','
          << fmt_double(gauge.A(0, 1)) << ',' << fmt_double(gauge.A(1, 1)) << ',' << status << "\n";
      out.files.push_back({"walks_" + seed_tag(seed, R) + ".csv", rep.csv()});
    }
  out.pass = !powered || passes >= cfg.majority * runs - 1e-9;
  os << "[verdict]\nruns = " << runs << "\npasses = " << passes << "\nstatus = "
     << (!powered ? "underpowered" : out.pass ? "pass" : "fail") << "\n";
  out.report = os.str();
  out.csv = csv.str();
  return out;
}

PipelineResult run_pipeline(const ExperimentConfig& cfg) {
  switch (cfg.pipeline) {
    case PipelineKind::Pack: return run_pack_pipeline(cfg);
    case PipelineKind::Uniformize: return run_uniformize_pipeline(cfg);
    case PipelineKind::Walk: return run_walk_pipeline(cfg);
    case PipelineKind::Verify: {
      VerifyOptions vo;
      vo.scope = cfg.scope;
      vo.mutate_dubejko = cfg.mutation;
      vo.seed = cfg.seeds.front();
      vo.walk_budget = cfg.walks;
      vo.min_walks = cfg.min_walks;
      auto sum = run_verify_suite(vo);
      PipelineResult r;
      r.report = sum.text();
      r.pass = sum.exit_code() == 0;
      return r;
    }
  }
  throw Error(ErrorKind::InvalidInput, "unknown pipeline");
}

// ---------------------------------------------------------------- SVG

Svg::Svg(const Box& view, double pixels) : view_(view) {
  double w = view.hi.x - view.lo.x, h = view.hi.y - view.lo.y;
  if (!(w > 0 && h > 0)) throw Error(ErrorKind::InvalidInput, "empty SVG view");
  scale_ = pixels / std::max(w, h);
}

std::string Svg::num(double v) const {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string Svg::point(const Vec2& p) const {
  return num((p.x - view_.lo.x) * scale_) + "," + num((view_.hi.y - p.y) * scale_);
}

void Svg::polygon(const std::vector<Vec2>& pts, const std::string& stroke, const std::string& fill, double width) {
  body_ += "<polygon points=\"";
  for (size_t i = 0; i < pts.size(); ++i) body_ += (i ? " " : "") + point(pts[i]);
  body_ += "\" stroke=\"" + stroke + "\" fill=\"" + fill + "\" stroke-width=\"" + num(width) + "\"/>\n";
}

void Svg::polyline(const std::vector<Vec2>& pts, const std::string& stroke, double width) {
  body_ += "<polyline points=\"";
  for (size_t i = 0; i < pts.size(); ++i) body_ += (i ? " " : "") + point(pts[i]);
  body_ += "\" stroke=\"" + stroke + "\" fill=\"none\" stroke-width=\"" + num(width) + "\"/>\n";
}

void Svg::circle(const Vec2& c, double r, const std::string& stroke, const std::string& fill, double width) {
  auto p = point(c);
  auto comma = p.find(',');
  body_ += "<circle cx=\"" + p.substr(0, comma) + "\" cy=\"" + p.substr(comma + 1) + "\" r=\"" + num(r * scale_) +
           "\" stroke=\"" + stroke + "\" fill=\"" + fill + "\" stroke-width=\"" + num(width) + "\"/>\n";
}

std::string Svg::str() const {
  double w = (view_.hi.x - view_.lo.x) * scale_, h = (view_.hi.y - view_.lo.y) * scale_;
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(w) + "\" height=\"" + num(h) + "\" viewBox=\"0 0 " +
         num(w) + " " + num(h) + "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n" + body_ + "</svg>\n";
}

namespace {

void draw_cells(Svg& svg, const CellConfiguration& config, const Box& view) {
  for (int h : config.cells_meeting(view))
    for (auto& piece : config.cell(h).pieces()) svg.polygon(piece, "#888888", "#f4f4f4", 0.5);
}

}  // namespace

std::string packing_overlay_svg(const CellConfiguration& config, const CirclePacking& packing, const GaugeFit& gauge,
                                const Box& view) {
  Svg svg(view);
  draw_cells(svg, config, view);
  for (int v = 0; v < packing.num_vertices(); ++v) {
    Vec2 c = gauge.apply(packing.centers[v]);
    double r = gauge.scale * packing.radii[v];
    if (c.x + r < view.lo.x || c.x - r > view.hi.x || c.y + r < view.lo.y || c.y - r > view.hi.y) continue;
    svg.circle(c, r, "#1f5fbf", "none", 0.8);
  }
  return svg.str();
}

std::string embedding_overlay_svg(const CellConfiguration& config, const EquilateralSurface& s, const SurfacePortion& p,
                                  const PLMap& map, const std::vector<int>& original, const GaugeFit& gauge,
                                  const Box& view) {
  Svg svg(view);
  draw_cells(svg, config, view);
  const int n = map.sub->n;
  for (int f : p.faces) {
    const auto& fv = s.faces[f];
    const int q = static_cast<int>(fv.size());
    bool near = false;
    for (int v : fv) {
      int h = original.empty() ? v : original[v];
      if (config.cell(h).meets_box(view)) near = true;
    }
    if (!near) continue;
    std::vector<Vec2> pts;
    for (int k = 0; k <= q; ++k)
      for (int t = 0; t < (k < q ? n : 1); ++t) {
        Vec2 x = chart_corner(q, k % q) * (1.0 - double(t) / n) + chart_corner(q, (k + 1) % q) * (double(t) / n);
        pts.push_back(gauge.apply(map.evaluate({f, x})));
      }
    svg.polyline(pts, "#c0392b", 0.6);
  }
  return svg.str();
}

}  // namespace cellembed
