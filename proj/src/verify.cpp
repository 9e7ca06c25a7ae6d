#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>

#include "cellembed/error.hpp"
#include "cellembed/experiment.hpp"
#include "cellembed/format.hpp"
#include "cellembed/walks.hpp"

namespace cellembed {

const char* check_status_name(CheckStatus s) {
  switch (s) {
    case CheckStatus::Pass: return "pass";
    case CheckStatus::Fail: return "fail";
    case CheckStatus::Underpowered: return "underpowered";
  }
  return "?";
}

const std::vector<std::string>& verify_scopes() {
  static const std::vector<std::string> s{"all",    "planar_map", "cell_config", "generators", "circle_pack",
                                          "walks",  "surface",    "corrector",   "compare"};
  return s;
}

std::string VerifySummary::text() const {
  std::ostringstream os;
  os << "[verify]\n";
  for (auto& c : checks)
    os << "check " << c.scope << "." << c.name << " " << check_status_name(c.status) << " " << c.detail << "\n";
  os << "summary passed=" << passed << " failed=" << failed << " underpowered=" << underpowered << "\n";
  os << "status = " << (failed ? "fail" : "pass") << "\n";
  return os.str();
}

namespace {

struct Suite {
  const VerifyOptions& opt;
  VerifySummary sum;
  std::string scope;

  void add(const std::string& name, bool ok, const std::string& detail) {
    add_status(name, ok ? CheckStatus::Pass : CheckStatus::Fail, detail);
  }
  void add_status(const std::string& name, CheckStatus st, const std::string& detail) {
    sum.checks.push_back({scope, name, st, detail});
    (st == CheckStatus::Pass ? sum.passed : st == CheckStatus::Fail ? sum.failed : sum.underpowered)++;
  }
  // a throwing check is a failed check
  void guard(const std::string& name, const std::function<void()>& f) {
    try {
      f();
    } catch (const std::exception& e) {
      add(name, false, std::string("error: ") + e.what());
    }
  }
};

CellConfiguration voronoi(std::uint64_t seed, double window) {
  GeneratorSpec g;
  g.window = window;
  g.seed = seed;
  return poisson_voronoi(g);
}

struct PackedInstance {
  CellConfiguration config;
  DiskTruncation tr;
  CirclePacking packing;
};

PackedInstance packed(std::uint64_t seed, double R) {
  PackedInstance p;
  GeneratorSpec g;
  g.window = window_for_truncation(R);
  g.seed = seed;
  g.disk_window = true;
  p.config = poisson_voronoi(g);
  p.tr = config_disk_truncation(p.config, {0, 0}, R);
  p.packing = pack(p.tr.tri, PackingBoundary::maximal(), p.tr.root);
  return p;
}

void planar_map_checks(Suite& s) {
  auto config = voronoi(s.opt.seed, 24);
  s.guard("rotation_invariants", [&] {
    auto d = config.map().validate();
    bool ok = d.twin_involution && d.next_permutation && d.degree_sums_ok && d.type_iii && d.euler == 2;
    s.add("rotation_invariants", ok, "euler=" + std::to_string(d.euler) + " faces=" + std::to_string(d.faces));
  });
  s.guard("augment_faces", [&] {
    auto sq = lattice_config(GeneratorKind::SquareLattice, 6);
    auto a = augment_faces(sq.map(), false);
    auto d = a.map.validate();
    bool ok = d.type_iii && d.euler == 2;
    for (auto [deg, cnt] : d.face_degree_histogram)
      if (deg != 3) ok = false;
    s.add("augment_faces", ok, "faces=" + std::to_string(d.faces));
  });
  s.guard("ball_monotone", [&] {
    int root = *config.cell_containing({0, 0});
    bool ok = true;
    std::vector<int> prev;
    for (int m = 0; m <= 4; ++m) {
      auto b = bs_ball(config.map(), root, m);
      auto cur = b.original;
      std::sort(cur.begin(), cur.end());
      if (!std::includes(cur.begin(), cur.end(), prev.begin(), prev.end())) ok = false;
      prev = cur;
    }
    s.add("ball_monotone", ok, "ball4=" + std::to_string(prev.size()));
  });
}

void cell_config_checks(Suite& s) {
  s.guard("voronoi_validation", [&] {
    auto v = voronoi(s.opt.seed, 24).validate();
    s.add("voronoi_validation", v.ok, "overlaps=" + std::to_string(v.overlapping_pairs));
  });
  s.guard("line_connectivity", [&] {
    auto lc = line_connectivity_check(voronoi(s.opt.seed, 24), {-8, 0.3}, {8, 0.3});
    s.add("line_connectivity", lc.connected, "cells=" + std::to_string(lc.cells));
  });
}

void generator_checks(Suite& s) {
  s.guard("hex_percolation_validation", [&] {
    GeneratorSpec g;
    g.kind = GeneratorKind::HexPercolation;
    g.window = 20;
    g.seed = s.opt.seed;
    auto v = hex_percolation(g).validate();
    s.add("hex_percolation_validation", v.ok, "overlaps=" + std::to_string(v.overlapping_pairs));
  });
  s.guard("voronoi_determinism", [&] {
    bool same = voronoi(s.opt.seed, 20).serialize() == voronoi(s.opt.seed, 20).serialize();
    s.add("voronoi_determinism", same, "");
  });
}

void circle_pack_checks(Suite& s) {
  s.guard("descartes_fibonacci", [&] {
    auto chain = descartes_chain(10);
    double worst = 0;
    for (int d = 3; d <= 10; ++d) {
      double want = 1.0 / (double(fibonacci(2 * d - 3)) - 1);
      worst = std::max(worst, std::abs(chain[d] - want) / want);
    }
    s.add("descartes_fibonacci", worst < 1e-12, "max_rel_err=" + fmt_double(worst));
  });
  s.guard("packing_residuals", [&] {
    auto p = packed(s.opt.seed, 14);
    auto c = check_packing(p.packing);
    bool ok = p.packing.solve_residual < 1e-10 && c.ok();
    s.add("packing_residuals", ok, "angle=" + fmt_double(c.angle_sum) + " tangency=" + fmt_double(c.tangency));
    int bad = 0, flowers = 0;
    for (int v = 0; v < p.packing.num_vertices(); ++v)
      if (p.packing.tri.is_interior(v)) {
        bad += flower_checks(p.packing, v).violations;
        flowers++;
      }
    s.add("three_circle", bad == 0, "flowers=" + std::to_string(flowers) + " violations=" + std::to_string(bad));
  });
}

void walk_checks(Suite& s) {
  s.guard("dubejko_equal_radii", [&] {
    double c = dubejko_conductance(1, 1, 1, 1);
    s.add("dubejko_equal_radii", std::abs(c - 1 / std::sqrt(3.0)) < 1e-12, "c=" + fmt_double(c));
  });
  s.guard("dubejko_martingale", [&] {
    auto p = packed(s.opt.seed, 14);
    auto g = dubejko_weights(p.packing, s.opt.mutate_dubejko ? DubejkoVariant::SwappedFactor : DubejkoVariant::Correct);
    auto chk = dubejko_check(p.packing, g);
    s.add("dubejko_martingale", chk.pass(), "residual=" + fmt_double(chk.martingale_residual) +
                                                " violations=" + std::to_string(chk.violations) +
                                                (s.opt.mutate_dubejko ? " mutation=dubejko_swap" : ""));
    StopRule stop;
    stop.max_steps = 10000;
    stop.exit_radius = 0.8;
    auto rep = walk_statistics(g, p.packing.root, s.opt.walk_budget, stop, s.opt.seed);
    std::string detail = "walks=" + std::to_string(s.opt.walk_budget) + " drift_z=" + fmt_double(rep.drift_z) +
                         " msd_r2=" + fmt_double(rep.msd_r2);
    if (s.opt.walk_budget < s.opt.min_walks)
      s.add_status("walk_drift", CheckStatus::Underpowered, detail + " min_walks=" + std::to_string(s.opt.min_walks));
    else
      s.add("walk_drift", rep.drift_z < 3 && rep.msd_r2 > 0.99, detail);
    int bad = 0, tested = 0;
    for (int v = 0; v < p.packing.num_vertices() && tested < 6; ++v) {
      if (v == p.packing.root || !p.packing.tri.is_interior(v) || norm(p.packing.centers[v]) > 0.5) continue;
      auto b = vel_bound_check(p.packing, v, p.packing.root);
      tested++;
      bad += !b.pass;
    }
    s.add("vel_bound", bad == 0, "tested=" + std::to_string(tested));
  });
}

void surface_checks(Suite& s) {
  auto config = voronoi(s.opt.seed, 40);
  auto surf = surface_from_config(config);
  auto p = build_M_S(config, surf, Box{{-10, -10}, {10, 10}});
  s.guard("portion", [&] { s.add("portion", !p.empty(), p.diagnostic.empty() ? "faces=" + std::to_string(p.faces.size()) : p.diagnostic); });
  if (p.empty()) return;
  s.guard("gauss_bonnet", [&] {
    auto gb = gauss_bonnet(surf, p.faces);
    s.add("gauss_bonnet", std::abs(gb.lhs() - gb.rhs()) < 1e-9 && gb.euler_characteristic == 1,
          "lhs=" + fmt_double(gb.lhs()));
  });
  s.guard("subdivision_counts", [&] {
    auto sub = subdivide(surf, p, 3);
    s.add("subdivision_counts", sub.tri.num_faces() == 9 * static_cast<int>(p.faces.size()),
          "subfaces=" + std::to_string(sub.tri.num_faces()));
  });
  s.guard("uniformize_orientation", [&] {
    auto m = uniformize_approx(surf, p, 2);
    double o = min_image_orientation(m);
    s.add("uniformize_orientation", o > 0 && m.solve_residual < 1e-8, "min_orientation=" + fmt_double(o));
  });
}

void corrector_checks(Suite& s) {
  s.guard("energy_closed_form", [&] {
    std::mt19937_64 gen(s.opt.seed);
    std::uniform_real_distribution<double> U(-1, 1);
    double worst = 0;
    int bound_violations = 0;
    for (int i = 0; i < 2000; ++i) {
      Vec2 a{U(gen), U(gen)}, b{U(gen), U(gen)}, c{U(gen), U(gen)};
      double e = equilateral_energy_closed_form(a, b, c);
      worst = std::max(worst, std::abs(e - equilateral_energy_quadrature(a, b, c)));
      bound_violations += e > 3 * (norm2(b - a) + norm2(c - b) + norm2(a - c));
    }
    s.add("energy_closed_form", worst < 1e-10 && bound_violations == 0, "max_quadrature_diff=" + fmt_double(worst));
  });
  s.guard("harmonic_extension", [&] {
    auto config = voronoi(s.opt.seed, 40);
    auto surf = surface_from_config(config);
    auto p = build_M_S(config, surf, Box{{-8, -8}, {8, 8}});
    auto sub = share(subdivide(surf, p, 3));
    auto phi0 = sample_phi0(config, surf, sub, s.opt.seed);
    auto dy = sample_dyadic_system(s.opt.seed);
    auto e1 = harmonic_extend(config, phi0, dy, 3);
    auto e2 = harmonic_extend(config, phi0, dy, 12);
    double orth = std::max(orthogonal_increment_residual(e2, e1.map, phi0), orthogonal_increment_residual(e2, e2.map, e1.map));
    s.add("energy_monotone", e1.energy_monotone() && e2.energy_monotone(), "regions=" + std::to_string(e2.regions.size()));
    s.add("maximum_principle", e1.max_principle() && e2.max_principle(), "");
    s.add("orthogonal_increment", orth < 1e-8, "residual=" + fmt_double(orth));
  });
}

void compare_checks(Suite& s) {
  s.guard("gauge_round_trip", [&] {
    Mat2 A;
    A << 1.5, 0.4, 0.4, (1 + 0.16) / 1.5;
    Mat2 L = 3.0 * A * rotation(2.5);
    auto g = decompose_gauge(L);
    double err = (g.compose() - L).norm() + std::abs(g.theta - 2.5) + (g.A - A).norm();
    s.add("gauge_round_trip", err < 1e-10, "err=" + fmt_double(err));
  });
  s.guard("lattice_packing", [&] {
    auto config = lattice_config(GeneratorKind::TriangularLattice, 60);
    CirclePacking pk;
    std::vector<int> orig;
    for (int h = 0; h < config.num_cells(); ++h) {
      pk.centers.push_back(config.sites()[h] * 0.5);
      pk.radii.push_back(0.5);
      orig.push_back(h);
    }
    auto rep = compare_packing(config, pk, orig, {8, 16});
    s.add("lattice_packing", rep.vertex_metric.back() < 1e-10, "metric=" + fmt_double(rep.vertex_metric.back()));
  });
}

}  // namespace

VerifySummary run_verify_suite(const VerifyOptions& opt) {
  auto& scopes = verify_scopes();
  if (std::find(scopes.begin(), scopes.end(), opt.scope) == scopes.end())
    throw Error(ErrorKind::Usage, "unknown verify scope '" + opt.scope + "'");
  Suite s{opt, {}, {}};
  const std::vector<std::pair<std::string, void (*)(Suite&)>> runs{
      {"planar_map", planar_map_checks}, {"cell_config", cell_config_checks}, {"generators", generator_checks},
      {"circle_pack", circle_pack_checks}, {"walks", walk_checks},          {"surface", surface_checks},
      {"corrector", corrector_checks},   {"compare", compare_checks}};
  for (auto& [name, fn] : runs)
    if (opt.scope == "all" || opt.scope == name) {
      s.scope = name;
      fn(s);
    }
  return s.sum;
}

}  // namespace cellembed
