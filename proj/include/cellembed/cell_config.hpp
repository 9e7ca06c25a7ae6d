#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cellembed/geometry.hpp"
#include "cellembed/planar_map.hpp"

namespace cellembed {

struct ConfigValidation {
  bool ok = true;
  int adjacency_without_contact = 0;
  int overlapping_pairs = 0;
  std::vector<std::string> problems;
};

// Cells + associated planar map (vertex i <-> cell i) + per-edge conductances.
class CellConfiguration {
 public:
  CellConfiguration() = default;
  CellConfiguration(std::vector<CellRegion> cells, HalfEdgeMap map, Box carrier);

  int num_cells() const { return static_cast<int>(cells_.size()); }
  const CellRegion& cell(int i) const { return cells_[i]; }
  const std::vector<CellRegion>& cells() const { return cells_; }
  const HalfEdgeMap& map() const { return map_; }
  const Box& carrier() const { return carrier_; }
  void set_carrier(const Box& b) { carrier_ = b; }

  double conductance(int edge) const { return conductance_[edge]; }
  const std::vector<double>& conductances() const { return conductance_; }
  void set_conductances(std::vector<double> c);
  int degree(int cell) const { return map_.degree(cell); }

  // sites or other per-cell reference points (generator dependent, optional)
  const std::vector<Vec2>& sites() const { return sites_; }
  void set_sites(std::vector<Vec2> s) { sites_ = std::move(s); }

  std::vector<int> cells_meeting(const Box& box) const;  // closed box, ascending ids
  std::vector<int> cells_meeting_disk(const Vec2& c, double r) const;
  std::optional<int> cell_containing(const Vec2& p) const;
  void require_inside_carrier(const Box& box, const char* what) const;

  ConfigValidation validate(double tol = 1e-9) const;
  CellConfiguration translated(const Vec2& t) const;

  // generator metadata
  std::string generator;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> meta;

  std::string serialize() const;
  static CellConfiguration parse(const std::string& text);

 private:
  void build_index();

  std::vector<CellRegion> cells_;
  HalfEdgeMap map_;
  std::vector<double> conductance_;
  Box carrier_;
  std::vector<Vec2> sites_;
  // uniform grid index over cell bounding boxes
  Box index_box_;
  double index_cell_ = 1.0;
  int index_nx_ = 0, index_ny_ = 0;
  std::vector<std::vector<int>> index_;
};

struct LineConnectivity {
  bool connected = true;
  int components = 0;
  int cells = 0;
};

LineConnectivity line_connectivity_check(const CellConfiguration& config, const Vec2& a, const Vec2& b);

// Embedding: per-cell point z_H and, per map edge, a polyline (empty = straight
// segment between endpoint positions).
struct CellEmbedding {
  std::vector<std::optional<Vec2>> points;
  std::vector<std::vector<Vec2>> edge_curves;
};

double almost_planarity_gap(const CellConfiguration& config, const CellEmbedding& embedding, double r);

double moment_statistic(const CellConfiguration& config, const Box& square, double p);

struct DiameterStat {
  double max_diameter = 0.0;
  double ratio = 0.0;
  int cell = -1;
};
DiameterStat max_cell_diameter(const CellConfiguration& config, const Box& square);

// Correspondence surrogate: for each grid radius r_i the defect
// d_i = max centroid displacement + max conductance mismatch over cells/edges
// meeting B(0;r_i), combined as sum d_i (e^{-r_i} - e^{-r_{i+1}}) + d_last e^{-r_last}.
struct CorrespondenceReport {
  double distance = 0.0;
  std::vector<double> radii;
  std::vector<double> defect;
};
CorrespondenceReport config_correspondence_distance(const CellConfiguration& a, const CellConfiguration& b,
                                                    const std::vector<int>& bijection,
                                                    const std::vector<double>& radii);

std::string statistic_csv(const std::vector<std::uint64_t>& seeds, const std::vector<double>& sides,
                          const std::vector<std::vector<double>>& values);

}  // namespace cellembed
