#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace cellembed {

// One entry of a vertex's cyclic (counter-clockwise) neighbor list. `edge`
// disambiguates parallel edges; -1 means "the unique edge to `neighbor`".
struct RotationEntry {
  int neighbor = -1;
  int edge = -1;
};
using RotationSystem = std::vector<std::vector<RotationEntry>>;

struct HalfEdge {
  int twin = -1;
  int next = -1;
  int origin = -1;
  int face = -1;
};

struct OuterSpec {
  enum class Mode { Auto, None, Edge };
  Mode mode = Mode::Auto;
  int u = -1, v = -1;  // outer face lies to the left of u -> v
  static OuterSpec automatic() { return {}; }
  static OuterSpec none() { return {Mode::None, -1, -1}; }
  static OuterSpec left_of(int u, int v) { return {Mode::Edge, u, v}; }
};

struct MapDiagnostics {
  int vertices = 0;
  int edges = 0;
  int faces = 0;
  int euler = 0;
  int components = 0;
  int loops = 0;
  int multi_edges = 0;  // number of extra parallel copies
  bool type_ii = true;   // no loops
  bool type_iii = true;  // no loops, no multiple edges
  int outer_face = -1;
  int outer_degree = 0;
  std::map<int, int> face_degree_histogram;  // bounded faces only
  bool twin_involution = true;
  bool next_permutation = true;
  bool degree_sums_ok = true;
  std::string summary() const;
};

class HalfEdgeMap {
 public:
  HalfEdgeMap() = default;

  static HalfEdgeMap from_rotations(const std::vector<std::vector<int>>& rotations,
                                    OuterSpec outer = OuterSpec::automatic());
  static HalfEdgeMap from_rotation_entries(const RotationSystem& rotations,
                                           OuterSpec outer = OuterSpec::automatic());

  int num_vertices() const { return static_cast<int>(rotation_.size()); }
  int num_half_edges() const { return static_cast<int>(half_edges_.size()); }
  int num_edges() const { return num_half_edges() / 2; }
  int num_faces() const { return static_cast<int>(face_start_.size()); }

  const HalfEdge& half_edge(int h) const { return half_edges_[h]; }
  int twin(int h) const { return half_edges_[h].twin; }
  int next(int h) const { return half_edges_[h].next; }
  int origin(int h) const { return half_edges_[h].origin; }
  int target(int h) const { return half_edges_[half_edges_[h].twin].origin; }
  int face(int h) const { return half_edges_[h].face; }
  int edge_id(int h) const { return h / 2; }

  // outgoing half-edges in counter-clockwise order
  const std::vector<int>& rotation(int v) const { return rotation_[v]; }
  int degree(int v) const { return static_cast<int>(rotation_[v].size()); }
  std::vector<int> neighbors(int v) const;
  std::optional<int> find_half_edge(int u, int v) const;

  int face_start(int f) const { return face_start_[f]; }
  int face_degree(int f) const { return face_degree_[f]; }
  std::vector<int> face_vertices(int f) const;
  std::vector<int> face_half_edges(int f) const;
  int outer_face() const { return outer_face_; }
  bool is_bounded(int f) const { return f != outer_face_; }
  bool is_triangulated_face(int f) const { return f != outer_face_ && face_degree_[f] == 3; }
  bool is_boundary_vertex(int v) const;
  void set_outer_face(int f);

  std::optional<int> root() const { return root_; }
  void set_root(int half_edge) { root_ = half_edge; }

  // external vertex labels (identity unless set, e.g. by truncation)
  const std::vector<std::int64_t>& labels() const { return labels_; }
  void set_labels(std::vector<std::int64_t> labels);

  RotationSystem rotation_system() const;
  MapDiagnostics validate() const;

  std::string serialize() const;
  static HalfEdgeMap parse(const std::string& text);

 private:
  void compute_faces(OuterSpec outer);

  std::vector<HalfEdge> half_edges_;
  std::vector<std::vector<int>> rotation_;
  std::vector<int> face_start_;
  std::vector<int> face_degree_;
  int outer_face_ = -1;
  std::optional<int> root_;
  std::vector<std::int64_t> labels_;
};

struct RootedBall {
  HalfEdgeMap submap;
  int root = 0;  // index in submap
  int radius = 0;
  std::vector<int> original;  // submap vertex -> original vertex
};

RootedBall bs_ball(const HalfEdgeMap& map, int v0, int m);

struct AugmentedMap {
  HalfEdgeMap map;
  std::vector<int> face_vertex;  // original face -> new vertex id (-1 if not augmented)
};

AugmentedMap augment_faces(const HalfEdgeMap& map, bool include_outer = true);

std::vector<int> bfs_distances(const HalfEdgeMap& map, int source);

}  // namespace cellembed
