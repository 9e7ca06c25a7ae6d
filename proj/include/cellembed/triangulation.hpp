#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "cellembed/planar_map.hpp"

namespace cellembed {

// Finite simple disk triangulation with counter-clockwise faces.
// Each vertex has its petals in counter-clockwise order: a closed cycle for
// interior vertices, an open chain (first..last on the boundary) otherwise.
class Triangulation {
 public:
  Triangulation() = default;
  Triangulation(int num_vertices, std::vector<std::array<int, 3>> faces);

  // bounded triangular faces of a map; every bounded face must be a triangle
  static Triangulation from_map(const HalfEdgeMap& map);

  int num_vertices() const { return static_cast<int>(petals_.size()); }
  int num_faces() const { return static_cast<int>(faces_.size()); }
  const std::vector<std::array<int, 3>>& faces() const { return faces_; }
  const std::array<int, 3>& face(int f) const { return faces_[f]; }

  const std::vector<int>& petals(int v) const { return petals_[v]; }
  // petal_faces(v)[i] is the face (v, petals[i], petals[i+1])
  const std::vector<int>& petal_faces(int v) const { return petal_faces_[v]; }
  bool is_boundary(int v) const { return boundary_[v]; }
  bool is_interior(int v) const { return !boundary_[v]; }
  int degree(int v) const { return static_cast<int>(petals_[v].size()); }
  int num_interior() const;
  const std::vector<int>& boundary_cycle() const { return boundary_cycle_; }

  std::vector<std::array<int, 2>> edges() const;  // u < v
  // faces on the left of u->v and of v->u (-1 when absent)
  std::array<int, 2> edge_faces(int u, int v) const;
  // third vertex of face f opposite edge {u,v}
  int opposite(int f, int u, int v) const;

  const std::vector<std::int64_t>& labels() const { return labels_; }
  void set_labels(std::vector<std::int64_t> labels);

  HalfEdgeMap to_map() const;

 private:
  std::vector<std::array<int, 3>> faces_;
  std::vector<std::vector<int>> petals_;
  std::vector<std::vector<int>> petal_faces_;
  std::vector<char> boundary_;
  std::vector<int> boundary_cycle_;
  std::vector<std::int64_t> labels_;
};

// Largest disk triangulation made of faces whose vertices all satisfy `keep`,
// containing `root` as an interior vertex: the edge-connected face component of
// root, with holes filled by original faces and pinch points removed.
// Returns the new triangulation and new->old vertex map.
struct DiskTruncation {
  Triangulation tri;
  std::vector<int> original;
  int root = -1;
};
DiskTruncation disk_truncation(int num_vertices, const std::vector<std::array<int, 3>>& faces, int root,
                               const std::function<bool(int)>& keep);

}  // namespace cellembed
