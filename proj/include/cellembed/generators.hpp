#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "cellembed/cell_config.hpp"
#include "cellembed/triangulation.hpp"

namespace cellembed {

enum class GeneratorKind { PoissonVoronoi, HexPercolation, TriangularLattice, SquareLattice };

const char* generator_kind_name(GeneratorKind k);
GeneratorKind parse_generator_kind(const std::string& s);

struct GeneratorSpec {
  GeneratorKind kind = GeneratorKind::PoissonVoronoi;
  double intensity = 1.0;        // Poisson intensity
  double percolation_p = 0.2;    // bond probability
  double window = 64.0;          // side of the centered window square
  double buffer = -1.0;          // < 0: default width
  std::uint64_t seed = 1;
  bool collapse = false;         // hex percolation: collapse enclosed cells
  bool disk_window = false;      // Voronoi: sample a disk of radius window/2 + buffer instead of a square

  void check() const;
  double effective_buffer() const;
};

// Documented upper bound on the percolation parameter (bond percolation on the
// triangular lattice has p_c = 2 sin(pi/18) ~ 0.347).
inline constexpr double kPercolationBound = 0.3472963553338607;

CellConfiguration poisson_voronoi(const GeneratorSpec& spec);
CellConfiguration hex_percolation(const GeneratorSpec& spec);
CellConfiguration lattice_config(GeneratorKind kind, double window);
CellConfiguration generate(const GeneratorSpec& spec);

// Triangular faces of the associated map (bounded, degree 3), CCW.
std::vector<std::array<int, 3>> config_triangles(const CellConfiguration& config);

// Disk truncation of a configuration's triangulated part: cells whose reference
// point lies within `radius` of `center`, rooted at the cell containing center.
DiskTruncation config_disk_truncation(const CellConfiguration& config, const Vec2& center, double radius);

// Triangular lattice patch: vertices with hex-distance <= m from the origin.
Triangulation triangular_lattice_patch(int m, std::vector<Vec2>* positions = nullptr);

}  // namespace cellembed
