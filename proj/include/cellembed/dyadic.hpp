#pragma once

#include <cstdint>
#include <map>
#include <tuple>

#include "cellembed/cell_config.hpp"
#include "cellembed/geometry.hpp"

namespace cellembed {

struct DyadicSquare {
  int level = 0;
  std::int64_t i = 0, j = 0;
  Box box;
  bool operator<(const DyadicSquare& o) const { return std::tie(level, i, j) < std::tie(o.level, o.i, o.j); }
  bool operator==(const DyadicSquare& o) const { return level == o.level && i == o.i && j == o.j; }
};

// S_0 = [0,2^s]^2 - w; S_k chosen uniformly among the 4 dyadic parents of S_{k-1}.
// Level k >= 0 squares tile the plane with lattice anchored at S_k; negative
// levels subdivide S_0's lattice.
class DyadicSystem {
 public:
  DyadicSystem() = default;
  DyadicSystem(double s, Vec2 w, std::uint64_t seed) : s_(s), w_(w), seed_(seed) {}

  double s() const { return s_; }
  Vec2 w() const { return w_; }
  std::uint64_t seed() const { return seed_; }

  double side(int level) const;
  int parent_choice(int level) const;  // which quadrant S_{level-1} occupies in S_level, level >= 1
  Box chain_square(int level) const;   // S_level for level >= 0
  Vec2 lattice_origin(int level) const;
  DyadicSquare square_at(const Vec2& z, int level) const;
  DyadicSquare square(int level, std::int64_t i, std::int64_t j) const;
  DyadicSquare parent(const DyadicSquare& sq) const;

 private:
  double s_ = 0.0;
  Vec2 w_;
  std::uint64_t seed_ = 0;
  mutable std::map<int, Vec2> origin_cache_;
};

DyadicSystem sample_dyadic_system(std::uint64_t seed);

struct HatSquare {
  DyadicSquare square;
  double mass = 0.0;
  double parent_mass = 0.0;
};

// Fractional cell mass of a square: sum over cells meeting it of area(H cap S)/area(H).
double square_mass(const CellConfiguration& config, const Box& square);

// Largest dyadic square containing z with mass <= m. Memoizes masses.
class HatSquareOracle {
 public:
  HatSquareOracle(const CellConfiguration& config, const DyadicSystem& dyadic) : config_(config), dyadic_(dyadic) {}
  HatSquare operator()(const Vec2& z, double m);
  double mass(const DyadicSquare& sq);

 private:
  const CellConfiguration& config_;
  const DyadicSystem& dyadic_;
  std::map<std::tuple<int, std::int64_t, std::int64_t>, double> cache_;
};

HatSquare hat_square(const CellConfiguration& config, const DyadicSystem& dyadic, const Vec2& z, double m);

}  // namespace cellembed
