#include "cellembed/dyadic.hpp"

#include <cmath>

#include "cellembed/error.hpp"
#include "cellembed/rng.hpp"

namespace cellembed {

namespace {
constexpr std::uint64_t kDyadicStream = 0xD1ADu;
constexpr int kMinLevel = -60;
constexpr int kMaxLevel = 60;
}  // namespace

DyadicSystem sample_dyadic_system(std::uint64_t seed) {
  CounterRng rng(seed, kDyadicStream);
  double s = rng.uniform();
  double side = std::exp2(s);
  Vec2 w{rng.uniform() * side, rng.uniform() * side};
  return DyadicSystem(s, w, seed);
}

double DyadicSystem::side(int level) const { return std::exp2(s_ + level); }

int DyadicSystem::parent_choice(int level) const {
  CounterRng rng({seed_, kDyadicStream, 0x9A5Eu, static_cast<std::uint64_t>(level)});
  return static_cast<int>(rng.below(4));
}

Vec2 DyadicSystem::lattice_origin(int level) const {
  if (level <= 0) return -w_;
  auto it = origin_cache_.find(level);
  if (it != origin_cache_.end()) return it->second;
  Vec2 lo = lattice_origin(level - 1);
  int c = parent_choice(level);
  double sd = side(level - 1);
  Vec2 o{lo.x - (c & 1) * sd, lo.y - ((c >> 1) & 1) * sd};
  origin_cache_[level] = o;
  return o;
}

Box DyadicSystem::chain_square(int level) const {
  Vec2 o = lattice_origin(std::max(level, 0));
  double sd = side(level);
  return {o, o + Vec2{sd, sd}};
}

DyadicSquare DyadicSystem::square(int level, std::int64_t i, std::int64_t j) const {
  Vec2 o = lattice_origin(level);
  double sd = side(level);
  DyadicSquare sq;
  sq.level = level;
  sq.i = i;
  sq.j = j;
  sq.box = {{o.x + i * sd, o.y + j * sd}, {o.x + (i + 1) * sd, o.y + (j + 1) * sd}};
  return sq;
}

DyadicSquare DyadicSystem::square_at(const Vec2& z, int level) const {
  if (level < kMinLevel || level > kMaxLevel) throw Error(ErrorKind::InvalidInput, "dyadic level out of range");
  Vec2 o = lattice_origin(level);
  double sd = side(level);
  auto i = static_cast<std::int64_t>(std::floor((z.x - o.x) / sd));
  auto j = static_cast<std::int64_t>(std::floor((z.y - o.y) / sd));
  return square(level, i, j);
}

DyadicSquare DyadicSystem::parent(const DyadicSquare& sq) const {
  return square_at(sq.box.center(), sq.level + 1);
}

double square_mass(const CellConfiguration& config, const Box& square) {
  config.require_inside_carrier(square, "square mass");
  double m = 0.0;
  for (int i : config.cells_meeting(square)) m += config.cell(i).clipped_area(square) / config.cell(i).area();
  return m;
}

double HatSquareOracle::mass(const DyadicSquare& sq) {
  auto key = std::make_tuple(sq.level, sq.i, sq.j);
  auto it = cache_.find(key);
  if (it != cache_.end()) return it->second;
  if (!config_.carrier().contains(sq.box))
    throw Error(ErrorKind::InsufficientWindow, "dyadic square of side " + std::to_string(sq.box.width()) +
                                                   " leaves the carrier; cannot certify maximality");
  double m = square_mass(config_, sq.box);
  cache_[key] = m;
  return m;
}

HatSquare HatSquareOracle::operator()(const Vec2& z, double m) {
  if (!(m > 0)) throw Error(ErrorKind::InvalidInput, "mass threshold must be positive");
  int k = 0;
  DyadicSquare sq = dyadic_.square_at(z, k);
  double mk = mass(sq);
  if (mk <= m) {
    while (true) {
      if (k + 1 > kMaxLevel) throw Error(ErrorKind::InsufficientWindow, "mass threshold never exceeded");
      DyadicSquare up = dyadic_.square_at(z, k + 1);
      double mu = mass(up);
      if (mu > m) return {sq, mk, mu};
      sq = up;
      mk = mu;
      ++k;
    }
  }
  while (true) {
    if (k - 1 < kMinLevel) throw Error(ErrorKind::InsufficientWindow, "no dyadic square light enough");
    DyadicSquare down = dyadic_.square_at(z, k - 1);
    double md = mass(down);
    if (md <= m) return {down, md, mk};
    sq = down;
    mk = md;
    --k;
  }
}

HatSquare hat_square(const CellConfiguration& config, const DyadicSystem& dyadic, const Vec2& z, double m) {
  HatSquareOracle oracle(config, dyadic);
  return oracle(z, m);
}

}  // namespace cellembed
