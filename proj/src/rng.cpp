#include "cellembed/rng.hpp"

#include <cmath>

namespace cellembed {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_key(std::initializer_list<std::uint64_t> parts) {
  std::uint64_t h = 0x243F6A8885A308D3ULL;
  for (std::uint64_t p : parts) h = splitmix64(h ^ splitmix64(p + 0x13198A2E03707344ULL));
  return h;
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream) : key_(derive_key({seed, stream})) {}

CounterRng::CounterRng(std::initializer_list<std::uint64_t> parts) : key_(derive_key(parts)) {}

std::uint64_t CounterRng::next_u64() {
  std::uint64_t v = splitmix64(key_ + 0xD1B54A32D192ED03ULL * (++counter_));
  return v;
}

double CounterRng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

std::uint64_t CounterRng::below(std::uint64_t n) {
  if (n <= 1) return 0;
  // Lemire-style rejection keeps the draw unbiased
  std::uint64_t limit = max() - max() % n;
  std::uint64_t v;
  do {
    v = next_u64();
  } while (v >= limit);
  return v % n;
}

double CounterRng::normal() {
  double u1 = uniform();
  double u2 = uniform();
  if (u1 < 1e-300) u1 = 1e-300;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

std::uint64_t CounterRng::poisson(double mean) {
  if (mean <= 0.0) return 0;
  // sequential inversion in log space; fine for the moderate means used here
  double u = uniform();
  double logp = -mean;
  double cdf = std::exp(logp);
  std::uint64_t k = 0;
  while (u > cdf && k < 100000) {
    ++k;
    logp += std::log(mean) - std::log(static_cast<double>(k));
    cdf += std::exp(logp);
  }
  return k;
}

}  // namespace cellembed
