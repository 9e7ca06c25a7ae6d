#pragma once

#include <cstdint>
#include <initializer_list>
#include <limits>

namespace cellembed {

std::uint64_t splitmix64(std::uint64_t x);

// Hash an arbitrary list of integers into a 64-bit key.
std::uint64_t derive_key(std::initializer_list<std::uint64_t> parts);

// Counter-based generator: output i is splitmix64(key + i*gamma).
// Streams keyed by (seed, stream ids) are independent of evaluation order.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0);
  CounterRng(std::initializer_list<std::uint64_t> parts);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() { return next_u64(); }

  std::uint64_t next_u64();
  double uniform();  // [0,1), 53 bits
  double uniform(double a, double b) { return a + (b - a) * uniform(); }
  std::uint64_t below(std::uint64_t n);
  double normal();
  std::uint64_t poisson(double mean);
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace cellembed
