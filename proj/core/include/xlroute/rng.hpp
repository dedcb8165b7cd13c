#pragma once

#include <cstdint>
#include <span>

namespace xlr {

// Deterministic xoshiro256++ generator. Every simulation run owns exactly one
// instance; the draw sequence depends only on the seed and the call order.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t nextU64();
  double uniform01();               // [0, 1)
  double exponential(double mean);  // mean > 0
  int poisson(double mean);         // mean >= 0, Knuth's method
  // Index drawn proportionally to the (nonnegative) weights; their sum must
  // be positive.
  std::size_t pickWeighted(std::span<const double> weights);

 private:
  std::uint64_t s_[4];
};

}  // namespace xlr
