#include "xlroute/rng.hpp"

#include <cmath>

#include "xlroute/errors.hpp"

namespace xlr {

namespace {
std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}
}  // namespace

Rng::Rng(std::uint64_t seed) {
  std::uint64_t sm = seed;
  for (auto& word : s_) word = splitmix64(sm);
}

std::uint64_t Rng::nextU64() {
  const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::uniform01() {
  return static_cast<double>(nextU64() >> 11) * 0x1.0p-53;
}

double Rng::exponential(double mean) {
  if (!(mean > 0.0)) throw DomainError("exponential mean must be > 0");
  return -mean * std::log1p(-uniform01());
}

namespace {
// Knuth's product-of-uniforms draw; exp(-mean) must stay representable.
int poissonSmall(Rng& rng, double mean) {
  const double limit = std::exp(-mean);
  double product = rng.uniform01();
  int count = 0;
  while (product > limit) {
    ++count;
    product *= rng.uniform01();
  }
  return count;
}
}  // namespace

int Rng::poisson(double mean) {
  if (mean < 0.0) throw DomainError("poisson mean must be >= 0");
  if (mean == 0.0) return 0;
  // a Poisson variate is the sum of independent smaller-mean pieces
  int total = 0;
  while (mean > 30.0) {
    total += poissonSmall(*this, 30.0);
    mean -= 30.0;
  }
  return total + poissonSmall(*this, mean);
}

std::size_t Rng::pickWeighted(std::span<const double> weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  if (!(total > 0.0)) throw DomainError("pickWeighted needs a positive weight sum");
  double x = uniform01() * total;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    x -= weights[i];
    if (x < 0.0) return i;
  }
  return weights.size() - 1;
}

}  // namespace xlr
