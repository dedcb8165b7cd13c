#pragma once

#include <span>
#include <vector>

#include "xlroute/rng.hpp"

namespace xlr {

// Largest contest size the inclusion-exclusion expansion accepts (2^(n-1)
// terms per link).
inline constexpr int kMaxContestLinks = 12;

// One Rayleigh-fading draw: exponential with the link's mean SNR.
double sampleSnr(double gammaBar, Rng& rng);

// Shannon rate W log2(1 + gamma), bit/s. gamma = 0 yields 0.
double capacity(double gamma, double bandwidth_hz);

// Ergodic rate of a single Rayleigh link, bit/s:
//
//   int_0^inf (1/g) e^(-x/g) W log2(1+x) dx  =  (W/ln 2) e^(1/g) E1(1/g).
double meanRateSingle(double gammaBar, double bandwidth_hz);

// Expected per-slot behaviour of one node's outgoing links under weighted
// normalized-SNR selection: in each slot the link maximizing
// beta_j * gamma_j / gammaBar_j transmits, so link j's expected rate is
//
//   int_0^inf (1/g_j) e^(-x/g_j) prod_{z!=j} (1 - e^(-beta_j x / (beta_z g_j)))
//            W log2(1+x) dx.
//
// Each product factor is P(beta_z gamma_z / g_z < beta_j x / g_j); evaluating
// rival z's exponential CDF at its scaled threshold cancels g_z, which is why
// only the target link's mean SNR g_j appears in the rival exponents.
// Expanding the product by inclusion-exclusion reduces every term to
// e^b E1(b)/b, which keeps the hot optimization loop quadrature-free.
struct OpportunisticRates {
  std::vector<double> rate;     // expected rate per link, bit/s
  std::vector<double> winProb;  // probability the link wins the slot
  // dRate[j][z] = d rate[j] / d beta[z]; filled when gradients requested
  std::vector<std::vector<double>> dRate;
};

OpportunisticRates opportunisticRates(std::span<const double> gammaBars,
                                      std::span<const double> betas,
                                      double bandwidth_hz,
                                      bool withGradient = false);

// Single-link views of the above, matching by position j in the link set.
double meanRateOpportunistic(std::size_t j, std::span<const double> betas,
                             std::span<const double> gammaBars,
                             double bandwidth_hz);
double winProbability(std::size_t j, std::span<const double> betas,
                      std::span<const double> gammaBars);

}  // namespace xlr
