#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

// Test-side oracles, independent of the library's closed-form evaluation
// paths.
namespace oracle {

// Adaptive Simpson on [a, b] to the given absolute tolerance.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol);

// Quadrature evaluation of the single-link ergodic rate
//   int_0^inf (1/g) e^(-x/g) W log2(1+x) dx.
double meanRateSingleQuad(double gammaBar, double bandwidth);

// Quadrature evaluation of the weighted-SNR contest rate of link j:
//   int_0^inf (1/g_j) e^(-x/g_j) prod_{z!=j}(1 - e^(-b_j x/(b_z g_j)))
//            W log2(1+x) dx.
double opportunisticRateQuad(std::size_t j, std::span<const double> gammaBars,
                             std::span<const double> betas, double bandwidth);

// Slot-level Monte Carlo of the select-then-transmit process: per-slot fading
// draws, argmax of beta*gamma/gammaBar, full capacity to the winner.
struct ContestMc {
  std::vector<double> ratePerSlot;  // average rate credited to each link
  std::vector<double> winFreq;
};
ContestMc contestMonteCarlo(std::span<const double> gammaBars,
                            std::span<const double> betas, double bandwidth,
                            std::int64_t slots, std::uint64_t seed);

// M/M/1 waiting-time tail by Lindley recursion over nArrivals customers:
// fraction with queueing delay above the deadline.
double mm1WaitViolationFreq(double lambda, double mu, double deadline,
                            std::int64_t nArrivals, std::uint64_t seed);

}  // namespace oracle
