#include "xlroute/channel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "xlroute/errors.hpp"
#include "xlroute/exp_integral.hpp"

namespace xlr {

double sampleSnr(double gammaBar, Rng& rng) {
  if (!(gammaBar > 0.0)) throw DomainError("mean SNR must be > 0");
  return rng.exponential(gammaBar);
}

double capacity(double gamma, double bandwidth_hz) {
  if (gamma < 0.0) throw DomainError("SNR must be >= 0");
  return bandwidth_hz * std::log2(1.0 + gamma);
}

double meanRateSingle(double gammaBar, double bandwidth_hz) {
  if (!(gammaBar > 0.0)) throw DomainError("mean SNR must be > 0");
  const double lambda = 1.0 / gammaBar;
  return bandwidth_hz / std::numbers::ln2 * expScaledE1(lambda);
}

namespace {

// d/db [ e^b E1(b) / b ] = (e^b E1(b) (b - 1) - 1) / b^2
inline double scaledE1OverBDeriv(double b, double scaled) {
  return (scaled * (b - 1.0) - 1.0) / (b * b);
}

void checkContest(std::span<const double> gammaBars, std::span<const double> betas) {
  if (gammaBars.size() != betas.size() || gammaBars.empty()) {
    throw StructureError("contest needs matching, nonempty beta and mean-SNR sets");
  }
  if (gammaBars.size() > static_cast<std::size_t>(kMaxContestLinks)) {
    throw StructureError("contest too large for inclusion-exclusion expansion");
  }
  for (std::size_t i = 0; i < betas.size(); ++i) {
    if (!(betas[i] > 0.0)) throw DomainError("priority weights must be > 0");
    if (!(gammaBars[i] > 0.0)) throw DomainError("mean SNRs must be > 0");
  }
}

}  // namespace

OpportunisticRates opportunisticRates(std::span<const double> gammaBars,
                                      std::span<const double> betas,
                                      double bandwidth_hz,
                                      bool withGradient) {
  checkContest(gammaBars, betas);
  const std::size_t n = betas.size();
  const double wOverLn2 = bandwidth_hz / std::numbers::ln2;

  OpportunisticRates out;
  out.rate.assign(n, 0.0);
  out.winProb.assign(n, 0.0);
  if (withGradient) out.dRate.assign(n, std::vector<double>(n, 0.0));

  std::vector<std::size_t> comp(n - 1);
  std::vector<double> a(n - 1);
  std::vector<double> dRda(n - 1);

  for (std::size_t j = 0; j < n; ++j) {
    const double lambda = 1.0 / gammaBars[j];
    std::size_t c = 0;
    for (std::size_t z = 0; z < n; ++z) {
      if (z == j) continue;
      comp[c] = z;
      a[c] = betas[j] / (betas[z] * gammaBars[j]);
      ++c;
    }
    std::fill(dRda.begin(), dRda.end(), 0.0);

    double rate = 0.0;
    double win = 0.0;
    const std::size_t nMasks = std::size_t{1} << c;
    for (std::size_t mask = 0; mask < nMasks; ++mask) {
      double sumA = 0.0;
      int bits = 0;
      for (std::size_t t = 0; t < c; ++t) {
        if (mask & (std::size_t{1} << t)) {
          sumA += a[t];
          ++bits;
        }
      }
      const double sign = (bits & 1) ? -1.0 : 1.0;
      const double b = lambda + sumA;
      const double scaled = expScaledE1(b);
      rate += sign * lambda * scaled / b;
      win += sign * lambda / b;
      if (withGradient) {
        const double dh = scaledE1OverBDeriv(b, scaled);
        for (std::size_t t = 0; t < c; ++t) {
          if (mask & (std::size_t{1} << t)) dRda[t] += sign * lambda * dh;
        }
      }
    }
    out.rate[j] = wOverLn2 * rate;
    out.winProb[j] = win;
    if (withGradient) {
      for (std::size_t t = 0; t < c; ++t) {
        const std::size_t z = comp[t];
        const double dr = wOverLn2 * dRda[t];
        out.dRate[j][j] += dr * a[t] / betas[j];
        out.dRate[j][z] = -dr * a[t] / betas[z];
      }
    }
  }
  return out;
}

double meanRateOpportunistic(std::size_t j, std::span<const double> betas,
                             std::span<const double> gammaBars,
                             double bandwidth_hz) {
  if (j >= betas.size()) throw StructureError("link index outside the contest");
  return opportunisticRates(gammaBars, betas, bandwidth_hz).rate[j];
}

double winProbability(std::size_t j, std::span<const double> betas,
                      std::span<const double> gammaBars) {
  if (j >= betas.size()) throw StructureError("link index outside the contest");
  return opportunisticRates(gammaBars, betas, 1.0).winProb[j];
}

}  // namespace xlr
