#include "support.hpp"

#include <algorithm>
#include <cmath>

#include "xlroute/rng.hpp"

namespace oracle {

namespace {

double simpsonStep(const std::function<double(double)>& f, double a, double b,
                   double fa, double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive(const std::function<double(double)>& f, double a, double b,
                double fa, double fm, double fb, double whole, double tol,
                int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = simpsonStep(f, a, m, fa, flm, fm);
  const double right = simpsonStep(f, m, b, fm, frm, fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return adaptive(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol) {
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  const double whole = simpsonStep(f, a, b, fa, fm, fb);
  return adaptive(f, a, b, fa, fm, fb, whole, tol, 60);
}

double meanRateSingleQuad(double gammaBar, double bandwidth) {
  const double ln2 = std::log(2.0);
  auto f = [=](double x) {
    return std::exp(-x / gammaBar) / gammaBar * bandwidth * std::log1p(x) / ln2;
  };
  const double upper = 60.0 * gammaBar;
  // split at the mean: the integrand peaks early and decays over a long tail
  return integrate(f, 0.0, gammaBar, 1e-13 * bandwidth) +
         integrate(f, gammaBar, upper, 1e-13 * bandwidth * gammaBar);
}

double opportunisticRateQuad(std::size_t j, std::span<const double> gammaBars,
                             std::span<const double> betas, double bandwidth) {
  const double ln2 = std::log(2.0);
  const double g = gammaBars[j];
  auto f = [&, g](double x) {
    double v = std::exp(-x / g) / g * bandwidth * std::log1p(x) / ln2;
    for (std::size_t z = 0; z < betas.size(); ++z) {
      if (z == j) continue;
      v *= -std::expm1(-betas[j] * x / (betas[z] * g));
    }
    return v;
  };
  const double upper = 60.0 * g;
  return integrate(f, 0.0, g, 1e-13 * bandwidth) +
         integrate(f, g, upper, 1e-13 * bandwidth * g);
}

ContestMc contestMonteCarlo(std::span<const double> gammaBars,
                            std::span<const double> betas, double bandwidth,
                            std::int64_t slots, std::uint64_t seed) {
  xlr::Rng rng(seed);
  const std::size_t n = betas.size();
  ContestMc mc;
  mc.ratePerSlot.assign(n, 0.0);
  mc.winFreq.assign(n, 0.0);
  std::vector<double> gamma(n);
  for (std::int64_t t = 0; t < slots; ++t) {
    std::size_t best = 0;
    double bestPriority = -1.0;
    for (std::size_t z = 0; z < n; ++z) {
      gamma[z] = rng.exponential(gammaBars[z]);
      const double priority = betas[z] * gamma[z] / gammaBars[z];
      if (priority > bestPriority) {
        bestPriority = priority;
        best = z;
      }
    }
    mc.winFreq[best] += 1.0;
    mc.ratePerSlot[best] += bandwidth * std::log2(1.0 + gamma[best]);
  }
  for (std::size_t z = 0; z < n; ++z) {
    mc.ratePerSlot[z] /= static_cast<double>(slots);
    mc.winFreq[z] /= static_cast<double>(slots);
  }
  return mc;
}

double mm1WaitViolationFreq(double lambda, double mu, double deadline,
                            std::int64_t nArrivals, std::uint64_t seed) {
  xlr::Rng rng(seed);
  double wait = 0.0;
  std::int64_t violations = 0;
  double lastService = 0.0;
  for (std::int64_t n = 0; n < nArrivals; ++n) {
    if (n > 0) {
      const double interarrival = rng.exponential(1.0 / lambda);
      wait = std::max(0.0, wait + lastService - interarrival);
    }
    if (wait > deadline) ++violations;
    lastService = rng.exponential(1.0 / mu);
  }
  return static_cast<double>(violations) / static_cast<double>(nArrivals);
}

}  // namespace oracle
