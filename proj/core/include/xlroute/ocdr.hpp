#pragma once

#include <span>
#include <vector>

#include "xlroute/control.hpp"
#include "xlroute/rng.hpp"

namespace xlr {

// Per-slot next-hop choice: the link maximizing beta_j * gamma_j / gammaBar_j
// transmits; exact ties break uniformly at random. Returns the link position.
int selectLink(std::span<const double> betas, std::span<const double> snrDraws,
               std::span<const double> gammaBars, Rng& rng);

// Source draw on a chosen link: index k with probability alpha_k / sum(alpha).
// Returns -1 when the whole row is zero (the link idles this slot).
int pickSource(std::span<const double> alphaRow, Rng& rng);

// Parameters of the opportunistic scheme: per-link priority weights beta and
// per-(link, source) time-share weights alpha. Rows follow NetIndex layout.
struct OcdrState {
  std::vector<std::vector<double>> beta;   // [tx node][link]
  std::vector<std::vector<double>> alpha;  // [tx node][slot(li,k)]
  long alphaIterations = 0;
  long betaIterations = 0;
};

// SchemePolicy for the opportunistic scheme. Offered rates follow the
// weighted-SNR contest closed form; gradients are analytic derivatives of
// that closed form chained through the time-share normalization.
class OcdrPolicy final : public SchemePolicy {
 public:
  OcdrPolicy(const NetIndex& net, const Hyperparams& hp);

  Scheme scheme() const override { return Scheme::Ocdr; }
  void nodeRates(int i, std::vector<double>& muHat) const override;
  void paramGradient(int i, std::span<const double> dFdMu,
                     std::vector<double>& grad) const override;
  void ascend(int i, std::span<const double> dFdMu, bool betaRound) override;
  void onObjectiveDecrease(bool betaRound) override;
  std::span<double> paramBlock(int i) override;
  std::span<const double> paramBlock(int i) const override;
  int txCount() const override { return net_->txCount(); }

  const NetIndex& net() const { return *net_; }
  OcdrState state() const;
  void setState(const OcdrState& state);

  // views into the parameter block: [beta(J) | alpha(J*K)]
  std::span<const double> betaRow(int i) const;
  std::span<const double> alphaRow(int i) const;
  double timeShare(int i, int li, int k) const;  // pi_{i,li,k}

 private:
  const NetIndex* net_;
  double bandwidth_;
  double thetaAlpha_, thetaBeta_;
  double thetaAlpha0_, thetaBeta0_;
  double betaFloor_, alphaFloor_;
  long alphaIter_ = 0, betaIter_ = 0;
  std::vector<std::vector<double>> params_;
};

struct OcdrRun {
  ControlResult result;
  OcdrState state;
};

// Full distributed optimization from the cold-start parameters (all priority
// and share weights at one, all limits at zero).
OcdrRun runOcdr(const NetIndex& net, const QosSpec& qos, const Objective& objective,
                const Hyperparams& hp);

}  // namespace xlr
