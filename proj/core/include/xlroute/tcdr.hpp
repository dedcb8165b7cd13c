#pragma once

#include <span>
#include <vector>

#include "xlroute/control.hpp"
#include "xlroute/rng.hpp"

namespace xlr {

// Slot draw of the time-division scheme: (link, source) slot index with
// probability alphaPrime / sum over the whole node row. Returns -1 when the
// row is all zero (the node idles).
int pickLinkAndSource(std::span<const double> alphaPrimeRow, Rng& rng);

// Parameters of the time-division scheme: one nonnegative weight per
// (link, source) slot; the node-level normalization is the time fraction.
struct TcdrState {
  std::vector<std::vector<double>> alphaPrime;  // [tx node][slot(li,k)]
  long iterations = 0;
};

// SchemePolicy for the time-division scheme. Offered rates use only mean link
// qualities (single-link ergodic rates); no per-slot SNR enters any control
// computation.
class TcdrPolicy final : public SchemePolicy {
 public:
  TcdrPolicy(const NetIndex& net, const Hyperparams& hp);

  Scheme scheme() const override { return Scheme::Tcdr; }
  void nodeRates(int i, std::vector<double>& muHat) const override;
  void paramGradient(int i, std::span<const double> dFdMu,
                     std::vector<double>& grad) const override;
  void ascend(int i, std::span<const double> dFdMu, bool betaRound) override;
  void onObjectiveDecrease(bool betaRound) override;
  std::span<double> paramBlock(int i) override;
  std::span<const double> paramBlock(int i) const override;
  int txCount() const override { return net_->txCount(); }

  const NetIndex& net() const { return *net_; }
  TcdrState state() const;
  void setState(const TcdrState& state);
  double timeShare(int i, int li, int k) const;  // pi'_{i,li,k}

 private:
  const NetIndex* net_;
  double thetaAlphaPrime_, thetaAlphaPrime0_;
  double alphaFloor_;
  long iter_ = 0;
  std::vector<std::vector<double>> params_;
  std::vector<std::vector<double>> linkRate_;  // meanRateSingle per link
};

struct TcdrRun {
  ControlResult result;
  TcdrState state;
};

TcdrRun runTcdr(const NetIndex& net, const QosSpec& qos, const Objective& objective,
                const Hyperparams& hp);

}  // namespace xlr
