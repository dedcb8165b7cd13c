#include "xlroute/ocdr.hpp"

#include <algorithm>
#include <cmath>

#include "xlroute/channel.hpp"
#include "xlroute/errors.hpp"

namespace xlr {

int selectLink(std::span<const double> betas, std::span<const double> snrDraws,
               std::span<const double> gammaBars, Rng& rng) {
  if (betas.empty() || betas.size() != snrDraws.size() ||
      betas.size() != gammaBars.size()) {
    throw StructureError("link selection needs matching, nonempty link data");
  }
  double bestPriority = -1.0;
  int best = -1;
  int ties = 0;
  for (std::size_t j = 0; j < betas.size(); ++j) {
    if (!(betas[j] > 0.0)) throw DomainError("priority weights must be > 0");
    const double priority = betas[j] * snrDraws[j] / gammaBars[j];
    if (priority > bestPriority) {
      bestPriority = priority;
      best = static_cast<int>(j);
      ties = 1;
    } else if (priority == bestPriority) {
      // reservoir draw keeps ties uniform without a second pass
      ++ties;
      if (rng.uniform01() * ties < 1.0) best = static_cast<int>(j);
    }
  }
  return best;
}

int pickSource(std::span<const double> alphaRow, Rng& rng) {
  double total = 0.0;
  for (double a : alphaRow) {
    if (a < 0.0) throw DomainError("share weights must be >= 0");
    total += a;
  }
  if (total <= 0.0) return -1;
  return static_cast<int>(rng.pickWeighted(alphaRow));
}

namespace {
std::size_t idx(int i) { return static_cast<std::size_t>(i); }

// theta-scaled ascent along the sup-norm-normalized gradient; entries move by
// at most theta relative to their own magnitude (or 1% of the row peak, so
// floored entries can regrow).
void normalizedStep(std::span<double> p, std::span<const double> g, double theta,
                    double floor) {
  double gmax = 0.0;
  double rowMax = 0.0;
  for (std::size_t t = 0; t < p.size(); ++t) {
    gmax = std::max(gmax, std::abs(g[t]));
    rowMax = std::max(rowMax, p[t]);
  }
  if (gmax <= 0.0 || rowMax <= 0.0) return;
  for (std::size_t t = 0; t < p.size(); ++t) {
    const double scale = std::max(p[t], 0.01 * rowMax);
    p[t] = std::max(p[t] + theta * scale * g[t] / gmax, floor);
  }
}

// Scale invariance of the parameterization makes row normalization free;
// pinning the peak at one prevents unbounded drift.
void renormalizeRow(std::span<double> p, double floor) {
  double rowMax = 0.0;
  for (double v : p) rowMax = std::max(rowMax, v);
  if (rowMax <= 0.0) return;
  for (double& v : p) v = std::max(v / rowMax, floor);
}
}  // namespace

OcdrPolicy::OcdrPolicy(const NetIndex& net, const Hyperparams& hp)
    : net_(&net),
      bandwidth_(net.params().bandwidth_hz),
      thetaAlpha_(hp.stepAlpha),
      thetaBeta_(hp.stepBeta),
      thetaAlpha0_(hp.stepAlpha),
      thetaBeta0_(hp.stepBeta),
      betaFloor_(hp.betaFloor),
      alphaFloor_(hp.alphaFloor) {
  params_.resize(idx(net.txCount()));
  for (int i = 0; i < net.txCount(); ++i) {
    const int J = net.linkCount(i);
    auto& block = params_[idx(i)];
    block.assign(idx(J + net.slotCount(i)), 0.0);
    for (int li = 0; li < J; ++li) block[idx(li)] = 1.0;
    for (int li = 0; li < J; ++li) {
      for (int k = 1; k <= net.sources(); ++k) {
        if (net.allowed(i, li, k)) block[idx(J + net.slot(li, k))] = 1.0;
      }
    }
  }
}

std::span<double> OcdrPolicy::paramBlock(int i) { return params_[idx(i)]; }
std::span<const double> OcdrPolicy::paramBlock(int i) const { return params_[idx(i)]; }

std::span<const double> OcdrPolicy::betaRow(int i) const {
  return std::span<const double>(params_[idx(i)]).first(idx(net_->linkCount(i)));
}

std::span<const double> OcdrPolicy::alphaRow(int i) const {
  return std::span<const double>(params_[idx(i)]).subspan(idx(net_->linkCount(i)));
}

double OcdrPolicy::timeShare(int i, int li, int k) const {
  const auto alpha = alphaRow(i);
  double total = 0.0;
  for (int kk = 1; kk <= net_->sources(); ++kk) total += alpha[idx(net_->slot(li, kk))];
  if (total <= 0.0) return 0.0;
  return alpha[idx(net_->slot(li, k))] / total;
}

void OcdrPolicy::nodeRates(int i, std::vector<double>& muHat) const {
  const int J = net_->linkCount(i);
  const int K = net_->sources();
  muHat.assign(idx(net_->slotCount(i)), 0.0);
  if (J == 0) return;
  const auto contest =
      opportunisticRates(net_->gammaBarRow(i), betaRow(i), bandwidth_, false);
  const auto alpha = alphaRow(i);
  for (int li = 0; li < J; ++li) {
    double total = 0.0;
    for (int k = 1; k <= K; ++k) total += alpha[idx(net_->slot(li, k))];
    if (total <= 0.0) continue;
    for (int k = 1; k <= K; ++k) {
      const auto s = idx(net_->slot(li, k));
      muHat[s] = alpha[s] / total * contest.rate[idx(li)];
    }
  }
}

void OcdrPolicy::paramGradient(int i, std::span<const double> dFdMu,
                               std::vector<double>& grad) const {
  const int J = net_->linkCount(i);
  const int K = net_->sources();
  grad.assign(params_[idx(i)].size(), 0.0);
  if (J == 0) return;
  const auto contest =
      opportunisticRates(net_->gammaBarRow(i), betaRow(i), bandwidth_, true);
  const auto alpha = alphaRow(i);

  for (int li = 0; li < J; ++li) {
    double total = 0.0;
    for (int k = 1; k <= K; ++k) total += alpha[idx(net_->slot(li, k))];
    if (total <= 0.0) continue;

    // d muHat_{li,k'} / d beta_z = pi_{li,k'} dRate[li][z]
    for (int k = 1; k <= K; ++k) {
      const auto s = idx(net_->slot(li, k));
      if (dFdMu[s] == 0.0) continue;
      const double pi = alpha[s] / total;
      for (int z = 0; z < J; ++z) {
        grad[idx(z)] += dFdMu[s] * pi * contest.dRate[idx(li)][idx(z)];
      }
    }

    // d muHat_{li,k'} / d alpha_{li,k} = rate_li (delta_{kk'} - pi_{k'}) / total
    double weighted = 0.0;  // sum_k' dFdMu * rate * pi_{k'}
    for (int k = 1; k <= K; ++k) {
      const auto s = idx(net_->slot(li, k));
      weighted += dFdMu[s] * contest.rate[idx(li)] * (alpha[s] / total);
    }
    for (int k = 1; k <= K; ++k) {
      if (!net_->allowed(i, li, k)) continue;
      const auto s = idx(net_->slot(li, k));
      grad[idx(J) + s] = (dFdMu[s] * contest.rate[idx(li)] - weighted) / total;
    }
  }
}

void OcdrPolicy::ascend(int i, std::span<const double> dFdMu, bool betaRound) {
  const int J = net_->linkCount(i);
  const int K = net_->sources();
  if (J == 0) return;
  std::vector<double> grad;
  paramGradient(i, dFdMu, grad);
  auto block = std::span<double>(params_[idx(i)]);

  if (betaRound) {
    normalizedStep(block.first(idx(J)), std::span<const double>(grad).first(idx(J)),
                   thetaBeta_, betaFloor_);
    renormalizeRow(block.first(idx(J)), betaFloor_);
    ++betaIter_;
  }
  for (int li = 0; li < J; ++li) {
    auto alphaLink = block.subspan(idx(J + net_->slot(li, 1)), idx(K));
    auto gradLink = std::span<const double>(grad).subspan(idx(J + net_->slot(li, 1)), idx(K));
    normalizedStep(alphaLink, gradLink, thetaAlpha_, alphaFloor_);
    renormalizeRow(alphaLink, alphaFloor_);
  }
  ++alphaIter_;
}

void OcdrPolicy::onObjectiveDecrease(bool betaRound) {
  thetaAlpha_ = std::max(thetaAlpha_ * 0.5, 1e-4 * thetaAlpha0_);
  if (betaRound) thetaBeta_ = std::max(thetaBeta_ * 0.5, 1e-4 * thetaBeta0_);
}

OcdrState OcdrPolicy::state() const {
  OcdrState st;
  st.beta.resize(idx(net_->txCount()));
  st.alpha.resize(idx(net_->txCount()));
  for (int i = 0; i < net_->txCount(); ++i) {
    auto b = betaRow(i);
    auto a = alphaRow(i);
    st.beta[idx(i)].assign(b.begin(), b.end());
    st.alpha[idx(i)].assign(a.begin(), a.end());
  }
  st.alphaIterations = alphaIter_;
  st.betaIterations = betaIter_;
  return st;
}

void OcdrPolicy::setState(const OcdrState& state) {
  for (int i = 0; i < net_->txCount(); ++i) {
    const int J = net_->linkCount(i);
    auto& block = params_[idx(i)];
    std::copy(state.beta[idx(i)].begin(), state.beta[idx(i)].end(), block.begin());
    std::copy(state.alpha[idx(i)].begin(), state.alpha[idx(i)].end(),
              block.begin() + J);
  }
  alphaIter_ = state.alphaIterations;
  betaIter_ = state.betaIterations;
}

OcdrRun runOcdr(const NetIndex& net, const QosSpec& qos, const Objective& objective,
                const Hyperparams& hp) {
  OcdrPolicy policy(net, hp);
  OcdrRun run;
  run.result = runControlRounds(net, qos, objective, hp, policy);
  run.state = policy.state();

  if (hp.polishPasses > 0) {
    OcdrPolicy polished(net, hp);
    polished.setState(run.state);
    const double refined = coordinatePolish(net, qos, objective, polished, hp.polishPasses);
    if (refined > run.result.objective) {
      OcdrRun better;
      better.result = runControlRounds(net, qos, objective, hp, polished);
      better.state = polished.state();
      if (better.result.objective > run.result.objective) run = std::move(better);
    }
  }
  return run;
}

}  // namespace xlr
