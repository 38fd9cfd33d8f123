#include "ksv/rounding.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "ksv/error.hpp"

namespace ksv {

MarginalVector::MarginalVector(std::vector<double> probs, std::size_t budget)
    : probs_(std::move(probs)), budget_(budget) {
  if (budget_ == 0 || budget_ > probs_.size()) {
    throw ContractViolation("marginal vector needs 1 <= K <= M");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < probs_.size(); ++i) {
    const double p = probs_[i];
    if (!(p >= 0.0 && p <= 1.0)) {
      throw ContractViolation("marginal " + std::to_string(i) + " = " + std::to_string(p) +
                              " outside [0, 1]");
    }
    sum += p;
  }
  const double drift = double(budget_) - sum;
  if (std::abs(drift) > kMarginalSumTol) {
    throw ContractViolation("marginals sum to " + std::to_string(sum) + ", expected K=" +
                            std::to_string(budget_));
  }
  if (drift != 0.0) {
    // Absorb into the largest interior entry: saturated and zero arms stay
    // exact, and the relative change is smallest there.
    std::size_t best = probs_.size();
    for (std::size_t i = 0; i < probs_.size(); ++i) {
      const double p = probs_[i];
      const double fixed = p + drift;
      if (p > 0.0 && p < 1.0 && fixed >= 0.0 && fixed <= 1.0 &&
          (best == probs_.size() || p > probs_[best])) {
        best = i;
      }
    }
    if (best < probs_.size()) probs_[best] += drift;
  }
}

MarginalVector MarginalVector::uniform(std::size_t arms, std::size_t budget) {
  if (arms == 0) throw ContractViolation("marginal vector needs M >= 1");
  return MarginalVector(std::vector<double>(arms, double(budget) / double(arms)), budget);
}

MarginalVector normalize_to_marginals(std::span<const double> raw, std::size_t budget) {
  const std::size_t m = raw.size();
  if (budget == 0 || budget > m) throw ContractViolation("normalize_to_marginals needs 1 <= K <= M");
  std::size_t positive = 0;
  for (double r : raw) {
    if (!(r >= 0.0) || !std::isfinite(r)) {
      throw ContractViolation("normalize_to_marginals needs finite non-negative input");
    }
    if (r > 0.0) ++positive;
  }
  if (positive == 0) throw ContractViolation("normalize_to_marginals: all-zero input");
  if (positive < budget) {
    throw ContractViolation("normalize_to_marginals: only " + std::to_string(positive) +
                            " positive entries for K=" + std::to_string(budget));
  }

  std::vector<double> pi(m, 0.0);
  std::vector<bool> capped(m, false);
  double mass = double(budget);
  while (true) {
    double free_raw = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (!capped[i]) free_raw += raw[i];
    }
    bool overflow = false;
    for (std::size_t i = 0; i < m; ++i) {
      if (capped[i]) continue;
      pi[i] = mass * raw[i] / free_raw;
      if (pi[i] > 1.0) overflow = true;
    }
    if (!overflow) break;
    for (std::size_t i = 0; i < m; ++i) {
      if (!capped[i] && pi[i] >= 1.0) {
        capped[i] = true;
        pi[i] = 1.0;
        mass -= 1.0;
      }
    }
  }
  return MarginalVector(std::move(pi), budget);
}

Coalition rrs_sample(const MarginalVector& pi, Rng& rng) {
  const std::size_t m = pi.size();
  const std::size_t k = pi.budget();
  std::vector<Arm> order(m);
  std::iota(order.begin(), order.end(), Arm{0});
  std::shuffle(order.begin(), order.end(), rng);

  // The last arm with positive mass closes the interval at exactly K so
  // rounding in the running sum cannot drop the final pick.
  std::size_t last_positive = 0;
  for (std::size_t j = 0; j < m; ++j) {
    if (pi[order[j]] > 0.0) last_positive = j;
  }

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double target = unit(rng);
  double cumulative = 0.0;
  std::vector<Arm> picked;
  picked.reserve(k);
  for (std::size_t j = 0; j < m && picked.size() < k; ++j) {
    const double p = pi[order[j]];
    if (p <= 0.0) continue;
    cumulative = (j == last_positive) ? double(k) : cumulative + p;
    if (target < cumulative) {
      picked.push_back(order[j]);
      target += 1.0;
    }
  }
  return Coalition(std::move(picked));
}

}  // namespace ksv
