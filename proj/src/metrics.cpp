#include "ksv/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ksv/error.hpp"

namespace ksv {

MarginalVector fair_policy(std::span<const double> true_phi, std::size_t budget) {
  std::vector<double> clipped(true_phi.begin(), true_phi.end());
  for (double& v : clipped) v = std::max(v, 0.0);
  return normalize_to_marginals(clipped, budget);
}

MarginalVector fair_policy(const ShapleyVector& true_phi, std::size_t budget) {
  return fair_policy(std::span<const double>(true_phi.values), budget);
}

double fairness_regret_step(std::span<const double> pi_star, std::span<const double> pi_t) {
  if (pi_star.size() != pi_t.size()) {
    throw ContractViolation("fairness regret: policy lengths " + std::to_string(pi_star.size()) +
                            " and " + std::to_string(pi_t.size()) + " differ");
  }
  double sum = 0.0;
  for (std::size_t a = 0; a < pi_star.size(); ++a) sum += std::abs(pi_star[a] - pi_t[a]);
  return sum;
}

FairnessLedger fairness_ledger(std::span<const double> pi_star, const RunRecord& run) {
  FairnessLedger ledger;
  ledger.step.reserve(run.rounds.size());
  ledger.cumulative.reserve(run.rounds.size());
  double total = 0.0;
  for (const auto& r : run.rounds) {
    const double d = fairness_regret_step(pi_star, r.pi);
    total += d;
    ledger.step.push_back(d);
    ledger.cumulative.push_back(total);
  }
  return ledger;
}

std::vector<std::optional<double>> merit_to_selection(std::span<const double> true_phi,
                                                      std::span<const std::uint64_t> counts,
                                                      std::size_t total_rounds) {
  if (total_rounds == 0) throw ContractViolation("merit_to_selection needs total_rounds > 0");
  if (true_phi.size() != counts.size()) {
    throw ContractViolation("merit_to_selection: phi and counts lengths differ");
  }
  std::vector<std::optional<double>> out(true_phi.size());
  for (std::size_t a = 0; a < true_phi.size(); ++a) {
    if (counts[a] == 0) continue;
    out[a] = true_phi[a] / (double(counts[a]) / double(total_rounds));
  }
  return out;
}

double coefficient_of_variation(std::span<const std::optional<double>> values) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& v : values) {
    if (v) {
      sum += *v;
      ++n;
    }
  }
  if (n == 0) throw ContractViolation("coefficient of variation of an empty set");
  const double mean = sum / double(n);
  double sq = 0.0;
  for (const auto& v : values) {
    if (v) sq += (*v - mean) * (*v - mean);
  }
  return std::sqrt(sq / double(n)) / std::abs(mean);
}

double regret_slope(std::span<const double> cumulative) {
  const std::size_t n = cumulative.size();
  if (n < 100) {
    throw ContractViolation("regret_slope needs >= 100 rounds, got " + std::to_string(n));
  }
  const std::size_t first = n / 2;
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double count = double(n - first);
  for (std::size_t i = first; i < n; ++i) {
    if (!(cumulative[i] > 0.0)) {
      throw ContractViolation("regret_slope: zero regret at round " + std::to_string(i + 1));
    }
    const double x = std::log(double(i + 1));
    const double y = std::log(cumulative[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = count * sxx - sx * sx;
  return (count * sxy - sx * sy) / denom;
}

double regret_slope(const FairnessLedger& ledger) { return regret_slope(ledger.cumulative); }

}  // namespace ksv
