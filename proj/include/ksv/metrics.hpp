#pragma once

#include <optional>
#include <span>
#include <vector>

#include "ksv/game.hpp"
#include "ksv/policies.hpp"
#include "ksv/rounding.hpp"

namespace ksv {

/// Meritocratic fair policy: K * phi / sum(phi) after clipping negative
/// entries to 0, with the water-filling cap at 1.
MarginalVector fair_policy(const ShapleyVector& true_phi, std::size_t budget);
MarginalVector fair_policy(std::span<const double> true_phi, std::size_t budget);

/// sum_a |pi_star(a) - pi_t(a)|.
double fairness_regret_step(std::span<const double> pi_star, std::span<const double> pi_t);

struct FairnessLedger {
  std::vector<double> step;        ///< per-round L1 distance to pi*
  std::vector<double> cumulative;  ///< FR_t

  std::size_t rounds() const noexcept { return step.size(); }
  double final_regret() const noexcept { return cumulative.empty() ? 0.0 : cumulative.back(); }
};

FairnessLedger fairness_ledger(std::span<const double> pi_star, const RunRecord& run);

/// phi_a / (N_a / total_rounds); nullopt for arms never selected.
std::vector<std::optional<double>> merit_to_selection(std::span<const double> true_phi,
                                                      std::span<const std::uint64_t> counts,
                                                      std::size_t total_rounds);

/// Population standard deviation over mean of the defined entries.
double coefficient_of_variation(std::span<const std::optional<double>> values);

/// Least-squares slope of log FR_t against log t over the second half of
/// the rounds. Needs >= 100 rounds and positive regret over that window.
double regret_slope(const FairnessLedger& ledger);
double regret_slope(std::span<const double> cumulative);

}  // namespace ksv
