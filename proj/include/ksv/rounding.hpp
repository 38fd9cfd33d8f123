#pragma once

#include <span>
#include <vector>

#include "ksv/coalition.hpp"
#include "ksv/rng.hpp"

namespace ksv {

/// Per-arm inclusion probabilities in [0, 1] summing to an integer K.
class MarginalVector {
 public:
  /// Validates entries and sum (|sum - K| <= 1e-9); the last positive
  /// entry absorbs any remaining floating-point drift.
  MarginalVector(std::vector<double> probs, std::size_t budget);

  std::span<const double> probs() const noexcept { return probs_; }
  std::size_t budget() const noexcept { return budget_; }
  std::size_t size() const noexcept { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }

  /// K/M on every arm.
  static MarginalVector uniform(std::size_t arms, std::size_t budget);

 private:
  std::vector<double> probs_;
  std::size_t budget_;
};

inline constexpr double kMarginalSumTol = 1e-9;

/// K * raw / sum(raw), then water-filling: entries above 1 are capped and
/// their excess is spread over the uncapped entries in proportion to raw,
/// repeating until nothing exceeds 1.
///
/// Throws ContractViolation for negative or all-zero input, or when fewer
/// than K entries are positive (no valid marginal vector exists).
MarginalVector normalize_to_marginals(std::span<const double> raw, std::size_t budget);

/// Randomized rounding by systematic sampling: shuffle the arms, lay their
/// probabilities end to end on [0, K), and take the arms hit by u, u+1, ...,
/// u+K-1 for one u ~ U[0, 1). Always returns exactly K arms and includes
/// arm a with probability pi(a).
Coalition rrs_sample(const MarginalVector& pi, Rng& rng);

}  // namespace ksv
