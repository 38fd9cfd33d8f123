#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "ksv/coalition.hpp"
#include "ksv/environment.hpp"

namespace ksv {

struct EstimationParams {
  std::size_t permutations = 1;  ///< R: random orderings per call
  std::size_t repeats = 1;       ///< L: pulls averaged per coalition value
  /// Reuse the (B + a) average as the next prefix's B average instead of
  /// pulling it again. Off by default: the plain scheme pulls both ends of
  /// every prefix step.
  bool reuse_prefix = false;
};

/// Per-arm estimates from one round, with the oracle pulls they cost.
struct RoundEstimates {
  std::vector<Arm> arms;
  std::vector<double> values;
  std::uint64_t pulls = 0;

  /// Estimate for `arm`; throws if the arm was not estimated.
  double at(Arm arm) const;
};

/// Pulls one call of shapley_estimation charges for a set of `set_size`.
std::uint64_t estimation_cost(std::size_t set_size, const EstimationParams& params);

/// Permutation-sampling Shapley estimate within S under noisy feedback.
/// For each of R uniform orderings of S, walks the prefixes B of each arm
/// a, averages L pulls of B and of B + a, and adds the difference / R.
RoundEstimates shapley_estimation(const Coalition& s, const Oracle& oracle,
                                  const EstimationParams& params, Rng& rng);

/// Pulls one muras_round charges: 2 L per arm.
std::uint64_t muras_round_cost(std::size_t arms, std::size_t repeats);

/// One MURaS estimation round over all M arms. Draws a uniform ordering of
/// [M] and a uniform K-element subsequence S of it. Arms in S score their
/// prefix marginal inside S; arms outside S score V(S + a) - V(S), which is
/// a (K+1)-sized query and requires a muras-compatible oracle. Each score
/// averages L paired pulls. `sampled` receives S in its sampled order.
RoundEstimates muras_round(const Oracle& oracle, std::size_t repeats, Rng& rng,
                           std::vector<Arm>* sampled = nullptr);

/// Incremental mean: returns ((n * mean + value) / (n + 1), n + 1).
std::pair<double, std::uint64_t> running_mean_update(double prev_mean, std::uint64_t prev_count,
                                                     double value);

}  // namespace ksv
