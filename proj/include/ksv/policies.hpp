#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "ksv/coalition.hpp"
#include "ksv/environment.hpp"
#include "ksv/estimation.hpp"
#include "ksv/rounding.hpp"

namespace ksv {

enum class Algorithm { ksvfair, muras, uniform, etcg };

std::string_view to_string(Algorithm a);
/// Throws ConfigError for an unknown name.
Algorithm parse_algorithm(std::string_view name);

struct PolicyConfig {
  std::uint64_t pull_budget = 0;  ///< T, in oracle pulls
  std::size_t max_rounds = 0;     ///< stop after this many rounds; 0 = budget only
  std::size_t arms = 0;           ///< M
  std::size_t budget = 0;         ///< K
  std::size_t permutations = 1;   ///< R
  std::size_t repeats = 1;        ///< L
  double delta1 = 0.05;
  double delta2 = 0.05;
  bool reuse_prefix = false;
  /// Multiplier on the confidence radius. 1 is the Hoeffding radius as
  /// derived; other values are an exploration-strength knob.
  double radius_scale = 1.0;
  /// ETCG exploration rounds per candidate; 0 derives it from the horizon.
  std::size_t etcg_explore = 0;

  /// Throws ContractViolation naming the first bad field.
  void validate() const;
};

struct RoundLog {
  std::size_t round = 0;  ///< 1-based
  std::vector<Arm> selected;
  std::vector<double> pi;
  std::uint64_t pulls = 0;
  std::uint64_t pulls_cum = 0;
};

struct RunRecord {
  Algorithm algorithm = Algorithm::ksvfair;
  std::uint64_t seed = 0;
  PolicyConfig config;
  std::vector<RoundLog> rounds;
  /// Rounds in which each arm was part of the selected set.
  std::vector<std::uint64_t> counts;
  /// The policy's final per-arm Shapley estimates (unclipped).
  std::vector<double> estimates;

  std::uint64_t total_pulls() const noexcept {
    return rounds.empty() ? 0 : rounds.back().pulls_cum;
  }
};

/// c = sqrt(ln(2M/d1) / (2 N R)) + 2 sqrt(ln(4 N R M / d2) / (2 L)).
/// Throws ContractViolation for N == 0.
double confidence_radius(std::uint64_t n, std::size_t permutations, std::size_t repeats,
                         std::size_t arms, double delta1, double delta2);

/// Rounds of round-robin warm-up: ceil(M / K).
std::size_t warmup_rounds(std::size_t arms, std::size_t budget);

/// Set played in warm-up round t (1-based): arms ((t-1)K + i) mod M, i < K.
Coalition round_robin_set(std::size_t round, std::size_t arms, std::size_t budget);

struct PolicyState {
  explicit PolicyState(std::size_t arms);

  std::size_t round = 0;  ///< rounds completed
  std::uint64_t pulls_used = 0;
  std::vector<std::uint64_t> counts;
  /// Running means of estimates clipped below at 0; drive the policy.
  std::vector<double> estimates;
  /// Running means of the raw estimates; reported only.
  std::vector<double> raw_estimates;
  /// Radii c_{t,a} from the latest exploitation round.
  std::vector<double> radii;
  /// Optimistic estimates min(estimate + radius, 1) from that round.
  std::vector<double> optimistic;
};

struct RoundOutcome {
  Coalition selected;
  std::vector<double> pi;
  RoundEstimates estimates;
  bool warmup = false;
};

/// One K-SVFair-FBF round. Warm-up rounds play the round-robin set with
/// R = L = 1; later rounds sample S_t from the optimistic meritocratic
/// marginals via rrs_sample and estimate with (R, L). Updates `state`.
/// Throws BudgetExhausted, with counts and estimates untouched, if the round's pulls
/// do not fit in the remaining budget.
RoundOutcome ksvfair_round(PolicyState& state, const PolicyConfig& cfg, const Oracle& oracle,
                           Rng& rng);

RunRecord ksvfair_run(const PolicyConfig& cfg, const Oracle& oracle, Rng& rng);

/// MURaS: R muras_round estimation rounds under the uniform policy, then
/// the meritocratic policy on those estimates for the rest of the run.
/// Later shapley_estimation calls refine the reported estimates only; the
/// policy stays fixed.
RunRecord muras_run(const PolicyConfig& cfg, const Oracle& oracle, Rng& rng);

/// Uniformly random K-sets; pays for (R, L) estimation each round like the
/// learning policies so round grids line up.
RunRecord uniform_baseline(const PolicyConfig& cfg, const Oracle& oracle, Rng& rng);

/// Explore-then-commit greedy. Builds the committed set one arm per phase:
/// every candidate on top of the current prefix is played for `m` rounds
/// (L pulls each), the best mean joins the prefix; after K phases the set
/// is played for the rest of the run. pi_t logs the played set.
RunRecord etcg_baseline(const PolicyConfig& cfg, const Oracle& oracle, Rng& rng);

/// Exploration rounds per candidate ETCG uses under `cfg`.
std::size_t etcg_explore_rounds(const PolicyConfig& cfg);

RunRecord run_algorithm(Algorithm algo, const PolicyConfig& cfg, const Oracle& oracle,
                        std::uint64_t seed);

}  // namespace ksv
