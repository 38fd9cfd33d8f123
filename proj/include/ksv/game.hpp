#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <utility>
#include <vector>

#include "ksv/coalition.hpp"

namespace ksv {

/// Deterministic coalition value. Receives sorted, distinct members.
using Valuation = std::function<double(std::span<const Arm>)>;

/// A cooperative game on M arms whose valuation exists only for
/// coalitions of at most K members.
///
/// Copies share one thread-safe memo of evaluated coalitions, so the game
/// behaves as an immutable value even though lookups are cached.
class RestrictedGame {
 public:
  /// Throws ContractViolation unless 1 <= K <= M and valuation(empty) == 0.
  RestrictedGame(std::size_t arms, std::size_t budget, Valuation valuation);

  std::size_t arms() const noexcept { return arms_; }
  std::size_t budget() const noexcept { return budget_; }

  /// V(S). Throws ContractViolation when |S| > K or a member is out of range.
  double value(const Coalition& s) const;
  double value(std::span<const Arm> sorted_members) const;

  /// V(S + arm) - V(S); requires arm not in S and |S| <= K - 1.
  double marginal_contribution(Arm arm, const Coalition& s) const;

  /// Number of distinct coalitions evaluated so far (memo size).
  std::size_t evaluations() const;

 private:
  struct Memo;
  std::size_t arms_;
  std::size_t budget_;
  std::shared_ptr<const Valuation> valuation_;
  std::shared_ptr<Memo> memo_;
};

enum class ShapleyKind { exact, classical, estimated };

struct ShapleyVector {
  std::vector<double> values;
  ShapleyKind kind = ShapleyKind::exact;
  /// Samples behind each entry (0 for enumerated values).
  std::size_t samples = 0;
  /// Per-arm standard error; empty unless the values carry Monte-Carlo noise.
  std::vector<double> std_errors;

  std::size_t size() const noexcept { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
};

/// Enumeration guard for the exact kernels.
struct EnumerationLimits {
  std::size_t max_arms = 20;
  std::size_t max_budget = 8;
};

double marginal_contribution(const RestrictedGame& game, Arm arm, const Coalition& s);

/// Exact K-Shapley value: for each arm, the average over all K-sized
/// coalitions containing it of the within-coalition Shapley share.
/// Parallelised over arms with OpenMP.
ShapleyVector exact_k_shapley(const RestrictedGame& game, EnumerationLimits limits = {});

/// Standard error of each exact_k_shapley entry when every V(S) carries an
/// independent error with standard deviation value_se(S) (S non-empty).
std::vector<double> exact_k_shapley_std_errors(
    const RestrictedGame& game, const std::function<double(const Coalition&)>& value_se,
    EnumerationLimits limits = {});

/// Same double sum evaluated on one thread; the reference for the
/// parallel kernel.
ShapleyVector exact_k_shapley_serial(const RestrictedGame& game, EnumerationLimits limits = {});

/// Classical Shapley value by enumerating all M! orderings. Requires K == M
/// and M <= max_arms (default 10).
ShapleyVector classical_shapley(const RestrictedGame& game, std::size_t max_arms = 10);

/// Monte-Carlo K-Shapley estimate for games too large to enumerate: for
/// each arm, `samples` draws of a uniform K-set containing the arm and a
/// uniform ordering of it, scoring the arm's prefix marginal.
/// The RNG is seeded from `seed`; draws per arm use independent streams.
ShapleyVector sampled_k_shapley(const RestrictedGame& game, std::size_t samples,
                                std::uint64_t seed);

/// Game worth `alpha` on feasible supersets of `carrier`, 0 elsewhere.
/// Requires 1 <= |carrier| <= K and members < M.
RestrictedGame carrier_game(std::size_t arms, std::size_t budget, const Coalition& carrier,
                            double alpha);

/// p * V1 + (1 - p) * V2 on the shared (M, K).
RestrictedGame mixture_game(const RestrictedGame& g1, const RestrictedGame& g2, double p);

/// Additive game V(S) = sum of weights over S.
RestrictedGame additive_game(std::span<const double> weights, std::size_t budget);

struct CarrierTerm {
  Coalition carrier;
  double alpha;
};

/// Expansion of a game in the carrier-game basis: V = sum alpha_D u_D over
/// non-empty |D| <= K, with alpha_D the Mobius inverse of V on D.
std::vector<CarrierTerm> carrier_basis_expansion(const RestrictedGame& game,
                                                 EnumerationLimits limits = {});

/// Game defined by a weighted sum of carrier games.
RestrictedGame carrier_combination(std::size_t arms, std::size_t budget,
                                   std::vector<CarrierTerm> terms);

/// (1 / C(M-1, K-1)) * sum of V over all coalitions of size exactly K.
double k_efficiency_target(const RestrictedGame& game, EnumerationLimits limits = {});

struct AxiomReport {
  bool symmetry_ok = true;
  bool linearity_ok = true;
  bool null_player_ok = true;
  bool k_efficiency_ok = true;
  double max_violation = 0.0;

  std::vector<std::pair<Arm, Arm>> symmetric_pairs;
  std::vector<Arm> null_players;
  std::size_t linearity_checks = 0;

  bool all_ok() const noexcept {
    return symmetry_ok && linearity_ok && null_player_ok && k_efficiency_ok;
  }
};

struct LinearityProbe {
  RestrictedGame partner;
  double p;
};

/// Checks the four K-Shapley axioms for `phi` on `game`. Linearity is only
/// exercised through `probes`; without probes it is reported vacuously
/// true with linearity_checks == 0.
AxiomReport verify_axioms(const RestrictedGame& game, const ShapleyVector& phi, double tol,
                          std::span<const LinearityProbe> probes = {},
                          EnumerationLimits limits = {});

/// Largest per-arm gap between phi(p V1 + (1-p) V2) and p phi(V1) + (1-p) phi(V2).
double linearity_deviation(const RestrictedGame& g1, const RestrictedGame& g2, double p,
                           EnumerationLimits limits = {});

bool check_linearity(const RestrictedGame& g1, const RestrictedGame& g2, double p, double tol,
                     EnumerationLimits limits = {});

/// Binomial coefficient as a double (exact well past the enumeration guard).
double binomial(std::size_t n, std::size_t k);

}  // namespace ksv
