#include "ksv/game.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>
#include <random>
#include <shared_mutex>
#include <string>
#include <unordered_map>

#include "ksv/error.hpp"
#include "ksv/parallel.hpp"
#include "ksv/rng.hpp"
#include "value_table.hpp"

namespace ksv {

struct RestrictedGame::Memo {
  mutable std::shared_mutex mutex;
  std::unordered_map<Coalition, double, CoalitionHash> values;
};

RestrictedGame::RestrictedGame(std::size_t arms, std::size_t budget, Valuation valuation)
    : arms_(arms),
      budget_(budget),
      valuation_(std::make_shared<const Valuation>(std::move(valuation))),
      memo_(std::make_shared<Memo>()) {
  if (budget_ < 1 || budget_ > arms_) {
    throw ContractViolation("restricted game needs 1 <= K <= M (M=" + std::to_string(arms_) +
                            ", K=" + std::to_string(budget_) + ")");
  }
  if (!*valuation_) throw ContractViolation("restricted game needs a valuation");
  const double empty = (*valuation_)(std::span<const Arm>{});
  if (std::abs(empty) > 1e-12) {
    throw ContractViolation("valuation of the empty coalition must be 0, got " +
                            std::to_string(empty));
  }
}

double RestrictedGame::value(const Coalition& s) const {
  if (s.size() > budget_) {
    throw ContractViolation("coalition " + s.to_string() + " has size " +
                            std::to_string(s.size()) + " > K=" + std::to_string(budget_));
  }
  if (s.bound() > arms_) {
    throw ContractViolation("coalition " + s.to_string() + " names an arm >= M=" +
                            std::to_string(arms_));
  }
  if (s.empty()) return 0.0;
  {
    std::shared_lock lock(memo_->mutex);
    auto it = memo_->values.find(s);
    if (it != memo_->values.end()) return it->second;
  }
  const double v = (*valuation_)(s.members());
  std::unique_lock lock(memo_->mutex);
  memo_->values.emplace(s, v);
  return v;
}

double RestrictedGame::value(std::span<const Arm> sorted_members) const {
  return value(Coalition(std::vector<Arm>(sorted_members.begin(), sorted_members.end())));
}

double RestrictedGame::marginal_contribution(Arm arm, const Coalition& s) const {
  if (s.contains(arm)) {
    throw ContractViolation("arm " + std::to_string(arm) + " already in " + s.to_string());
  }
  if (s.size() + 1 > budget_) {
    throw ContractViolation("coalition " + s.to_string() + " too large for a marginal under K=" +
                            std::to_string(budget_));
  }
  return value(s.with(arm)) - value(s);
}

std::size_t RestrictedGame::evaluations() const {
  std::shared_lock lock(memo_->mutex);
  return memo_->values.size();
}

double marginal_contribution(const RestrictedGame& game, Arm arm, const Coalition& s) {
  return game.marginal_contribution(arm, s);
}

double binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0.0;
  k = std::min(k, n - k);
  double r = 1.0;
  for (std::size_t i = 1; i <= k; ++i) r = r * double(n - k + i) / double(i);
  return std::round(r);
}

namespace {

// phi_i^K for one arm: outer loop over the K-1 companions of i (index
// combinations over the other M-1 arms), inner loop over every submask of
// the companions.
double arm_k_shapley(const detail::ValueTable& table, std::span<const double> weights,
                     std::size_t arm) {
  const std::size_t m = table.arms();
  const std::size_t k = table.budget();
  const std::uint64_t arm_bit = std::uint64_t{1} << arm;

  std::vector<std::uint64_t> others;
  others.reserve(m - 1);
  for (std::size_t j = 0; j < m; ++j) {
    if (j != arm) others.push_back(std::uint64_t{1} << j);
  }

  const std::size_t pick = k - 1;
  std::vector<std::size_t> idx(pick);
  std::iota(idx.begin(), idx.end(), std::size_t{0});

  double total = 0.0;
  while (true) {
    std::uint64_t companions = 0;
    for (std::size_t p : idx) companions |= others[p];

    double psi = 0.0;
    std::uint64_t sub = companions;
    while (true) {
      const double delta = table[sub | arm_bit] - table[sub];
      psi += weights[static_cast<std::size_t>(std::popcount(sub))] * delta;
      if (sub == 0) break;
      sub = (sub - 1) & companions;
    }
    total += psi;

    // Next combination in lexicographic order.
    std::size_t pos = pick;
    while (pos > 0 && idx[pos - 1] == others.size() - pick + pos - 1) --pos;
    if (pos == 0) break;
    ++idx[pos - 1];
    for (std::size_t q = pos; q < pick; ++q) idx[q] = idx[q - 1] + 1;
  }
  return total / binomial(m - 1, k - 1);
}

}  // namespace

ShapleyVector exact_k_shapley_serial(const RestrictedGame& game, EnumerationLimits limits) {
  detail::check_limits(game, limits, "exact_k_shapley");
  const detail::ValueTable table(game);
  const auto weights = detail::subset_weights(game.budget());
  ShapleyVector out;
  out.kind = ShapleyKind::exact;
  out.values.resize(game.arms());
  for (std::size_t i = 0; i < game.arms(); ++i) out.values[i] = arm_k_shapley(table, weights, i);
  return out;
}

ShapleyVector exact_k_shapley(const RestrictedGame& game, EnumerationLimits limits) {
  detail::check_limits(game, limits, "exact_k_shapley");
  const detail::ValueTable table(game);
  const auto weights = detail::subset_weights(game.budget());
  ShapleyVector out;
  out.kind = ShapleyKind::exact;
  out.values.resize(game.arms());
  const auto m = static_cast<std::ptrdiff_t>(game.arms());
#pragma omp parallel for schedule(dynamic, 1) num_threads(worker_count())
  for (std::ptrdiff_t i = 0; i < m; ++i) {
    out.values[static_cast<std::size_t>(i)] =
        arm_k_shapley(table, weights, static_cast<std::size_t>(i));
  }
  return out;
}

std::vector<double> exact_k_shapley_std_errors(
    const RestrictedGame& game, const std::function<double(const Coalition&)>& value_se,
    EnumerationLimits limits) {
  detail::check_limits(game, limits, "exact_k_shapley_std_errors");
  const std::size_t m = game.arms();
  const std::size_t k = game.budget();
  const auto weights = detail::subset_weights(k);
  // phi_i = sum over S without i, |S| < K, of c_|S| (V(S + i) - V(S)), where
  // c_s counts the K-sets around S + i.
  std::vector<double> coef(k);
  for (std::size_t s = 0; s < k; ++s) {
    coef[s] = weights[s] * binomial(m - 1 - s, k - 1 - s) / binomial(m - 1, k - 1);
  }
  std::vector<double> var(m, 0.0);
  for (std::size_t t = 1; t <= k; ++t) {
    detail::for_each_mask_of_size(m, t, [&](std::uint64_t mask) {
      const double se = value_se(Coalition::from_mask(mask));
      const double se2 = se * se;
      for (std::size_t i = 0; i < m; ++i) {
        const bool member = (mask >> i) & 1U;
        if (member) {
          var[i] += coef[t - 1] * coef[t - 1] * se2;
        } else if (t < k) {
          var[i] += coef[t] * coef[t] * se2;
        }
      }
    });
  }
  for (double& v : var) v = std::sqrt(v);
  return var;
}

ShapleyVector classical_shapley(const RestrictedGame& game, std::size_t max_arms) {
  if (game.budget() != game.arms()) {
    throw ContractViolation("classical_shapley needs K == M (K=" + std::to_string(game.budget()) +
                            ", M=" + std::to_string(game.arms()) + ")");
  }
  const EnumerationLimits limits{max_arms, max_arms};
  detail::check_limits(game, limits, "classical_shapley");
  const detail::ValueTable table(game);

  const std::size_t m = game.arms();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> sums(m, 0.0);
  double orderings = 0.0;
  do {
    std::uint64_t prefix = 0;
    for (std::size_t a : order) {
      const std::uint64_t next = prefix | (std::uint64_t{1} << a);
      sums[a] += table[next] - table[prefix];
      prefix = next;
    }
    orderings += 1.0;
  } while (std::next_permutation(order.begin(), order.end()));

  ShapleyVector out;
  out.kind = ShapleyKind::classical;
  out.values.resize(m);
  for (std::size_t a = 0; a < m; ++a) out.values[a] = sums[a] / orderings;
  return out;
}

ShapleyVector sampled_k_shapley(const RestrictedGame& game, std::size_t samples,
                                std::uint64_t seed) {
  if (samples == 0) throw ContractViolation("sampled_k_shapley needs samples >= 1");
  const std::size_t m = game.arms();
  const std::size_t k = game.budget();
  ShapleyVector out;
  out.kind = ShapleyKind::estimated;
  out.samples = samples;
  out.values.assign(m, 0.0);
  out.std_errors.assign(m, 0.0);

  const auto arms = static_cast<std::ptrdiff_t>(m);
#pragma omp parallel for schedule(dynamic, 1) num_threads(worker_count())
  for (std::ptrdiff_t ai = 0; ai < arms; ++ai) {
    const auto arm = static_cast<Arm>(ai);
    Rng rng = derive_rng({seed, static_cast<std::uint64_t>(ai)});
    std::vector<Arm> pool;
    pool.reserve(m - 1);
    for (Arm j = 0; j < m; ++j) {
      if (j != arm) pool.push_back(j);
    }
    double sum = 0.0;
    double sum_sq = 0.0;
    for (std::size_t s = 0; s < samples; ++s) {
      // Partial Fisher-Yates: the first K-1 entries are a uniform K-1 subset
      // in uniform order; the arm's position among K is uniform.
      for (std::size_t j = 0; j + 1 < k; ++j) {
        std::uniform_int_distribution<std::size_t> pickd(j, pool.size() - 1);
        std::swap(pool[j], pool[pickd(rng)]);
      }
      std::uniform_int_distribution<std::size_t> posd(0, k - 1);
      const std::size_t position = posd(rng);
      const Coalition before(std::vector<Arm>(pool.begin(), pool.begin() + position));
      const double delta = game.value(before.with(arm)) - game.value(before);
      sum += delta;
      sum_sq += delta * delta;
    }
    const double n = double(samples);
    const double mean = sum / n;
    const auto idx = static_cast<std::size_t>(ai);
    out.values[idx] = mean;
    out.std_errors[idx] =
        samples > 1 ? std::sqrt(std::max(0.0, sum_sq / n - mean * mean) / (n - 1.0)) : 0.0;
  }
  return out;
}

RestrictedGame carrier_game(std::size_t arms, std::size_t budget, const Coalition& carrier,
                            double alpha) {
  if (carrier.empty()) throw ContractViolation("carrier coalition must be non-empty");
  if (carrier.size() > budget) {
    throw ContractViolation("carrier " + carrier.to_string() + " larger than K=" +
                            std::to_string(budget));
  }
  if (carrier.bound() > arms) {
    throw ContractViolation("carrier " + carrier.to_string() + " names an arm >= M");
  }
  std::vector<Arm> d(carrier.begin(), carrier.end());
  return RestrictedGame(arms, budget, [d, alpha](std::span<const Arm> s) {
    return std::includes(s.begin(), s.end(), d.begin(), d.end()) ? alpha : 0.0;
  });
}

RestrictedGame mixture_game(const RestrictedGame& g1, const RestrictedGame& g2, double p) {
  if (g1.arms() != g2.arms() || g1.budget() != g2.budget()) {
    throw ContractViolation("mixture needs games with identical (M, K)");
  }
  return RestrictedGame(g1.arms(), g1.budget(), [g1, g2, p](std::span<const Arm> s) {
    return p * g1.value(s) + (1.0 - p) * g2.value(s);
  });
}

RestrictedGame additive_game(std::span<const double> weights, std::size_t budget) {
  std::vector<double> w(weights.begin(), weights.end());
  return RestrictedGame(w.size(), budget, [w](std::span<const Arm> s) {
    double v = 0.0;
    for (Arm a : s) v += w[a];
    return v;
  });
}

std::vector<CarrierTerm> carrier_basis_expansion(const RestrictedGame& game,
                                                 EnumerationLimits limits) {
  detail::check_limits(game, limits, "carrier_basis_expansion");
  const detail::ValueTable table(game);
  std::vector<CarrierTerm> terms;
  for (std::size_t size = 1; size <= game.budget(); ++size) {
    detail::for_each_mask_of_size(game.arms(), size, [&](std::uint64_t d) {
      double alpha = 0.0;
      std::uint64_t sub = d;
      while (true) {
        const int parity = std::popcount(d ^ sub) & 1;
        alpha += parity ? -table[sub] : table[sub];
        if (sub == 0) break;
        sub = (sub - 1) & d;
      }
      if (alpha != 0.0) terms.push_back({Coalition::from_mask(d), alpha});
    });
  }
  return terms;
}

RestrictedGame carrier_combination(std::size_t arms, std::size_t budget,
                                   std::vector<CarrierTerm> terms) {
  for (const auto& t : terms) {
    if (t.carrier.empty() || t.carrier.size() > budget || t.carrier.bound() > arms) {
      throw ContractViolation("carrier term " + t.carrier.to_string() + " infeasible");
    }
  }
  return RestrictedGame(arms, budget, [terms = std::move(terms)](std::span<const Arm> s) {
    double v = 0.0;
    for (const auto& t : terms) {
      if (std::includes(s.begin(), s.end(), t.carrier.begin(), t.carrier.end())) v += t.alpha;
    }
    return v;
  });
}

double k_efficiency_target(const RestrictedGame& game, EnumerationLimits limits) {
  detail::check_limits(game, limits, "k_efficiency_target");
  double sum = 0.0;
  detail::for_each_mask_of_size(game.arms(), game.budget(), [&](std::uint64_t m) {
    sum += game.value(Coalition::from_mask(m));
  });
  return sum / binomial(game.arms() - 1, game.budget() - 1);
}

}  // namespace ksv
