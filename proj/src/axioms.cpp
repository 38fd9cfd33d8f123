#include <algorithm>
#include <cmath>
#include <string>

#include "ksv/error.hpp"
#include "ksv/game.hpp"
#include "value_table.hpp"

namespace ksv {

namespace {

// Exact equality up to rounding: detection of symmetric and null players.
constexpr double kDetectTol = 1e-12;

template <typename F>
void for_each_feasible_mask(std::size_t arms, std::size_t max_size, F&& f) {
  for (std::size_t k = 0; k <= max_size; ++k) detail::for_each_mask_of_size(arms, k, f);
}

}  // namespace


double linearity_deviation(const RestrictedGame& g1, const RestrictedGame& g2, double p,
                           EnumerationLimits limits) {
  if (g1.arms() != g2.arms() || g1.budget() != g2.budget()) {
    throw ContractViolation("linearity check needs games with identical (M, K)");
  }
  const auto mix = exact_k_shapley(mixture_game(g1, g2, p), limits);
  const auto a = exact_k_shapley(g1, limits);
  const auto b = exact_k_shapley(g2, limits);
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    worst = std::max(worst, std::abs(mix[i] - (p * a[i] + (1.0 - p) * b[i])));
  }
  return worst;
}

bool check_linearity(const RestrictedGame& g1, const RestrictedGame& g2, double p, double tol,
                     EnumerationLimits limits) {
  return linearity_deviation(g1, g2, p, limits) <= tol;
}

AxiomReport verify_axioms(const RestrictedGame& game, const ShapleyVector& phi, double tol,
                          std::span<const LinearityProbe> probes, EnumerationLimits limits) {
  detail::check_limits(game, limits, "verify_axioms");
  if (phi.size() != game.arms()) {
    throw ContractViolation("Shapley vector length " + std::to_string(phi.size()) +
                            " != M=" + std::to_string(game.arms()));
  }
  const detail::ValueTable table(game);
  const std::size_t m = game.arms();
  const std::size_t k = game.budget();
  AxiomReport report;

  double sym_dev = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      const std::uint64_t bi = std::uint64_t{1} << i;
      const std::uint64_t bj = std::uint64_t{1} << j;
      bool symmetric = true;
      for_each_feasible_mask(m, k - 1, [&](std::uint64_t s) {
        if (!symmetric || (s & (bi | bj))) return;
        if (std::abs(table[s | bi] - table[s | bj]) > kDetectTol) symmetric = false;
      });
      if (symmetric) {
        report.symmetric_pairs.emplace_back(Arm(i), Arm(j));
        sym_dev = std::max(sym_dev, std::abs(phi[i] - phi[j]));
      }
    }
  }

  double null_dev = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const std::uint64_t bi = std::uint64_t{1} << i;
    bool null_player = true;
    for_each_feasible_mask(m, k - 1, [&](std::uint64_t s) {
      if (!null_player || (s & bi)) return;
      if (std::abs(table[s | bi] - table[s]) > kDetectTol) null_player = false;
    });
    if (null_player) {
      report.null_players.push_back(Arm(i));
      null_dev = std::max(null_dev, std::abs(phi[i]));
    }
  }

  double lin_dev = 0.0;
  for (const auto& probe : probes) {
    lin_dev = std::max(lin_dev, linearity_deviation(game, probe.partner, probe.p, limits));
    ++report.linearity_checks;
  }

  double total = 0.0;
  for (double v : phi.values) total += v;
  const double eff_dev = std::abs(total - k_efficiency_target(game, limits));

  report.symmetry_ok = sym_dev <= tol;
  report.null_player_ok = null_dev <= tol;
  report.linearity_ok = lin_dev <= tol;
  report.k_efficiency_ok = eff_dev <= tol;
  report.max_violation = std::max({sym_dev, null_dev, lin_dev, eff_dev});
  return report;
}

}  // namespace ksv
