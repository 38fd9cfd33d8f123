#include "ksv/policies.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <tuple>

#include "ksv/error.hpp"

namespace ksv {

std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::ksvfair: return "ksvfair";
    case Algorithm::muras: return "muras";
    case Algorithm::uniform: return "uniform";
    case Algorithm::etcg: return "etcg";
  }
  return "?";
}

Algorithm parse_algorithm(std::string_view name) {
  for (auto a : {Algorithm::ksvfair, Algorithm::muras, Algorithm::uniform, Algorithm::etcg}) {
    if (name == to_string(a)) return a;
  }
  throw ConfigError("algo", "unknown algorithm '" + std::string(name) +
                                "' (expected ksvfair, muras, uniform or etcg)");
}

void PolicyConfig::validate() const {
  auto fail = [](const std::string& what) { throw ContractViolation("policy config: " + what); };
  if (arms == 0) fail("M must be >= 1");
  if (budget == 0 || budget > arms) fail("K must satisfy 1 <= K <= M");
  if (pull_budget <= budget) fail("T must exceed K");
  if (permutations == 0) fail("R must be >= 1");
  if (repeats == 0) fail("L must be >= 1");
  if (!(delta1 > 0.0 && delta1 < 1.0)) fail("delta1 must lie in (0, 1)");
  if (!(delta2 > 0.0 && delta2 < 1.0)) fail("delta2 must lie in (0, 1)");
  if (!(radius_scale >= 0.0) || !std::isfinite(radius_scale)) fail("radius_scale must be >= 0");
}

double confidence_radius(std::uint64_t n, std::size_t permutations, std::size_t repeats,
                         std::size_t arms, double delta1, double delta2) {
  if (n == 0) throw ContractViolation("confidence radius undefined for an unobserved arm");
  const double nr = double(n) * double(permutations);
  const double mc = std::sqrt(std::log(2.0 * double(arms) / delta1) / (2.0 * nr));
  const double noise = 2.0 * std::sqrt(std::log(4.0 * nr * double(arms) / delta2) /
                                       (2.0 * double(repeats)));
  return mc + noise;
}

std::size_t warmup_rounds(std::size_t arms, std::size_t budget) {
  return (arms + budget - 1) / budget;
}

Coalition round_robin_set(std::size_t round, std::size_t arms, std::size_t budget) {
  std::vector<Arm> s;
  s.reserve(budget);
  for (std::size_t i = 1; i <= budget; ++i) {
    s.push_back(static_cast<Arm>(((round - 1) * budget + i - 1) % arms));
  }
  return Coalition(std::move(s));
}

PolicyState::PolicyState(std::size_t arms)
    : counts(arms, 0),
      estimates(arms, 0.0),
      raw_estimates(arms, 0.0),
      radii(arms, 0.0),
      optimistic(arms, 0.0) {}

namespace {

std::vector<double> indicator(const Coalition& s, std::size_t arms) {
  std::vector<double> v(arms, 0.0);
  for (Arm a : s) v[a] = 1.0;
  return v;
}

EstimationParams params_of(const PolicyConfig& cfg) {
  return {cfg.permutations, cfg.repeats, cfg.reuse_prefix};
}

void check_oracle(const PolicyConfig& cfg, const Oracle& oracle) {
  cfg.validate();
  if (oracle.arms() != cfg.arms || oracle.budget() != cfg.budget) {
    throw ContractViolation("policy config (M=" + std::to_string(cfg.arms) + ", K=" +
                            std::to_string(cfg.budget) + ") does not match the oracle (M=" +
                            std::to_string(oracle.arms()) + ", K=" +
                            std::to_string(oracle.budget()) + ")");
  }
}

bool rounds_left(const PolicyConfig& cfg, const RunRecord& rec) {
  return cfg.max_rounds == 0 || rec.rounds.size() < cfg.max_rounds;
}

void log_round(RunRecord& rec, Coalition selected, std::vector<double> pi, std::uint64_t pulls) {
  RoundLog log;
  log.round = rec.rounds.size() + 1;
  log.selected.assign(selected.begin(), selected.end());
  log.pi = std::move(pi);
  log.pulls = pulls;
  log.pulls_cum = rec.total_pulls() + pulls;
  for (Arm a : log.selected) ++rec.counts[a];
  rec.rounds.push_back(std::move(log));
}

RunRecord start_record(Algorithm algo, const PolicyConfig& cfg) {
  RunRecord rec;
  rec.algorithm = algo;
  rec.config = cfg;
  rec.counts.assign(cfg.arms, 0);
  rec.estimates.assign(cfg.arms, 0.0);
  return rec;
}

Coalition uniform_subset(std::size_t arms, std::size_t budget, Rng& rng) {
  std::vector<Arm> pool(arms);
  std::iota(pool.begin(), pool.end(), Arm{0});
  for (std::size_t j = 0; j < budget; ++j) {
    std::uniform_int_distribution<std::size_t> pick(j, arms - 1);
    std::swap(pool[j], pool[pick(rng)]);
  }
  pool.resize(budget);
  return Coalition(std::move(pool));
}

}  // namespace

RoundOutcome ksvfair_round(PolicyState& state, const PolicyConfig& cfg, const Oracle& oracle,
                           Rng& rng) {
  const std::size_t t = state.round + 1;
  const std::size_t m = cfg.arms;
  RoundOutcome out;
  EstimationParams params = params_of(cfg);

  if (t < warmup_rounds(m, cfg.budget) + 1) {
    out.warmup = true;
    params.permutations = 1;
    params.repeats = 1;
    out.selected = round_robin_set(t, m, cfg.budget);
    out.pi = indicator(out.selected, m);
  } else {
    for (std::size_t a = 0; a < m; ++a) {
      // Unobserved arms only occur if warm-up was skipped; treat them as
      // maximally optimistic.
      state.radii[a] = state.counts[a] == 0
                           ? 1.0
                           : cfg.radius_scale * confidence_radius(state.counts[a], cfg.permutations,
                                                                  cfg.repeats, m, cfg.delta1,
                                                                  cfg.delta2);
      state.optimistic[a] = std::min(state.estimates[a] + state.radii[a], 1.0);
    }
    auto pi = normalize_to_marginals(state.optimistic, cfg.budget);
    out.pi.assign(pi.probs().begin(), pi.probs().end());
    out.selected = rrs_sample(pi, rng);
  }

  const std::uint64_t cost = estimation_cost(out.selected.size(), params);
  if (state.pulls_used + cost > cfg.pull_budget) {
    throw BudgetExhausted("round " + std::to_string(t) + " needs " + std::to_string(cost) +
                          " pulls, " + std::to_string(cfg.pull_budget - state.pulls_used) +
                          " remain");
  }
  out.estimates = shapley_estimation(out.selected, oracle, params, rng);

  for (std::size_t j = 0; j < out.estimates.arms.size(); ++j) {
    const Arm a = out.estimates.arms[j];
    const double raw = out.estimates.values[j];
    const auto prev = state.counts[a];
    state.estimates[a] = running_mean_update(state.estimates[a], prev, std::max(raw, 0.0)).first;
    state.raw_estimates[a] = running_mean_update(state.raw_estimates[a], prev, raw).first;
    state.counts[a] = prev + 1;
  }
  state.pulls_used += out.estimates.pulls;
  state.round = t;
  return out;
}

RunRecord ksvfair_run(const PolicyConfig& cfg, const Oracle& oracle, Rng& rng) {
  check_oracle(cfg, oracle);
  RunRecord rec = start_record(Algorithm::ksvfair, cfg);
  PolicyState state(cfg.arms);
  while (rounds_left(cfg, rec)) {
    RoundOutcome out;
    try {
      out = ksvfair_round(state, cfg, oracle, rng);
    } catch (const BudgetExhausted&) {
      break;
    }
    log_round(rec, std::move(out.selected), std::move(out.pi), out.estimates.pulls);
  }
  rec.estimates = state.raw_estimates;
  return rec;
}

RunRecord muras_run(const PolicyConfig& cfg, const Oracle& oracle, Rng& rng) {
  check_oracle(cfg, oracle);
  const std::size_t m = cfg.arms;
  const std::uint64_t round_cost = muras_round_cost(m, cfg.repeats);
  const std::uint64_t phase1 = round_cost * cfg.permutations;
  if (phase1 > cfg.pull_budget) {
    throw ContractViolation("MURaS needs " + std::to_string(phase1) +
                            " pulls for its estimation phase (2 L R M), budget is " +
                            std::to_string(cfg.pull_budget));
  }

  RunRecord rec = start_record(Algorithm::muras, cfg);
  const auto uniform = MarginalVector::uniform(m, cfg.budget);
  const std::vector<double> uniform_pi(uniform.probs().begin(), uniform.probs().end());
  std::vector<double> phi(m, 0.0);
  std::vector<Arm> sampled;
  for (std::size_t r = 0; r < cfg.permutations && rounds_left(cfg, rec); ++r) {
    auto est = muras_round(oracle, cfg.repeats, rng, &sampled);
    for (Arm a = 0; a < m; ++a) phi[a] += est.values[a] / double(cfg.permutations);
    log_round(rec, Coalition(sampled), uniform_pi, est.pulls);
  }
  rec.estimates = phi;
  if (!rounds_left(cfg, rec)) return rec;

  std::vector<double> clipped(m);
  for (Arm a = 0; a < m; ++a) clipped[a] = std::max(phi[a], 0.0);
  const auto pi = normalize_to_marginals(clipped, cfg.budget);
  const std::vector<double> pi_log(pi.probs().begin(), pi.probs().end());

  const EstimationParams params = params_of(cfg);
  const std::uint64_t cost = estimation_cost(cfg.budget, params);
  // The phase-one estimate enters each running mean with weight one.
  std::vector<std::uint64_t> weight(m, 1);
  while (rounds_left(cfg, rec) && rec.total_pulls() + cost <= cfg.pull_budget) {
    Coalition s = rrs_sample(pi, rng);
    auto est = shapley_estimation(s, oracle, params, rng);
    for (std::size_t j = 0; j < est.arms.size(); ++j) {
      const Arm a = est.arms[j];
      std::tie(rec.estimates[a], weight[a]) =
          running_mean_update(rec.estimates[a], weight[a], est.values[j]);
    }
    log_round(rec, std::move(s), pi_log, est.pulls);
  }
  return rec;
}

RunRecord uniform_baseline(const PolicyConfig& cfg, const Oracle& oracle, Rng& rng) {
  check_oracle(cfg, oracle);
  RunRecord rec = start_record(Algorithm::uniform, cfg);
  const auto uniform = MarginalVector::uniform(cfg.arms, cfg.budget);
  const std::vector<double> pi(uniform.probs().begin(), uniform.probs().end());
  const EstimationParams params = params_of(cfg);
  const std::uint64_t cost = estimation_cost(cfg.budget, params);
  while (rounds_left(cfg, rec) && rec.total_pulls() + cost <= cfg.pull_budget) {
    Coalition s = uniform_subset(cfg.arms, cfg.budget, rng);
    auto est = shapley_estimation(s, oracle, params, rng);
    for (std::size_t j = 0; j < est.arms.size(); ++j) {
      const Arm a = est.arms[j];
      rec.estimates[a] = running_mean_update(rec.estimates[a], rec.counts[a], est.values[j]).first;
    }
    log_round(rec, std::move(s), pi, est.pulls);
  }
  return rec;
}

std::size_t etcg_explore_rounds(const PolicyConfig& cfg) {
  if (cfg.etcg_explore > 0) return cfg.etcg_explore;
  const double horizon = cfg.max_rounds > 0 ? double(cfg.max_rounds)
                                            : double(cfg.pull_budget) / double(cfg.repeats);
  const double per = std::pow(horizon / double(cfg.arms * cfg.budget), 2.0 / 3.0);
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(per)));
}

RunRecord etcg_baseline(const PolicyConfig& cfg, const Oracle& oracle, Rng& rng) {
  check_oracle(cfg, oracle);
  const std::size_t m = cfg.arms;
  const std::size_t k = cfg.budget;
  const std::size_t explore = etcg_explore_rounds(cfg);

  std::size_t sweep_rounds = 0;
  for (std::size_t phase = 0; phase < k; ++phase) sweep_rounds += (m - phase) * explore;
  const std::uint64_t sweep_pulls = std::uint64_t(sweep_rounds) * cfg.repeats;
  if (sweep_pulls > cfg.pull_budget || (cfg.max_rounds > 0 && sweep_rounds > cfg.max_rounds)) {
    throw ContractViolation("ETCG exploration needs " + std::to_string(sweep_rounds) +
                            " rounds / " + std::to_string(sweep_pulls) +
                            " pulls, more than the configured horizon");
  }

  RunRecord rec = start_record(Algorithm::etcg, cfg);
  std::vector<Arm> prefix;
  std::vector<bool> taken(m, false);
  double prefix_value = 0.0;
  for (std::size_t phase = 0; phase < k; ++phase) {
    double best_mean = -1.0;
    Arm best = 0;
    for (Arm a = 0; a < m; ++a) {
      if (taken[a]) continue;
      std::vector<Arm> played = prefix;
      played.push_back(a);
      Coalition shown(played);
      double sum = 0.0;
      for (std::size_t r = 0; r < explore; ++r) {
        double round_sum = 0.0;
        for (std::size_t l = 0; l < cfg.repeats; ++l) round_sum += oracle.pull(played, rng);
        sum += round_sum;
        log_round(rec, shown, indicator(shown, m), cfg.repeats);
      }
      const double mean = sum / double(explore * cfg.repeats);
      rec.estimates[a] = mean - prefix_value;
      if (mean > best_mean) {
        best_mean = mean;
        best = a;
      }
    }
    prefix_value = best_mean;
    prefix.push_back(best);
    taken[best] = true;
  }

  const Coalition committed(prefix);
  const auto pi = indicator(committed, m);
  while (rounds_left(cfg, rec) && rec.total_pulls() + cfg.repeats <= cfg.pull_budget) {
    for (std::size_t l = 0; l < cfg.repeats; ++l) oracle.pull(prefix, rng);
    log_round(rec, committed, pi, cfg.repeats);
  }
  return rec;
}

RunRecord run_algorithm(Algorithm algo, const PolicyConfig& cfg, const Oracle& oracle,
                        std::uint64_t seed) {
  Rng rng(seed);
  RunRecord rec;
  switch (algo) {
    case Algorithm::ksvfair: rec = ksvfair_run(cfg, oracle, rng); break;
    case Algorithm::muras: rec = muras_run(cfg, oracle, rng); break;
    case Algorithm::uniform: rec = uniform_baseline(cfg, oracle, rng); break;
    case Algorithm::etcg: rec = etcg_baseline(cfg, oracle, rng); break;
  }
  rec.seed = seed;
  return rec;
}

}  // namespace ksv
