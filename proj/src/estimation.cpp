#include "ksv/estimation.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "ksv/error.hpp"

namespace ksv {

double RoundEstimates::at(Arm arm) const {
  for (std::size_t i = 0; i < arms.size(); ++i) {
    if (arms[i] == arm) return values[i];
  }
  throw ContractViolation("arm " + std::to_string(arm) + " has no estimate this round");
}

std::uint64_t estimation_cost(std::size_t set_size, const EstimationParams& params) {
  const std::uint64_t per_perm =
      params.reuse_prefix ? (set_size + 1) * params.repeats : 2 * set_size * params.repeats;
  return params.permutations * per_perm;
}

std::uint64_t muras_round_cost(std::size_t arms, std::size_t repeats) {
  return 2 * arms * repeats;
}

namespace {

double mean_of_pulls(const Oracle& oracle, std::span<const Arm> members, std::size_t repeats,
                     Rng& rng) {
  double sum = 0.0;
  for (std::size_t l = 0; l < repeats; ++l) sum += oracle.pull(members, rng);
  return sum / double(repeats);
}

}  // namespace

RoundEstimates shapley_estimation(const Coalition& s, const Oracle& oracle,
                                  const EstimationParams& params, Rng& rng) {
  if (s.empty()) throw ContractViolation("shapley_estimation needs a non-empty set");
  if (s.size() > oracle.budget()) {
    throw ContractViolation("shapley_estimation set " + s.to_string() + " exceeds K=" +
                            std::to_string(oracle.budget()));
  }
  if (params.permutations == 0 || params.repeats == 0) {
    throw ContractViolation("shapley_estimation needs R >= 1 and L >= 1");
  }

  const std::size_t n = s.size();
  std::vector<Arm> members(s.begin(), s.end());
  std::vector<double> acc(n, 0.0);
  std::vector<std::size_t> order(n);
  std::vector<Arm> prefix;
  prefix.reserve(n);
  const double share = 1.0 / double(params.permutations);

  for (std::size_t r = 0; r < params.permutations; ++r) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    prefix.clear();
    double carried = 0.0;
    for (std::size_t pos = 0; pos < n; ++pos) {
      const std::size_t slot = order[pos];
      const double before = (params.reuse_prefix && pos > 0)
                                ? carried
                                : mean_of_pulls(oracle, prefix, params.repeats, rng);
      prefix.push_back(members[slot]);
      const double after = mean_of_pulls(oracle, prefix, params.repeats, rng);
      acc[slot] += share * (after - before);
      carried = after;
    }
  }

  return {std::move(members), std::move(acc), estimation_cost(n, params)};
}

RoundEstimates muras_round(const Oracle& oracle, std::size_t repeats, Rng& rng,
                           std::vector<Arm>* sampled) {
  const std::size_t m = oracle.arms();
  const std::size_t k = oracle.budget();
  if (repeats == 0) throw ContractViolation("muras_round needs L >= 1");
  if (k < m && oracle.max_query_size() < k + 1) {
    throw ContractViolation("muras_round queries size K+1 coalitions; oracle is strict");
  }

  std::vector<Arm> perm(m);
  std::iota(perm.begin(), perm.end(), Arm{0});
  std::shuffle(perm.begin(), perm.end(), rng);

  // Uniform K-subset of positions, kept in permutation order.
  std::vector<std::size_t> positions(m);
  std::iota(positions.begin(), positions.end(), std::size_t{0});
  for (std::size_t j = 0; j < k; ++j) {
    std::uniform_int_distribution<std::size_t> pick(j, m - 1);
    std::swap(positions[j], positions[pick(rng)]);
  }
  std::sort(positions.begin(), positions.begin() + static_cast<std::ptrdiff_t>(k));
  std::vector<Arm> subseq;
  subseq.reserve(k + 1);
  std::vector<bool> in_s(m, false);
  for (std::size_t j = 0; j < k; ++j) {
    subseq.push_back(perm[positions[j]]);
    in_s[subseq.back()] = true;
  }

  RoundEstimates out;
  out.arms.resize(m);
  std::iota(out.arms.begin(), out.arms.end(), Arm{0});
  out.values.assign(m, 0.0);

  std::vector<Arm> query;
  query.reserve(k + 1);
  auto paired = [&](std::span<const Arm> base, Arm extra) {
    query.assign(base.begin(), base.end());
    query.push_back(extra);
    double sum = 0.0;
    for (std::size_t l = 0; l < repeats; ++l) {
      sum += oracle.pull(query, rng) - oracle.pull(base, rng);
    }
    out.pulls += 2 * repeats;
    return sum / double(repeats);
  };

  for (std::size_t j = 0; j < k; ++j) {
    const std::span<const Arm> before(subseq.data(), j);
    out.values[subseq[j]] = paired(before, subseq[j]);
  }
  for (Arm a = 0; a < m; ++a) {
    if (!in_s[a]) out.values[a] = paired(subseq, a);
  }
  if (sampled) *sampled = subseq;
  return out;
}

std::pair<double, std::uint64_t> running_mean_update(double prev_mean, std::uint64_t prev_count,
                                                     double value) {
  const std::uint64_t n = prev_count + 1;
  return {(double(prev_count) * prev_mean + value) / double(n), n};
}

}  // namespace ksv
