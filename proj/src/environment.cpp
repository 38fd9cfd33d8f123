#include "ksv/environment.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ksv/error.hpp"

namespace ksv {

Oracle::Oracle(std::size_t arms, std::size_t budget, QueryLimit limit)
    : arms_(arms), budget_(budget), limit_(limit) {
  if (budget_ < 1 || budget_ > arms_) {
    throw ContractViolation("oracle needs 1 <= K <= M (M=" + std::to_string(arms_) +
                            ", K=" + std::to_string(budget_) + ")");
  }
}

void Oracle::check_query(std::span<const Arm> members) const {
  if (members.size() > max_query_size()) {
    throw ContractViolation("query of size " + std::to_string(members.size()) +
                            " exceeds the oracle limit " + std::to_string(max_query_size()));
  }
  for (std::size_t i = 0; i < members.size(); ++i) {
    if (members[i] >= arms_) {
      throw ContractViolation("arm " + std::to_string(members[i]) + " out of range M=" +
                              std::to_string(arms_));
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (members[i] == members[j]) {
        throw ContractViolation("duplicate arm " + std::to_string(members[i]) + " in query");
      }
    }
  }
}

double Oracle::pull(std::span<const Arm> members, Rng& rng) const {
  check_query(members);
  return std::clamp(do_pull(members, rng), 0.0, 1.0);
}

double Oracle::exact(std::span<const Arm> members) const {
  check_query(members);
  return do_exact(members);
}

RestrictedGame Oracle::ground_truth_game() const {
  // The game refers back to this oracle and must not outlive it.
  return RestrictedGame(arms_, budget_, [this](std::span<const Arm> s) { return do_exact(s); });
}

SyntheticParams SyntheticParams::evenly_spaced(std::size_t arms) {
  SyntheticParams p;
  p.means.resize(arms);
  p.noise_stds.resize(arms);
  for (std::size_t i = 0; i < arms; ++i) {
    const double f = arms > 1 ? double(i) / double(arms - 1) : 0.5;
    p.means[i] = 0.2 + f * (0.95 - 0.2);
    p.noise_stds[i] = 0.1 + f * (0.4 - 0.1);
  }
  return p;
}

SyntheticEnv::SyntheticEnv(SyntheticParams params, std::size_t budget, QueryLimit limit)
    : Oracle(params.means.size(), budget, limit), params_(std::move(params)) {
  if (params_.noise_stds.size() != params_.means.size()) {
    throw ContractViolation("synthetic env: noise_stds length " +
                            std::to_string(params_.noise_stds.size()) + " != means length " +
                            std::to_string(params_.means.size()));
  }
  for (double m : params_.means) {
    if (!(m >= 0.0)) throw ContractViolation("synthetic env: means must be non-negative");
  }
  for (double s : params_.noise_stds) {
    if (!(s >= 0.0)) throw ContractViolation("synthetic env: noise_stds must be non-negative");
  }
  if (!(params_.curvature > 0.0)) throw ContractViolation("synthetic env: lambda must be > 0");
  if (!(params_.fixed_sigma >= 0.0)) {
    throw ContractViolation("synthetic env: noise_sigma must be >= 0");
  }
  double total = 0.0;
  for (double m : params_.means) total += m;
  if (!(total > 0.0)) throw ContractViolation("synthetic env: means sum to zero");
  normalizer_ = -std::expm1(-params_.curvature * total);
}

double SyntheticEnv::noise_sigma(std::span<const Arm> members) const {
  if (members.empty()) return 0.0;
  if (params_.noise == NoiseModel::fixed) return params_.fixed_sigma;
  double sq = 0.0;
  for (Arm a : members) sq += params_.noise_stds[a] * params_.noise_stds[a];
  return std::sqrt(sq / double(members.size()));
}

double SyntheticEnv::do_exact(std::span<const Arm> members) const {
  double x = 0.0;
  for (Arm a : members) x += params_.means[a];
  return -std::expm1(-params_.curvature * x) / normalizer_;
}

double SyntheticEnv::do_pull(std::span<const Arm> members, Rng& rng) const {
  const double mean = do_exact(members);
  const double sigma = noise_sigma(members);
  if (sigma == 0.0) return mean;
  std::normal_distribution<double> noise(0.0, sigma);
  return mean + noise(rng);
}

}  // namespace ksv
