#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "ksv/coalition.hpp"
#include "ksv/game.hpp"
#include "ksv/rng.hpp"

namespace ksv {

/// How large a coalition an oracle accepts. MURaS scores arms outside its
/// sampled K-set against that set plus the arm, a (K+1)-sized query.
enum class QueryLimit { strict, muras_compatible };

/// Full-bandit-feedback valuation oracle: noisy aggregate rewards for a
/// super-arm, plus the noise-free mean as a ground-truth backdoor.
///
/// Implementations are immutable; pulls draw only from the caller's RNG.
class Oracle {
 public:
  Oracle(std::size_t arms, std::size_t budget, QueryLimit limit);
  virtual ~Oracle() = default;

  std::size_t arms() const noexcept { return arms_; }
  std::size_t budget() const noexcept { return budget_; }
  QueryLimit query_limit() const noexcept { return limit_; }
  std::size_t max_query_size() const noexcept {
    return limit_ == QueryLimit::strict ? budget_ : budget_ + 1;
  }

  /// One noisy reward in [0, 1]. Members need not be sorted but must be
  /// distinct and < M.
  double pull(std::span<const Arm> members, Rng& rng) const;

  /// Mean reward E[pull(S)].
  double exact(std::span<const Arm> members) const;

  /// Ground-truth restricted game over the exact backdoor.
  RestrictedGame ground_truth_game() const;

 protected:
  virtual double do_pull(std::span<const Arm> members, Rng& rng) const = 0;
  virtual double do_exact(std::span<const Arm> members) const = 0;

 private:
  void check_query(std::span<const Arm> members) const;

  std::size_t arms_;
  std::size_t budget_;
  QueryLimit limit_;
};

enum class NoiseModel {
  rms,    ///< sigma_S = root-mean-square of member noise_stds
  fixed,  ///< sigma_S = fixed_sigma for every non-empty S
};

struct SyntheticParams {
  std::vector<double> means;
  std::vector<double> noise_stds;
  double curvature = 1.0;
  NoiseModel noise = NoiseModel::rms;
  double fixed_sigma = 0.0;

  /// M arms with means evenly spaced over [0.2, 0.95] and noise standard
  /// deviations evenly spaced over [0.1, 0.4].
  static SyntheticParams evenly_spaced(std::size_t arms);
};

/// Monotone submodular synthetic environment:
///   exact(S) = (1 - exp(-c * sum_S means)) / (1 - exp(-c * sum_all means))
/// with Gaussian reward noise clipped to [0, 1].
class SyntheticEnv final : public Oracle {
 public:
  SyntheticEnv(SyntheticParams params, std::size_t budget, QueryLimit limit = QueryLimit::strict);

  const SyntheticParams& params() const noexcept { return params_; }

  /// Standard deviation of the reward noise for S.
  double noise_sigma(std::span<const Arm> members) const;

 protected:
  double do_pull(std::span<const Arm> members, Rng& rng) const override;
  double do_exact(std::span<const Arm> members) const override;

 private:
  SyntheticParams params_;
  double normalizer_;
};

/// Simple undirected graph in compressed adjacency form.
class Graph {
 public:
  Graph() = default;

  /// Builds from an edge list over nodes [0, n). Self-loops and repeated
  /// edges are dropped.
  Graph(std::size_t nodes, std::span<const std::pair<Arm, Arm>> edges);

  std::size_t nodes() const noexcept { return offsets_.empty() ? 0 : offsets_.size() - 1; }
  std::size_t edges() const noexcept { return neighbors_.size() / 2; }

  std::span<const Arm> neighbors(Arm v) const {
    return {neighbors_.data() + offsets_[v], neighbors_.data() + offsets_[v + 1]};
  }

  static Graph path(std::size_t nodes);
  static Graph complete(std::size_t nodes);

 private:
  std::vector<std::size_t> offsets_;
  std::vector<Arm> neighbors_;
};

struct EdgeListLoad {
  Graph graph;
  std::size_t self_loops_dropped = 0;
  std::size_t duplicates_dropped = 0;
  /// Original label of each dense node index, in first-seen order.
  std::vector<long long> labels;

  std::size_t warnings() const noexcept { return self_loops_dropped + duplicates_dropped; }
};

/// Whitespace-separated integer pairs, one edge per line; '#' lines are
/// comments. Nodes are renumbered densely in first-seen order. Throws
/// ConfigError on a malformed line or an edge-free input.
EdgeListLoad parse_edge_list(std::istream& in, const std::string& source = "<stream>");
EdgeListLoad load_edge_list(const std::filesystem::path& path);

struct SpreadEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t sims = 0;
};

/// Independent-cascade influence environment. Arms are graph nodes; the
/// reward is the fraction of nodes activated from the seed set.
class CascadeEnv final : public Oracle {
 public:
  /// `exact_sims` and `exact_seed` fix the Monte-Carlo estimate behind
  /// exact(): each coalition gets its own stream derived from the seed and
  /// its members, so exact() is a deterministic function of S.
  CascadeEnv(Graph graph, double activation_p, std::size_t budget,
             QueryLimit limit = QueryLimit::strict, std::size_t exact_sims = 10000,
             std::uint64_t exact_seed = 0x5eed);

  const Graph& graph() const noexcept { return graph_; }
  double activation_p() const noexcept { return p_; }

  /// Number of nodes one cascade from `seeds` activates.
  std::size_t simulate(std::span<const Arm> seeds, Rng& rng) const;

  /// Mean spread fraction over `sims` cascades. OpenMP over fixed-size
  /// chunks whose streams derive from one draw of `rng`, so the result does
  /// not depend on the team size.
  SpreadEstimate spread(std::span<const Arm> seeds, std::size_t sims, Rng& rng) const;

  /// One-thread reference for spread(); identical output for the same rng.
  SpreadEstimate spread_serial(std::span<const Arm> seeds, std::size_t sims, Rng& rng) const;

  /// Estimate behind exact(), with its standard error.
  SpreadEstimate exact_estimate(std::span<const Arm> members) const;

 protected:
  double do_pull(std::span<const Arm> members, Rng& rng) const override;
  double do_exact(std::span<const Arm> members) const override;

 private:
  Graph graph_;
  double p_;
  std::size_t exact_sims_;
  std::uint64_t exact_seed_;
};

/// cascade_exact: mean of `sims` independent cascade rewards.
SpreadEstimate cascade_exact(const CascadeEnv& env, std::span<const Arm> seeds,
                             std::size_t sims, Rng& rng);

}  // namespace ksv
