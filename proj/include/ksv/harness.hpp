#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ksv/config.hpp"
#include "ksv/environment.hpp"
#include "ksv/metrics.hpp"
#include "ksv/policies.hpp"
#include "ksv/rounding.hpp"

namespace ksv {

/// Builds the configured environment. Cascade configs load the graph and
/// fill in M from its node count; throws ConfigError on a mismatch.
std::unique_ptr<Oracle> make_environment(const RunConfig& cfg, QueryLimit limit);

/// Ground-truth K-Shapley values and the fair policy built from them.
struct FairTarget {
  std::vector<double> true_phi;
  /// Per-arm standard error; all zero when the values are exact.
  std::vector<double> std_errors;
  MarginalVector pi_star = MarginalVector::uniform(1, 1);
  std::string method;  ///< "exact", "exact-mc" or "sampled"
};

/// Synthetic: exact enumeration on the noise-free backdoor. Cascade: exact
/// enumeration over Monte-Carlo coalition values with propagated standard
/// errors when M fits the enumeration guard and pistar_samples is 0,
/// otherwise sampled K-Shapley.
FairTarget compute_fair_target(const RunConfig& cfg, const Oracle& oracle);

struct RunOptions {
  std::int64_t seed_offset = 0;
  std::optional<std::filesystem::path> out_dir;
  bool write_files = true;
};

struct AlgorithmSummary {
  Algorithm algorithm = Algorithm::ksvfair;
  std::vector<std::uint64_t> seeds;
  /// Seed-mean and sample variance of FR_t over the common round grid.
  std::vector<double> fr_mean;
  std::vector<double> fr_var;
  std::vector<double> final_regret;  ///< per seed
  std::vector<std::vector<std::optional<double>>> merit;  ///< per seed, per arm
  std::vector<std::vector<double>> estimates;             ///< per seed, per arm
  std::vector<std::vector<std::uint64_t>> counts;         ///< per seed, per arm
  std::vector<std::size_t> rounds;                        ///< per seed
};

struct ExperimentResult {
  FairTarget target;
  std::vector<AlgorithmSummary> algorithms;
  std::filesystem::path out_dir;

  const AlgorithmSummary& at(Algorithm a) const;
};

/// Runs every (algorithm, seed) pair, fanned out over worker_count()
/// threads, then aggregates in configuration order. Writes
///   <out>/pistar.csv
///   <out>/<algo>/run_<seed>.csv, arms_<seed>.csv
///   <out>/<algo>/aggregate.csv, arms_aggregate.csv
/// when options.write_files is set.
ExperimentResult run_experiment(const RunConfig& cfg, const RunOptions& options = {});

/// %.12g; the one number format used in every CSV.
std::string format_number(double v);

void write_round_csv(std::ostream& out, const RunRecord& run, const FairnessLedger& ledger);
void write_arm_csv(std::ostream& out, std::span<const double> true_phi, const RunRecord& run,
                   std::span<const std::optional<double>> merit);
void write_aggregate_csv(std::ostream& out, const AlgorithmSummary& summary);
void write_arm_aggregate_csv(std::ostream& out, std::span<const double> true_phi,
                             const AlgorithmSummary& summary);
void write_fair_target_csv(std::ostream& out, const FairTarget& target);

struct Comparison {
  std::vector<std::string> labels;
  std::vector<std::uint64_t> rounds;
  std::vector<std::vector<double>> fr_mean;  ///< per label
  std::vector<std::vector<double>> fr_std;   ///< per label
  /// Per label seed-mean merit-to-selection per arm; nullopt = undefined.
  std::vector<std::vector<std::optional<double>>> merit;
};

/// Joins aggregate.csv (and arms_aggregate.csv when present) from each
/// directory. A directory without aggregate.csv is expanded into its
/// sub-directories that have one. Throws ContractViolation on mismatched
/// round grids or fewer than two aggregates.
Comparison compare_runs(std::span<const std::filesystem::path> dirs);

void write_comparison_csv(std::ostream& out, const Comparison& cmp);
void write_merit_comparison_csv(std::ostream& out, const Comparison& cmp);

}  // namespace ksv
