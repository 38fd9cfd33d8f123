#include "ksv/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include "ksv/error.hpp"
#include "ksv/parallel.hpp"

namespace ksv {
namespace {

constexpr std::size_t kDefaultPistarSamples = 200;

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::optional<double> parse_cell(const std::string& cell, const std::filesystem::path& file) {
  if (cell == "NA") return std::nullopt;
  try {
    std::size_t used = 0;
    const double v = std::stod(cell, &used);
    if (used == cell.size()) return v;
  } catch (const std::exception&) {
  }
  throw ContractViolation(file.string() + ": bad number '" + cell + "'");
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

CsvTable read_csv(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw ContractViolation("cannot open " + file.string());
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw ContractViolation(file.string() + ": empty file");
  t.header = split_csv(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto row = split_csv(line);
    if (row.size() != t.header.size()) {
      throw ContractViolation(file.string() + ": row with " + std::to_string(row.size()) +
                              " cells, header has " + std::to_string(t.header.size()));
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

std::size_t column(const CsvTable& t, const std::string& name, const std::filesystem::path& file) {
  auto it = std::find(t.header.begin(), t.header.end(), name);
  if (it == t.header.end()) throw ContractViolation(file.string() + ": no column '" + name + "'");
  return static_cast<std::size_t>(it - t.header.begin());
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::string na_or(const std::optional<double>& v) { return v ? format_number(*v) : "NA"; }

}  // namespace

std::string format_number(double v) {
  if (v == 0.0) return "0";  // folds -0
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::unique_ptr<Oracle> make_environment(const RunConfig& cfg, QueryLimit limit) {
  const auto& env = cfg.env;
  if (env.kind == EnvKind::synthetic) {
    return std::make_unique<SyntheticEnv>(env.synthetic, cfg.policy.budget, limit);
  }
  EdgeListLoad load = load_edge_list(env.graph_path);
  const std::size_t n = load.graph.nodes();
  if (env.arms != 0 && env.arms != n) {
    throw ConfigError("env.M", "env.M = " + std::to_string(env.arms) + " but graph '" +
                                   env.graph_path.string() + "' has " + std::to_string(n) +
                                   " nodes");
  }
  if (cfg.policy.budget > n) {
    throw ConfigError("algo.K", "algo.K = " + std::to_string(cfg.policy.budget) +
                                    " exceeds the graph's " + std::to_string(n) + " nodes");
  }
  return std::make_unique<CascadeEnv>(std::move(load.graph), env.activation_p, cfg.policy.budget,
                                      limit, env.pistar_sims, env.pistar_seed);
}

FairTarget compute_fair_target(const RunConfig& cfg, const Oracle& oracle) {
  const auto& env = cfg.env;
  const RestrictedGame game = oracle.ground_truth_game();
  const bool enumerable = oracle.arms() <= env.limits.max_arms && oracle.arms() <= 62 &&
                          oracle.budget() <= env.limits.max_budget;
  FairTarget target;

  if (env.kind == EnvKind::synthetic) {
    if (!enumerable) {
      throw ConfigError("env.M", "synthetic fair policy needs exact enumeration; M=" +
                                     std::to_string(oracle.arms()) + ", K=" +
                                     std::to_string(oracle.budget()) +
                                     " exceed max_enum_arms/max_enum_budget");
    }
    target.true_phi = exact_k_shapley(game, env.limits).values;
    target.std_errors.assign(target.true_phi.size(), 0.0);
    target.method = "exact";
  } else if (enumerable && env.pistar_samples == 0) {
    const auto* cascade = dynamic_cast<const CascadeEnv*>(&oracle);
    if (!cascade) throw ContractViolation("cascade config with a non-cascade oracle");
    target.true_phi = exact_k_shapley(game, env.limits).values;
    target.std_errors = exact_k_shapley_std_errors(
        game,
        [cascade](const Coalition& s) { return cascade->exact_estimate(s.members()).std_error; },
        env.limits);
    target.method = "exact-mc";
  } else {
    const std::size_t samples = env.pistar_samples ? env.pistar_samples : kDefaultPistarSamples;
    ShapleyVector phi = sampled_k_shapley(game, samples, env.pistar_seed);
    target.true_phi = std::move(phi.values);
    target.std_errors = std::move(phi.std_errors);
    target.method = "sampled";
  }
  target.pi_star = fair_policy(target.true_phi, oracle.budget());
  return target;
}

const AlgorithmSummary& ExperimentResult::at(Algorithm a) const {
  for (const auto& s : algorithms) {
    if (s.algorithm == a) return s;
  }
  throw ContractViolation("experiment did not run " + std::string(to_string(a)));
}

ExperimentResult run_experiment(const RunConfig& cfg, const RunOptions& options) {
  ExperimentResult result;
  result.out_dir = options.out_dir ? *options.out_dir : cfg.out_dir;

  const bool wants_muras = std::find(cfg.algorithms.begin(), cfg.algorithms.end(),
                                     Algorithm::muras) != cfg.algorithms.end();
  const std::unique_ptr<Oracle> strict = make_environment(cfg, QueryLimit::strict);
  const std::unique_ptr<Oracle> wide =
      wants_muras ? make_environment(cfg, QueryLimit::muras_compatible) : nullptr;

  PolicyConfig policy = cfg.policy;
  policy.arms = strict->arms();
  try {
    policy.validate();
  } catch (const ContractViolation& e) {
    throw ConfigError("algo", e.what());
  }

  result.target = compute_fair_target(cfg, *strict);
  const auto pi_star = result.target.pi_star.probs();
  const auto& true_phi = result.target.true_phi;

  std::vector<std::uint64_t> seeds;
  for (auto s : cfg.seeds) seeds.push_back(s + static_cast<std::uint64_t>(options.seed_offset));

  if (options.write_files) {
    for (auto a : cfg.algorithms) {
      std::filesystem::create_directories(result.out_dir / std::string(to_string(a)));
    }
    std::ostringstream os;
    write_fair_target_csv(os, result.target);
    write_file(result.out_dir / "pistar.csv", os.str());
  }

  struct JobOutput {
    std::vector<double> cumulative;
    double final_regret = 0.0;
    std::vector<std::optional<double>> merit;
    std::vector<double> estimates;
    std::vector<std::uint64_t> counts;
    std::size_t rounds = 0;
  };
  const std::size_t n_seeds = seeds.size();
  const std::size_t n_jobs = cfg.algorithms.size() * n_seeds;
  std::vector<JobOutput> outputs(n_jobs);
  std::vector<std::exception_ptr> errors(n_jobs);

  const auto jobs = static_cast<std::ptrdiff_t>(n_jobs);
#pragma omp parallel for schedule(dynamic, 1) num_threads(worker_count())
  for (std::ptrdiff_t j = 0; j < jobs; ++j) {
    const auto job = static_cast<std::size_t>(j);
    const Algorithm algo = cfg.algorithms[job / n_seeds];
    const std::uint64_t seed = seeds[job % n_seeds];
    try {
      const Oracle& oracle = algo == Algorithm::muras ? *wide : *strict;
      const RunRecord run = run_algorithm(algo, policy, oracle, seed);
      const FairnessLedger ledger = fairness_ledger(pi_star, run);
      JobOutput& out = outputs[job];
      out.merit = merit_to_selection(true_phi, run.counts, run.rounds.size());
      out.cumulative = ledger.cumulative;
      out.final_regret = ledger.final_regret();
      out.estimates = run.estimates;
      out.counts = run.counts;
      out.rounds = run.rounds.size();
      if (options.write_files) {
        const auto dir = result.out_dir / std::string(to_string(algo));
        std::ostringstream rounds_csv, arms_csv;
        write_round_csv(rounds_csv, run, ledger);
        write_arm_csv(arms_csv, true_phi, run, out.merit);
        write_file(dir / ("run_" + std::to_string(seed) + ".csv"), rounds_csv.str());
        write_file(dir / ("arms_" + std::to_string(seed) + ".csv"), arms_csv.str());
      }
    } catch (const std::exception& e) {
      errors[job] = std::make_exception_ptr(std::runtime_error(
          std::string(to_string(algo)) + " seed " + std::to_string(seed) + ": " + e.what()));
    } catch (...) {
      errors[job] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  for (std::size_t a = 0; a < cfg.algorithms.size(); ++a) {
    AlgorithmSummary s;
    s.algorithm = cfg.algorithms[a];
    s.seeds = seeds;
    std::size_t grid = std::numeric_limits<std::size_t>::max();
    for (std::size_t k = 0; k < n_seeds; ++k) {
      const JobOutput& out = outputs[a * n_seeds + k];
      grid = std::min(grid, out.cumulative.size());
      s.final_regret.push_back(out.final_regret);
      s.merit.push_back(out.merit);
      s.estimates.push_back(out.estimates);
      s.counts.push_back(out.counts);
      s.rounds.push_back(out.rounds);
    }
    s.fr_mean.assign(grid, 0.0);
    s.fr_var.assign(grid, 0.0);
    for (std::size_t t = 0; t < grid; ++t) {
      double sum = 0.0;
      for (std::size_t k = 0; k < n_seeds; ++k) sum += outputs[a * n_seeds + k].cumulative[t];
      const double mean = sum / double(n_seeds);
      double sq = 0.0;
      for (std::size_t k = 0; k < n_seeds; ++k) {
        const double d = outputs[a * n_seeds + k].cumulative[t] - mean;
        sq += d * d;
      }
      s.fr_mean[t] = mean;
      s.fr_var[t] = n_seeds > 1 ? sq / double(n_seeds - 1) : 0.0;
    }
    if (options.write_files) {
      const auto dir = result.out_dir / std::string(to_string(s.algorithm));
      std::ostringstream agg, arms;
      write_aggregate_csv(agg, s);
      write_arm_aggregate_csv(arms, true_phi, s);
      write_file(dir / "aggregate.csv", agg.str());
      write_file(dir / "arms_aggregate.csv", arms.str());
    }
    result.algorithms.push_back(std::move(s));
  }
  return result;
}

void write_round_csv(std::ostream& out, const RunRecord& run, const FairnessLedger& ledger) {
  const std::size_t m = run.config.arms;
  out << "round,pulls_cum,l1_to_pistar,fr_cum";
  for (std::size_t i = 0; i < m; ++i) out << ",pi_" << i;
  for (std::size_t i = 0; i < m; ++i) out << ",sel_" << i;
  out << '\n';
  std::vector<char> sel(m);
  for (std::size_t t = 0; t < run.rounds.size(); ++t) {
    const RoundLog& r = run.rounds[t];
    out << r.round << ',' << r.pulls_cum << ',' << format_number(ledger.step[t]) << ','
        << format_number(ledger.cumulative[t]);
    for (double p : r.pi) out << ',' << format_number(p);
    std::fill(sel.begin(), sel.end(), '0');
    for (Arm a : r.selected) sel[a] = '1';
    for (char c : sel) out << ',' << c;
    out << '\n';
  }
}

void write_arm_csv(std::ostream& out, std::span<const double> true_phi, const RunRecord& run,
                   std::span<const std::optional<double>> merit) {
  out << "arm,true_phi,est_phi,count,merit_sel_ratio\n";
  for (std::size_t i = 0; i < true_phi.size(); ++i) {
    out << i << ',' << format_number(true_phi[i]) << ',' << format_number(run.estimates[i]) << ','
        << run.counts[i] << ',' << na_or(merit[i]) << '\n';
  }
}

void write_aggregate_csv(std::ostream& out, const AlgorithmSummary& summary) {
  out << "round,fr_mean,fr_var\n";
  for (std::size_t t = 0; t < summary.fr_mean.size(); ++t) {
    out << t + 1 << ',' << format_number(summary.fr_mean[t]) << ','
        << format_number(summary.fr_var[t]) << '\n';
  }
}

void write_arm_aggregate_csv(std::ostream& out, std::span<const double> true_phi,
                             const AlgorithmSummary& summary) {
  out << "arm,true_phi,est_phi_mean,count_mean,merit_sel_mean,merit_sel_defined\n";
  const std::size_t seeds = summary.seeds.size();
  for (std::size_t i = 0; i < true_phi.size(); ++i) {
    double est = 0.0, count = 0.0, merit = 0.0;
    std::size_t defined = 0;
    for (std::size_t k = 0; k < seeds; ++k) {
      est += summary.estimates[k][i];
      count += double(summary.counts[k][i]);
      if (summary.merit[k][i]) {
        merit += *summary.merit[k][i];
        ++defined;
      }
    }
    const std::string merit_mean = defined ? format_number(merit / double(defined)) : "NA";
    out << i << ',' << format_number(true_phi[i]) << ',' << format_number(est / double(seeds))
        << ',' << format_number(count / double(seeds)) << ',' << merit_mean << ',' << defined
        << '\n';
  }
}

void write_fair_target_csv(std::ostream& out, const FairTarget& target) {
  out << "arm,true_phi,pi_star,std_error\n";
  for (std::size_t i = 0; i < target.true_phi.size(); ++i) {
    out << i << ',' << format_number(target.true_phi[i]) << ','
        << format_number(target.pi_star[i]) << ',' << format_number(target.std_errors[i])
        << '\n';
  }
}

Comparison compare_runs(std::span<const std::filesystem::path> dirs) {
  std::vector<std::filesystem::path> found;
  for (const auto& d : dirs) {
    if (std::filesystem::is_regular_file(d / "aggregate.csv")) {
      found.push_back(d);
      continue;
    }
    if (!std::filesystem::is_directory(d)) {
      throw ContractViolation("'" + d.string() + "' is not a run directory");
    }
    std::vector<std::filesystem::path> subs;
    for (const auto& entry : std::filesystem::directory_iterator(d)) {
      if (entry.is_directory() && std::filesystem::is_regular_file(entry.path() / "aggregate.csv")) {
        subs.push_back(entry.path());
      }
    }
    if (subs.empty()) throw ContractViolation("no aggregate.csv under '" + d.string() + "'");
    std::sort(subs.begin(), subs.end());
    found.insert(found.end(), subs.begin(), subs.end());
  }
  if (found.size() < 2) throw ContractViolation("compare needs at least two aggregates");

  Comparison cmp;
  std::map<std::string, int> label_uses;
  for (std::size_t k = 0; k < found.size(); ++k) {
    const auto& dir = found[k];
    std::string label = dir.filename().string();
    if (label.empty()) label = dir.parent_path().filename().string();
    if (const int uses = label_uses[label]++; uses > 0) label += "_" + std::to_string(uses + 1);
    cmp.labels.push_back(label);

    const auto file = dir / "aggregate.csv";
    const CsvTable agg = read_csv(file);
    const std::size_t c_round = column(agg, "round", file);
    const std::size_t c_mean = column(agg, "fr_mean", file);
    const std::size_t c_var = column(agg, "fr_var", file);
    std::vector<std::uint64_t> rounds;
    std::vector<double> mean, sd;
    for (const auto& row : agg.rows) {
      rounds.push_back(static_cast<std::uint64_t>(parse_cell(row[c_round], file).value_or(-1)));
      mean.push_back(parse_cell(row[c_mean], file).value_or(NAN));
      sd.push_back(std::sqrt(std::max(0.0, parse_cell(row[c_var], file).value_or(NAN))));
    }
    if (k == 0) {
      cmp.rounds = rounds;
    } else if (rounds != cmp.rounds) {
      throw ContractViolation("round grid of '" + dir.string() + "' (" +
                              std::to_string(rounds.size()) + " rounds) differs from '" +
                              found[0].string() + "' (" + std::to_string(cmp.rounds.size()) +
                              " rounds)");
    }
    cmp.fr_mean.push_back(std::move(mean));
    cmp.fr_std.push_back(std::move(sd));

    std::vector<std::optional<double>> merit;
    const auto arms_file = dir / "arms_aggregate.csv";
    if (std::filesystem::is_regular_file(arms_file)) {
      const CsvTable arms = read_csv(arms_file);
      const std::size_t c_merit = column(arms, "merit_sel_mean", arms_file);
      for (const auto& row : arms.rows) merit.push_back(parse_cell(row[c_merit], arms_file));
    }
    cmp.merit.push_back(std::move(merit));
  }
  return cmp;
}

void write_comparison_csv(std::ostream& out, const Comparison& cmp) {
  out << "round";
  for (const auto& l : cmp.labels) out << ",fr_mean_" << l << ",fr_std_" << l;
  out << '\n';
  for (std::size_t t = 0; t < cmp.rounds.size(); ++t) {
    out << cmp.rounds[t];
    for (std::size_t k = 0; k < cmp.labels.size(); ++k) {
      out << ',' << format_number(cmp.fr_mean[k][t]) << ',' << format_number(cmp.fr_std[k][t]);
    }
    out << '\n';
  }
}

void write_merit_comparison_csv(std::ostream& out, const Comparison& cmp) {
  std::size_t arms = 0;
  for (const auto& m : cmp.merit) arms = std::max(arms, m.size());
  out << "arm";
  for (const auto& l : cmp.labels) out << ",merit_sel_" << l;
  out << '\n';
  for (std::size_t i = 0; i < arms; ++i) {
    out << i;
    for (const auto& m : cmp.merit) out << ',' << (i < m.size() ? na_or(m[i]) : "NA");
    out << '\n';
  }
}

}  // namespace ksv
