// ksv: config-driven runner for the K-Shapley fairness bandit experiments.

#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ksv/config.hpp"
#include "ksv/error.hpp"
#include "ksv/harness.hpp"
#include "ksv/metrics.hpp"

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;

void print_summary(const ksv::ExperimentResult& result) {
  std::printf("%-8s %6s %8s %14s %10s %10s\n", "algo", "seeds", "rounds", "final_fr_mean",
              "slope", "merit_cov");
  for (const auto& s : result.algorithms) {
    double fr = 0.0;
    for (double v : s.final_regret) fr += v;
    fr /= double(s.final_regret.size());
    std::string slope = "NA";
    try {
      slope = ksv::format_number(ksv::regret_slope(s.fr_mean));
    } catch (const ksv::ContractViolation&) {
    }
    double cov = 0.0;
    std::size_t cov_n = 0;
    for (const auto& m : s.merit) {
      try {
        cov += ksv::coefficient_of_variation(m);
        ++cov_n;
      } catch (const ksv::ContractViolation&) {
      }
    }
    const std::string cov_text = cov_n ? ksv::format_number(cov / double(cov_n)) : "NA";
    std::printf("%-8s %6zu %8zu %14s %10s %10s\n", std::string(ksv::to_string(s.algorithm)).c_str(),
                s.seeds.size(), s.fr_mean.size(), ksv::format_number(fr).c_str(), slope.c_str(),
                cov_text.c_str());
  }
  std::printf("results in %s\n", result.out_dir.string().c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"K-Shapley fair combinatorial bandit experiments"};
  app.require_subcommand(1);

  std::string config_path;
  long long seed_offset = 0;
  std::string out_dir;
  auto* run = app.add_subcommand("run", "Run every configured (algorithm, seed) pair");
  run->add_option("--config", config_path, "Experiment config (INI)")->required();
  run->add_option("--seed-offset", seed_offset, "Added to every configured seed");
  run->add_option("--out", out_dir, "Output directory (overrides out_dir)");

  std::vector<std::string> compare_dirs;
  std::string compare_out;
  auto* compare = app.add_subcommand("compare", "Join aggregate.csv files from run directories");
  compare->add_option("dirs", compare_dirs, "Algorithm or experiment directories")
      ->required()
      ->expected(1, -1);
  compare->add_option("--out", compare_out,
                      "Write comparison.csv and merit_comparison.csv here instead of stdout");

  std::string exact_config;
  auto* exact = app.add_subcommand("exact-shapley", "Print true K-Shapley values and pi*");
  exact->add_option("--config", exact_config, "Experiment config (INI)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) {
      const ksv::RunConfig cfg = ksv::load_run_config(config_path);
      ksv::RunOptions options;
      options.seed_offset = seed_offset;
      if (!out_dir.empty()) options.out_dir = out_dir;
      print_summary(ksv::run_experiment(cfg, options));
    } else if (*compare) {
      std::vector<std::filesystem::path> dirs(compare_dirs.begin(), compare_dirs.end());
      const ksv::Comparison cmp = ksv::compare_runs(dirs);
      if (compare_out.empty()) {
        ksv::write_comparison_csv(std::cout, cmp);
        std::cout << '\n';
        ksv::write_merit_comparison_csv(std::cout, cmp);
      } else {
        std::filesystem::create_directories(compare_out);
        std::ofstream fr(std::filesystem::path(compare_out) / "comparison.csv");
        std::ofstream merit(std::filesystem::path(compare_out) / "merit_comparison.csv");
        ksv::write_comparison_csv(fr, cmp);
        ksv::write_merit_comparison_csv(merit, cmp);
        if (!fr || !merit) throw std::runtime_error("cannot write into " + compare_out);
      }
    } else if (*exact) {
      const ksv::RunConfig cfg = ksv::load_run_config(exact_config);
      const auto oracle = ksv::make_environment(cfg, ksv::QueryLimit::strict);
      const ksv::FairTarget target = ksv::compute_fair_target(cfg, *oracle);
      ksv::write_fair_target_csv(std::cout, target);
    }
  } catch (const ksv::ConfigError& e) {
    std::cerr << "ksv: config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "ksv: error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
