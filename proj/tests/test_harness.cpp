#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "ksv/config.hpp"
#include "ksv/error.hpp"
#include "ksv/harness.hpp"

namespace fs = std::filesystem;

namespace {

ksv::RunConfig config_from(const std::string& text) {
  std::istringstream in(text);
  return ksv::parse_run_config(in, testing::data_dir(), "test.ini");
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string first_line(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  return line;
}

std::vector<fs::path> csv_files(const fs::path& root) {
  std::vector<fs::path> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file() && e.path().extension() == ".csv") {
      out.push_back(fs::relative(e.path(), root));
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

const char* kSynthetic = R"(
seeds = 1..30
rounds = 60
T = 1e8
[algo]
algo = ksvfair, uniform
K = 2
R = 3
L = 2
[env]
env = synthetic
M = 5
)";

}  // namespace

TEST_CASE("format_number") {
  CHECK(ksv::format_number(0.0) == "0");
  CHECK(ksv::format_number(-0.0) == "0");
  CHECK(ksv::format_number(0.25) == "0.25");
  CHECK(ksv::format_number(1.0 / 3.0) == "0.333333333333");
  CHECK(ksv::format_number(1e20) == "1e+20");
}

TEST_CASE("thirty seeds produce thirty run files and monotone regret") {
  const auto dir = testing::scratch_dir("harness_30");
  const auto cfg = config_from(kSynthetic);
  ksv::RunOptions opt;
  opt.out_dir = dir;
  const auto result = ksv::run_experiment(cfg, opt);

  REQUIRE(result.algorithms.size() == 2);
  for (const char* algo : {"ksvfair", "uniform"}) {
    std::size_t runs = 0, arms = 0;
    for (const auto& e : fs::directory_iterator(dir / algo)) {
      const auto name = e.path().filename().string();
      runs += name.rfind("run_", 0) == 0;
      arms += name.rfind("arms_", 0) == 0 && name != "arms_aggregate.csv";
    }
    CHECK(runs == 30);
    CHECK(arms == 30);
    CHECK(fs::exists(dir / algo / "aggregate.csv"));
    CHECK(fs::exists(dir / algo / "arms_aggregate.csv"));
  }
  CHECK(fs::exists(dir / "pistar.csv"));

  for (const auto& s : result.algorithms) {
    CHECK(s.seeds.size() == 30);
    REQUIRE(s.fr_mean.size() == 60);
    for (std::size_t t = 1; t < s.fr_mean.size(); ++t) CHECK(s.fr_mean[t] >= s.fr_mean[t - 1]);
    for (double v : s.fr_var) CHECK(v >= 0.0);
    for (std::size_t r : s.rounds) CHECK(r == 60);
  }

  // The aggregate mean at the last round equals the mean of per-seed finals.
  const auto& u = result.at(ksv::Algorithm::uniform);
  double mean = 0.0;
  for (double v : u.final_regret) mean += v;
  mean /= double(u.final_regret.size());
  CHECK(u.fr_mean.back() == doctest::Approx(mean).epsilon(1e-12));
  CHECK_THROWS_AS(result.at(ksv::Algorithm::etcg), ksv::ContractViolation);
}

TEST_CASE("pi* target is the exact fair policy") {
  const auto cfg = config_from(kSynthetic);
  const auto env = ksv::make_environment(cfg, ksv::QueryLimit::strict);
  const auto target = ksv::compute_fair_target(cfg, *env);
  CHECK(target.method == "exact");
  const auto phi = ksv::exact_k_shapley(env->ground_truth_game()).values;
  REQUIRE(target.true_phi.size() == 5);
  double sum = 0.0;
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(target.true_phi[i] == doctest::Approx(phi[i]).epsilon(1e-14));
    CHECK(target.std_errors[i] == 0.0);
    sum += target.pi_star.probs()[i];
  }
  CHECK(sum == doctest::Approx(2.0));
}

TEST_CASE("identical inputs give byte-identical outputs; seed offset shifts seeds") {
  const auto a = testing::scratch_dir("harness_det_a");
  const auto b = testing::scratch_dir("harness_det_b");
  auto cfg = config_from(R"(
seeds = 4, 9
rounds = 40
T = 1e8
[algo]
algo = ksvfair, muras, uniform, etcg
K = 2
R = 3
L = 2
[env]
env = synthetic
M = 5
)");
  ksv::RunOptions oa, ob;
  oa.out_dir = a;
  ob.out_dir = b;
  ksv::run_experiment(cfg, oa);
  ksv::run_experiment(cfg, ob);
  const auto files = csv_files(a);
  REQUIRE(files == csv_files(b));
  CHECK(files.size() == 1 + 4 * (2 + 2 + 2));
  for (const auto& f : files) {
    INFO(f.string());
    CHECK(slurp(a / f) == slurp(b / f));
  }

  const auto c = testing::scratch_dir("harness_det_c");
  ksv::RunOptions oc;
  oc.out_dir = c;
  oc.seed_offset = 1;
  const auto shifted = ksv::run_experiment(cfg, oc);
  CHECK(shifted.algorithms[0].seeds == std::vector<std::uint64_t>{5, 10});
  CHECK(fs::exists(c / "etcg" / "run_10.csv"));
  CHECK_FALSE(fs::exists(c / "etcg" / "run_9.csv"));

  // Seed 9 under offset 0 and seed 9 reached as 8 + 1 are the same run.
  cfg.seeds = {8};
  const auto d = testing::scratch_dir("harness_det_d");
  ksv::RunOptions od;
  od.out_dir = d;
  od.seed_offset = 1;
  ksv::run_experiment(cfg, od);
  CHECK(slurp(d / "muras" / "run_9.csv") == slurp(a / "muras" / "run_9.csv"));
}

TEST_CASE("golden CSV headers") {
  const auto dir = testing::scratch_dir("harness_headers");
  auto cfg = config_from(R"(
seeds = 1
rounds = 20
T = 1e8
[algo]
algo = uniform
K = 2
R = 2
L = 1
[env]
env = synthetic
M = 3
)");
  ksv::RunOptions opt;
  opt.out_dir = dir;
  ksv::run_experiment(cfg, opt);
  CHECK(first_line(dir / "pistar.csv") == "arm,true_phi,pi_star,std_error");
  CHECK(first_line(dir / "uniform" / "run_1.csv") ==
        "round,pulls_cum,l1_to_pistar,fr_cum,pi_0,pi_1,pi_2,sel_0,sel_1,sel_2");
  CHECK(first_line(dir / "uniform" / "arms_1.csv") == "arm,true_phi,est_phi,count,merit_sel_ratio");
  CHECK(first_line(dir / "uniform" / "aggregate.csv") == "round,fr_mean,fr_var");
  CHECK(first_line(dir / "uniform" / "arms_aggregate.csv") ==
        "arm,true_phi,est_phi_mean,count_mean,merit_sel_mean,merit_sel_defined");

  // A single seed has zero sample variance by convention.
  std::ifstream agg(dir / "uniform" / "aggregate.csv");
  std::string line;
  std::getline(agg, line);
  std::size_t rows = 0;
  while (std::getline(agg, line)) {
    ++rows;
    CHECK(line.substr(line.rfind(',') + 1) == "0");
  }
  CHECK(rows == 20);
}

TEST_CASE("round CSV rows agree with the ledger") {
  const auto dir = testing::scratch_dir("harness_rows");
  auto cfg = config_from(R"(
seeds = 2
rounds = 15
T = 1e8
[algo]
algo = etcg
K = 2
R = 2
L = 1
[env]
env = synthetic
M = 4
)");
  ksv::RunOptions opt;
  opt.out_dir = dir;
  const auto result = ksv::run_experiment(cfg, opt);
  std::ifstream in(dir / "etcg" / "run_2.csv");
  std::string line;
  std::getline(in, line);
  double prev_fr = 0.0;
  std::size_t t = 0;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
    REQUIRE(cells.size() == 4 + 2 * 4);
    ++t;
    CHECK(std::stoul(cells[0]) == t);
    const double l1 = std::stod(cells[2]);
    const double fr = std::stod(cells[3]);
    CHECK(fr == doctest::Approx(prev_fr + l1).epsilon(1e-10));
    prev_fr = fr;
    int selected = 0;
    double pi_sum = 0.0;
    for (int i = 0; i < 4; ++i) {
      pi_sum += std::stod(cells[4 + i]);
      selected += std::stoi(cells[8 + i]);
    }
    // Exploration phases play a growing prefix, so fewer than K arms.
    CHECK(pi_sum == doctest::Approx(double(selected)));
    CHECK(selected >= 1);
    CHECK(selected <= 2);
  }
  CHECK(t == 15);
  CHECK(prev_fr == doctest::Approx(result.algorithms[0].final_regret[0]).epsilon(1e-10));
}

TEST_CASE("compare joins aggregates") {
  const auto a = testing::scratch_dir("harness_cmp_a");
  const auto b = testing::scratch_dir("harness_cmp_b");
  auto cfg = config_from(R"(
seeds = 1..3
rounds = 25
T = 1e8
[algo]
algo = ksvfair, uniform
K = 2
R = 2
L = 2
[env]
env = synthetic
M = 4
)");
  ksv::RunOptions oa, ob;
  oa.out_dir = a;
  ob.out_dir = b;
  const auto ra = ksv::run_experiment(cfg, oa);
  ksv::run_experiment(cfg, ob);

  SUBCASE("identical runs give identical columns") {
    const std::vector<fs::path> dirs = {a / "uniform", b / "uniform"};
    const auto cmp = ksv::compare_runs(dirs);
    REQUIRE(cmp.labels == std::vector<std::string>{"uniform", "uniform_2"});
    REQUIRE(cmp.rounds.size() == 25);
    for (std::size_t t = 0; t < 25; ++t) {
      CHECK(cmp.fr_mean[0][t] == cmp.fr_mean[1][t]);
      CHECK(cmp.fr_std[0][t] == cmp.fr_std[1][t]);
      const auto& u = ra.at(ksv::Algorithm::uniform);
      CHECK(cmp.fr_mean[0][t] == doctest::Approx(u.fr_mean[t]).epsilon(1e-11));
      CHECK(cmp.fr_std[0][t] == doctest::Approx(std::sqrt(u.fr_var[t])).epsilon(1e-9));
    }
    REQUIRE(cmp.merit.size() == 2);
    CHECK(cmp.merit[0].size() == 4);
  }

  SUBCASE("an experiment directory expands to its algorithms") {
    const std::vector<fs::path> dirs = {a};
    const auto cmp = ksv::compare_runs(dirs);
    CHECK(cmp.labels == std::vector<std::string>{"ksvfair", "uniform"});
    std::ostringstream os;
    ksv::write_comparison_csv(os, cmp);
    CHECK(os.str().rfind("round,fr_mean_ksvfair,fr_std_ksvfair,fr_mean_uniform,fr_std_uniform\n",
                         0) == 0);
    std::ostringstream ms;
    ksv::write_merit_comparison_csv(ms, cmp);
    CHECK(ms.str().rfind("arm,merit_sel_ksvfair,merit_sel_uniform\n", 0) == 0);
  }

  SUBCASE("mismatched round grids are rejected") {
    const auto c = testing::scratch_dir("harness_cmp_c");
    cfg.policy.max_rounds = 30;
    ksv::RunOptions oc;
    oc.out_dir = c;
    ksv::run_experiment(cfg, oc);
    const std::vector<fs::path> dirs = {a / "uniform", c / "uniform"};
    CHECK_THROWS_AS(ksv::compare_runs(dirs), ksv::ContractViolation);
  }

  SUBCASE("a single aggregate is not a comparison") {
    const std::vector<fs::path> dirs = {a / "uniform"};
    CHECK_THROWS_AS(ksv::compare_runs(dirs), ksv::ContractViolation);
  }
}

TEST_CASE("cascade target uses Monte-Carlo coalition values with propagated errors") {
  auto cfg = config_from(R"(
seeds = 1
rounds = 10
T = 1e8
[algo]
algo = uniform
K = 2
R = 2
L = 1
[env]
env = cascade
graph_path = tiny8.edges
activation_p = 0.3
pistar_sims = 4000
)");
  const auto env = ksv::make_environment(cfg, ksv::QueryLimit::strict);
  CHECK(env->arms() == 8);
  const auto target = ksv::compute_fair_target(cfg, *env);
  CHECK(target.method == "exact-mc");
  REQUIRE(target.true_phi.size() == 8);

  // Independent reference: the K-Shapley values of the exact spread game.
  const std::vector<std::pair<unsigned, unsigned>> edges = {
      {0, 1}, {1, 2}, {2, 0}, {2, 3}, {3, 4}, {4, 5}, {5, 6}, {6, 4}, {6, 7}, {1, 3}, {5, 7}};
  const auto ref = oracle::k_shapley_brute(8, 2, [&](const std::vector<unsigned>& s) {
    return s.empty() ? 0.0 : oracle::cascade_spread_enumerated(8, edges, 0.3, s);
  });
  for (std::size_t i = 0; i < 8; ++i) {
    INFO("arm " << i);
    CHECK(target.std_errors[i] > 0.0);
    CHECK(std::abs(target.true_phi[i] - ref[i]) < 4.0 * target.std_errors[i]);
  }

  cfg.env.pistar_samples = 50;
  const auto sampled = ksv::compute_fair_target(cfg, *env);
  CHECK(sampled.method == "sampled");

  cfg.env.arms = 9;
  CHECK_THROWS_AS(ksv::make_environment(cfg, ksv::QueryLimit::strict), ksv::ConfigError);
}

TEST_CASE("run errors name the algorithm and seed") {
  auto cfg = config_from(R"(
seeds = 3
T = 150
[algo]
algo = muras
K = 2
R = 5
L = 3
[env]
env = synthetic
M = 6
)");
  ksv::RunOptions opt;
  opt.write_files = false;
  try {
    ksv::run_experiment(cfg, opt);
    FAIL("expected an error");
  } catch (const std::exception& e) {
    CHECK(std::string(e.what()).find("muras seed 3") != std::string::npos);
  }
}
