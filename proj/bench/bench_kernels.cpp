// Wall-clock comparison of the OpenMP kernels against their serial
// references. Also checks that both produce the same numbers.
//
//   ksv_bench [--arms M] [--budget K] [--sims N] [--repeat R]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ksv/environment.hpp"
#include "ksv/game.hpp"
#include "ksv/parallel.hpp"

namespace {

template <typename F>
double best_seconds(int repeat, F&& f) {
  double best = 1e300;
  for (int r = 0; r < repeat; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    const std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
    best = std::min(best, dt.count());
  }
  return best;
}

void report(const char* name, double serial, double parallel, double max_diff) {
  std::printf("%-22s serial %9.4f s   parallel %9.4f s   speedup %5.2fx   max|diff| %.3g\n", name,
              serial, parallel, serial / parallel, max_diff);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ksv kernel benchmarks"};
  std::size_t arms = 18;
  std::size_t budget = 6;
  std::size_t sims = 200000;
  int repeat = 3;
  app.add_option("--arms", arms, "Arms for exact_k_shapley");
  app.add_option("--budget", budget, "Budget K");
  app.add_option("--sims", sims, "Cascades per spread estimate");
  app.add_option("--repeat", repeat, "Timing repetitions (best is reported)");
  CLI11_PARSE(app, argc, argv);

  std::printf("workers: %d\n", ksv::worker_count());

  {
    const auto params = ksv::SyntheticParams::evenly_spaced(arms);
    const ksv::SyntheticEnv env(params, budget);
    ksv::ShapleyVector serial, parallel;
    // A fresh game per call so neither side reuses the other's memo.
    const double ts = best_seconds(
        repeat, [&] { serial = ksv::exact_k_shapley_serial(env.ground_truth_game()); });
    const double tp =
        best_seconds(repeat, [&] { parallel = ksv::exact_k_shapley(env.ground_truth_game()); });
    double diff = 0.0;
    for (std::size_t i = 0; i < arms; ++i) {
      diff = std::max(diff, std::abs(serial[i] - parallel[i]));
    }
    report("exact_k_shapley", ts, tp, diff);
  }

  {
    const ksv::Graph graph = ksv::Graph::complete(60);
    const ksv::CascadeEnv env(graph, 0.05, 3);
    const std::vector<ksv::Arm> seeds = {0, 1, 2};
    ksv::SpreadEstimate serial, parallel;
    const double ts = best_seconds(repeat, [&] {
      ksv::Rng rng(7);
      serial = env.spread_serial(seeds, sims, rng);
    });
    const double tp = best_seconds(repeat, [&] {
      ksv::Rng rng(7);
      parallel = env.spread(seeds, sims, rng);
    });
    report("cascade spread", ts, tp, std::abs(serial.mean - parallel.mean));
  }
  return 0;
}
