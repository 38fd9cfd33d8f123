#include <doctest.h>

#include <cmath>
#include <vector>

#include "helpers.hpp"
#include "ksv/environment.hpp"
#include "ksv/error.hpp"

using namespace ksv;

namespace {

SyntheticParams params(std::vector<double> means, std::vector<double> stds, double lambda = 1.0) {
  SyntheticParams p;
  p.means = std::move(means);
  p.noise_stds = std::move(stds);
  p.curvature = lambda;
  return p;
}

// E[clamp(X, 0, 1)] for X ~ N(mu, sigma^2) by midpoint quadrature.
double clipped_gaussian_mean(double mu, double sigma) {
  const int n = 200000;
  const double lo = mu - 12 * sigma, hi = mu + 12 * sigma;
  const double h = (hi - lo) / n;
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = lo + (i + 0.5) * h;
    const double z = (x - mu) / sigma;
    acc += std::clamp(x, 0.0, 1.0) * std::exp(-0.5 * z * z);
  }
  return acc * h / (sigma * std::sqrt(2.0 * M_PI));
}

}  // namespace

TEST_CASE("synthetic_exact examples") {
  const SyntheticEnv two(params({0.5, 0.5}, {0.1, 0.1}), 2);
  const std::vector<Arm> both{0, 1};
  CHECK(two.exact(both) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(two.exact(std::vector<Arm>{}) == 0.0);

  const SyntheticEnv flat(params({0.2, 0.3, 0.5}, {0, 0, 0}, 1e-9), 3);
  for (Arm i = 0; i < 3; ++i) {
    const std::vector<Arm> s{i};
    CHECK(flat.exact(s) == doctest::Approx(flat.params().means[i] / 1.0).epsilon(1e-6));
  }

  // Closed form on a three-arm set.
  const SyntheticEnv env(params({0.2, 0.4, 0.9, 0.3}, {0.1, 0.2, 0.3, 0.4}, 1.5), 3);
  const std::vector<Arm> s{0, 2, 3};
  CHECK(env.exact(s) == doctest::Approx((1 - std::exp(-1.5 * 1.4)) / (1 - std::exp(-1.5 * 1.8))));
}

TEST_CASE("synthetic valuation is monotone and submodular") {
  const SyntheticEnv env(SyntheticParams::evenly_spaced(6), 6);
  const RestrictedGame g = env.ground_truth_game();
  for (std::uint64_t mask = 0; mask < 64; ++mask) {
    const Coalition s = Coalition::from_mask(mask);
    for (Arm a = 0; a < 6; ++a) {
      if (s.contains(a)) continue;
      const double gain = g.marginal_contribution(a, s);
      CHECK(gain >= 0.0);
      for (Arm b = 0; b < 6; ++b) {
        if (b == a || s.contains(b)) continue;
        CHECK(g.marginal_contribution(a, s.with(b)) <= gain + 1e-15);
      }
    }
  }
}

TEST_CASE("synthetic pulls") {
  const SyntheticEnv env(params({0.3, 0.6, 0.8}, {0.1, 0.3, 0.2}), 2);
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) CHECK(env.pull(std::vector<Arm>{}, rng) == 0.0);

  const std::vector<Arm> s{0, 1};
  CHECK(env.noise_sigma(s) == doctest::Approx(std::sqrt((0.01 + 0.09) / 2)));
  for (int i = 0; i < 10000; ++i) {
    const double v = env.pull(s, rng);
    CHECK((v >= 0.0 && v <= 1.0));
  }

  const SyntheticEnv quiet(params({0.3, 0.6, 0.8}, {0, 0, 0}), 2);
  for (int i = 0; i < 100; ++i) CHECK(quiet.pull(s, rng) == quiet.exact(s));
}

TEST_CASE("sample mean of pulls matches the clipped noise model") {
  const SyntheticEnv env(params({0.3, 0.2, 0.8}, {0.15, 0.25, 0.2}), 2);
  const std::vector<Arm> s{0, 1};
  const double sigma = env.noise_sigma(s);
  const double want = clipped_gaussian_mean(env.exact(s), sigma);
  Rng rng(2024);
  const int n = 100000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += env.pull(s, rng);
  CHECK(std::abs(sum / n - want) < 3 * sigma / std::sqrt(double(n)));
}

TEST_CASE("fixed noise model") {
  SyntheticParams p = params({0.3, 0.6}, {0.0, 0.0});
  p.noise = NoiseModel::fixed;
  p.fixed_sigma = 0.05;
  const SyntheticEnv env(p, 2);
  CHECK(env.noise_sigma(std::vector<Arm>{0}) == 0.05);
  CHECK(env.noise_sigma(std::vector<Arm>{}) == 0.0);
}

TEST_CASE("pulls are a function of the rng state") {
  const SyntheticEnv env(SyntheticParams::evenly_spaced(5), 3);
  const std::vector<Arm> s{4, 1};
  Rng a(77), b(77);
  for (int i = 0; i < 50; ++i) CHECK(env.pull(s, a) == env.pull(s, b));
}

TEST_CASE("query limits") {
  const SyntheticEnv strict(SyntheticParams::evenly_spaced(5), 2);
  const SyntheticEnv wide(SyntheticParams::evenly_spaced(5), 2, QueryLimit::muras_compatible);
  Rng rng(3);
  const std::vector<Arm> three{0, 1, 2};
  CHECK(strict.max_query_size() == 2);
  CHECK(wide.max_query_size() == 3);
  CHECK_THROWS_AS(strict.pull(three, rng), ContractViolation);
  CHECK_NOTHROW(wide.pull(three, rng));
  CHECK_THROWS_AS(wide.pull(std::vector<Arm>{0, 1, 2, 3}, rng), ContractViolation);
  CHECK_THROWS_AS(strict.pull(std::vector<Arm>{1, 1}, rng), ContractViolation);
  CHECK_THROWS_AS(strict.pull(std::vector<Arm>{5}, rng), ContractViolation);
  CHECK_THROWS_AS(strict.exact(three), ContractViolation);
}

TEST_CASE("ground truth game mirrors exact") {
  const SyntheticEnv env(SyntheticParams::evenly_spaced(5), 3);
  const RestrictedGame g = env.ground_truth_game();
  CHECK(g.arms() == 5);
  CHECK(g.budget() == 3);
  CHECK(g.value(Coalition{1, 4}) == env.exact(std::vector<Arm>{1, 4}));
  CHECK_THROWS_AS(g.value(Coalition{0, 1, 2, 3}), ContractViolation);
}

TEST_CASE("evenly spaced parameters") {
  const SyntheticParams p = SyntheticParams::evenly_spaced(4);
  CHECK(p.means.front() == doctest::Approx(0.2));
  CHECK(p.means.back() == doctest::Approx(0.95));
  CHECK(p.noise_stds.front() == doctest::Approx(0.1));
  CHECK(p.noise_stds.back() == doctest::Approx(0.4));
  CHECK(p.means[1] == doctest::Approx(0.45));
}

TEST_CASE("invalid synthetic parameters") {
  CHECK_THROWS_AS(SyntheticEnv(params({0.2, 0.3}, {0.1}), 1), ContractViolation);
  CHECK_THROWS_AS(SyntheticEnv(params({0.2, -0.3}, {0.1, 0.1}), 1), ContractViolation);
  CHECK_THROWS_AS(SyntheticEnv(params({0.2, 0.3}, {0.1, -0.1}), 1), ContractViolation);
  CHECK_THROWS_AS(SyntheticEnv(params({0.0, 0.0}, {0.1, 0.1}), 1), ContractViolation);
  CHECK_THROWS_AS(SyntheticEnv(params({0.2, 0.3}, {0.1, 0.1}, 0.0), 1), ContractViolation);
  CHECK_THROWS_AS(SyntheticEnv(params({0.2, 0.3}, {0.1, 0.1}), 3), ContractViolation);
  CHECK_THROWS_AS(SyntheticEnv(params({0.2, 0.3}, {0.1, 0.1}), 0), ContractViolation);
}
