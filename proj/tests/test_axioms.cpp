#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "helpers.hpp"
#include "ksv/error.hpp"
#include "ksv/game.hpp"

using namespace ksv;
using testing::random_game;
using testing::table_game;

TEST_CASE("carrier game satisfies every axiom") {
  const RestrictedGame g = carrier_game(4, 2, Coalition{0, 1}, 1.0);
  const ShapleyVector phi = exact_k_shapley(g);
  const LinearityProbe probes[] = {{carrier_game(4, 2, Coalition{2}, 0.5), 0.4}};
  const AxiomReport r = verify_axioms(g, phi, 1e-12, probes);
  CHECK(r.all_ok());
  CHECK(r.max_violation < 1e-12);
  CHECK(r.linearity_checks == 1);
  // {0,1} are interchangeable, so are {2,3}; 2 and 3 are null.
  CHECK(r.symmetric_pairs == std::vector<std::pair<Arm, Arm>>{{0, 1}, {2, 3}});
  CHECK(r.null_players == std::vector<Arm>{2, 3});
}

TEST_CASE("additive game: both sides of K-efficiency equal the weight sum") {
  const std::vector<double> w{0.1, 0.15, 0.2, 0.25, 0.05};
  for (std::size_t k = 1; k <= 5; ++k) {
    const RestrictedGame g = additive_game(w, k);
    const ShapleyVector phi = exact_k_shapley(g);
    double lhs = 0.0;
    for (double v : phi.values) lhs += v;
    CHECK(lhs == doctest::Approx(0.75).epsilon(1e-13));
    CHECK(k_efficiency_target(g) == doctest::Approx(0.75).epsilon(1e-13));
    CHECK(verify_axioms(g, phi, 1e-12).k_efficiency_ok);
  }
}

TEST_CASE("K-efficiency on a frozen random game, both sides evaluated directly") {
  const unsigned m = 6, k = 3;
  const auto table = oracle::random_table(m, 2024);
  const RestrictedGame g = table_game(m, k, table);
  const ShapleyVector phi = exact_k_shapley(g);
  double lhs = 0.0;
  for (double v : phi.values) lhs += v;
  double rhs = 0.0;
  for (const auto& s : oracle::subsets_of_size(m, k)) rhs += table[oracle::mask_of(s)];
  rhs /= 10.0;  // C(5, 2)
  CHECK(std::abs(lhs - rhs) < 1e-9);
  CHECK(std::abs(k_efficiency_target(g) - rhs) < 1e-13);
  CHECK(verify_axioms(g, phi, 1e-9).all_ok());
}

TEST_CASE("linearity of the K-Shapley value") {
  const RestrictedGame g1 = random_game(5, 2, 31);
  const RestrictedGame g2 = random_game(5, 2, 32);
  const ShapleyVector a = exact_k_shapley(g1);
  const ShapleyVector b = exact_k_shapley(g2);
  const ShapleyVector at0 = exact_k_shapley(mixture_game(g1, g2, 0.0));
  const ShapleyVector at1 = exact_k_shapley(mixture_game(g1, g2, 1.0));
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(at0[i] == b[i]);
    CHECK(at1[i] == a[i]);
  }
  CHECK(linearity_deviation(g1, g2, 0.3) < 1e-12);
  CHECK(check_linearity(g1, g2, 0.3, 1e-12));
  CHECK_THROWS_AS(linearity_deviation(g1, random_game(6, 2, 1), 0.5), ContractViolation);
}

TEST_CASE("random games pass the axiom suite with probes") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const std::size_t m = 4 + seed % 5;
    const std::size_t k = 2 + seed % 3;
    const RestrictedGame g = random_game(m, k, seed);
    const LinearityProbe probes[] = {{random_game(m, k, 1000 + seed), 0.25},
                                     {carrier_game(m, k, Coalition{0, 1}, 0.7), 0.6}};
    const AxiomReport r = verify_axioms(g, exact_k_shapley(g), 1e-9, probes);
    CHECK(r.all_ok());
    CHECK(r.max_violation < 1e-9);
  }
}

TEST_CASE("a game with planted symmetric and null arms") {
  // Additive on f(w) with arms 1, 3 of equal weight and arm 4 dummy, plus
  // a pairwise synergy between 0 and 2.
  const RestrictedGame g(5, 3, [](std::span<const Arm> s) {
    const double w[5] = {0.1, 0.2, 0.15, 0.2, 0.0};
    double v = 0.0;
    bool has0 = false, has2 = false;
    for (Arm a : s) {
      v += w[a];
      has0 |= a == 0;
      has2 |= a == 2;
    }
    return v + (has0 && has2 ? 0.1 : 0.0);
  });
  const ShapleyVector phi = exact_k_shapley(g);
  const AxiomReport r = verify_axioms(g, phi, 1e-12);
  CHECK(r.all_ok());
  CHECK(r.null_players == std::vector<Arm>{4});
  const auto has_pair = [&](Arm i, Arm j) {
    return std::find(r.symmetric_pairs.begin(), r.symmetric_pairs.end(), std::pair{i, j}) !=
           r.symmetric_pairs.end();
  };
  CHECK(has_pair(1, 3));
  CHECK_FALSE(has_pair(0, 2));
}

TEST_CASE("wrong values are reported") {
  const RestrictedGame g = carrier_game(4, 2, Coalition{0, 1}, 1.0);
  ShapleyVector phi = exact_k_shapley(g);

  ShapleyVector asym = phi;
  asym.values[0] += 0.1;
  asym.values[1] -= 0.1;
  const AxiomReport r1 = verify_axioms(g, asym, 1e-9);
  CHECK_FALSE(r1.symmetry_ok);
  CHECK(r1.k_efficiency_ok);
  CHECK(r1.max_violation == doctest::Approx(0.2));

  ShapleyVector leaky = phi;
  leaky.values[2] = 0.05;
  leaky.values[0] -= 0.05;
  const AxiomReport r2 = verify_axioms(g, leaky, 1e-9);
  CHECK_FALSE(r2.null_player_ok);
  CHECK_FALSE(r2.symmetry_ok);

  ShapleyVector inflated = phi;
  for (double& v : inflated.values) v *= 1.1;
  CHECK_FALSE(verify_axioms(g, inflated, 1e-9).k_efficiency_ok);

  ShapleyVector short_phi = phi;
  short_phi.values.pop_back();
  CHECK_THROWS_AS(verify_axioms(g, short_phi, 1e-9), ContractViolation);
}

TEST_CASE("linearity is vacuous without probes") {
  const RestrictedGame g = random_game(4, 2, 9);
  const AxiomReport r = verify_axioms(g, exact_k_shapley(g), 1e-9);
  CHECK(r.linearity_ok);
  CHECK(r.linearity_checks == 0);
}
