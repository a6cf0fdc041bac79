#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "speq/linear_oracle.hpp"
#include "speq/nash_solver.hpp"
#include "test_support.hpp"

using namespace speq;
using speq::testing::near;

TEST_CASE("fused-band monopoly") {
  auto m = monopoly_combined(1.0, 1.0);
  CHECK(near(m.mass, 1.0 / 3.0, 1e-15));
  CHECK(near(m.profit, 1.0 / 6.0, 1e-15));
  CHECK(near(monopoly_combined(1.0, 3.0).profit, 0.2, 1e-15));
  // Congestion vanishes with unlimited spectrum; profit tends to the textbook 1/4.
  CHECK(near(monopoly_combined(1e12, 1.0).profit, 0.25, 1e-9));
  CHECK_THROWS_AS(monopoly_combined(0.0, 1.0), std::invalid_argument);
}

TEST_CASE("monopoly bundling fraction") {
  CHECK(near(monopoly_alpha_star(1.0, 1.0), 0.5, 1e-15));
  CHECK(near(monopoly_alpha_star(1.0, 3.0), 0.75, 1e-15));
  CHECK(near(monopoly_alpha_star(3.0, 1.0), 0.25, 1e-15));
}

TEST_CASE("bundled monopoly never beats the fused band, and touches it at alpha*") {
  for (auto [B, W] : {std::pair{1.0, 1.0}, std::pair{3.0, 1.0}}) {
    double cap = monopoly_combined(B, W).profit;
    for (int k = 0; k <= 100; ++k) {
      double a = k / 100.0;
      if (a == 1.0) a = 1.0 - 1e-9;
      CHECK(symmetric_bundled_equilibrium(1, B, W, a).per_profit <= cap + 1e-12);
    }
    double at_star = symmetric_bundled_equilibrium(1, B, W, monopoly_alpha_star(B, W)).per_profit;
    CHECK(near(at_star, cap, 1e-12));
  }
}

TEST_CASE("exclusive-use duopoly closed form") {
  auto r = exclusive_use_equilibrium(1.0, 1.0);
  REQUIRE(r.price.size() == 2);
  CHECK(near(r.price[0], 1.0 / 3.0, 1e-15));
  CHECK(near(r.price[1], 1.0 / 3.0, 1e-15));
  CHECK(near(r.mass[0], 2.0 / 9.0, 1e-15));
  CHECK(near(r.mass[1], 2.0 / 9.0, 1e-15));
  CHECK(near(r.profit[0], 2.0 / 27.0, 1e-15));
  CHECK(near(r.total_mass, 4.0 / 9.0, 1e-15));
  CHECK(near(r.consumer_surplus, 8.0 / 81.0, 1e-15));
  CHECK(near(r.social_welfare, 20.0 / 81.0, 1e-15));

  auto r31 = exclusive_use_equilibrium(3.0, 1.0);
  CHECK(near(r31.price[0], 9.0 / 29.0, 1e-15));
  CHECK(near(r31.price[1], 7.0 / 29.0, 1e-15));
  CHECK(near(r31.mass[0], 54.0 / 145.0, 1e-14));
  CHECK(near(r31.mass[1], 28.0 / 145.0, 1e-14));

  // Prices coincide exactly when the bands match.
  auto sym = exclusive_use_equilibrium(2.0, 2.0);
  CHECK(near(sym.price[0], sym.price[1], 1e-15));
  CHECK(std::abs(r31.price[0] - r31.price[1]) > 1e-3);
}

TEST_CASE("exclusive-use duopoly, uncongested entrant band") {
  auto r = exclusive_use_equilibrium_winf(1.0);
  CHECK(near(r.price[0], 1.0 / 7.0, 1e-15));
  CHECK(near(r.mass[0], 1.0 / 7.0, 1e-15));
  CHECK(near(r.price[1], 2.0 / 7.0, 1e-15));
  CHECK(near(r.mass[1], 4.0 / 7.0, 1e-15));
  CHECK(near(r.total_mass, 5.0 / 7.0, 1e-15));
  CHECK(near(r.consumer_surplus, 25.0 / 98.0, 1e-15));
  CHECK(near(r.social_welfare, 43.0 / 98.0, 1e-15));
  // Large finite W approaches the limit.
  auto big = exclusive_use_equilibrium(1.0, 1e8);
  CHECK(near(big.price[0], r.price[0], 1e-7));
  CHECK(near(big.social_welfare, r.social_welfare, 1e-6));
}

TEST_CASE("unbundled 1v1 closed form") {
  auto u = unbundled_1v1_equilibrium(1.0, 1.0);
  CHECK(near(u.licensed_price, 0.25, 1e-15));
  CHECK(near(u.licensed_mass, 1.0 / 6.0, 1e-15));
  CHECK(near(u.unlicensed_mass, 5.0 / 12.0, 1e-15));
  CHECK(near(u.profit, 1.0 / 24.0, 1e-15));
  CHECK(near(u.total_mass, 7.0 / 12.0, 1e-15));
  CHECK(near(u.delivered, 5.0 / 12.0, 1e-15));
  CHECK(near(u.consumer_surplus, 49.0 / 288.0, 1e-15));
  CHECK(near(u.social_welfare, 61.0 / 288.0, 1e-15));
  CHECK(near(u.alpha0, 5.0 / 7.0, 1e-15));
}

TEST_CASE("unbundled 1v1 limits") {
  auto tiny = unbundled_1v1_equilibrium(1.0, 1e-9);
  CHECK(tiny.unlicensed_mass <= 1e-8);
  CHECK(tiny.alpha0 <= 1e-8);

  auto big = unbundled_1v1_equilibrium(1.0, 1e9);
  CHECK(big.licensed_price <= 1e-6);

  auto lim = unbundled_1v1_equilibrium_winf(1.0);
  CHECK(lim.licensed_price == 0.0);
  CHECK(lim.licensed_mass == 0.0);
  CHECK(near(lim.unlicensed_mass, 1.0, 1e-15));
  CHECK(near(lim.consumer_surplus, 0.5, 1e-15));
  CHECK(near(lim.social_welfare, 0.5, 1e-15));
  CHECK(near(lim.alpha0, 1.0, 1e-15));
  CHECK(near(big.social_welfare, lim.social_welfare, 1e-6));
}

TEST_CASE("symmetric bundled equilibrium price") {
  auto s = symmetric_bundled_equilibrium(2, 2.0, 1.0, 0.0);
  CHECK(near(s.price, 1.0 / 3.0, 1e-15));
  CHECK(near(s.per_mass, 2.0 / 9.0, 1e-12));
  CHECK(near(s.per_profit, 2.0 / 27.0, 1e-12));
  CHECK(near(s.total_mass, s.total_mass_formula, 1e-12));

  // Frozen against an independent brute-force tatonnement oracle.
  auto f = symmetric_bundled_equilibrium(3, 2.0, 0.7, 0.3);
  CHECK(near(f.price, 0.197201993101, 2e-12));
  CHECK(near(f.total_mass, 0.584460327436, 2e-12));
  CHECK(near(f.total_mass, f.total_mass_formula, 1e-12));

  // Full bundling strips the licensed advantage and competition erases the price.
  auto edge = symmetric_bundled_equilibrium(2, 1.0, 1.0, 1.0 - 1e-6);
  CHECK(edge.price <= 1e-9);

  CHECK_THROWS_AS(symmetric_bundled_equilibrium(2, 2.0, 1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(symmetric_bundled_equilibrium(0, 2.0, 1.0, 0.5), std::invalid_argument);
}

TEST_CASE("symmetric closed form covers the monopolist") {
  auto s = symmetric_bundled_equilibrium(1, 1.0, 1.0, monopoly_alpha_star(1.0, 1.0));
  CHECK(near(s.price, 0.5, 1e-12));
  CHECK(near(s.per_profit, monopoly_combined(1.0, 1.0).profit, 1e-12));
}

TEST_CASE("bundled 1v1 in the uncongested-W limit") {
  auto r = one_v_one_winf(1.0, 0.0);
  CHECK(near(r.price[0], 1.0 / 7.0, 1e-15));
  CHECK(near(r.mass[0], 1.0 / 7.0, 1e-15));
  CHECK(near(r.profit[0], 1.0 / 49.0, 1e-15));
  CHECK(near(r.price[1], 2.0 / 7.0, 1e-15));
  CHECK(near(r.mass[1], 4.0 / 7.0, 1e-15));

  double astar = one_v_one_winf_alpha_star(1.0);
  CHECK(near(astar, 1.0 - std::sqrt(3.0) / 2.0, 1e-15));
  CHECK(near(one_v_one_winf(1.0, astar).profit[0], 1.0 / 48.0, 1e-15));

  CHECK(one_v_one_winf_alpha_star(2.0) == 0.0);
  CHECK(near(one_v_one_winf(2.0, 0.0).profit[0], 0.02, 1e-15));
  // Interior optimum exists exactly while B < 4/3.
  CHECK(one_v_one_winf_alpha_star(4.0 / 3.0) == 0.0);
  CHECK(one_v_one_winf_alpha_star(1.3) > 0.0);
}

TEST_CASE("band expansion equivalence") {
  CHECK(near(band_expansion_factor(0.5, 1.0), 4.0, 1e-15));
  CHECK(near(band_expansion_factor(0.0, 3.0), 1.0, 1e-15));
  CHECK(near(band_expansion_factor(0.5, 2.0), 8.0, 1e-15));

  auto cfg = make_bundled({1.0, 2.0}, 0, 0.5, Bandwidth::unbounded());
  auto eqv = band_expansion_equivalent(cfg);
  CHECK(eqv.alpha == 0.0);
  CHECK(near(eqv.providers[0].licensed_bandwidth, 4.0, 1e-15));
  CHECK(near(eqv.providers[1].licensed_bandwidth, 8.0, 1e-15));
  CHECK_FALSE(eqv.unlicensed.infinite);

  auto finite = make_bundled({1.0}, 0, 0.5, Bandwidth::finite(1.0));
  CHECK_THROWS_AS(band_expansion_equivalent(finite), std::invalid_argument);
}

TEST_CASE("oracle matches the numeric path: exclusive duopolies") {
  auto gen = speq::testing::rng(424242);
  for (int t = 0; t < 100; ++t) {
    double B = speq::testing::uniform(gen, 0.3, 3.0);
    double W = speq::testing::uniform(gen, 0.3, 3.0);
    auto oracle = exclusive_use_equilibrium(B, W);
    auto eq = find_equilibrium(make_exclusive({B}, W));
    REQUIRE(eq.converged);
    CHECK(near(eq.prices.price[0], oracle.price[0], 1e-6));
    CHECK(near(eq.prices.price[1], oracle.price[1], 1e-6));
    CHECK(near(eq.welfare.profit[0], oracle.profit[0], 1e-6));
    CHECK(near(eq.welfare.social_welfare, oracle.social_welfare, 1e-6));
  }
}

TEST_CASE("oracle matches the numeric path: unbundled 1v1") {
  auto gen = speq::testing::rng(31415);
  for (int t = 0; t < 100; ++t) {
    double B = speq::testing::uniform(gen, 0.3, 3.0);
    double W = speq::testing::uniform(gen, 0.3, 3.0);
    auto oracle = unbundled_1v1_equilibrium(B, W);
    auto eq = find_equilibrium(make_unbundled({B}, 1, Bandwidth::finite(W)));
    REQUIRE(eq.converged);
    CHECK(near(eq.prices.price[0], oracle.licensed_price, 1e-6));
    CHECK(near(eq.solution.alloc.mass[0], oracle.licensed_mass, 1e-6));
    double xu = eq.solution.alloc.unlicensed[0] + eq.solution.alloc.unlicensed[1];
    CHECK(near(xu, oracle.unlicensed_mass, 1e-6));
    CHECK(near(eq.welfare.profit[0], oracle.profit, 1e-6));
  }
}

TEST_CASE("oracle matches the numeric path: symmetric bundled incumbents") {
  auto gen = speq::testing::rng(8675309);
  for (int t = 0; t < 100; ++t) {
    int M = speq::testing::uniform_int(gen, 2, 5);
    double Bt = speq::testing::uniform(gen, 0.5, 4.0);
    double W = speq::testing::uniform(gen, 0.3, 3.0);
    double a = speq::testing::uniform(gen, 0.0, 0.9);
    auto oracle = symmetric_bundled_equilibrium(M, Bt, W, a);
    auto eq = find_equilibrium(make_symmetric_bundled(M, Bt, a, Bandwidth::finite(W)));
    REQUIRE(eq.converged);
    CHECK(near(eq.prices.price[0], oracle.price, 1e-6));
    CHECK(near(eq.welfare.profit[0], oracle.per_profit, 1e-6));
    CHECK(near(eq.welfare.total_mass, oracle.total_mass, 1e-6));
  }
}

TEST_CASE("holding spectrum beats renting it: incumbent side") {
  auto gen = speq::testing::rng(60601);
  for (int t = 0; t < 30; ++t) {
    double B = speq::testing::uniform(gen, 0.3, 3.0);
    double W = speq::testing::uniform(gen, 0.3, 3.0);
    CHECK(exclusive_use_equilibrium(B, W).profit[0] >=
          unbundled_1v1_equilibrium(B, W).profit - 1e-12);
  }
}

TEST_CASE("a little bundling raises consumer surplus and welfare over exclusive use") {
  auto gen = speq::testing::rng(1900);
  for (int t = 0; t < 10; ++t) {
    double B = speq::testing::uniform(gen, 0.5, 2.0);
    double W = speq::testing::uniform(gen, 0.5, 2.0);
    auto ex = exclusive_use_equilibrium(B, W);
    auto cfg = make_bundled({B}, 1, 0.02, Bandwidth::finite(W));
    auto eq = find_equilibrium(cfg);
    REQUIRE(eq.converged);
    CHECK(eq.welfare.consumer_surplus > ex.consumer_surplus);
    CHECK(eq.welfare.social_welfare > ex.social_welfare);
  }
}
