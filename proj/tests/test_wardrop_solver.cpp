#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "speq/wardrop_solver.hpp"
#include "test_support.hpp"

using namespace speq;
using speq::testing::near;

namespace {

// Every complementarity condition, recomputed here from first principles.
void check_complementarity(const MarketConfig& cfg, const PriceProfile& p,
                           const WardropSolution& s, double tol) {
  double P = cfg.demand.price(s.alloc.total());
  for (int i = 0; i < cfg.provider_count(); ++i) {
    auto d = delivered_price(cfg, p, s.alloc, i);
    if (d.primary) {
      double m = s.alloc.mass[i];
      if (m > 1e-10) {
        CHECK(near(*d.primary, P, tol));
      } else {
        CHECK(*d.primary >= P - tol);
      }
    }
    if (d.unlicensed) {
      double m = s.alloc.unlicensed[i];
      if (m > 1e-10) {
        CHECK(near(*d.unlicensed, P, tol));
      } else {
        CHECK(*d.unlicensed >= P - tol);
      }
    }
  }
}

}  // namespace

TEST_CASE("descent solve: bundled monopoly point") {
  auto cfg = make_bundled({1.0}, 0, 0.5, Bandwidth::finite(1.0));
  PriceProfile p{{0.25}, {}};
  auto s = solve_wardrop(cfg, p);
  REQUIRE(s.converged);
  CHECK(near(s.alloc.mass[0], 0.5, 1e-9));
  CHECK(s.max_residual <= 1e-9);
  CHECK(near(s.delivered, 0.5, 1e-9));
}

TEST_CASE("descent solve: choke prices serve nobody") {
  auto cfg = make_bundled({1.0, 2.0}, 1, 0.3, Bandwidth::finite(1.0));
  PriceProfile p{{1.0, 1.0, 1.0}, {}};
  auto s = solve_wardrop(cfg, p);
  REQUIRE(s.converged);
  CHECK(s.alloc.total() == 0.0);
  CHECK(s.max_residual <= 1e-9);
}

TEST_CASE("descent solve: unbundled fixed prices hit the closed-form split") {
  auto cfg = make_unbundled({1.0}, 1, Bandwidth::finite(1.0));
  PriceProfile p{{0.25, 0.0}, {0.0, 0.0}};
  auto s = solve_wardrop(cfg, p);
  REQUIRE(s.converged);
  CHECK(near(s.alloc.mass[0], 1.0 / 6.0, 1e-9));
  double xu = s.alloc.unlicensed[0] + s.alloc.unlicensed[1];
  CHECK(near(xu, 5.0 / 12.0, 1e-9));
  CHECK(near(s.delivered, 5.0 / 12.0, 1e-9));
  check_complementarity(cfg, p, s, 1e-9);
}

TEST_CASE("direct solve: two symmetric incumbents") {
  auto cfg = make_bundled({1.0, 1.0}, 0, 0.0, Bandwidth::finite(1.0));
  PriceProfile p{{1.0 / 3.0, 1.0 / 3.0}, {}};
  auto s = wardrop_linear_direct(cfg, p);
  REQUIRE(s.converged);
  CHECK(near(s.alloc.mass[0], 2.0 / 9.0, 1e-12));
  CHECK(near(s.alloc.mass[1], 2.0 / 9.0, 1e-12));
  CHECK(s.max_residual <= 1e-12);
}

TEST_CASE("direct solve: provider priced at the intercept is dropped") {
  auto cfg = make_bundled({1.0, 1.0}, 0, 0.0, Bandwidth::finite(1.0));
  PriceProfile p{{0.2, 1.0}, {}};
  auto s = wardrop_linear_direct(cfg, p);
  REQUIRE(s.converged);
  CHECK(s.alloc.mass[1] == 0.0);
  CHECK(s.alloc.mass[0] > 0.0);
  check_complementarity(cfg, p, s, 1e-12);
  // Same through the descent path.
  auto sd = solve_wardrop(cfg, p);
  CHECK(near(sd.alloc.mass[0], s.alloc.mass[0], 1e-8));
}

TEST_CASE("direct solve rejects non-linear configs") {
  auto cfg = make_bundled({1.0}, 0, 0.0, Bandwidth::finite(1.0));
  cfg.congestion = {CongestionFunction::Kind::Power, 1.0, 2.0};
  PriceProfile p{{0.2}, {}};
  CHECK_THROWS_AS(wardrop_linear_direct(cfg, p), std::invalid_argument);
}

TEST_CASE("solvers require finite W") {
  auto cfg = make_bundled({1.0}, 0, 0.5, Bandwidth::unbounded());
  PriceProfile p{{0.2}, {}};
  CHECK_THROWS_AS(solve_wardrop(cfg, p), std::invalid_argument);
  CHECK_THROWS_AS(wardrop_linear_direct(cfg, p), std::invalid_argument);
}

TEST_CASE("cross-solver agreement on random linear configs") {
  auto gen = speq::testing::rng(2024);
  for (int t = 0; t < 60; ++t) {
    MarketConfig cfg;
    int mode = speq::testing::uniform_int(gen, 0, 2);
    int m = speq::testing::uniform_int(gen, 1, 4);
    std::vector<double> bands;
    for (int i = 0; i < m; ++i) bands.push_back(speq::testing::uniform(gen, 0.2, 4.0));
    double W = speq::testing::uniform(gen, 0.25, 8.0);
    if (mode == 0) {
      cfg = make_bundled(bands, speq::testing::uniform_int(gen, 0, 2),
                         speq::testing::uniform(gen, 0.0, 0.9), Bandwidth::finite(W));
    } else if (mode == 1) {
      cfg = make_unbundled(bands, speq::testing::uniform_int(gen, 0, 2), Bandwidth::finite(W));
    } else {
      cfg = make_exclusive(bands, W);
    }
    auto p = speq::testing::random_prices(gen, cfg);
    auto a = solve_wardrop(cfg, p);
    auto b = wardrop_linear_direct(cfg, p);
    REQUIRE(a.converged);
    REQUIRE(b.converged);
    CHECK(a.max_residual <= 1e-9);
    CHECK(b.max_residual <= 1e-9);
    for (int i = 0; i < cfg.provider_count(); ++i) {
      CHECK(near(a.alloc.mass[i], b.alloc.mass[i], 1e-8));
      if (!a.alloc.unlicensed.empty()) {
        CHECK(near(a.alloc.unlicensed[i], b.alloc.unlicensed[i], 1e-8));
      }
    }
  }
}

TEST_CASE("solution is independent of the descent start") {
  auto gen = speq::testing::rng(5150);
  for (int t = 0; t < 25; ++t) {
    auto cfg = speq::testing::random_bundled(gen);
    auto p = speq::testing::random_prices(gen, cfg);
    auto a = solve_wardrop(cfg, p);
    Allocation warm{std::vector<double>(cfg.provider_count(),
                                        cfg.demand.max_quantity() / (2.0 * cfg.provider_count())),
                    {}};
    WardropOptions opt;
    opt.start = &warm;
    auto b = solve_wardrop(cfg, p, opt);
    REQUIRE(a.converged);
    REQUIRE(b.converged);
    for (int i = 0; i < cfg.provider_count(); ++i) {
      CHECK(near(a.alloc.mass[i], b.alloc.mass[i], 1e-8));
    }
  }
}

TEST_CASE("raising one price sheds own mass and feeds rivals") {
  auto gen = speq::testing::rng(99);
  for (int t = 0; t < 25; ++t) {
    auto cfg = speq::testing::random_bundled(gen, 4);
    auto p = speq::testing::random_prices(gen, cfg, 0.5);
    auto s0 = wardrop_linear_direct(cfg, p);
    int i = speq::testing::uniform_int(gen, 0, cfg.provider_count() - 1);
    auto p2 = p;
    p2.price[i] += 0.05;
    auto s1 = wardrop_linear_direct(cfg, p2);
    CHECK(s1.alloc.mass[i] <= s0.alloc.mass[i] + 1e-12);
    for (int j = 0; j < cfg.provider_count(); ++j) {
      if (j != i) CHECK(s1.alloc.mass[j] >= s0.alloc.mass[j] - 1e-12);
    }
  }
}

TEST_CASE("bundled-with-entrants maps onto the unbundled system") {
  // One incumbent at price q, entrants free: while the entrants stay active, this
  // is identical to the unbundled market with licensed price q / (1-alpha) and
  // masses mapped by the bundling split.
  for (double alpha : {0.2, 0.35, 0.5}) {
    double B = 1.3, W = 0.9, q = 0.06;
    auto bun = make_bundled({B}, 2, alpha, Bandwidth::finite(W));
    PriceProfile bp{{q, 0.0, 0.0}, {}};
    auto bs = wardrop_linear_direct(bun, bp);
    REQUIRE(bs.converged);

    double x1 = bs.alloc.mass[0];
    double entrants = bs.alloc.mass[1] + bs.alloc.mass[2];
    REQUIRE(entrants > 0.0);  // the identity's precondition

    auto unb = make_unbundled({B}, 1, Bandwidth::finite(W));
    PriceProfile up{{q / (1.0 - alpha), 0.0}, {0.0, 0.0}};
    auto us = wardrop_linear_direct(unb, up);
    REQUIRE(us.converged);

    CHECK(near(us.alloc.mass[0], (1.0 - alpha) * x1, 1e-9));
    double xu = us.alloc.unlicensed[0] + us.alloc.unlicensed[1];
    CHECK(near(xu, alpha * x1 + entrants, 1e-9));
    CHECK(near(us.alloc.total(), bs.alloc.total(), 1e-9));
  }

  // At high alpha the forced mix overloads the shared band: entrants are priced
  // out and the mapping's precondition fails, so no equivalence is asserted.
  {
    double B = 1.3, W = 0.9, q = 0.06;
    auto bun = make_bundled({B}, 2, 0.8, Bandwidth::finite(W));
    PriceProfile bp{{q, 0.0, 0.0}, {}};
    auto bs = wardrop_linear_direct(bun, bp);
    REQUIRE(bs.converged);
    CHECK(bs.alloc.mass[1] == 0.0);
    CHECK(bs.alloc.mass[2] == 0.0);
    double x1 = bs.alloc.mass[0];
    // Shared congestion alone already exceeds the market delivered price.
    CHECK(0.8 * x1 / W >= 1.0 - x1);
  }
}

TEST_CASE("equal-priced sellers on the shared band: deterministic tie handling") {
  auto cfg = make_bundled({1.0}, 2, 0.4, Bandwidth::finite(1.0));
  PriceProfile p{{0.1, 0.05, 0.05}, {}};
  auto a = solve_wardrop(cfg, p);
  auto b = wardrop_linear_direct(cfg, p);
  REQUIRE(a.converged);
  REQUIRE(b.converged);
  // The first equally-priced entrant carries the shared mass; the duplicate is a
  // flagged boundary tie with zero mass.
  CHECK(a.alloc.mass[2] <= 1e-9);
  CHECK(b.alloc.mass[2] == 0.0);
  CHECK(a.alloc.mass[1] > 0.0);
  CHECK(near(a.alloc.mass[1], b.alloc.mass[1], 1e-8));
  CHECK(b.boundary_ties >= 1);
}

TEST_CASE("power congestion through the descent solver") {
  auto cfg = make_bundled({1.0, 2.0}, 1, 0.5, Bandwidth::finite(2.0));
  cfg.congestion = {CongestionFunction::Kind::Power, 1.0, 2.0};
  PriceProfile p{{0.15, 0.1, 0.2}, {}};
  auto s = solve_wardrop(cfg, p);
  REQUIRE(s.converged);
  CHECK(s.max_residual <= 1e-9);
  check_complementarity(cfg, p, s, 1e-8);
}

TEST_CASE("price sensitivity: single incumbent slope is -1/2") {
  auto cfg = make_bundled({1.0}, 0, 0.0, Bandwidth::finite(1.0));
  PriceProfile p{{0.5}, {}};
  auto s = wardrop_linear_direct(cfg, p);
  REQUIRE(near(s.alloc.mass[0], 0.25, 1e-12));
  CHECK(near(price_sensitivity(cfg, p, s, 0), -0.5, 1e-12));
}

TEST_CASE("price sensitivity matches finite differences and stays negative") {
  auto gen = speq::testing::rng(31337);
  for (int t = 0; t < 20; ++t) {
    auto cfg = speq::testing::random_bundled(gen, 4, 0.85);
    auto p = speq::testing::random_prices(gen, cfg, 0.3);
    auto s = wardrop_linear_direct(cfg, p);
    int i = speq::testing::uniform_int(gen, 0, cfg.provider_count() - 1);
    if (s.alloc.mass[i] <= 1e-6) continue;
    double grad = price_sensitivity(cfg, p, s, i);
    CHECK(grad < 0.0);
    double h = 1e-6;
    auto pp = p;
    pp.price[i] += h;
    auto pm = p;
    pm.price[i] -= h;
    double fd =
        (wardrop_linear_direct(cfg, pp).alloc.mass[i] - wardrop_linear_direct(cfg, pm).alloc.mass[i]) /
        (2.0 * h);
    CHECK(near(grad, fd, 1e-5));
  }
}

TEST_CASE("price sensitivity requires an active provider") {
  auto cfg = make_bundled({1.0, 1.0}, 0, 0.0, Bandwidth::finite(1.0));
  PriceProfile p{{0.2, 1.0}, {}};
  auto s = wardrop_linear_direct(cfg, p);
  CHECK_THROWS_AS(price_sensitivity(cfg, p, s, 1), std::invalid_argument);
}
