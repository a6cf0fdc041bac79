#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "speq/alpha_stage.hpp"
#include "speq/linear_oracle.hpp"
#include "test_support.hpp"

using namespace speq;
using speq::testing::near;

TEST_CASE("licensed-band threshold") {
  CHECK(compute_B_threshold(IncumbentCount::unbounded()) == 2.0);
  CHECK(near(compute_B_threshold(IncumbentCount::finite(2)), 2.9513730355914414, 1e-9));

  double t2 = compute_B_threshold(IncumbentCount::finite(2));
  double t3 = compute_B_threshold(IncumbentCount::finite(3));
  double t8 = compute_B_threshold(IncumbentCount::finite(8));
  double t50 = compute_B_threshold(IncumbentCount::finite(50));
  CHECK(t2 > t3);
  CHECK(t3 > t8);
  CHECK(t8 > t50);
  CHECK(t50 > 2.0);
  CHECK(t50 < 2.05);

  CHECK_THROWS_AS(compute_B_threshold(IncumbentCount::finite(1)), std::invalid_argument);
}

TEST_CASE("profit-optimal bundling fraction, uncongested shared band") {
  auto inf = IncumbentCount::unbounded();

  auto r1 = profit_optimal_alpha_winf(inf, 1.0);
  CHECK(near(r1.alpha_star, 1.0 - std::sqrt(0.5), 1e-15));
  CHECK(near(r1.price, 0.25, 1e-15));
  CHECK(near(r1.total_mass, 0.5, 1e-15));
  CHECK(near(r1.social_welfare, 0.25, 1e-15));
  CHECK(r1.per_mass == 0.0);
  CHECK(r1.per_profit == 0.0);

  // Above the threshold the optimum is the corner alpha = 0.
  auto r3 = profit_optimal_alpha_winf(inf, 3.0);
  CHECK(r3.alpha_star == 0.0);
  CHECK(near(r3.price, 0.2, 1e-15));
  CHECK(near(r3.total_mass, 0.6, 1e-15));
  CHECK(near(r3.social_welfare, 0.3, 1e-15));

  auto two = IncumbentCount::finite(2);
  auto r2 = profit_optimal_alpha_winf(two, 1.0);
  double k = 1.0 / compute_B_threshold(two);
  CHECK(near(r2.alpha_star, 1.0 - std::sqrt(k), 1e-9));
  CHECK(near(r2.price, k / (2.0 * k + 0.5), 1e-9));
  CHECK(near(r2.total_mass, 2.0 * r2.per_mass, 1e-15));
  CHECK(near(r2.per_profit, r2.price * r2.per_mass, 1e-15));

  // The limit formulas match a brute equilibrium at very large finite W.
  auto eq = find_equilibrium(make_symmetric_bundled(2, 1.0, r2.alpha_star, Bandwidth::finite(1e7)));
  REQUIRE(eq.converged);
  CHECK(near(eq.prices.price[0], r2.price, 1e-6));
  CHECK(near(eq.welfare.profit[0], r2.per_profit, 1e-6));
}

TEST_CASE("welfare gap closed forms") {
  auto inf = IncumbentCount::unbounded();
  auto winf = Bandwidth::unbounded();
  CHECK(welfare_gap(inf, 0.5, winf) == 0.25);
  CHECK(welfare_gap(inf, 1.0, winf) == 0.25);
  CHECK(welfare_gap(inf, 2.0, winf) == 0.25);
  CHECK(welfare_gap(inf, 3.0, winf) == 0.2);
  CHECK(welfare_gap(inf, 4.0, winf) == 1.0 / 6.0);

  double g2 = welfare_gap(IncumbentCount::finite(2), 1.0, winf);
  CHECK(near(g2, 0.5 - profit_optimal_alpha_winf(IncumbentCount::finite(2), 1.0).social_welfare,
             1e-15));
  CHECK(g2 > 0.19);
  CHECK(g2 < 0.22);
}

TEST_CASE("welfare gap trends with the number of incumbents") {
  auto winf = Bandwidth::unbounded();
  double lo[4], hi[4];
  int ms[4] = {2, 4, 8, 16};
  for (int i = 0; i < 4; ++i) {
    lo[i] = welfare_gap(IncumbentCount::finite(ms[i]), 1.0, winf);
    hi[i] = welfare_gap(IncumbentCount::finite(ms[i]), 4.0, winf);
  }
  // Small total band: more competitors widen the gap toward the 1/4 cap.
  CHECK(lo[0] < lo[1]);
  CHECK(lo[1] < lo[2]);
  CHECK(lo[2] < lo[3]);
  CHECK(lo[3] < 0.25);
  // Large total band: more competitors shrink it toward 1/(2+B).
  CHECK(hi[0] > hi[1]);
  CHECK(hi[1] > hi[2]);
  CHECK(hi[2] > hi[3]);
  CHECK(hi[3] > 1.0 / 6.0);
}

TEST_CASE("welfare gap numeric path") {
  auto two = IncumbentCount::finite(2);
  double analytic = welfare_gap(two, 1.0, Bandwidth::unbounded());
  double numeric = welfare_gap(two, 1.0, Bandwidth::finite(1e6));
  CHECK(near(numeric, analytic, 1e-3));

  double small_w = welfare_gap(two, 1.0, Bandwidth::finite(0.5));
  CHECK(small_w >= 0.0);
  CHECK(small_w <= 0.25 + 1e-6);
  double mid = welfare_gap(IncumbentCount::finite(3), 2.0, Bandwidth::finite(2.0));
  CHECK(mid >= 0.0);
  CHECK(mid <= 0.25 + 1e-6);
}

TEST_CASE("grid optimisation of the bundling fraction") {
  // Monopolist: closed-form optimum alpha* = W/(B+W) and the fused-band profit.
  auto mono = make_bundled({1.0}, 0, 0.0, Bandwidth::finite(1.0));
  auto res = optimize_alpha(mono, AlphaObjective::Profit);
  CHECK(res.samples.size() == 201);
  CHECK(res.samples.front().alpha == 0.0);
  CHECK(near(res.samples.back().alpha, 1.0 - 1e-9, 1e-12));
  CHECK(res.failures == 0);
  CHECK(near(res.alpha_star, monopoly_alpha_star(1.0, 1.0), 1e-5));
  CHECK(near(res.value, monopoly_combined(1.0, 1.0).profit, 1e-8));

  // Duopoly at a huge shared band: grid optimum matches the limit formula.
  auto duo = make_symmetric_bundled(2, 1.0, 0.0, Bandwidth::finite(1e6));
  auto prof = optimize_alpha(duo, AlphaObjective::Profit);
  auto limit = profit_optimal_alpha_winf(IncumbentCount::finite(2), 1.0);
  CHECK(near(prof.alpha_star, limit.alpha_star, 2e-3));
  CHECK(near(prof.value, limit.per_profit, 1e-4));

  // Welfare pushes toward full sharing when the shared band is effectively free.
  auto welf = optimize_alpha(duo, AlphaObjective::Welfare);
  CHECK(welf.alpha_star >= 0.98);
  CHECK(near(welf.value, 0.5, 1e-3));
}

TEST_CASE("bundling advantage threshold") {
  double th = bundling_advantage_threshold(2, 2.0, 1.0);
  CHECK(th > 0.0);
  CHECK(th < 1.0);

  auto gap = [](double a) {
    auto bundled = find_equilibrium(make_symmetric_bundled(2, 2.0, a, Bandwidth::finite(1.0)));
    REQUIRE(bundled.converged);
    // Same split sold unbundled: the ceded spectrum joins the open band.
    auto unb = find_equilibrium(
        make_unbundled({1.0 - a, 1.0 - a}, 0, Bandwidth::finite(1.0 + 2.0 * a)));
    REQUIRE(unb.converged);
    return bundled.welfare.profit[0] - unb.welfare.profit[0];
  };

  CHECK(gap(0.02) > 0.0);
  CHECK(std::abs(gap(th)) <= 1e-5);
  if (th > 0.12) CHECK(gap(th - 0.1) > 0.0);
  CHECK(gap(std::min(th + 0.1, 0.97)) < 0.0);
}
