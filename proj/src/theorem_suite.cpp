#include "speq/theorem_suite.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"
#include "speq/alpha_stage.hpp"
#include "speq/linear_oracle.hpp"
#include "speq/market_model.hpp"
#include "speq/nash_solver.hpp"
#include "speq/wardrop_solver.hpp"

namespace speq {
namespace {

struct Reporter {
  bool pass = true;
  std::string detail;

  void note(const std::string& s) {
    if (!detail.empty()) detail += "; ";
    detail += s;
  }
  void expect(bool ok, const std::string& what) {
    note(what + (ok ? "" : " [VIOLATED]"));
    if (!ok) pass = false;
  }
  void near(double got, double want, double tol, const char* label) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s=%.10g (want %.10g, tol %g)", label, got, want, tol);
    expect(std::abs(got - want) <= tol, buf);
  }
  void le(double got, double cap, const char* label) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s=%.10g (cap %.10g)", label, got, cap);
    expect(got <= cap, buf);
  }
};

// Two private bands: numeric equilibrium against the closed form, and the
// (1, 1) constants. The mutation self-test perturbs the expected price.
void check_exclusive_duopoly(Reporter& r, bool mutate) {
  const double expected_price = 1.0 / 3.0 + (mutate ? 1e-3 : 0.0);
  auto closed = exclusive_use_equilibrium(1.0, 1.0);
  r.near(closed.price[0], expected_price, 1e-9, "closed p1");
  r.near(closed.price[1], expected_price, 1e-9, "closed p2");

  auto eq = find_equilibrium(make_exclusive({1.0}, 1.0));
  r.expect(eq.converged, "equilibrium converged");
  r.near(eq.prices.price[0], expected_price, 1e-6, "p1");
  r.near(eq.prices.price[1], expected_price, 1e-6, "p2");
  r.near(eq.welfare.profit[0], closed.profit[0], 1e-6, "profit1");
  r.near(eq.welfare.profit[1], closed.profit[1], 1e-6, "profit2");
  r.near(eq.solution.alloc.mass[0], closed.mass[0], 1e-6, "mass1");
  r.near(eq.welfare.profit[0], 2.0 / 27.0, mutate ? 1e-3 + 1e-6 : 1e-6, "profit vs 2/27");
  r.le(eq.eps_ne, 1e-7, "eps_ne");
}

// Profit-optimal bundling fraction of the 1v1 market in the near-uncongested
// regime, against the closed-form limit.
void check_profit_alpha(Reporter& r) {
  const Bandwidth W = Bandwidth::finite(1e6);
  {
    auto opt = optimize_alpha(make_bundled({1.0}, 1, 0.0, W), AlphaObjective::Profit);
    r.near(opt.alpha_star, 1.0 - std::sqrt(3.0) / 2.0, 1e-3, "alpha* (B=1)");
    r.near(opt.value, 1.0 / 48.0, 1e-4, "profit at alpha* (B=1)");
    r.expect(opt.failures == 0, "every grid equilibrium converged (B=1)");
    auto cfg = make_bundled({1.0}, 1, opt.alpha_star, W);
    auto eq = find_equilibrium(cfg);
    r.le(eq.eps_ne, 1e-7, "eps_ne at alpha* (B=1)");
  }
  {
    auto opt = optimize_alpha(make_bundled({2.0}, 1, 0.0, W), AlphaObjective::Profit);
    r.le(opt.alpha_star, 1e-3, "alpha* (B=2)");
    r.near(opt.value, 0.02, 1e-4, "profit at alpha* (B=2)");
    auto eq = find_equilibrium(make_bundled({2.0}, 1, opt.alpha_star, W));
    r.le(eq.eps_ne, 1e-7, "eps_ne at alpha* (B=2)");
  }
}

// Welfare sacrificed by profit-optimal bundling: exact closed forms in the
// double limit, and the large-M numeric market against the limit value.
void check_welfare_gap(Reporter& r) {
  for (double bt : {0.5, 1.0, 2.0, 4.0}) {
    const double got = welfare_gap(IncumbentCount::unbounded(), bt, Bandwidth::unbounded());
    const double want = 1.0 / (2.0 + std::max(2.0, bt));
    char buf[128];
    std::snprintf(buf, sizeof buf, "limit gap(B_t=%g)=%.12g equals %.12g", bt, got, want);
    r.expect(got == want, buf);
  }
  const double numeric = welfare_gap(IncumbentCount::finite(200), 1.0, Bandwidth::finite(1e6));
  r.near(numeric, 0.25, 2e-2, "gap(M=200, B_t=1, W=1e6)");
}

// Entry crossover of the bundled 1v1 market: the bundling fraction replicating
// the separate-service outcome, entrant activity on both sides of it.
void check_entry_crossover(Reporter& r) {
  auto u = unbundled_1v1_equilibrium(1.0, 1.0);
  r.near(u.alpha0, 5.0 / 7.0, 1e-12, "replicating fraction");
  auto eq = find_equilibrium(make_bundled({1.0}, 1, u.alpha0, Bandwidth::finite(1.0)));
  r.expect(eq.converged, "bundled equilibrium at the replicating fraction converged");
  r.near(eq.welfare.profit[0], 1.0 / 24.0, 1e-5, "incumbent profit there");
  r.le(eq.eps_ne, 1e-7, "eps_ne there");

  auto mid = find_equilibrium(make_bundled({1.0}, 1, 0.5, Bandwidth::finite(1.0)));
  r.expect(mid.converged, "equilibrium at alpha=0.5 converged");
  r.expect(mid.welfare.profit[1] > 1e-4, "entrant earns at alpha=0.5");
  r.le(mid.eps_ne, 1e-7, "eps_ne at alpha=0.5");
  auto hi = find_equilibrium(make_bundled({1.0}, 1, 0.8, Bandwidth::finite(1.0)));
  r.expect(hi.converged, "equilibrium at alpha=0.8 converged");
  r.le(hi.welfare.profit[1], 1e-6, "entrant profit at alpha=0.8");
  r.le(hi.eps_ne, 1e-7, "eps_ne at alpha=0.8");
}

// Bundled monopoly profit never exceeds the fused-band cap, and attains it at
// the closed-form bundling fraction.
void check_monopoly_cap(Reporter& r) {
  for (auto [B, W] : {std::pair{1.0, 1.0}, std::pair{3.0, 1.0}}) {
    const double cap = monopoly_combined(B, W).profit;
    const double astar = monopoly_alpha_star(B, W);
    double worst = -std::numeric_limits<double>::infinity();
    double worst_eps = 0.0;
    bool all_ok = true;
    for (int k = 0; k <= 100; ++k) {
      auto eq = find_equilibrium(make_bundled({B}, 0, double(k) / 100.0, Bandwidth::finite(W)));
      all_ok = all_ok && eq.converged;
      worst = std::max(worst, eq.welfare.profit[0] - cap);
      worst_eps = std::max(worst_eps, eq.eps_ne);
    }
    char buf[160];
    std::snprintf(buf, sizeof buf, "all 101 grid equilibria converged (B=%g, W=%g)", B, W);
    r.expect(all_ok, buf);
    std::snprintf(buf, sizeof buf, "max profit minus cap (B=%g, W=%g)", B, W);
    r.le(worst, 1e-9, buf);
    r.le(worst_eps, 1e-7, "max eps_ne over the grid");
    auto at_star = find_equilibrium(make_bundled({B}, 0, astar, Bandwidth::finite(W)));
    std::snprintf(buf, sizeof buf, "profit at the cap-attaining fraction (B=%g, W=%g)", B, W);
    r.near(at_star.welfare.profit[0], cap, 1e-7, buf);
  }
}

// Sign of the incumbent's profit slope in the bundling fraction at zero, against
// the band-size predicate, via a one-sided difference quotient.
void check_profit_slope(Reporter& r) {
  const double h = 1e-4;
  int tested = 0;
  bool all_signs = true;
  for (double B : {1.0, 4.0 / 3.0, 2.0, 3.0}) {
    for (double W : {0.5, 1.0, 2.0, 4.0}) {
      const double boundary = 4.0 * (1.0 + W) / (3.0 * W);
      if (std::abs(B - boundary) < 0.05) continue;
      auto lo = find_equilibrium(make_bundled({B}, 1, 0.0, Bandwidth::finite(W)));
      auto hi = find_equilibrium(make_bundled({B}, 1, 2.0 * h, Bandwidth::finite(W)));
      if (!lo.converged || !hi.converged) {
        all_signs = false;
        continue;
      }
      const double slope = (hi.welfare.profit[0] - lo.welfare.profit[0]) / (2.0 * h);
      const bool want_up = B < boundary;
      if ((slope > 0.0) != want_up) {
        all_signs = false;
        char buf[160];
        std::snprintf(buf, sizeof buf, "sign mismatch at B=%g, W=%g (slope %.3g)", B, W, slope);
        r.expect(false, buf);
      }
      ++tested;
    }
  }
  char buf[120];
  std::snprintf(buf, sizeof buf, "slope sign matches the band predicate on %d grid points",
                tested);
  r.expect(all_signs && tested >= 14, buf);
}

// Randomised sign-pattern sweep of the inverse allocation matrix.
void check_supermodular_random(Reporter& r) {
  std::mt19937_64 gen(7251);
  std::uniform_real_distribution<double> band(0.1, 5.0);
  std::uniform_real_distribution<double> wdist(0.1, 10.0);
  std::uniform_real_distribution<double> adist(0.0, 0.99);
  std::uniform_int_distribution<int> mdist(1, 5);
  int ok = 0;
  for (int it = 0; it < 200; ++it) {
    const int m = mdist(gen);
    std::vector<double> bands;
    for (int i = 0; i < m; ++i) bands.push_back(band(gen));
    auto cfg = make_bundled(bands, 0, adist(gen), Bandwidth::finite(wdist(gen)));
    if (check_supermodularity(cfg)) ++ok;
  }
  char buf[120];
  std::snprintf(buf, sizeof buf, "%d/200 random markets have the complementarity sign pattern",
                ok);
  r.expect(ok == 200, buf);
}

// A huge shared band behaves like rescaled private bands with no sharing.
void check_band_expansion(Reporter& r) {
  auto base = make_bundled({1.0, 2.0}, 0, 0.5, Bandwidth::unbounded());
  auto equiv = band_expansion_equivalent(base);
  r.near(equiv.providers[0].licensed_bandwidth, 4.0, 1e-12, "scaled band 1");
  r.near(equiv.providers[1].licensed_bandwidth, 8.0, 1e-12, "scaled band 2");

  auto wide = find_equilibrium(make_bundled({1.0, 2.0}, 0, 0.5, Bandwidth::finite(1e8)));
  auto flat = find_equilibrium(equiv);
  r.expect(wide.converged && flat.converged, "both equilibria converged");
  r.near(wide.prices.price[0], flat.prices.price[0], 1e-4, "price 1");
  r.near(wide.prices.price[1], flat.prices.price[1], 1e-4, "price 2");
  r.near(wide.solution.alloc.mass[0], flat.solution.alloc.mass[0], 1e-4, "mass 1");
  r.near(wide.solution.alloc.mass[1], flat.solution.alloc.mass[1], 1e-4, "mass 2");
  r.le(wide.eps_ne, 1e-7, "eps_ne (wide band)");
  r.le(flat.eps_ne, 1e-7, "eps_ne (rescaled)");
}

// Symmetric-market price closed form against the numeric equilibrium.
void check_symmetric_formula(Reporter& r) {
  double worst_price = 0.0, worst_eps = 0.0;
  bool all_ok = true;
  int count = 0;
  for (int M : {2, 3, 5}) {
    for (double Bt : {1.0, 2.0, 4.0}) {
      for (double W : {0.5, 1.0, 4.0}) {
        for (double a : {0.0, 0.3, 0.7}) {
          auto closed = symmetric_bundled_equilibrium(M, Bt, W, a);
          auto eq = find_equilibrium(make_symmetric_bundled(M, Bt, a, Bandwidth::finite(W)));
          all_ok = all_ok && eq.converged;
          worst_price = std::max(worst_price, std::abs(eq.prices.price[0] - closed.price));
          worst_eps = std::max(worst_eps, eq.eps_ne);
          ++count;
        }
      }
    }
  }
  char buf[120];
  std::snprintf(buf, sizeof buf, "all %d equilibria converged", count);
  r.expect(all_ok, buf);
  r.le(worst_price, 1e-6, "max |closed - numeric| price gap");
  r.le(worst_eps, 1e-7, "max eps_ne");
}

// Per-provider profit, consumer surplus and social welfare all rise (weakly)
// with the shared band width.
void check_w_monotonicity(Reporter& r) {
  double prev_profit = -1.0, prev_cs = -1.0, prev_sw = -1.0;
  bool mono = true, all_ok = true;
  double worst_eps = 0.0;
  for (double W : {0.25, 0.5, 1.0, 2.0, 4.0, 8.0}) {
    auto eq = find_equilibrium(make_symmetric_bundled(3, 2.0, 0.4, Bandwidth::finite(W)));
    all_ok = all_ok && eq.converged;
    worst_eps = std::max(worst_eps, eq.eps_ne);
    const double profit = eq.welfare.profit[0];
    const double cs = eq.welfare.consumer_surplus;
    const double sw = eq.welfare.social_welfare;
    if (profit < prev_profit - 1e-9 || cs < prev_cs - 1e-9 || sw < prev_sw - 1e-9) mono = false;
    prev_profit = profit;
    prev_cs = cs;
    prev_sw = sw;
  }
  r.expect(all_ok, "all six equilibria converged");
  r.expect(mono, "profit, consumer surplus and welfare nondecreasing in W");
  r.le(worst_eps, 1e-7, "max eps_ne");
}

// With free competition on the shared band, its price competes to zero even
// when the solver does not pin it there.
void check_zero_unlicensed(Reporter& r) {
  NashOptions opt;
  opt.pin_unlicensed = false;
  auto eq = find_equilibrium(make_unbundled({1.0}, 1, Bandwidth::finite(1.0)), opt);
  r.expect(eq.converged, "free iteration converged");
  r.le(eq.prices.unlicensed[0], 1e-6, "incumbent shared-band price");
  r.le(eq.prices.unlicensed[1], 1e-6, "entrant shared-band price");
  r.le(eq.eps_ne, 1e-7, "eps_ne");
}

// Descent and direct allocation solvers agree on random markets and random
// prices across all three modes.
void check_solver_agreement(Reporter& r) {
  std::mt19937_64 gen(40921);
  auto uni = [&](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(gen);
  };
  std::uniform_int_distribution<int> mode_pick(0, 2);
  std::uniform_int_distribution<int> mcount(1, 4);
  std::uniform_int_distribution<int> ncount(0, 2);

  double worst_res = 0.0, worst_gap = 0.0;
  bool all_ok = true;
  for (int it = 0; it < 500; ++it) {
    const int mk = mode_pick(gen);
    const int m = mcount(gen);
    std::vector<double> bands;
    for (int i = 0; i < m; ++i) bands.push_back(uni(0.2, 4.0));
    MarketConfig cfg;
    if (mk == 0) {
      cfg = make_bundled(bands, ncount(gen), uni(0.0, 0.9), Bandwidth::finite(uni(0.25, 8.0)));
    } else if (mk == 1) {
      cfg = make_unbundled(bands, ncount(gen), Bandwidth::finite(uni(0.25, 8.0)));
    } else {
      cfg = make_exclusive(bands, uni(0.25, 8.0));
    }
    PriceProfile prices = zero_prices(cfg);
    for (auto& p : prices.price) p = uni(0.0, 0.9);
    for (auto& p : prices.unlicensed) p = uni(0.0, 0.9);

    auto a = solve_wardrop(cfg, prices);
    auto b = wardrop_linear_direct(cfg, prices);
    all_ok = all_ok && a.converged && b.converged;
    worst_res = std::max({worst_res, a.max_residual, b.max_residual});
    for (size_t i = 0; i < a.alloc.mass.size(); ++i) {
      worst_gap = std::max(worst_gap, std::abs(a.alloc.mass[i] - b.alloc.mass[i]));
    }
    for (size_t i = 0; i < a.alloc.unlicensed.size(); ++i) {
      worst_gap = std::max(worst_gap, std::abs(a.alloc.unlicensed[i] - b.alloc.unlicensed[i]));
    }
  }
  r.expect(all_ok, "both solvers converged on all 500 random markets");
  r.le(worst_res, 1e-9, "max residual");
  r.le(worst_gap, 1e-8, "max cross-solver mass gap");
}

struct Entry {
  const char* name;
  double budget_seconds;  // 0 = no runtime assertion
  std::function<void(Reporter&, const SuiteOptions&)> fn;
};

const std::vector<Entry>& registry() {
  static const std::vector<Entry> entries = {
      {"thm_exclusive_duopoly", 1.0,
       [](Reporter& r, const SuiteOptions& o) { check_exclusive_duopoly(r, o.mutate); }},
      {"thm12_profit_alpha", 30.0,
       [](Reporter& r, const SuiteOptions&) { check_profit_alpha(r); }},
      {"thm14_welfare_gap", 120.0,
       [](Reporter& r, const SuiteOptions&) { check_welfare_gap(r); }},
      {"thm2_entry_crossover", 0.0,
       [](Reporter& r, const SuiteOptions&) { check_entry_crossover(r); }},
      {"thm1_monopoly_cap", 0.0,
       [](Reporter& r, const SuiteOptions&) { check_monopoly_cap(r); }},
      {"thm4_profit_slope", 0.0,
       [](Reporter& r, const SuiteOptions&) { check_profit_slope(r); }},
      {"thm8_supermodularity", 0.0,
       [](Reporter& r, const SuiteOptions&) { check_supermodular_random(r); }},
      {"thm10_band_expansion", 0.0,
       [](Reporter& r, const SuiteOptions&) { check_band_expansion(r); }},
      {"symmetric_price_formula", 0.0,
       [](Reporter& r, const SuiteOptions&) { check_symmetric_formula(r); }},
      {"thm11_w_monotonicity", 0.0,
       [](Reporter& r, const SuiteOptions&) { check_w_monotonicity(r); }},
      {"lemma1_zero_unlicensed", 0.0,
       [](Reporter& r, const SuiteOptions&) { check_zero_unlicensed(r); }},
      {"solver_cross_checks", 0.0,
       [](Reporter& r, const SuiteOptions&) { check_solver_agreement(r); }},
  };
  return entries;
}

}  // namespace

std::vector<CheckResult> run_theorem_suite(const SuiteOptions& options) {
  std::vector<CheckResult> out;
  for (const auto& e : registry()) {
    if (!options.filter.empty() &&
        std::string(e.name).find(options.filter) == std::string::npos) {
      continue;
    }
    CheckResult res;
    res.name = e.name;
    Reporter r;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      e.fn(r, options);
    } catch (const std::exception& ex) {
      r.pass = false;
      r.note(std::string("exception: ") + ex.what());
    }
    const auto t1 = std::chrono::steady_clock::now();
    res.seconds = std::chrono::duration<double>(t1 - t0).count();
    if (e.budget_seconds > 0.0) {
      char buf[96];
      std::snprintf(buf, sizeof buf, "ran in %.2fs (budget %gs)", res.seconds, e.budget_seconds);
      r.expect(res.seconds < e.budget_seconds, buf);
    }
    res.pass = r.pass;
    res.detail = r.detail;
    out.push_back(std::move(res));
  }
  return out;
}

bool all_passed(const std::vector<CheckResult>& results) {
  return std::all_of(results.begin(), results.end(),
                     [](const CheckResult& c) { return c.pass; });
}

std::string suite_report_text(const std::vector<CheckResult>& results) {
  std::string out;
  for (const auto& c : results) {
    char buf[64];
    std::snprintf(buf, sizeof buf, " (%.2fs)\n    ", c.seconds);
    out += c.pass ? "[PASS] " : "[FAIL] ";
    out += c.name;
    out += buf;
    out += c.detail;
    out += '\n';
  }
  return out;
}

std::string suite_report_json(const std::vector<CheckResult>& results) {
  nlohmann::json j;
  j["all_passed"] = all_passed(results);
  j["checks"] = nlohmann::json::array();
  for (const auto& c : results) {
    j["checks"].push_back({{"name", c.name},
                           {"pass", c.pass},
                           {"seconds", c.seconds},
                           {"detail", c.detail}});
  }
  return j.dump(2) + "\n";
}

}  // namespace speq
