#include "speq/nash_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "numeric_util.hpp"

namespace speq {
namespace {

struct ScanResult {
  double price = 0.0;
  double profit = 0.0;
};

// Global grid scan over [0, cap] plus golden-section refinement of the best
// bracket. Ties (within 1e-14 of profit) resolve to the smallest price.
template <typename F>
ScanResult scan_refine(F&& profit_at, double cap, int grid_points, double golden_tol,
                       std::initializer_list<double> extras) {
  const int n = std::max(grid_points, 8);
  ScanResult best{0.0, -std::numeric_limits<double>::infinity()};
  auto offer = [&](double p, double v) {
    if (v > best.profit + 1e-14) {
      best = {p, v};
    } else if (v >= best.profit - 1e-14 && p < best.price) {
      best = {p, v};
    }
  };

  std::vector<double> grid;
  grid.reserve(size_t(n) + 20);
  for (int k = 0; k < n; ++k) grid.push_back(cap * double(k) / double(n - 1));
  // Narrow profit windows hide near zero when rivals are cheap and sellers are
  // weakly differentiated; a geometric tail keeps them bracketed.
  for (double p = 0.5 * cap; p > cap * 2e-6; p *= 0.5) grid.push_back(p);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  const int gn = int(grid.size());

  std::vector<double> val(grid.size());
  int gbest = 0;
  for (int k = 0; k < gn; ++k) {
    val[size_t(k)] = profit_at(grid[size_t(k)]);
    if (val[size_t(k)] > val[size_t(gbest)]) gbest = k;
  }

  double a = grid[size_t(std::max(gbest - 1, 0))];
  double b = grid[size_t(std::min(gbest + 1, gn - 1))];
  const double invphi = 0.6180339887498949;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = profit_at(c);
  double fd = profit_at(d);
  while (b - a > golden_tol) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = profit_at(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = profit_at(d);
    }
  }
  const double mid = 0.5 * (a + b);
  const double fmid = profit_at(mid);

  for (int k = 0; k < gn; ++k) offer(grid[size_t(k)], val[size_t(k)]);
  offer(c, fc);
  offer(d, fd);
  offer(mid, fmid);
  for (double p : extras) {
    if (p >= 0.0 && p <= cap) offer(p, profit_at(p));
  }
  return best;
}

}  // namespace

BestResponse best_response(const MarketConfig& config, const PriceProfile& prices, int provider,
                           const NashOptions& options) {
  if (provider < 0 || provider >= config.provider_count()) {
    throw std::invalid_argument("best response: provider index out of range");
  }
  const double cap = config.demand.intercept;
  PriceProfile work = prices;

  if (config.mode != MarketMode::Unbundled) {
    auto profit_at = [&](double p) {
      work.price[size_t(provider)] = p;
      auto sol = wardrop_solve_auto(config, work, options.wardrop);
      return p * sol.alloc.mass[size_t(provider)];
    };
    auto r = scan_refine(profit_at, cap, options.grid_points, options.golden_tol,
                         {0.0, prices.price[size_t(provider)]});
    if (r.profit <= 1e-14) return {};
    return {r.price, 0.0, r.profit};
  }

  // Unbundled: ascend the licensed and standalone unlicensed prices in turn.
  const bool incumbent = config.providers[size_t(provider)].role == Role::Incumbent;
  double pl = incumbent ? prices.price[size_t(provider)] : 0.0;
  double pu = prices.unlicensed[size_t(provider)];
  double best = 0.0;
  for (int pass = 0; pass < 40; ++pass) {
    const double prev_pl = pl, prev_pu = pu;
    if (incumbent) {
      auto fl = [&](double p) {
        work.price[size_t(provider)] = p;
        work.unlicensed[size_t(provider)] = pu;
        auto sol = wardrop_solve_auto(config, work, options.wardrop);
        return p * sol.alloc.mass[size_t(provider)] +
               pu * sol.alloc.unlicensed[size_t(provider)];
      };
      auto r = scan_refine(fl, cap, options.grid_points, options.golden_tol, {0.0, pl});
      pl = r.price;
      best = r.profit;
    }
    auto fu = [&](double p) {
      work.price[size_t(provider)] = pl;
      work.unlicensed[size_t(provider)] = p;
      auto sol = wardrop_solve_auto(config, work, options.wardrop);
      double v = p * sol.alloc.unlicensed[size_t(provider)];
      if (incumbent) v += pl * sol.alloc.mass[size_t(provider)];
      return v;
    };
    auto r = scan_refine(fu, cap, options.grid_points, options.golden_tol, {0.0, pu});
    pu = r.price;
    best = r.profit;
    if (std::abs(pl - prev_pl) < 1e-9 && std::abs(pu - prev_pu) < 1e-9) break;
  }
  if (best <= 1e-14) return {};
  return {pl, pu, best};
}

EquilibriumResult find_equilibrium(const MarketConfig& config, const NashOptions& options) {
  config.validate();
  NashOptions opt = options;
  if (int env = detail::env_iteration_cap(); env > 0) opt.max_rounds = env;
  const int n = config.provider_count();

  EquilibriumResult res;
  res.prices = zero_prices(config);

  bool symmetric = opt.allow_symmetric_fast_path && config.mode == MarketMode::Bundled &&
                   config.entrant_count() == 0;
  if (symmetric) {
    for (const auto& prov : config.providers) {
      if (prov.licensed_bandwidth != config.providers.front().licensed_bandwidth) {
        symmetric = false;
        break;
      }
    }
  }
  const bool pinned =
      !symmetric && config.mode == MarketMode::Unbundled && opt.pin_unlicensed && n >= 2;

  auto full_round = [&](PriceProfile& p, bool* mono) {
    double diff = 0.0;
    for (int i = 0; i < n; ++i) {
      auto br = best_response(config, p, i, opt);
      diff = std::max(diff, std::abs(br.price - p.price[size_t(i)]));
      if (mono && br.price < p.price[size_t(i)] - 1e-9) *mono = false;
      p.price[size_t(i)] = br.price;
      if (config.mode == MarketMode::Unbundled) {
        diff = std::max(diff, std::abs(br.unlicensed_price - p.unlicensed[size_t(i)]));
        if (mono && br.unlicensed_price < p.unlicensed[size_t(i)] - 1e-9) *mono = false;
        p.unlicensed[size_t(i)] = br.unlicensed_price;
      }
    }
    return diff;
  };

  // Licensed-only best responses with every unlicensed price held at zero.
  auto pinned_round = [&](PriceProfile& p, bool* mono) {
    double diff = 0.0;
    PriceProfile work = p;
    for (int i = 0; i < n; ++i) {
      if (config.providers[size_t(i)].role != Role::Incumbent) continue;
      work = p;
      auto fl = [&](double q) {
        work.price[size_t(i)] = q;
        auto sol = wardrop_solve_auto(config, work, opt.wardrop);
        return q * sol.alloc.mass[size_t(i)];
      };
      auto r = scan_refine(fl, config.demand.intercept, opt.grid_points, opt.golden_tol,
                           {0.0, p.price[size_t(i)]});
      const double np = r.profit <= 1e-14 ? 0.0 : r.price;
      diff = std::max(diff, std::abs(np - p.price[size_t(i)]));
      if (mono && np < p.price[size_t(i)] - 1e-9) *mono = false;
      p.price[size_t(i)] = np;
    }
    return diff;
  };

  // Runs the configured iteration scheme in place. guard_symmetric protects the
  // zero start: a falling shared best response aborts the fast path in favour of
  // round-robin updates.
  auto run_iteration = [&](PriceProfile& p, bool track_monotone, bool guard_symmetric,
                           int* rounds_out, bool* used_symmetric_out, bool* pin_fallback_out) {
    bool* mono = track_monotone ? &res.price_monotone : nullptr;
    int rounds = 0;
    bool conv = false;

    if (symmetric) {
      bool oscillated = false;
      double shared = p.price.empty() ? 0.0 : p.price[0];
      for (int round = 1; round <= opt.max_rounds && !conv; ++round) {
        rounds = round;
        std::fill(p.price.begin(), p.price.end(), shared);
        auto br = best_response(config, p, 0, opt);
        if (guard_symmetric && br.price < shared - 1e-9) {
          oscillated = true;
          break;
        }
        if (mono && br.price < shared - 1e-9) *mono = false;
        conv = std::abs(br.price - shared) < opt.price_tol;
        shared = br.price;
      }
      std::fill(p.price.begin(), p.price.end(), shared);
      if (!oscillated) {
        if (used_symmetric_out) *used_symmetric_out = true;
        if (rounds_out) *rounds_out = rounds;
        return conv;
      }
      if (used_symmetric_out) *used_symmetric_out = false;
    }

    if (pinned) {
      std::fill(p.unlicensed.begin(), p.unlicensed.end(), 0.0);
      conv = false;
      for (int round = 1; round <= opt.max_rounds; ++round) {
        rounds = round;
        if (pinned_round(p, mono) < opt.price_tol) {
          conv = true;
          break;
        }
      }
      bool pin_ok = conv;
      if (conv) {
        auto sol = wardrop_solve_auto(config, p, opt.wardrop);
        auto wel = welfare_report(config, p, sol.alloc);
        for (int i = 0; i < n && pin_ok; ++i) {
          auto br = best_response(config, p, i, opt);
          if (br.profit - wel.profit[size_t(i)] > opt.tol_ne) pin_ok = false;
        }
      }
      if (pin_ok) {
        if (rounds_out) *rounds_out = rounds;
        return conv;
      }
      if (pin_fallback_out) *pin_fallback_out = true;
      p = zero_prices(config);
    }

    conv = false;
    for (int round = 1; round <= opt.max_rounds; ++round) {
      rounds = round;
      if (full_round(p, mono) < opt.price_tol) {
        conv = true;
        break;
      }
    }
    if (rounds_out) *rounds_out = rounds;
    return conv;
  };

  const bool iter_conv = run_iteration(res.prices, true, true, &res.rounds,
                                       &res.used_symmetric_path, &res.pin_fallback);

  res.solution = wardrop_solve_auto(config, res.prices, opt.wardrop);
  res.welfare = welfare_report(config, res.prices, res.solution.alloc);

  double eps = 0.0;
  if (res.used_symmetric_path) {
    auto br = best_response(config, res.prices, 0, opt);
    eps = std::max(eps, br.profit - res.welfare.profit[0]);
  } else {
    for (int i = 0; i < n; ++i) {
      auto br = best_response(config, res.prices, i, opt);
      eps = std::max(eps, br.profit - res.welfare.profit[size_t(i)]);
    }
  }
  res.eps_ne = eps;
  res.converged = iter_conv && res.solution.converged;

  if (opt.check_second_start) {
    PriceProfile p2 = zero_prices(config);
    std::fill(p2.price.begin(), p2.price.end(), config.demand.intercept);
    std::fill(p2.unlicensed.begin(), p2.unlicensed.end(), config.demand.intercept);
    run_iteration(p2, false, false, nullptr, nullptr, nullptr);
    double delta = 0.0;
    for (int i = 0; i < n; ++i) {
      delta = std::max(delta, std::abs(p2.price[size_t(i)] - res.prices.price[size_t(i)]));
    }
    for (size_t i = 0; i < p2.unlicensed.size(); ++i) {
      delta = std::max(delta, std::abs(p2.unlicensed[i] - res.prices.unlicensed[i]));
    }
    res.second_start_delta = delta;
    res.second_start_differs = delta > 1e-6;
  }
  return res;
}

double verify_equilibrium(const MarketConfig& config, const PriceProfile& prices,
                          const NashOptions& options) {
  config.validate();
  auto sol = wardrop_solve_auto(config, prices, options.wardrop);
  auto wel = welfare_report(config, prices, sol.alloc);
  double eps = 0.0;
  for (int i = 0; i < config.provider_count(); ++i) {
    auto br = best_response(config, prices, i, options);
    eps = std::max(eps, br.profit - wel.profit[size_t(i)]);
  }
  return eps;
}

bool check_supermodularity(const MarketConfig& config) {
  if (config.mode != MarketMode::Bundled || config.entrant_count() != 0 ||
      !config.congestion.is_linear() || config.unlicensed.infinite || config.alpha >= 1.0) {
    throw std::invalid_argument(
        "supermodularity check: linear bundled incumbent-only market with a finite shared "
        "band and alpha < 1 required");
  }
  const int m = config.provider_count();
  const double k1 = config.demand.slope;
  const double k2 = config.congestion.scale;
  const double W = config.unlicensed.get();
  const double a = config.alpha;

  std::vector<std::vector<double>> sys(size_t(m), std::vector<double>(size_t(m), 0.0));
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      sys[size_t(i)][size_t(j)] = a * a * k2 / W + k1;
      if (i == j) {
        sys[size_t(i)][size_t(j)] +=
            (1.0 - a) * (1.0 - a) * k2 / config.providers[size_t(i)].licensed_bandwidth;
      }
    }
  }
  std::vector<std::vector<double>> inv;
  if (!detail::gauss_invert(sys, inv)) return false;
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < m; ++j) {
      if (i == j && inv[size_t(i)][size_t(j)] <= 0.0) return false;
      if (i != j && inv[size_t(i)][size_t(j)] >= 0.0) return false;
    }
  }
  return true;
}

}  // namespace speq
