#include "speq/alpha_stage.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "speq/linear_oracle.hpp"

namespace speq {
namespace {

constexpr double kAlphaHi = 1.0 - 1e-9;  // keep the licensed side open

int first_incumbent(const MarketConfig& config) {
  for (int i = 0; i < config.provider_count(); ++i) {
    if (config.providers[size_t(i)].role == Role::Incumbent) return i;
  }
  throw std::invalid_argument("alpha optimisation: an incumbent is required");
}

}  // namespace

AlphaResult optimize_alpha(const MarketConfig& config_template, AlphaObjective objective,
                           const NashOptions& options) {
  MarketConfig cfg = config_template;
  const int inc = first_incumbent(cfg);

  auto eval = [&](double a, bool& ok) {
    cfg.alpha = a;
    auto eq = find_equilibrium(cfg, options);
    ok = eq.converged;
    if (!ok) return -std::numeric_limits<double>::infinity();
    return objective == AlphaObjective::Profit ? eq.welfare.profit[size_t(inc)]
                                               : eq.welfare.social_welfare;
  };

  AlphaResult res;
  res.samples.reserve(201);
  int best = -1;
  for (int k = 0; k <= 200; ++k) {
    const double a = k == 0 ? 0.0 : (k == 200 ? kAlphaHi : kAlphaHi * double(k) / 200.0);
    AlphaSample s;
    s.alpha = a;
    s.value = eval(a, s.ok);
    if (!s.ok) {
      s.value = 0.0;
      ++res.failures;
    }
    res.samples.push_back(s);
    if (s.ok && (best < 0 || s.value > res.samples[size_t(best)].value)) best = k;
  }
  if (best < 0) {
    res.alpha_star = 0.0;
    res.value = 0.0;
    return res;
  }

  double best_alpha = res.samples[size_t(best)].alpha;
  double best_value = res.samples[size_t(best)].value;
  auto offer = [&](double a, double v) {
    if (v > best_value || (v == best_value && a < best_alpha)) {
      best_alpha = a;
      best_value = v;
    }
  };

  double a = res.samples[size_t(std::max(best - 1, 0))].alpha;
  double b = res.samples[size_t(std::min(best + 1, 200))].alpha;
  const double invphi = 0.6180339887498949;
  bool okc = false, okd = false;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = eval(c, okc);
  double fd = eval(d, okd);
  if (okc) offer(c, fc);
  if (okd) offer(d, fd);
  while (b - a > 1e-6) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - invphi * (b - a);
      fc = eval(c, okc);
      if (okc) offer(c, fc);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + invphi * (b - a);
      fd = eval(d, okd);
      if (okd) offer(d, fd);
    }
  }
  res.alpha_star = best_alpha;
  res.value = best_value;
  return res;
}

double compute_B_threshold(IncumbentCount M) {
  if (M.infinite) return 2.0;
  if (M.value < 2) {
    throw std::invalid_argument("band threshold: at least two incumbents required");
  }
  const double t = M.rival_fraction();
  auto f = [&](double k) { return -2.0 * k * k * k - 3.0 * t * k * k + t * t; };
  double lo = 0.5 * t;  // f > 0 here
  double hi = 0.5;      // f < 0 here
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) > 0.0 ? lo : hi) = mid;
  }
  return 1.0 / (0.5 * (lo + hi));
}

WinfProfitOptimum profit_optimal_alpha_winf(IncumbentCount M, double B_total) {
  if (B_total <= 0.0) {
    throw std::invalid_argument("profit-optimal bundling: positive total band required");
  }
  const double t = M.rival_fraction();
  const double B_th = compute_B_threshold(M);
  WinfProfitOptimum out;
  if (B_total >= B_th) {
    out.alpha_star = 0.0;
    out.price = 1.0 / (2.0 + t * B_total);
    out.total_mass = (1.0 - out.price) * B_total / (B_total + 1.0);
    out.social_welfare = 0.5 * out.total_mass * out.total_mass + out.price * out.total_mass;
  } else {
    const double k = 1.0 / B_th;  // profit-optimal effective-band ratio
    out.alpha_star = 1.0 - std::sqrt(B_total * k);
    out.price = k / (2.0 * k + t);
    out.total_mass = (k + t) / ((2.0 * k + t) * (1.0 + k));
    out.social_welfare = (k + t) * (k + t + 2.0 * k * k + 2.0 * k) /
                         (2.0 * (2.0 * k + t) * (2.0 * k + t) * (1.0 + k) * (1.0 + k));
  }
  if (M.infinite) {
    out.per_mass = 0.0;
    out.per_profit = 0.0;
  } else {
    out.per_mass = out.total_mass / double(M.value);
    out.per_profit = out.price * out.per_mass;
  }
  return out;
}

double welfare_gap(IncumbentCount M, double B_total, Bandwidth W) {
  if (B_total <= 0.0) {
    throw std::invalid_argument("welfare gap: positive total band required");
  }
  if (M.infinite && W.infinite) {
    return 1.0 / (2.0 + std::max(2.0, B_total));
  }
  if (W.infinite) {
    return 0.5 - profit_optimal_alpha_winf(M, B_total).social_welfare;
  }
  if (M.infinite) {
    throw std::invalid_argument("welfare gap: infinitely many incumbents need W -> infinity");
  }
  auto cfg = make_symmetric_bundled(M.value, B_total, 0.0, W);
  auto wopt = optimize_alpha(cfg, AlphaObjective::Welfare);
  auto popt = optimize_alpha(cfg, AlphaObjective::Profit);
  cfg.alpha = popt.alpha_star;
  auto eq = find_equilibrium(cfg);
  if (!eq.converged) {
    throw std::runtime_error("welfare gap: equilibrium failed at the profit-optimal fraction");
  }
  return wopt.value - eq.welfare.social_welfare;
}

double bundling_advantage_threshold(int M, double B_total, double W) {
  if (M < 1 || B_total <= 0.0 || W <= 0.0) {
    throw std::invalid_argument("bundling advantage: positive M, B_total and W required");
  }
  // Profit edge of symmetric bundling at fraction a over the same market run
  // unbundled: the ceded spectrum a * B_total joins the shared band there.
  auto gap = [&](double a) {
    const double bundled = symmetric_bundled_equilibrium(M, B_total, W, a).per_profit;
    std::vector<double> bands(size_t(M), (1.0 - a) * B_total / double(M));
    auto eq = find_equilibrium(
        make_unbundled(std::move(bands), 0, Bandwidth::finite(W + a * B_total)));
    if (!eq.converged) {
      throw std::runtime_error("bundling advantage: unbundled equilibrium failed");
    }
    return bundled - eq.welfare.profit[0];
  };

  const double hi = 0.98;
  double prev = 0.0;
  if (gap(0.0) <= 0.0) return 0.0;
  for (int j = 1; j <= 40; ++j) {
    const double a = hi * double(j) / 40.0;
    if (gap(a) <= 0.0) {
      double lo = prev, up = a;
      while (up - lo > 1e-7) {
        const double mid = 0.5 * (lo + up);
        (gap(mid) > 0.0 ? lo : up) = mid;
      }
      return 0.5 * (lo + up);
    }
    prev = a;
  }
  return 1.0;
}

}  // namespace speq
