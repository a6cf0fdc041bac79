#pragma once

#include "speq/market_model.hpp"
#include "speq/nash_solver.hpp"

namespace speq {

enum class AlphaObjective { Profit, Welfare };

struct AlphaSample {
  double alpha = 0.0;
  double value = 0.0;
  bool ok = false;  // inner equilibrium converged
};

struct AlphaResult {
  double alpha_star = 0.0;
  double value = 0.0;
  std::vector<AlphaSample> samples;  // grid scan, for diagnostics/plots
  int failures = 0;                  // grid points whose equilibrium failed (excluded)
};

// Maximise the first incumbent's equilibrium profit (equivalently the per-provider
// profit in a symmetric market) or social welfare over the bundling fraction:
// 201-point grid on [0, 1 - 1e-9] plus golden-section refinement of the best
// bracket to 1e-6. The template's alpha field is overwritten per evaluation.
AlphaResult optimize_alpha(const MarketConfig& config_template, AlphaObjective objective,
                           const NashOptions& options = {});

// Licensed-band threshold below which partial bundling is profit-optimal in the
// W -> infinity limit: 1/k*, where k* is the root of -2k^3 - 3tk^2 + t^2 = 0 on
// [t/2, 1/2] and t = (M-1)/M. Exactly 2 for M -> infinity.
double compute_B_threshold(IncumbentCount M);

struct WinfProfitOptimum {
  double alpha_star = 0.0;
  double price = 0.0;
  double per_mass = 0.0;    // zero in the M -> infinity limit
  double per_profit = 0.0;
  double total_mass = 0.0;
  double social_welfare = 0.0;
};

// Symmetric M-incumbent market, W -> infinity: profit-optimal bundling fraction
// 1 - sqrt(B_total / B_threshold) when B_total is below the threshold, else zero,
// with the companion price/mass/welfare values.
WinfProfitOptimum profit_optimal_alpha_winf(IncumbentCount M, double B_total);

// Social welfare at the welfare-optimal bundling fraction minus social welfare at
// the profit-optimal one. Symbolic limits (M or W infinite) use closed forms; the
// finite numeric path composes optimize_alpha for both objectives.
double welfare_gap(IncumbentCount M, double B_total, Bandwidth W);

// Bundling fraction below which symmetric bundled incumbents out-earn the same
// market run in Unbundled mode (threshold located by bisection on the profit gap).
double bundling_advantage_threshold(int M, double B_total, double W);

}  // namespace speq
