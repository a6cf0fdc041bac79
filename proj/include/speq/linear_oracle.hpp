#pragma once

#include "speq/market_model.hpp"

namespace speq {

// Closed-form equilibria for the canonical linear family P(q) = 1 - q, g(y) = y.
// Every function here is an independent cross-check target for the numeric path.

struct MonopolyCombined {
  double mass = 0.0;    // served customers
  double price = 0.0;
  double profit = 0.0;
};

// One provider selling over a single fused band of width B + W.
MonopolyCombined monopoly_combined(double B, double W);

// Bundling fraction at which a bundled monopolist attains the fused-band profit.
double monopoly_alpha_star(double B, double W);

struct ClosedFormResult {
  std::vector<double> price;   // per provider: incumbent(s) first, entrant last
  std::vector<double> mass;
  std::vector<double> profit;
  double total_mass = 0.0;
  double delivered = 0.0;      // P(Q)
  double consumer_surplus = 0.0;
  double social_welfare = 0.0;
};

// One incumbent (band B) against one entrant holding W outright.
ClosedFormResult exclusive_use_equilibrium(double B, double W);
ClosedFormResult exclusive_use_equilibrium_winf(double B);  // W -> infinity limit

struct Unbundled1v1 {
  double licensed_price = 0.0;
  double licensed_mass = 0.0;
  double unlicensed_mass = 0.0;  // total mass on W (its price competes to zero)
  double profit = 0.0;           // incumbent profit
  double total_mass = 0.0;
  double delivered = 0.0;
  double consumer_surplus = 0.0;
  double social_welfare = 0.0;
  // Bundling fraction whose bundled 1v1 equilibrium replicates this outcome: the
  // unlicensed share of the incumbent-side traffic.
  double alpha0 = 0.0;
};

// One incumbent selling licensed access, unlicensed access priced competitively.
Unbundled1v1 unbundled_1v1_equilibrium(double B, double W);
Unbundled1v1 unbundled_1v1_equilibrium_winf(double B);  // W -> infinity limit

struct SymmetricBundled {
  double price = 0.0;       // common equilibrium price (authoritative closed form)
  double per_mass = 0.0;    // per-provider mass, from the allocation system at `price`
  double per_profit = 0.0;
  double total_mass = 0.0;
  double delivered = 0.0;
  double consumer_surplus = 0.0;
  double social_welfare = 0.0;
  double total_mass_formula = 0.0;  // direct closed form for Q; diagnostic cross-check
};

// M identical incumbents, each holding B_total / M, no entrants, bundling alpha.
SymmetricBundled symmetric_bundled_equilibrium(int M, double B_total, double W, double alpha);

// Bundled 1v1 in the uncongested-W limit. Entrant quantities are the limits of the
// finite-W equilibrium.
ClosedFormResult one_v_one_winf(double B, double alpha);
double one_v_one_winf_alpha_star(double B);  // profit-optimal bundling fraction

// W -> infinity: a bundled config is outcome-equivalent to one with no unlicensed
// band and licensed bands scaled by 1/(1-alpha)^(p+1) (congestion exponent p).
double band_expansion_factor(double alpha, double exponent);
MarketConfig band_expansion_equivalent(const MarketConfig& config);

}  // namespace speq
