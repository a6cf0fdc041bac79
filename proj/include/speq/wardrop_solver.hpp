#pragma once

#include "speq/market_model.hpp"

namespace speq {

// Customer-equilibrium allocation for fixed prices: every served customer pays the
// common delivered price P(Q); no provider with zero mass undercuts it.
struct WardropSolution {
  Allocation alloc;
  double delivered = 0.0;   // P(Q)
  double total_mass = 0.0;  // Q
  // Complementarity residual per decision mass, ordered as the primary masses of
  // all providers followed by the unlicensed masses (Unbundled mode only):
  // active -> |d_i - P(Q)|, inactive -> max(0, P(Q) - d_i).
  std::vector<double> residual;
  double max_residual = 0.0;
  int iterations = 0;
  bool converged = false;
  // Inactive masses whose delivered price sits exactly on P(Q): their share of the
  // demand is not pinned down (equal-price sellers on one band).
  int boundary_ties = 0;
};

struct WardropOptions {
  double tol_residual = 1e-9;
  double tol_active = 1e-10;   // masses below this count as inactive
  double bisect_tol = 1e-13;   // one-dimensional search width
  int max_sweeps = 20000;      // SPECTRUM_EQ_MAXITER overrides when set
  const Allocation* start = nullptr;  // descent start; defaults to the empty allocation
};

// Descent on the allocation potential: coordinate-wise exact minimisation (bisection
// on the monotone gradient) with a guarded geometric extrapolation between sweeps.
// Handles every mode and congestion family; requires finite W.
WardropSolution solve_wardrop(const MarketConfig& config, const PriceProfile& prices,
                              const WardropOptions& options = {});

// Exact allocation for linear demand and linear congestion: active-set enumeration
// over the equality system, collapsing identical providers into groups. Masses that
// solve negative are dropped and the system re-solved.
WardropSolution wardrop_linear_direct(const MarketConfig& config, const PriceProfile& prices);

// Picks the direct solver when the config is linear (demand and congestion) with
// finite W, the descent solver otherwise.
WardropSolution wardrop_solve_auto(const MarketConfig& config, const PriceProfile& prices,
                                   const WardropOptions& options = {});

// d x_i / d p_i at a solved allocation (provider i must be active): slope of the
// provider's own served mass as it perturbs its price, all rivals' prices fixed.
// Always negative.
double price_sensitivity(const MarketConfig& config, const PriceProfile& prices,
                         const WardropSolution& solution, int provider);

}  // namespace speq
