#pragma once

#include "speq/market_model.hpp"
#include "speq/wardrop_solver.hpp"

namespace speq {

struct NashOptions {
  int max_rounds = 500;       // SPECTRUM_EQ_MAXITER overrides when set
  double price_tol = 1e-8;    // sup-norm round-to-round convergence
  double golden_tol = 1e-10;  // best-response price resolution
  int grid_points = 48;       // global scan before golden refinement
  double tol_ne = 1e-7;       // accepted best-response slack at an equilibrium
  // Unbundled: hold every unlicensed price at zero (competition on a shared band
  // drives it there) and iterate licensed prices; the pin is verified afterwards
  // and the solver falls back to free iteration if it fails.
  bool pin_unlicensed = true;
  // Identical-provider configs: update all providers with the one shared best
  // response per round instead of round-robin. Result is re-verified either way.
  bool allow_symmetric_fast_path = true;
  // Diagnostic second run from the all-P(0) profile to flag non-unique equilibria.
  bool check_second_start = false;
  WardropOptions wardrop;
};

// Profit-maximising price for one provider, rivals' prices fixed. In Unbundled mode
// both of the provider's prices are optimised (coordinate ascent). Ties resolve to
// the smallest maximising price; a provider that cannot earn anything returns zero.
struct BestResponse {
  double price = 0.0;             // bundled/exclusive price or licensed-band price
  double unlicensed_price = 0.0;  // Unbundled mode only
  double profit = 0.0;
};

BestResponse best_response(const MarketConfig& config, const PriceProfile& prices, int provider,
                           const NashOptions& options = {});

struct EquilibriumResult {
  PriceProfile prices;
  WardropSolution solution;
  WelfareReport welfare;
  double eps_ne = 0.0;  // largest profit any provider gains by deviating
  int rounds = 0;
  bool converged = false;
  bool price_monotone = true;  // prices never fell between rounds (zero start)
  bool used_symmetric_path = false;
  bool pin_fallback = false;          // unlicensed pin failed and free iteration ran
  bool second_start_differs = false;  // only meaningful with check_second_start
  double second_start_delta = 0.0;
};

// Round-robin best-response iteration from the all-zero price profile, followed by
// a best-response audit of every provider (eps_ne).
EquilibriumResult find_equilibrium(const MarketConfig& config, const NashOptions& options = {});

// Largest unilateral profit improvement available at the given prices.
double verify_equilibrium(const MarketConfig& config, const PriceProfile& prices,
                          const NashOptions& options = {});

// Linear bundled incumbent-only configs: the inverse of the allocation system matrix
// must have a positive diagonal and negative off-diagonal entries (prices are
// strategic complements). Returns false on any sign violation.
bool check_supermodularity(const MarketConfig& config);

}  // namespace speq
