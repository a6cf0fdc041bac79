#pragma once

#include <optional>
#include <string>
#include <vector>

namespace speq {

// Service modes for the unlicensed band W:
//   Bundled   - incumbents serve each customer over licensed + unlicensed spectrum
//               in proportion (1-alpha, alpha); entrants serve over W alone.
//   Unbundled - licensed and unlicensed access are sold as separate services with
//               separate prices; incumbents may sell both.
//   Exclusive - W is licensed outright to a single entrant; no band is shared.
enum class MarketMode { Bundled, Unbundled, Exclusive };

enum class Role { Incumbent, Entrant };

struct Provider {
  Role role = Role::Incumbent;
  double licensed_bandwidth = 0.0;  // B_i; entrants hold none
};

// A bandwidth that is either a positive real or the symbolic limit W -> infinity.
// The sentinel is never fed into a congestion function; operations that accept it
// branch to dedicated limit formulas.
struct Bandwidth {
  double value = 0.0;
  bool infinite = false;

  static Bandwidth finite(double v) { return {v, false}; }
  static Bandwidth unbounded() { return {0.0, true}; }
  double get() const;  // throws std::invalid_argument when infinite
};

// An incumbent count that is either finite or the symbolic limit M -> infinity.
struct IncumbentCount {
  int value = 0;
  bool infinite = false;

  static IncumbentCount finite(int m) { return {m, false}; }
  static IncumbentCount unbounded() { return {0, true}; }
  // (M-1)/M, or 1 in the limit
  double rival_fraction() const { return infinite ? 1.0 : double(value - 1) / double(value); }
};

// Linear inverse demand P(q) = max(A - k1 q, 0); customers buy while P(Q) exceeds
// the delivered price.
struct InverseDemand {
  double intercept = 1.0;  // A = P(0) > 0
  double slope = 1.0;      // k1 > 0

  double price(double q) const;
  double max_quantity() const { return intercept / slope; }  // choke quantity A/k1
  double gross_surplus(double q) const;                      // integral of P over [0, q]
};

// Latency per unit bandwidth load: g(y) = k2 * y (Linear) or k2 * y^p (Power, p >= 1).
struct CongestionFunction {
  enum class Kind { Linear, Power };
  Kind kind = Kind::Linear;
  double scale = 1.0;     // k2 > 0
  double exponent = 1.0;  // p, used by Power

  double operator()(double y) const;
  double derivative(double y) const;
  double antiderivative(double y) const;  // integral of g over [0, y]
  bool is_linear() const { return kind == Kind::Linear || exponent == 1.0; }
};

struct MarketConfig {
  MarketMode mode = MarketMode::Bundled;
  std::vector<Provider> providers;
  Bandwidth unlicensed;  // W
  double alpha = 0.0;    // bundling fraction in [0, 1]; ignored outside Bundled mode
  InverseDemand demand;
  CongestionFunction congestion;

  int incumbent_count() const;
  int entrant_count() const;
  int provider_count() const { return int(providers.size()); }
  void validate() const;  // throws std::invalid_argument on a malformed config
};

// Convenience builders (canonical linear demand/congestion unless customised after).
MarketConfig make_bundled(std::vector<double> incumbent_bands, int entrants, double alpha,
                          Bandwidth W);
MarketConfig make_symmetric_bundled(int incumbents, double total_band, double alpha, Bandwidth W);
MarketConfig make_unbundled(std::vector<double> incumbent_bands, int entrants, Bandwidth W);
MarketConfig make_exclusive(std::vector<double> incumbent_bands, double W);

// Announced prices. `price` is the bundled/exclusive price, or the licensed-band
// price in Unbundled mode (ignored for entrants there). `unlicensed` carries the
// per-provider unlicensed-band prices and is used only in Unbundled mode.
struct PriceProfile {
  std::vector<double> price;
  std::vector<double> unlicensed;
};

PriceProfile zero_prices(const MarketConfig& config);

// Customer mass served. Mirrors PriceProfile: `mass` is the bundled/exclusive or
// licensed-band mass, `unlicensed` the unlicensed-band mass (Unbundled mode only).
struct Allocation {
  std::vector<double> mass;
  std::vector<double> unlicensed;

  double total() const;
};

// Load on the shared band W: Bundled sums alpha * x_i over incumbents plus entrant
// masses; Unbundled sums the unlicensed masses; Exclusive reports the entrant's mass.
double unlicensed_load(const MarketConfig& config, const Allocation& alloc);

// Announced price plus congestion cost, per band actually offered by the provider.
struct DeliveredPrice {
  std::optional<double> primary;     // bundled composite, licensed band, or exclusive band
  std::optional<double> unlicensed;  // unbundled unlicensed band
};

DeliveredPrice delivered_price(const MarketConfig& config, const PriceProfile& prices,
                               const Allocation& alloc, int provider);

// Area between the demand curve and the market-clearing price P(Q).
double consumer_surplus(const InverseDemand& demand, double Q);

struct WelfareReport {
  std::vector<double> profit;  // per provider, price revenue across its bands
  double consumer_surplus = 0.0;
  double social_welfare = 0.0;  // consumer surplus + total profit
  double delivered_price = 0.0; // P(Q)
  double total_mass = 0.0;      // Q
};

WelfareReport welfare_report(const MarketConfig& config, const PriceProfile& prices,
                             const Allocation& alloc);

}  // namespace speq
