#include "speq/market_model.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace speq {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

double Bandwidth::get() const {
  require(!infinite, "bandwidth: symbolic infinite value has no finite width");
  return value;
}

double InverseDemand::price(double q) const {
  double p = intercept - slope * q;
  return p > 0.0 ? p : 0.0;
}

double InverseDemand::gross_surplus(double q) const {
  double qm = max_quantity();
  double q0 = q < qm ? q : qm;  // P is zero past the choke quantity
  return intercept * q0 - 0.5 * slope * q0 * q0;
}

double CongestionFunction::operator()(double y) const {
  if (is_linear()) return scale * y;
  return scale * std::pow(y, exponent);
}

double CongestionFunction::derivative(double y) const {
  if (is_linear()) return scale;
  return scale * exponent * std::pow(y, exponent - 1.0);
}

double CongestionFunction::antiderivative(double y) const {
  if (is_linear()) return 0.5 * scale * y * y;
  return scale * std::pow(y, exponent + 1.0) / (exponent + 1.0);
}

int MarketConfig::incumbent_count() const {
  int n = 0;
  for (const auto& p : providers)
    if (p.role == Role::Incumbent) ++n;
  return n;
}

int MarketConfig::entrant_count() const { return provider_count() - incumbent_count(); }

void MarketConfig::validate() const {
  require(!providers.empty(), "config: no providers");
  require(incumbent_count() >= 1, "config: at least one incumbent required");
  require(alpha >= 0.0 && alpha <= 1.0, "config: alpha outside [0, 1]");
  for (const auto& p : providers) {
    if (p.role == Role::Incumbent) {
      require(p.licensed_bandwidth > 0.0 && std::isfinite(p.licensed_bandwidth),
              "config: incumbent needs positive licensed bandwidth");
    } else {
      require(p.licensed_bandwidth == 0.0, "config: entrant cannot hold licensed bandwidth");
    }
  }
  if (!unlicensed.infinite) {
    require(unlicensed.value > 0.0 && std::isfinite(unlicensed.value),
            "config: unlicensed bandwidth must be positive");
  }
  if (mode == MarketMode::Exclusive) {
    require(entrant_count() == 1, "config: exclusive mode licenses W to exactly one entrant");
    require(!unlicensed.infinite, "config: exclusive mode needs a finite band for the entrant");
  }
  require(demand.intercept > 0.0 && demand.slope > 0.0, "config: demand needs A > 0 and slope > 0");
  require(congestion.scale > 0.0, "config: congestion scale must be positive");
  if (congestion.kind == CongestionFunction::Kind::Power) {
    require(congestion.exponent >= 1.0, "config: congestion exponent must be >= 1");
  }
}

MarketConfig make_bundled(std::vector<double> incumbent_bands, int entrants, double alpha,
                          Bandwidth W) {
  MarketConfig cfg;
  cfg.mode = MarketMode::Bundled;
  for (double b : incumbent_bands) cfg.providers.push_back({Role::Incumbent, b});
  for (int i = 0; i < entrants; ++i) cfg.providers.push_back({Role::Entrant, 0.0});
  cfg.alpha = alpha;
  cfg.unlicensed = W;
  return cfg;
}

MarketConfig make_symmetric_bundled(int incumbents, double total_band, double alpha, Bandwidth W) {
  require(incumbents >= 1, "config: need at least one incumbent");
  std::vector<double> bands(size_t(incumbents), total_band / incumbents);
  return make_bundled(std::move(bands), 0, alpha, W);
}

MarketConfig make_unbundled(std::vector<double> incumbent_bands, int entrants, Bandwidth W) {
  auto cfg = make_bundled(std::move(incumbent_bands), entrants, 0.0, W);
  cfg.mode = MarketMode::Unbundled;
  return cfg;
}

MarketConfig make_exclusive(std::vector<double> incumbent_bands, double W) {
  auto cfg = make_bundled(std::move(incumbent_bands), 1, 0.0, Bandwidth::finite(W));
  cfg.mode = MarketMode::Exclusive;
  return cfg;
}

PriceProfile zero_prices(const MarketConfig& config) {
  PriceProfile p;
  p.price.assign(size_t(config.provider_count()), 0.0);
  if (config.mode == MarketMode::Unbundled) {
    p.unlicensed.assign(size_t(config.provider_count()), 0.0);
  }
  return p;
}

double Allocation::total() const {
  double q = 0.0;
  for (double v : mass) q += v;
  for (double v : unlicensed) q += v;
  return q;
}

double unlicensed_load(const MarketConfig& config, const Allocation& alloc) {
  double load = 0.0;
  switch (config.mode) {
    case MarketMode::Bundled:
      for (size_t i = 0; i < alloc.mass.size(); ++i) {
        bool entrant = config.providers[i].role == Role::Entrant;
        load += (entrant ? 1.0 : config.alpha) * alloc.mass[i];
      }
      break;
    case MarketMode::Unbundled:
      for (double v : alloc.unlicensed) load += v;
      break;
    case MarketMode::Exclusive:
      for (size_t i = 0; i < alloc.mass.size(); ++i) {
        if (config.providers[i].role == Role::Entrant) load += alloc.mass[i];
      }
      break;
  }
  return load;
}

DeliveredPrice delivered_price(const MarketConfig& config, const PriceProfile& prices,
                               const Allocation& alloc, int provider) {
  const auto& prov = config.providers[size_t(provider)];
  const auto& g = config.congestion;
  DeliveredPrice out;
  double W = config.unlicensed.get();
  double L = unlicensed_load(config, alloc);
  double x = alloc.mass[size_t(provider)];
  double rho = prices.price[size_t(provider)];

  switch (config.mode) {
    case MarketMode::Bundled: {
      if (prov.role == Role::Entrant) {
        out.primary = rho + g(L / W);
      } else {
        double a = config.alpha;
        out.primary = rho + (1.0 - a) * g((1.0 - a) * x / prov.licensed_bandwidth) + a * g(L / W);
      }
      break;
    }
    case MarketMode::Unbundled: {
      if (prov.role == Role::Incumbent) {
        out.primary = rho + g(x / prov.licensed_bandwidth);
      }
      out.unlicensed = prices.unlicensed[size_t(provider)] + g(L / W);
      break;
    }
    case MarketMode::Exclusive: {
      double band = prov.role == Role::Entrant ? W : prov.licensed_bandwidth;
      out.primary = rho + g(x / band);
      break;
    }
  }
  return out;
}

double consumer_surplus(const InverseDemand& demand, double Q) {
  if (Q < 0.0 || Q > demand.max_quantity() * (1.0 + 1e-12) + 1e-15) {
    throw std::invalid_argument("consumer surplus: quantity outside [0, choke quantity]");
  }
  return demand.gross_surplus(Q) - demand.price(Q) * Q;
}

WelfareReport welfare_report(const MarketConfig& config, const PriceProfile& prices,
                             const Allocation& alloc) {
  size_t n = size_t(config.provider_count());
  require(alloc.mass.size() == n, "welfare: allocation size mismatch");
  if (config.mode == MarketMode::Unbundled) {
    require(alloc.unlicensed.size() == n, "welfare: unlicensed allocation size mismatch");
  } else {
    require(alloc.unlicensed.empty(), "welfare: unexpected unlicensed masses");
  }
  for (double v : alloc.mass) require(v >= 0.0, "welfare: negative mass");
  for (double v : alloc.unlicensed) require(v >= 0.0, "welfare: negative mass");

  WelfareReport rep;
  rep.total_mass = alloc.total();
  rep.delivered_price = config.demand.price(rep.total_mass);
  rep.consumer_surplus = consumer_surplus(config.demand, rep.total_mass);
  rep.profit.assign(n, 0.0);
  for (size_t i = 0; i < n; ++i) {
    double pi = prices.price[i] * alloc.mass[i];
    if (config.mode == MarketMode::Unbundled) {
      pi += prices.unlicensed[i] * alloc.unlicensed[i];
    }
    rep.profit[i] = pi;
  }
  double sw = rep.consumer_surplus;
  for (double pi : rep.profit) sw += pi;
  rep.social_welfare = sw;
  return rep;
}

}  // namespace speq
