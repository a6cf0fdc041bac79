#include "speq/linear_oracle.hpp"

#include <cmath>
#include <stdexcept>

namespace speq {
namespace {

void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

MonopolyCombined monopoly_combined(double B, double W) {
  require(B > 0.0, "combined monopoly: positive licensed band required");
  require(W >= 0.0, "combined monopoly: nonnegative shared band required");
  const double K = B + W;
  MonopolyCombined out;
  out.price = 0.5;
  out.mass = K / (2.0 * (1.0 + K));
  out.profit = K / (4.0 * (1.0 + K));
  return out;
}

double monopoly_alpha_star(double B, double W) {
  require(B > 0.0, "monopoly alpha: positive licensed band required");
  require(W >= 0.0, "monopoly alpha: nonnegative shared band required");
  return W / (B + W);
}

ClosedFormResult exclusive_use_equilibrium(double B, double W) {
  require(B > 0.0 && W > 0.0, "exclusive equilibrium: positive bands required");
  const double D = 4.0 + 4.0 * B + 4.0 * W + 3.0 * B * W;
  const double p1 = (2.0 + 2.0 * B + W) / D;
  const double p2 = (2.0 + B + 2.0 * W) / D;
  const double x1 = B * (1.0 + W) / (1.0 + B + W) * p1;
  const double x2 = W * (1.0 + B) / (1.0 + B + W) * p2;
  ClosedFormResult out;
  out.price = {p1, p2};
  out.mass = {x1, x2};
  out.profit = {p1 * x1, p2 * x2};
  out.total_mass = x1 + x2;
  out.delivered = 1.0 - out.total_mass;
  out.consumer_surplus = 0.5 * out.total_mass * out.total_mass;
  out.social_welfare = out.consumer_surplus + out.profit[0] + out.profit[1];
  return out;
}

ClosedFormResult exclusive_use_equilibrium_winf(double B) {
  require(B > 0.0, "exclusive equilibrium: positive band required");
  const double D = 4.0 + 3.0 * B;
  const double p1 = 1.0 / D;
  const double p2 = 2.0 / D;
  const double x1 = B * p1;
  const double x2 = (1.0 + B) * p2;
  ClosedFormResult out;
  out.price = {p1, p2};
  out.mass = {x1, x2};
  out.profit = {p1 * x1, p2 * x2};
  out.total_mass = x1 + x2;
  out.delivered = 1.0 - out.total_mass;
  out.consumer_surplus = 0.5 * out.total_mass * out.total_mass;
  out.social_welfare = out.consumer_surplus + out.profit[0] + out.profit[1];
  return out;
}

Unbundled1v1 unbundled_1v1_equilibrium(double B, double W) {
  require(B > 0.0 && W > 0.0, "unbundled 1v1: positive bands required");
  Unbundled1v1 out;
  out.licensed_mass = B / (2.0 * (B + 1.0 + W));
  out.delivered = (1.0 - out.licensed_mass) / (1.0 + W);
  out.unlicensed_mass = W * out.delivered;
  out.licensed_price = out.delivered - out.licensed_mass / B;
  out.profit = out.licensed_price * out.licensed_mass;
  out.total_mass = out.licensed_mass + out.unlicensed_mass;
  out.consumer_surplus = 0.5 * out.total_mass * out.total_mass;
  out.social_welfare = out.consumer_surplus + out.profit;
  out.alpha0 = out.unlicensed_mass / out.total_mass;
  return out;
}

Unbundled1v1 unbundled_1v1_equilibrium_winf(double B) {
  require(B > 0.0, "unbundled 1v1: positive band required");
  Unbundled1v1 out;
  out.licensed_price = 0.0;
  out.licensed_mass = 0.0;
  out.unlicensed_mass = 1.0;
  out.profit = 0.0;
  out.total_mass = 1.0;
  out.delivered = 0.0;
  out.consumer_surplus = 0.5;
  out.social_welfare = 0.5;
  out.alpha0 = 1.0;
  return out;
}

SymmetricBundled symmetric_bundled_equilibrium(int M, double B_total, double W, double alpha) {
  require(M >= 1, "symmetric bundled: at least one provider required");
  require(B_total > 0.0, "symmetric bundled: positive total band required");
  require(W > 0.0, "symmetric bundled: positive shared band required");
  require(alpha >= 0.0 && alpha < 1.0, "symmetric bundled: bundling fraction in [0, 1) required");
  const double t = double(M - 1) / double(M);
  const double c2 = (1.0 - alpha) * (1.0 - alpha);
  const double num = c2 * W;
  const double den = 2.0 * num + t * (alpha * alpha * B_total + B_total * W);
  SymmetricBundled out;
  out.price = num / den;
  out.per_mass =
      (1.0 - out.price) / (double(M) * (c2 / B_total + alpha * alpha / W + 1.0));
  out.total_mass = double(M) * out.per_mass;
  out.total_mass_formula =
      (1.0 - out.price) * B_total * W / (c2 * W + alpha * alpha * B_total + B_total * W);
  out.per_profit = out.price * out.per_mass;
  out.delivered = 1.0 - out.total_mass;
  out.consumer_surplus = 0.5 * out.total_mass * out.total_mass;
  out.social_welfare = out.consumer_surplus + double(M) * out.per_profit;
  return out;
}

ClosedFormResult one_v_one_winf(double B, double alpha) {
  require(B > 0.0, "1v1 uncongested limit: positive band required");
  require(alpha >= 0.0 && alpha <= 1.0, "1v1 uncongested limit: bundling fraction in [0, 1]");
  const double c2 = (1.0 - alpha) * (1.0 - alpha);
  const double D = 4.0 * c2 + 3.0 * B;
  const double p1 = c2 / D;
  const double x1 = B / D;
  const double p2 = 2.0 * c2 / D;
  const double x2 = (2.0 * c2 + 2.0 * B) / D;
  ClosedFormResult out;
  out.price = {p1, p2};
  out.mass = {x1, x2};
  out.profit = {p1 * x1, p2 * x2};
  out.total_mass = x1 + x2;
  out.delivered = 1.0 - out.total_mass;
  out.consumer_surplus = 0.5 * out.total_mass * out.total_mass;
  out.social_welfare = out.consumer_surplus + out.profit[0] + out.profit[1];
  return out;
}

double one_v_one_winf_alpha_star(double B) {
  require(B > 0.0, "1v1 uncongested limit: positive band required");
  if (B >= 4.0 / 3.0) return 0.0;
  return 1.0 - std::sqrt(3.0 * B) / 2.0;
}

double band_expansion_factor(double alpha, double exponent) {
  require(alpha >= 0.0 && alpha < 1.0, "band expansion: bundling fraction in [0, 1) required");
  require(exponent >= 1.0, "band expansion: congestion exponent >= 1 required");
  return 1.0 / std::pow(1.0 - alpha, exponent + 1.0);
}

MarketConfig band_expansion_equivalent(const MarketConfig& config) {
  if (config.mode != MarketMode::Bundled || config.entrant_count() != 0 ||
      !config.unlicensed.infinite) {
    throw std::invalid_argument(
        "band expansion: bundled incumbent-only market with unbounded shared band required");
  }
  const double exponent = config.congestion.is_linear() ? 1.0 : config.congestion.exponent;
  const double factor = band_expansion_factor(config.alpha, exponent);
  MarketConfig out = config;
  out.alpha = 0.0;
  for (auto& prov : out.providers) prov.licensed_bandwidth *= factor;
  // The shared band carries no traffic at alpha = 0; any finite width works.
  out.unlicensed = Bandwidth::finite(1.0);
  out.validate();
  return out;
}

}  // namespace speq
