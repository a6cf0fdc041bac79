#include "speq/wardrop_solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "numeric_util.hpp"

namespace speq {
namespace {

// One decision mass users can buy. Delivered price at mass x is
//   rho + w * g(r * x) + s * g(L / W)
// where L = sum_v s_v x_v is the load everyone places on the shared band.
struct Var {
  int provider = 0;
  bool unlicensed_service = false;  // standalone shared-band offering
  double rho = 0.0;                 // posted price
  double w = 0.0;                   // own-band congestion weight
  double r = 0.0;                   // own-band load per unit of mass
  double s = 0.0;                   // shared-band load per unit of mass
};

// Flattens a market into vars: primary offerings in provider order, then the
// standalone unlicensed offerings in provider order. This ordering fixes the
// sweep order of the descent solver and the tie convention of the direct one.
std::vector<Var> build_vars(const MarketConfig& config, const PriceProfile& prices) {
  const int n = config.provider_count();
  std::vector<Var> vars;
  vars.reserve(size_t(2 * n));
  switch (config.mode) {
    case MarketMode::Bundled: {
      const double a = config.alpha;
      for (int i = 0; i < n; ++i) {
        const auto& prov = config.providers[i];
        if (prov.role == Role::Incumbent) {
          vars.push_back({i, false, prices.price[i], 1.0 - a,
                          prov.licensed_bandwidth > 0.0 ? (1.0 - a) / prov.licensed_bandwidth : 0.0,
                          a});
        } else {
          vars.push_back({i, false, prices.price[i], 0.0, 0.0, 1.0});
        }
      }
      break;
    }
    case MarketMode::Unbundled: {
      for (int i = 0; i < n; ++i) {
        const auto& prov = config.providers[i];
        if (prov.role == Role::Incumbent) {
          vars.push_back({i, false, prices.price[i], 1.0, 1.0 / prov.licensed_bandwidth, 0.0});
        }
      }
      for (int i = 0; i < n; ++i) {
        vars.push_back({i, true, prices.unlicensed[i], 0.0, 0.0, 1.0});
      }
      break;
    }
    case MarketMode::Exclusive: {
      const double W = config.unlicensed.get();
      for (int i = 0; i < n; ++i) {
        const auto& prov = config.providers[i];
        const double band = prov.role == Role::Entrant ? W : prov.licensed_bandwidth;
        vars.push_back({i, false, prices.price[i], 1.0, 1.0 / band, 0.0});
      }
      break;
    }
  }
  // An own-band term whose slope never exceeds 1e-12 contributes less to any
  // delivered price than a thousandth of the residual tolerance; clamping it to
  // a pure shared offering keeps both solvers fast and well conditioned when
  // alpha -> 1 collapses the licensed share.
  for (Var& v : vars) {
    if (v.w > 0.0 && v.w * config.congestion.scale * v.r <= 1e-12) {
      v.w = 0.0;
      v.r = 0.0;
    }
  }
  return vars;
}

// Packs masses back into an Allocation, computes delivered price and the
// per-offering equilibrium residuals (active: |d_v - P|, idle: max(0, P - d_v)).
void finish_solution(const MarketConfig& config, const std::vector<Var>& vars,
                     const std::vector<double>& x, double tol_active, double tol_residual,
                     WardropSolution& out) {
  const int n = config.provider_count();
  const double W = config.unlicensed.get();
  const auto& g = config.congestion;

  out.alloc.mass.assign(size_t(n), 0.0);
  out.alloc.unlicensed.clear();
  if (config.mode == MarketMode::Unbundled) out.alloc.unlicensed.assign(size_t(n), 0.0);
  for (size_t v = 0; v < vars.size(); ++v) {
    const double m = std::max(0.0, x[v]);
    if (vars[v].unlicensed_service) {
      out.alloc.unlicensed[size_t(vars[v].provider)] = m;
    } else {
      out.alloc.mass[size_t(vars[v].provider)] = m;
    }
  }
  out.total_mass = out.alloc.total();
  out.delivered = config.demand.price(out.total_mass);

  double L = 0.0;
  for (size_t v = 0; v < vars.size(); ++v) L += vars[v].s * std::max(0.0, x[v]);

  out.residual.assign(config.mode == MarketMode::Unbundled ? size_t(2 * n) : size_t(n), 0.0);
  out.max_residual = 0.0;
  out.boundary_ties = 0;
  for (size_t v = 0; v < vars.size(); ++v) {
    const double m = std::max(0.0, x[v]);
    double d = vars[v].rho;
    if (vars[v].w > 0.0) d += vars[v].w * g(vars[v].r * m);
    if (vars[v].s > 0.0) d += vars[v].s * g(L / W);
    const double res =
        m > tol_active ? std::abs(d - out.delivered) : std::max(0.0, out.delivered - d);
    const size_t slot =
        vars[v].unlicensed_service ? size_t(n + vars[v].provider) : size_t(vars[v].provider);
    out.residual[slot] = res;
    out.max_residual = std::max(out.max_residual, res);
    if (m <= tol_active && std::abs(d - out.delivered) <= std::max(tol_residual, 1e-9)) {
      ++out.boundary_ties;
    }
  }
}

std::vector<double> seed_from(const MarketConfig& config, const std::vector<Var>& vars,
                              const Allocation* start) {
  std::vector<double> x(vars.size(), 0.0);
  if (!start) return x;
  (void)config;
  for (size_t v = 0; v < vars.size(); ++v) {
    const auto& src = vars[v].unlicensed_service ? start->unlicensed : start->mass;
    if (vars[v].provider < int(src.size())) {
      x[v] = std::max(0.0, src[size_t(vars[v].provider)]);
    }
  }
  return x;
}

}  // namespace

WardropSolution solve_wardrop(const MarketConfig& config, const PriceProfile& prices,
                              const WardropOptions& options) {
  if (config.unlicensed.infinite) {
    throw std::invalid_argument("wardrop solve: finite shared band required");
  }
  const double W = config.unlicensed.get();
  const auto& g = config.congestion;
  const auto& dem = config.demand;
  const double qmax = dem.max_quantity();

  const auto vars = build_vars(config, prices);
  const int V = int(vars.size());
  std::vector<double> x = seed_from(config, vars, options.start);

  int max_sweeps = options.max_sweeps;
  if (int env = detail::env_iteration_cap(); env > 0) max_sweeps = env;

  auto shared_load = [&](const std::vector<double>& y) {
    double L = 0.0;
    for (int v = 0; v < V; ++v) L += vars[size_t(v)].s * y[size_t(v)];
    return L;
  };
  auto total_of = [&](const std::vector<double>& y) {
    double Q = 0.0;
    for (double t : y) Q += t;
    return Q;
  };
  // Convex potential whose minimum is the equilibrium allocation.
  auto potential = [&](const std::vector<double>& y) {
    double phi = 0.0;
    for (int v = 0; v < V; ++v) {
      const auto& vr = vars[size_t(v)];
      phi += vr.rho * y[size_t(v)];
      if (vr.w > 0.0 && vr.r > 0.0) phi += vr.w / vr.r * g.antiderivative(vr.r * y[size_t(v)]);
    }
    const double L = shared_load(y);
    if (L > 0.0) phi += W * g.antiderivative(L / W);
    return phi - dem.gross_surplus(total_of(y));
  };

  double Q = total_of(x);
  double L = shared_load(x);

  WardropSolution out;
  out.converged = false;
  out.iterations = 0;

  std::vector<double> prev1 = x, prev2 = x;
  for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
    for (int v = 0; v < V; ++v) {
      const auto& vr = vars[size_t(v)];
      const double q_rest = Q - x[size_t(v)];
      const double l_rest = L - vr.s * x[size_t(v)];
      auto slope = [&](double t) {
        double d = vr.rho;
        if (vr.w > 0.0) d += vr.w * g(vr.r * t);
        if (vr.s > 0.0) d += vr.s * g((l_rest + vr.s * t) / W);
        return d - dem.price(q_rest + t);
      };
      double nx;
      if (slope(0.0) >= 0.0) {
        nx = 0.0;
      } else {
        double lo = 0.0;
        double hi = std::max(qmax - q_rest, 1e-3);
        const double hi_cap = 64.0 * (qmax + 1.0);
        while (slope(hi) < 0.0 && hi < hi_cap) hi *= 2.0;
        while (hi - lo > options.bisect_tol) {
          const double mid = 0.5 * (lo + hi);
          (slope(mid) < 0.0 ? lo : hi) = mid;
        }
        nx = 0.5 * (lo + hi);
      }
      Q += nx - x[size_t(v)];
      L += vr.s * (nx - x[size_t(v)]);
      x[size_t(v)] = nx;
    }
    out.iterations = sweep;

    // Guarded geometric extrapolation across sweeps: estimate the linear
    // contraction rate and jump to its fixed point when that lowers the
    // potential.
    if (sweep % 5 == 0 && sweep >= 3) {
      double num = 0.0, den = 0.0;
      for (int v = 0; v < V; ++v) {
        const double d1 = prev1[size_t(v)] - prev2[size_t(v)];
        const double d2 = x[size_t(v)] - prev1[size_t(v)];
        num += d2 * d1;
        den += d1 * d1;
      }
      if (den > 0.0) {
        const double rate = num / den;
        if (rate > 1e-6 && rate < 0.999) {
          const double gain = rate / (1.0 - rate);
          std::vector<double> cand(static_cast<size_t>(V));
          for (int v = 0; v < V; ++v) {
            cand[size_t(v)] =
                std::max(0.0, x[size_t(v)] + (x[size_t(v)] - prev1[size_t(v)]) * gain);
          }
          if (potential(cand) < potential(x)) {
            x = std::move(cand);
            Q = total_of(x);
            L = shared_load(x);
          }
        }
      }
    }
    prev2 = prev1;
    prev1 = x;

    finish_solution(config, vars, x, options.tol_active, options.tol_residual, out);
    out.iterations = sweep;
    if (out.max_residual <= options.tol_residual) {
      out.converged = true;
      break;
    }
  }
  if (out.residual.empty()) {
    finish_solution(config, vars, x, options.tol_active, options.tol_residual, out);
  }
  return out;
}

WardropSolution wardrop_linear_direct(const MarketConfig& config, const PriceProfile& prices) {
  if (config.unlicensed.infinite) {
    throw std::invalid_argument("wardrop direct: finite shared band required");
  }
  if (!config.congestion.is_linear()) {
    throw std::invalid_argument("wardrop direct: linear congestion required");
  }
  const double W = config.unlicensed.get();
  const double k1 = config.demand.slope;
  const double k2 = config.congestion.scale;
  const double A = config.demand.intercept;

  const auto vars = build_vars(config, prices);
  const int V = int(vars.size());

  // Offerings with bit-identical (own-band slope, shared weight, price) are
  // interchangeable; collapse them so symmetric markets solve in O(1) groups.
  struct Group {
    double a = 0.0;          // own-band congestion slope w * k2 * r
    double s = 0.0;          // shared-band weight
    double rho = 0.0;        // posted price
    double weight = 1.0;     // members counted in the aggregate load
    std::vector<int> members;
    double value = 0.0;      // per-member mass (a > 0) or group total (a == 0)
    bool active = false;
  };
  std::vector<Group> groups;
  for (int v = 0; v < V; ++v) {
    const double a = vars[size_t(v)].w * k2 * vars[size_t(v)].r;
    const double s = vars[size_t(v)].s;
    const double rho = vars[size_t(v)].rho;
    bool merged = false;
    for (auto& gr : groups) {
      if (gr.a == a && gr.s == s && gr.rho == rho) {
        gr.members.push_back(v);
        merged = true;
        break;
      }
    }
    if (!merged) groups.push_back({a, s, rho, 1.0, {v}, 0.0, false});
  }
  // Identical congestible offerings split evenly; identical pure shared
  // offerings are one pool assigned to the first member in variable order.
  for (auto& gr : groups) gr.weight = gr.a > 0.0 ? double(gr.members.size()) : 1.0;
  const int G = int(groups.size());

  int cheapest_shared = -1;
  for (int gi = 0; gi < G; ++gi) {
    if (groups[size_t(gi)].a > 0.0) {
      groups[size_t(gi)].active = true;
    } else if (cheapest_shared < 0 ||
               groups[size_t(gi)].rho < groups[size_t(cheapest_shared)].rho) {
      cheapest_shared = gi;
    }
  }
  if (cheapest_shared >= 0) groups[size_t(cheapest_shared)].active = true;

  int rounds = 0;
  bool solved = false;
  for (int round = 0; round < 2 * G + 4 && !solved; ++round) {
    rounds = round + 1;
    std::vector<int> act;
    for (int gi = 0; gi < G; ++gi) {
      if (groups[size_t(gi)].active) act.push_back(gi);
    }
    const int m = int(act.size());
    if (m == 0) {
      solved = true;
      break;
    }
    // Equal-delivered-price conditions over the active groups.
    std::vector<std::vector<double>> aug(size_t(m), std::vector<double>(size_t(m) + 1, 0.0));
    for (int ri = 0; ri < m; ++ri) {
      const auto& gr = groups[size_t(act[size_t(ri)])];
      for (int ci = 0; ci < m; ++ci) {
        const auto& gc = groups[size_t(act[size_t(ci)])];
        double coef = gr.s * (k2 / W) * gc.s * gc.weight + k1 * gc.weight;
        if (ri == ci) coef += gr.a;
        aug[size_t(ri)][size_t(ci)] = coef;
      }
      aug[size_t(ri)][size_t(m)] = A - gr.rho;
    }
    if (!detail::gauss_solve(aug)) break;
    for (int ri = 0; ri < m; ++ri) {
      groups[size_t(act[size_t(ri)])].value = aug[size_t(ri)][size_t(m)];
    }

    bool dropped = false;
    for (int ri = 0; ri < m; ++ri) {
      auto& gr = groups[size_t(act[size_t(ri)])];
      if (gr.value < -1e-15) {
        gr.active = false;
        gr.value = 0.0;
        dropped = true;
      }
    }
    if (dropped) continue;

    double Q = 0.0, L = 0.0;
    for (int gi = 0; gi < G; ++gi) {
      const auto& gr = groups[size_t(gi)];
      if (!gr.active) continue;
      Q += gr.weight * gr.value;
      L += gr.s * gr.weight * gr.value;
    }
    const double P = config.demand.price(Q);
    int worst = -1;
    double worst_gap = 1e-12;
    for (int gi = 0; gi < G; ++gi) {
      const auto& gr = groups[size_t(gi)];
      if (gr.active) continue;
      const double d = gr.rho + gr.s * (k2 / W) * L;
      if (P - d > worst_gap) {
        worst_gap = P - d;
        worst = gi;
      }
    }
    if (worst < 0) {
      solved = true;
      break;
    }
    if (groups[size_t(worst)].a == 0.0) {
      // Only one pure shared pool can clear at a time; swap it in.
      for (int gi = 0; gi < G; ++gi) {
        auto& gr = groups[size_t(gi)];
        if (gr.active && gr.a == 0.0) {
          gr.active = false;
          gr.value = 0.0;
        }
      }
    }
    groups[size_t(worst)].active = true;
  }

  std::vector<double> x(size_t(V), 0.0);
  for (const auto& gr : groups) {
    if (!gr.active || gr.value <= 0.0) continue;
    if (gr.a > 0.0) {
      for (int v : gr.members) x[size_t(v)] = gr.value;
    } else {
      x[size_t(gr.members.front())] = gr.value;
    }
  }

  WardropSolution out;
  finish_solution(config, vars, x, 1e-10, 1e-9, out);
  out.iterations = rounds;
  out.converged = solved && out.max_residual <= 1e-9;
  return out;
}

WardropSolution wardrop_solve_auto(const MarketConfig& config, const PriceProfile& prices,
                                   const WardropOptions& options) {
  if (config.congestion.is_linear()) {
    WardropSolution direct = wardrop_linear_direct(config, prices);
    // Near-degenerate groupings (e.g. alpha -> 1 collapsing the licensed share)
    // can defeat the pivoting; the descent solver has no such corner.
    if (direct.converged) return direct;
  }
  return solve_wardrop(config, prices, options);
}

double price_sensitivity(const MarketConfig& config, const PriceProfile& prices,
                         const WardropSolution& solution, int provider) {
  const double W = config.unlicensed.get();
  const auto& g = config.congestion;
  const auto vars = build_vars(config, prices);
  const int V = int(vars.size());

  std::vector<double> x(size_t(V), 0.0);
  int target = -1;
  for (int v = 0; v < V; ++v) {
    const auto& vr = vars[size_t(v)];
    x[size_t(v)] = vr.unlicensed_service ? solution.alloc.unlicensed[size_t(vr.provider)]
                                         : solution.alloc.mass[size_t(vr.provider)];
    if (!vr.unlicensed_service && vr.provider == provider) target = v;
  }
  if (target < 0 || x[size_t(target)] <= 1e-10) {
    throw std::invalid_argument("price sensitivity: provider serves no mass");
  }

  std::vector<int> act;
  for (int v = 0; v < V; ++v) {
    if (x[size_t(v)] > 1e-10) act.push_back(v);
  }
  double L = 0.0;
  for (int v = 0; v < V; ++v) L += vars[size_t(v)].s * x[size_t(v)];
  const double gshare = g.derivative(L / W) / W;
  const double k1 = config.demand.slope;

  const int m = int(act.size());
  std::vector<std::vector<double>> aug(size_t(m), std::vector<double>(size_t(m) + 1, 0.0));
  int trow = -1;
  for (int ri = 0; ri < m; ++ri) {
    const auto& vu = vars[size_t(act[size_t(ri)])];
    const double a_u =
        vu.w > 0.0 ? vu.w * g.derivative(vu.r * x[size_t(act[size_t(ri)])]) * vu.r : 0.0;
    for (int ci = 0; ci < m; ++ci) {
      const auto& vv = vars[size_t(act[size_t(ci)])];
      double coef = vu.s * vv.s * gshare + k1;
      if (ri == ci) coef += a_u;
      aug[size_t(ri)][size_t(ci)] = coef;
    }
    if (act[size_t(ri)] == target) {
      aug[size_t(ri)][size_t(m)] = -1.0;
      trow = ri;
    }
  }
  if (!detail::gauss_solve(aug)) {
    throw std::runtime_error("price sensitivity: singular active system");
  }
  return aug[size_t(trow)][size_t(m)];
}

}  // namespace speq
