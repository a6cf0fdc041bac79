#include "speq/scenario.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "speq/linear_oracle.hpp"
#include "speq/nash_solver.hpp"

namespace speq {
namespace {

using nlohmann::json;
using SV = ScenarioSpec::SweepVariable;
using Kind = ScenarioSpec::Kind;

[[noreturn]] void fail(const std::string& msg) {
  throw std::invalid_argument("scenario: " + msg);
}

MarketMode parse_mode(const std::string& s) {
  if (s == "bundled") return MarketMode::Bundled;
  if (s == "unbundled") return MarketMode::Unbundled;
  if (s == "exclusive") return MarketMode::Exclusive;
  fail("unknown mode '" + s + "'");
}

SV parse_variable(const std::string& s) {
  if (s == "alpha") return SV::Alpha;
  if (s == "W") return SV::W;
  if (s == "B_t") return SV::BTotal;
  if (s == "M") return SV::M;
  fail("unknown sweep variable '" + s + "'");
}

const char* var_name(SV v) {
  switch (v) {
    case SV::Alpha: return "alpha";
    case SV::W: return "W";
    case SV::BTotal: return "B_t";
    case SV::M: return "M";
  }
  return "";
}

const char* objective_tag(AlphaObjective o) {
  return o == AlphaObjective::Profit ? "profit" : "welfare";
}

// Concrete market parameters for one sweep point.
struct RowParams {
  MarketMode mode = MarketMode::Bundled;
  int incumbents = 1;
  int entrants = 0;
  double alpha = 0.0;
  Bandwidth W = Bandwidth::finite(1.0);
  std::vector<double> bands;  // per incumbent
  double B_total = 0.0;
};

RowParams resolve(const ScenarioSpec& spec, double v) {
  RowParams r;
  r.mode = spec.mode;
  r.incumbents = spec.incumbents;
  r.entrants = spec.entrants;
  r.alpha = spec.alpha;
  r.W = spec.W;
  std::vector<double> raw = spec.bands;
  switch (spec.variable) {
    case SV::Alpha:
      r.alpha = v;
      break;
    case SV::W:
      r.W = Bandwidth::finite(v);
      break;
    case SV::BTotal:
      raw = {v};
      break;
    case SV::M:
      r.incumbents = int(std::llround(v));
      break;
  }
  if (spec.split_total) {
    r.B_total = raw[0];
    if (!spec.incumbents_infinite) {
      r.bands.assign(size_t(r.incumbents), raw[0] / double(r.incumbents));
    }
  } else {
    r.bands = raw;
    for (double b : raw) r.B_total += b;
  }
  return r;
}

MarketConfig build_config(const RowParams& rp) {
  switch (rp.mode) {
    case MarketMode::Bundled:
      return make_bundled(rp.bands, rp.entrants, rp.alpha, rp.W);
    case MarketMode::Unbundled:
      return make_unbundled(rp.bands, rp.entrants, rp.W);
    case MarketMode::Exclusive:
      return make_exclusive(rp.bands, rp.W.get());
  }
  throw std::logic_error("unreachable market mode");
}

struct Baseline {
  std::vector<double> profit;  // incumbents only
  double Q = 0.0;
  double CS = 0.0;
  double SW = 0.0;
};

Baseline unbundled_baseline(const ScenarioSpec& spec, const RowParams& rp) {
  Baseline b;
  if (rp.W.infinite) {
    auto u = unbundled_1v1_equilibrium_winf(rp.bands[0]);
    b.profit = {u.profit};
    b.Q = u.total_mass;
    b.CS = u.consumer_surplus;
    b.SW = u.social_welfare;
    return b;
  }
  auto eq = find_equilibrium(make_unbundled(rp.bands, rp.entrants, rp.W));
  if (!eq.converged) throw std::runtime_error("unbundled baseline did not converge");
  b.profit.assign(eq.welfare.profit.begin(), eq.welfare.profit.begin() + spec.incumbents);
  b.Q = eq.welfare.total_mass;
  b.CS = eq.welfare.consumer_surplus;
  b.SW = eq.welfare.social_welfare;
  return b;
}

Baseline exclusive_baseline(const ScenarioSpec& spec, const RowParams& rp) {
  Baseline b;
  if (rp.W.infinite) {
    auto c = exclusive_use_equilibrium_winf(rp.bands[0]);
    b.profit = {c.profit[0]};
    b.Q = c.total_mass;
    b.CS = c.consumer_surplus;
    b.SW = c.social_welfare;
    return b;
  }
  auto eq = find_equilibrium(make_exclusive(rp.bands, rp.W.get()));
  if (!eq.converged) throw std::runtime_error("exclusive baseline did not converge");
  b.profit.assign(eq.welfare.profit.begin(), eq.welfare.profit.begin() + spec.incumbents);
  b.Q = eq.welfare.total_mass;
  b.CS = eq.welfare.consumer_surplus;
  b.SW = eq.welfare.social_welfare;
  return b;
}

void append_baseline(const Baseline& b, std::vector<std::string>& cells) {
  for (double p : b.profit) cells.push_back(format_real(p));
  cells.push_back(format_real(b.Q));
  cells.push_back(format_real(b.CS));
  cells.push_back(format_real(b.SW));
}

bool equilibrium_row(const ScenarioSpec& spec, const RowParams& rp,
                     std::vector<std::string>& cells) {
  if (rp.W.infinite) {
    // Validated shape: one bundled incumbent against one entrant.
    auto c = one_v_one_winf(rp.bands[0], rp.alpha);
    for (double p : c.price) cells.push_back(format_real(p));
    for (double m : c.mass) cells.push_back(format_real(m));
    for (double p : c.profit) cells.push_back(format_real(p));
    cells.push_back(format_real(c.total_mass));
    cells.push_back(format_real(c.consumer_surplus));
    cells.push_back(format_real(c.social_welfare));
    return true;
  }
  auto eq = find_equilibrium(build_config(rp));
  if (!eq.converged) return false;
  for (double p : eq.prices.price) cells.push_back(format_real(p));
  for (double p : eq.prices.unlicensed) cells.push_back(format_real(p));
  for (double m : eq.solution.alloc.mass) cells.push_back(format_real(m));
  for (double m : eq.solution.alloc.unlicensed) cells.push_back(format_real(m));
  for (double p : eq.welfare.profit) cells.push_back(format_real(p));
  cells.push_back(format_real(eq.welfare.total_mass));
  cells.push_back(format_real(eq.welfare.consumer_surplus));
  cells.push_back(format_real(eq.welfare.social_welfare));
  return true;
}

bool optimization_row(const ScenarioSpec& spec, const RowParams& rp,
                      std::vector<std::string>& cells) {
  MarketConfig cfg = build_config(rp);
  auto opt = optimize_alpha(cfg, spec.objectives[0]);
  if (opt.samples.empty() || opt.failures >= int(opt.samples.size())) return false;
  cfg.alpha = opt.alpha_star;
  auto eq = find_equilibrium(cfg);
  if (!eq.converged) return false;
  cells.push_back(format_real(opt.alpha_star));
  cells.push_back(format_real(eq.welfare.profit[0]));
  cells.push_back(format_real(eq.welfare.social_welfare));
  return true;
}

bool gap_row(const ScenarioSpec& spec, const RowParams& rp, std::vector<std::string>& cells) {
  if (spec.incumbents_infinite || rp.W.infinite) {
    const IncumbentCount M = spec.incumbents_infinite ? IncumbentCount::unbounded()
                                                      : IncumbentCount::finite(rp.incumbents);
    auto wp = profit_optimal_alpha_winf(M, rp.B_total);
    cells.push_back(format_real(wp.alpha_star));
    cells.push_back(format_real(wp.per_profit));
    cells.push_back(format_real(wp.social_welfare));
    // Full sharing is welfare-optimal in the uncongested limit: everyone is
    // served at zero price and welfare is the whole surplus triangle.
    cells.push_back(format_real(1.0));
    cells.push_back(format_real(0.0));
    cells.push_back(format_real(0.5));
    cells.push_back(format_real(welfare_gap(M, rp.B_total, Bandwidth::unbounded())));
    return true;
  }
  MarketConfig cfg = make_symmetric_bundled(rp.incumbents, rp.B_total, 0.0, rp.W);
  auto popt = optimize_alpha(cfg, AlphaObjective::Profit);
  if (popt.failures >= int(popt.samples.size())) return false;
  cfg.alpha = popt.alpha_star;
  auto eqp = find_equilibrium(cfg);
  if (!eqp.converged) return false;
  auto wopt = optimize_alpha(cfg, AlphaObjective::Welfare);
  if (wopt.failures >= int(wopt.samples.size())) return false;
  cfg.alpha = wopt.alpha_star;
  auto eqw = find_equilibrium(cfg);
  if (!eqw.converged) return false;
  cells.push_back(format_real(popt.alpha_star));
  cells.push_back(format_real(eqp.welfare.profit[0]));
  cells.push_back(format_real(eqp.welfare.social_welfare));
  cells.push_back(format_real(wopt.alpha_star));
  cells.push_back(format_real(eqw.welfare.profit[0]));
  cells.push_back(format_real(eqw.welfare.social_welfare));
  cells.push_back(format_real(eqw.welfare.social_welfare - eqp.welfare.social_welfare));
  return true;
}

}  // namespace

ScenarioSpec::Kind ScenarioSpec::kind() const {
  if (objectives.empty()) return Kind::EquilibriumSweep;
  return objectives.size() == 1 ? Kind::AlphaOptimization : Kind::WelfareGap;
}

std::vector<double> ScenarioSpec::sweep_values() const {
  std::vector<double> vals;
  if (step <= 0.0 || to < from) return vals;
  const int n = int(std::floor((to - from) / step + 1e-9));
  vals.reserve(size_t(n) + 1);
  for (int k = 0; k <= n; ++k) vals.push_back(from + step * double(k));
  if (std::abs(vals.back() - to) <= 1e-9 * std::max(1.0, std::abs(to))) vals.back() = to;
  return vals;
}

void ScenarioSpec::validate() const {
  if (name.empty()) fail("name required");
  if (step <= 0.0) fail("step must be positive");
  if (from > to) fail("sweep range is inverted");
  if (bands.empty()) fail("bands required");
  for (double b : bands) {
    if (!(b > 0.0)) fail("band widths must be positive");
  }
  if (split_total && bands.size() != 1) fail("split_total takes a single total band width");
  if (!incumbents_infinite) {
    if (incumbents < 1) fail("at least one incumbent required");
    if (entrants < 0) fail("entrant count cannot be negative");
    if (!split_total && int(bands.size()) != incumbents) {
      fail("bands must list one width per incumbent");
    }
  }
  if (!W.infinite && !(W.value > 0.0)) fail("W must be positive");
  if (alpha < 0.0 || alpha > 1.0) fail("alpha outside [0, 1]");
  if (objectives.size() > 2) fail("at most two objectives");
  if (objectives.size() == 2 && objectives[0] == objectives[1]) fail("duplicate objectives");

  const Kind k = kind();
  switch (variable) {
    case SV::Alpha:
      if (mode != MarketMode::Bundled) fail("only bundled markets sweep the bundling fraction");
      if (from < 0.0 || to > 1.0) fail("bundling fraction sweeps stay inside [0, 1]");
      if (k != Kind::EquilibriumSweep) {
        fail("the bundling fraction cannot be swept and optimised at once");
      }
      break;
    case SV::W:
      if (from <= 0.0) fail("W sweeps stay positive");
      break;
    case SV::BTotal:
      if (!split_total) fail("total-band sweeps need split_total");
      if (from <= 0.0) fail("total-band sweeps stay positive");
      break;
    case SV::M: {
      if (!split_total) fail("provider-count sweeps need split_total");
      auto integral = [](double v) { return std::abs(v - std::round(v)) <= 1e-9; };
      if (!integral(from) || !integral(to) || !integral(step)) {
        fail("provider counts step through integers");
      }
      if (from < 1.0) fail("at least one incumbent required");
      if (k == Kind::EquilibriumSweep) fail("per-provider columns need a fixed provider count");
      break;
    }
  }
  if (incumbents_infinite) {
    if (k != Kind::WelfareGap) fail("symbolic incumbent counts only fit welfare-gap runs");
    if (!W.infinite) fail("symbolic incumbent counts need the uncongested-band limit");
    if (entrants != 0) fail("symbolic incumbent counts exclude entrants");
    if (!split_total) fail("symbolic incumbent counts need split_total");
    if (variable == SV::M) fail("the provider count is symbolic; it cannot sweep");
  }
  if (k != Kind::EquilibriumSweep && mode != MarketMode::Bundled) {
    fail("bundling-fraction optimisation needs a bundled market");
  }
  if (k == Kind::WelfareGap) {
    if (entrants != 0) fail("welfare-gap runs cover symmetric incumbent markets only");
    if (!split_total) fail("welfare-gap runs need split_total");
    if (compare_unbundled || compare_exclusive) fail("welfare-gap runs take no baselines");
  }
  if (W.infinite && variable != SV::W) {
    if (mode != MarketMode::Bundled) fail("the uncongested-band limit needs bundled mode");
    if (k == Kind::EquilibriumSweep && !(incumbents == 1 && entrants == 1)) {
      fail("uncongested-band sweeps cover one incumbent against one entrant");
    }
    if (k == Kind::AlphaOptimization) {
      fail("bundling-fraction optimisation needs a finite shared band");
    }
  }
  if (mode == MarketMode::Exclusive && entrants != 1) {
    fail("exclusive mode licenses the shared band to exactly one entrant");
  }
}

ScenarioSpec parse_scenario(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    fail(e.what());
  }
  if (!j.is_object()) fail("top-level object required");
  static const std::set<std::string> known = {
      "name",        "mode",       "incumbents", "incumbents_infinite",
      "entrants",    "bands",      "split_total", "W",
      "alpha",       "variable",   "from",        "to",
      "step",        "objectives", "compare_unbundled", "compare_exclusive",
      "output"};
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!known.count(it.key())) fail("unknown field '" + it.key() + "'");
  }
  for (const char* req : {"name", "bands", "variable", "from", "to", "step"}) {
    if (!j.contains(req)) fail(std::string("missing required field '") + req + "'");
  }

  ScenarioSpec s;
  try {
    s.name = j.at("name").get<std::string>();
    if (j.contains("mode")) s.mode = parse_mode(j.at("mode").get<std::string>());
    s.incumbents = j.value("incumbents", 1);
    s.incumbents_infinite = j.value("incumbents_infinite", false);
    s.entrants = j.value("entrants", 0);
    s.bands = j.at("bands").get<std::vector<double>>();
    s.split_total = j.value("split_total", false);
    if (j.contains("W")) {
      const auto& w = j.at("W");
      if (w.is_string()) {
        if (w.get<std::string>() != "inf") fail("W must be a number or \"inf\"");
        s.W = Bandwidth::unbounded();
      } else {
        s.W = Bandwidth::finite(w.get<double>());
      }
    }
    s.alpha = j.value("alpha", 0.0);
    s.variable = parse_variable(j.at("variable").get<std::string>());
    s.from = j.at("from").get<double>();
    s.to = j.at("to").get<double>();
    s.step = j.at("step").get<double>();
    if (j.contains("objectives")) {
      for (const auto& o : j.at("objectives")) {
        const std::string tag = o.get<std::string>();
        if (tag == "profit") {
          s.objectives.push_back(AlphaObjective::Profit);
        } else if (tag == "welfare") {
          s.objectives.push_back(AlphaObjective::Welfare);
        } else {
          fail("unknown objective '" + tag + "'");
        }
      }
    }
    s.compare_unbundled = j.value("compare_unbundled", false);
    s.compare_exclusive = j.value("compare_exclusive", false);
    s.output = j.value("output", s.name + ".csv");
  } catch (const json::exception& e) {
    fail(e.what());
  }
  return s;
}

ScenarioSpec load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("scenario: cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

std::vector<std::string> csv_header(const ScenarioSpec& spec) {
  std::vector<std::string> h{"status", var_name(spec.variable)};
  const int n = spec.incumbents + spec.entrants;
  switch (spec.kind()) {
    case Kind::EquilibriumSweep: {
      for (int i = 1; i <= n; ++i) h.push_back("price_" + std::to_string(i));
      if (spec.mode == MarketMode::Unbundled) {
        for (int i = 1; i <= n; ++i) h.push_back("uprice_" + std::to_string(i));
      }
      for (int i = 1; i <= n; ++i) h.push_back("mass_" + std::to_string(i));
      if (spec.mode == MarketMode::Unbundled) {
        for (int i = 1; i <= n; ++i) h.push_back("umass_" + std::to_string(i));
      }
      for (int i = 1; i <= n; ++i) h.push_back("profit_" + std::to_string(i));
      h.emplace_back("Q");
      h.emplace_back("CS");
      h.emplace_back("SW");
      break;
    }
    case Kind::AlphaOptimization: {
      const std::string tag = objective_tag(spec.objectives[0]);
      h.push_back("alpha_star_" + tag);
      h.push_back("profit_" + tag);
      h.push_back("sw_" + tag);
      break;
    }
    case Kind::WelfareGap: {
      for (const char* tag : {"profit", "welfare"}) {
        h.push_back(std::string("alpha_star_") + tag);
        h.push_back(std::string("profit_") + tag);
        h.push_back(std::string("sw_") + tag);
      }
      h.emplace_back("gap");
      break;
    }
  }
  if (spec.kind() != Kind::WelfareGap) {
    if (spec.compare_unbundled) {
      for (int i = 1; i <= spec.incumbents; ++i) h.push_back("unb_profit_" + std::to_string(i));
      h.emplace_back("unb_Q");
      h.emplace_back("unb_CS");
      h.emplace_back("unb_SW");
    }
    if (spec.compare_exclusive) {
      for (int i = 1; i <= spec.incumbents; ++i) h.push_back("exc_profit_" + std::to_string(i));
      h.emplace_back("exc_Q");
      h.emplace_back("exc_CS");
      h.emplace_back("exc_SW");
    }
  }
  return h;
}

std::string run_sweep(const ScenarioSpec& spec) {
  spec.validate();
  const auto header = csv_header(spec);
  std::string out;
  for (size_t i = 0; i < header.size(); ++i) {
    if (i) out += ',';
    out += header[i];
  }
  out += '\n';

  for (double v : spec.sweep_values()) {
    std::vector<std::string> cells{"ok", format_real(v)};
    bool ok = false;
    try {
      const RowParams rp = resolve(spec, v);
      switch (spec.kind()) {
        case Kind::EquilibriumSweep:
          ok = equilibrium_row(spec, rp, cells);
          break;
        case Kind::AlphaOptimization:
          ok = optimization_row(spec, rp, cells);
          break;
        case Kind::WelfareGap:
          ok = gap_row(spec, rp, cells);
          break;
      }
      if (ok && spec.kind() != Kind::WelfareGap) {
        if (spec.compare_unbundled) append_baseline(unbundled_baseline(spec, rp), cells);
        if (spec.compare_exclusive) append_baseline(exclusive_baseline(spec, rp), cells);
      }
    } catch (const std::exception&) {
      ok = false;
    }
    if (!ok) {
      cells.assign({std::string("fail"), format_real(v)});
      while (cells.size() < header.size()) cells.emplace_back("nan");
    }
    for (size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  }
  return out;
}

std::string format_real(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 12);
  return std::string(buf, res.ptr);
}

}  // namespace speq
