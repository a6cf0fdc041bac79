#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "speq/alpha_stage.hpp"
#include "speq/market_model.hpp"

namespace speq {

// One figure-style parameter sweep, parsed from JSON. Exactly one variable sweeps;
// optional alpha-optimisation objectives turn each sweep point into an outer
// optimisation instead of a fixed-alpha equilibrium.
struct ScenarioSpec {
  enum class SweepVariable { Alpha, W, BTotal, M };
  enum class Kind { EquilibriumSweep, AlphaOptimization, WelfareGap };

  std::string name;
  MarketMode mode = MarketMode::Bundled;
  int incumbents = 1;
  bool incumbents_infinite = false;  // WelfareGap scenarios may take M -> infinity
  int entrants = 0;
  std::vector<double> bands;  // explicit B_i, or a single total split equally
  bool split_total = false;
  Bandwidth W = Bandwidth::finite(1.0);
  double alpha = 0.0;  // fixed alpha when it is not the sweep variable

  SweepVariable variable = SweepVariable::Alpha;
  double from = 0.0;
  double to = 1.0;
  double step = 0.01;

  std::vector<AlphaObjective> objectives;  // empty -> fixed-alpha equilibrium sweep
  bool compare_unbundled = false;
  bool compare_exclusive = false;
  std::string output;  // default CSV file name

  Kind kind() const;
  std::vector<double> sweep_values() const;
  void validate() const;  // throws std::invalid_argument
};

ScenarioSpec parse_scenario(const std::string& json_text);
ScenarioSpec load_scenario(const std::string& path);

// Column names; a pure function of the spec's mode, provider counts, and flags.
std::vector<std::string> csv_header(const ScenarioSpec& spec);

// Full CSV text (header plus one row per sweep point, in sweep order). Solver
// failures annotate the row's status column; rows are never dropped. Output is
// byte-identical across runs: 12-significant-digit shortest decimal rendering.
std::string run_sweep(const ScenarioSpec& spec);

std::string format_real(double v);  // locale-independent, 12 significant digits

}  // namespace speq
