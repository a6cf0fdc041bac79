#include <cstdio>
#include <exception>
#include <fstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "speq/linear_oracle.hpp"
#include "speq/market_model.hpp"
#include "speq/nash_solver.hpp"
#include "speq/scenario.hpp"
#include "speq/theorem_suite.hpp"

namespace {

int cmd_sweep(const std::string& spec_path, std::string out_path) {
  const speq::ScenarioSpec spec = speq::load_scenario(spec_path);
  if (out_path.empty()) out_path = spec.output;
  const std::string csv = speq::run_sweep(spec);
  std::ofstream out(out_path, std::ios::binary);
  if (!out) {
    std::fprintf(stderr, "error: cannot open output file %s\n", out_path.c_str());
    return 1;
  }
  out << csv;
  out.close();
  std::size_t newlines = 0;
  for (char c : csv) newlines += (c == '\n');
  std::printf("%s: wrote %zu rows to %s\n", spec.name.c_str(), newlines - 1, out_path.c_str());
  return 0;
}

int cmd_verify(const std::string& filter, bool as_json, bool mutate) {
  speq::SuiteOptions opt;
  opt.filter = filter;
  opt.mutate = mutate;
  const auto results = speq::run_theorem_suite(opt);
  if (as_json) {
    std::fputs(speq::suite_report_json(results).c_str(), stdout);
  } else {
    std::fputs(speq::suite_report_text(results).c_str(), stdout);
  }
  return speq::all_passed(results) ? 0 : 1;
}

void print_provider_row(const speq::MarketConfig& cfg, const speq::EquilibriumResult& eq,
                        int i) {
  const auto& pr = cfg.providers[size_t(i)];
  const bool incumbent = pr.role == speq::Role::Incumbent;
  std::printf("provider %d (%s", i + 1, incumbent ? "incumbent" : "entrant");
  if (incumbent) std::printf(", B=%s", speq::format_real(pr.licensed_bandwidth).c_str());
  std::printf(")");
  if (cfg.mode == speq::MarketMode::Unbundled) {
    if (incumbent) {
      std::printf(" licensed price=%s mass=%s",
                  speq::format_real(eq.prices.price[size_t(i)]).c_str(),
                  speq::format_real(eq.solution.alloc.mass[size_t(i)]).c_str());
    }
    std::printf(" unlicensed price=%s mass=%s",
                speq::format_real(eq.prices.unlicensed[size_t(i)]).c_str(),
                speq::format_real(eq.solution.alloc.unlicensed[size_t(i)]).c_str());
  } else {
    std::printf(" price=%s mass=%s", speq::format_real(eq.prices.price[size_t(i)]).c_str(),
                speq::format_real(eq.solution.alloc.mass[size_t(i)]).c_str());
  }
  std::printf(" profit=%s\n", speq::format_real(eq.welfare.profit[size_t(i)]).c_str());
}

int cmd_eq(const std::string& mode, std::vector<double> bands, const std::string& w_text,
           double alpha, int M, int N) {
  if (bands.empty()) {
    std::fprintf(stderr, "error: --B needs at least one band width\n");
    return 1;
  }
  if (M > 0) {
    if (bands.size() == 1 && M > 1) {
      bands.assign(size_t(M), bands[0]);
    } else if (int(bands.size()) != M) {
      std::fprintf(stderr, "error: --M %d does not match %zu --B entries\n", M, bands.size());
      return 1;
    }
  }

  speq::Bandwidth W;
  if (w_text == "inf") {
    W = speq::Bandwidth::unbounded();
  } else {
    W = speq::Bandwidth::finite(std::stod(w_text));
  }

  if (W.infinite) {
    if (mode != "bundled" || bands.size() != 1 || N != 1) {
      std::fprintf(stderr,
                   "error: --W inf is supported here only for bundled --M 1 --N 1 "
                   "(scenario sweeps cover the other limits)\n");
      return 1;
    }
    const auto cf = speq::one_v_one_winf(bands[0], alpha);
    std::printf("mode: bundled (uncongested shared band, closed form)  alpha=%s\n",
                speq::format_real(alpha).c_str());
    std::printf("provider 1 (incumbent, B=%s) price=%s mass=%s profit=%s\n",
                speq::format_real(bands[0]).c_str(), speq::format_real(cf.price[0]).c_str(),
                speq::format_real(cf.mass[0]).c_str(), speq::format_real(cf.profit[0]).c_str());
    std::printf("provider 2 (entrant) price=%s mass=%s profit=%s\n",
                speq::format_real(cf.price[1]).c_str(), speq::format_real(cf.mass[1]).c_str(),
                speq::format_real(cf.profit[1]).c_str());
    std::printf("Q=%s CS=%s SW=%s\n", speq::format_real(cf.total_mass).c_str(),
                speq::format_real(cf.consumer_surplus).c_str(),
                speq::format_real(cf.social_welfare).c_str());
    return 0;
  }

  speq::MarketConfig cfg;
  if (mode == "bundled") {
    cfg = speq::make_bundled(bands, N, alpha, W);
  } else if (mode == "unbundled") {
    cfg = speq::make_unbundled(bands, N, W);
  } else if (mode == "exclusive") {
    if (N > 1) {
      std::fprintf(stderr, "error: exclusive mode has exactly one entrant\n");
      return 1;
    }
    cfg = speq::make_exclusive(bands, W.get());
  } else {
    std::fprintf(stderr, "error: unknown mode %s\n", mode.c_str());
    return 1;
  }

  const auto eq = speq::find_equilibrium(cfg);
  std::printf("mode: %s  M=%d N=%d W=%s", mode.c_str(), cfg.incumbent_count(),
              cfg.entrant_count(), speq::format_real(W.get()).c_str());
  if (cfg.mode == speq::MarketMode::Bundled) {
    std::printf(" alpha=%s", speq::format_real(alpha).c_str());
  }
  std::printf("\nstatus: %s (rounds=%d, eps_ne=%.3g)\n",
              eq.converged ? "converged" : "NOT CONVERGED", eq.rounds, eq.eps_ne);
  for (int i = 0; i < cfg.provider_count(); ++i) print_provider_row(cfg, eq, i);
  std::printf("Q=%s CS=%s SW=%s\n", speq::format_real(eq.welfare.total_mass).c_str(),
              speq::format_real(eq.welfare.consumer_surplus).c_str(),
              speq::format_real(eq.welfare.social_welfare).c_str());
  return eq.converged ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectrum pricing equilibrium toolkit"};
  app.require_subcommand(1);

  auto* sweep = app.add_subcommand("sweep", "Run a scenario sweep and write its CSV");
  std::string spec_path, out_path;
  sweep->add_option("spec", spec_path, "Scenario JSON file")->required();
  sweep->add_option("-o,--output", out_path, "Output CSV path (default: the scenario's)");

  auto* verify = app.add_subcommand("verify", "Run the acceptance check suite");
  std::string filter;
  bool as_json = false, mutate = false;
  verify->add_option("--filter", filter, "Only run checks whose name contains this substring");
  verify->add_flag("--json", as_json, "Emit a JSON report instead of text");
  verify->add_flag("--mutate", mutate, "Self-test: perturb a known constant; that check must fail");

  auto* eq = app.add_subcommand("eq", "Solve one market and print its equilibrium");
  std::string mode = "bundled", w_text = "1";
  std::vector<double> bands;
  double alpha = 0.0;
  int M = 0, N = 0;
  eq->add_option("--mode", mode, "bundled | unbundled | exclusive")
      ->check(CLI::IsMember({"bundled", "unbundled", "exclusive"}));
  eq->add_option("--B", bands, "Licensed band widths (comma separated)")
      ->required()
      ->delimiter(',');
  eq->add_option("--W", w_text, "Shared band width, or 'inf'");
  eq->add_option("--alpha", alpha, "Bundling fraction (bundled mode)");
  eq->add_option("--M", M, "Incumbent count (replicates a single --B entry)");
  eq->add_option("--N", N, "Entrant count");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sweep->parsed()) return cmd_sweep(spec_path, out_path);
    if (verify->parsed()) return cmd_verify(filter, as_json, mutate);
    return cmd_eq(mode, bands, w_text, alpha, M, N);
  } catch (const std::exception& ex) {
    std::fprintf(stderr, "error: %s\n", ex.what());
    return 1;
  }
}
