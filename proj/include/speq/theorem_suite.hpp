#pragma once

#include <string>
#include <vector>

namespace speq {

// One verification of an established property of the market model, evaluated
// numerically at the tolerances baked into the check.
struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;  // measured values and tolerances, human-readable
  double seconds = 0.0;
};

struct SuiteOptions {
  std::string filter;  // run only checks whose name contains this substring
  // Self-test of the harness: perturb one frozen expected constant so the
  // corresponding check must fail. Exercised by the unit tests.
  bool mutate = false;
};

std::vector<CheckResult> run_theorem_suite(const SuiteOptions& options = {});

bool all_passed(const std::vector<CheckResult>& results);
std::string suite_report_text(const std::vector<CheckResult>& results);
std::string suite_report_json(const std::vector<CheckResult>& results);

}  // namespace speq
