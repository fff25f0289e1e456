#pragma once

#include <string>
#include <vector>

namespace md {

// One theorem or invariant check: the measured quantity is compared against
// the pinned tolerance; `detail` explains what was measured.
struct CheckResult {
  std::string id;
  std::string property;
  double tolerance = 0.0;
  double measured = 0.0;
  bool passed = false;
};

std::vector<CheckResult> verify_potentials();
std::vector<CheckResult> verify_efe();
std::vector<CheckResult> verify_sampler();
std::vector<CheckResult> verify_topology();

// suite: "all", "potentials", "efe", "sampler" or "topology".
std::vector<CheckResult> run_verify_suite(const std::string& suite);

// Pretty table; returns the number of failed checks.
int print_check_results(const std::vector<CheckResult>& results);

}  // namespace md
