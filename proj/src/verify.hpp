#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "common.hpp"

namespace sqf::verify {

// One measured margin compared against its tolerance. `margin` is the
// measured quantity in the same units as `tolerance`; for "must fire" /
// "must fail" checks the details string says which way the comparison runs.
struct Check {
  std::string name;
  bool passed = false;
  double margin = 0.0;
  double tolerance = 0.0;
  std::string details;
};

struct Report {
  std::string suite;
  std::vector<Check> checks;

  bool passed() const;
  nlohmann::json to_json() const;
};

// Available suites:
//   riccati_oracles      — covariance ODEs vs closed forms, fixed points,
//                          pinned arithmetic, steady-state contraction
//   vacuum_reduction     — the true vacuum-limit reductions between the
//                          mixed and direct scenarios
//   pathwise             — shared-record cross-validation of the general
//                          filter against both closed-form filters,
//                          dt-refinement slopes, and the wrong-coefficient
//                          regression (must fail the gap bound)
//   ensemble_vs_lindblad — unconditional-oracle checks and ensemble means
//   invariants           — trace-residual bound, positivity, Heisenberg
//                          inequality, K positivity, commutation rejection,
//                          innovation statistics
std::vector<std::string> suite_names();

Report run_suite(const std::string& suite);

}  // namespace sqf::verify
