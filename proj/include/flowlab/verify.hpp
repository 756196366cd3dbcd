// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace flowlab {

// One named invariant check.  Every check is normalized to the sense
// "measured <= required": measured is an error, a deviation, or an excess,
// so a failing check directly shows how far off it is.
struct CheckResult {
  std::string module;
  std::string name;
  bool pass = false;
  double measured = 0.0;
  double required = 0.0;
  std::string detail;
};

struct VerifyOptions {
  std::uint64_t seed = 1;
  // Adds a constant to the exact subspace coordinates inside the
  // exact-parameter identity check; a nonzero value is a negative control
  // that must fail that check and only that check.
  double perturb_optimal = 0.0;
  int threads = 1;
};

// Runs the whole registry; never throws on a failing check (failures are
// reported), only on internal errors.
std::vector<CheckResult> run_verification(const VerifyOptions& opts);

bool all_passed(const std::vector<CheckResult>& results);

// One "PASS|FAIL module.name measured required detail" line per check.
std::string verify_report_text(const std::vector<CheckResult>& results);

// {"all_pass": bool, "checks": [{module, name, pass, measured, required,
// detail}...]} -- stable key set.
std::string verify_report_json(const std::vector<CheckResult>& results);

}  // namespace flowlab
