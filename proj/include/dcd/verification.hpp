#pragma once

#include <string>
#include <vector>

namespace dcd {

/// Outcome of one verification suite. Soft suites (hard == false) flag a
/// failure without failing the overall verdict; everything else is a hard
/// pass/fail gate.
struct SuiteResult {
  std::string name;
  bool pass = false;
  bool hard = true;
  double seconds = 0.0;
  std::string details;
};

std::vector<std::string> suite_names();

SuiteResult run_suite(const std::string& name);

/// Runs the selected suites (throws "no suites selected" on an empty list).
std::vector<SuiteResult> run_suites(const std::vector<std::string>& names);

/// True iff every hard suite passed.
bool all_passed(const std::vector<SuiteResult>& results);

std::uint64_t fnv1a_hash(const std::string& s);

}  // namespace dcd
