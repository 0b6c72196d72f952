#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tvmpc {

struct CriterionResult {
  std::string name;
  bool passed{false};
  std::string detail;
};

/// Runs the full verification suite: prediction and QP oracles, the five
/// simulation studies and the determinism check.
std::vector<CriterionResult> run_acceptance();

/// Runs the suite and prints one pass/fail line per criterion.
/// Returns true when everything passed.
bool print_acceptance(std::ostream& os);

}  // namespace tvmpc
