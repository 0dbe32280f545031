#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace brown {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

struct AcceptanceOptions {
  unsigned threads = 0;
  std::vector<int> only;  // empty = all criteria
};

/// Runs the end-to-end checks 1..11; `out` (if given) receives one line per
/// criterion as soon as it finishes.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options, std::ostream* out = nullptr);

std::string format_result(const CriterionResult& r);

}  // namespace brown
