#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace backorbit {

struct CriterionResult {
  int id;
  std::string name;
  bool pass;
  std::string detail;
};

struct SuiteReport {
  std::vector<CriterionResult> criteria;
  bool pass() const;
  /// One line per criterion: CRITERION <id> PASS|FAIL <name>: <detail>
  std::string text() const;
};

/// Runs the acceptance battery. The determinism criterion reruns criteria
/// 1 to 9 with the same seed and compares the report text byte for byte.
SuiteReport run_acceptance(std::uint64_t seed = 1);

}  // namespace backorbit
