#pragma once

// Invariant suite behind `ffthom verify`: projection, decomposition and
// invariance properties plus small dense-oracle comparisons, all on seeded
// random instances.

#include "json.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace ffthom {

struct CheckResult {
  std::string name;
  bool passed = false;
  double value = 0.0;      // measured quantity
  double threshold = 0.0;  // pass iff value <= threshold
  std::string detail;
};

struct VerifyReport {
  std::vector<CheckResult> checks;

  bool all_passed() const;
  nlohmann::json to_json() const;
};

struct VerifyOptions {
  std::uint64_t seed = 0;
  /// Build every Green operator with one negated block.
  bool inject_fault = false;
};

VerifyReport run_verify(const VerifyOptions& options);

}  // namespace ffthom
