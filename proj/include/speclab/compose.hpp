#pragma once

#include <map>
#include <string>
#include <vector>

#include "speclab/am.hpp"

namespace speclab {

struct WfCase {
  std::string name;
  const Program *program;
  Config init;
};

struct WfViolation {
  std::string condition;  // "confluence" or "projection"
  std::string semantics;
  std::string program;
  std::string detail;
};

struct WfReport {
  std::vector<WfViolation> violations;
  std::size_t checks = 0;
  bool ok() const { return violations.empty(); }
};

// Runs each case under `sem` with every applicable component tried on each
// step (confluence) and compares the projection onto each member with the run
// of that member alone (projection preservation). Transaction ids are
// compared up to renaming.
WfReport check_wellformedness(const Semantics &sem, const std::vector<WfCase> &cases, Word window = kDefaultWindow,
                              std::size_t fuel = kDefaultFuel);

// True when every semantics that subsumes a detecting semantics also detects.
// Keys are Semantics::id() over all_semantics(); missing keys are ignored.
bool upward_closed(const std::map<std::string, bool> &detects, std::string *counterexample = nullptr);

}  // namespace speclab
