#pragma once

#include <string>
#include <vector>

#include "pathsum/grid.hpp"

namespace pathsum {

struct VerifyOptions {
  int grid_points = 201;
  Quadrature rule = Quadrature::gregory4;
  unsigned seed = 2024;
};

struct VerifyCheck {
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

struct VerifyReport {
  std::vector<VerifyCheck> checks;
  bool passed() const;
};

// Invariant suite: associativity refinement, Volterra residuals, unitarity,
// elimination-order invariance, walk sums, sector/full-space equivalence.
VerifyReport run_verify(const VerifyOptions& opt = {});

// One line per check: PASS/FAIL, name, measured, tolerance, detail.
std::string format_report(const VerifyReport& r);

}  // namespace pathsum
