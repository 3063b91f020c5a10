#pragma once

#include "stratexp/learners.hpp"

namespace stratexp {

struct IcAuditResult {
  double argmax_report = 0.0;
  double deviation = 0.0;  // |argmax_report - belief|
  double gap = 0.0;        // objective(argmax) - objective(belief), >= 0
};

/// Grid search of (1 - b) probe(p, 0) + b probe(p, 1) over p in
/// {0, step, ..., 1} together with p = b. Near-ties (relative 1e-12) resolve
/// to the median maximizer.
IcAuditResult ic_audit(const IncentiveProbe& probe, double belief, double grid_step = 1e-3);

}  // namespace stratexp
