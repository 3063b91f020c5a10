#include "stratexp/audit.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "stratexp/noise.hpp"

namespace stratexp {

IcAuditResult ic_audit(const IncentiveProbe& probe, double belief, double grid_step) {
  if (!(belief >= 0.0 && belief <= 1.0)) throw std::domain_error("ic_audit: belief outside [0, 1]");
  if (!(grid_step > 0.0 && grid_step <= 1.0)) throw std::invalid_argument("ic_audit: grid step outside (0, 1]");
  auto candidates = make_grid(0.0, 1.0, grid_step);
  candidates.push_back(belief);
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  auto objective = [&](double p) { return (1.0 - belief) * probe(p, 0) + belief * probe(p, 1); };
  std::vector<double> values(candidates.size());
  double best = -INFINITY;
  for (std::size_t n = 0; n < candidates.size(); ++n) {
    values[n] = objective(candidates[n]);
    best = std::max(best, values[n]);
  }
  const double tol = 1e-12 * std::max(1.0, std::abs(best));
  std::vector<double> maximizers;
  for (std::size_t n = 0; n < candidates.size(); ++n) {
    if (values[n] >= best - tol) maximizers.push_back(candidates[n]);
  }
  const double argmax = maximizers[maximizers.size() / 2];
  const double truthful = values[static_cast<std::size_t>(
      std::lower_bound(candidates.begin(), candidates.end(), belief) - candidates.begin())];
  return {argmax, std::abs(argmax - belief), std::max(0.0, best - truthful)};
}

}  // namespace stratexp
