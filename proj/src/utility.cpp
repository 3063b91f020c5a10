#include "stratexp/utility.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace stratexp {
namespace {

constexpr std::size_t kLogDomainThreshold = 30;

void check_loss(double loss) {
  if (!(loss >= 0.0 && loss <= 1.0)) {
    throw std::domain_error("loss " + std::to_string(loss) + " outside [0, 1]");
  }
}

void check_members(const ExpertSet& s, std::size_t k) {
  if (!s.empty() && s.members().back() >= k) {
    throw std::out_of_range("expert index " + std::to_string(s.members().back()) + " out of range");
  }
}

}  // namespace

double quadratic_loss(double p, int r) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("report " + std::to_string(p) + " outside [0, 1]");
  if (r != 0 && r != 1) throw std::domain_error("outcome must be 0 or 1");
  const double d = p - static_cast<double>(r);
  return d * d;
}

LossMatrix::LossMatrix(std::size_t horizon, std::size_t experts)
    : horizon_(horizon), experts_(experts), values_(horizon * experts, 0.0) {}

LossMatrix::LossMatrix(std::size_t horizon, std::size_t experts, std::vector<double> values)
    : horizon_(horizon), experts_(experts), values_(std::move(values)) {
  if (values_.size() != horizon_ * experts_) throw std::invalid_argument("LossMatrix: size mismatch");
  std::for_each(values_.begin(), values_.end(), check_loss);
}

void LossMatrix::set(std::size_t t, std::size_t i, double loss) {
  check_loss(loss);
  values_.at(t * experts_ + i) = loss;
}

void LossMatrix::set_row(std::size_t t, std::span<const double> losses) {
  if (losses.size() != experts_) throw std::invalid_argument("LossMatrix::set_row: width mismatch");
  for (std::size_t i = 0; i < experts_; ++i) set(t, i, losses[i]);
}

ExpertSet::ExpertSet(std::vector<std::size_t> members) : members_(std::move(members)) {
  std::sort(members_.begin(), members_.end());
  if (std::adjacent_find(members_.begin(), members_.end()) != members_.end()) {
    throw std::invalid_argument("ExpertSet: duplicate member");
  }
}

ExpertSet::ExpertSet(std::initializer_list<std::size_t> members)
    : ExpertSet(std::vector<std::size_t>(members)) {}

bool ExpertSet::contains(std::size_t j) const {
  return std::binary_search(members_.begin(), members_.end(), j);
}

ExpertSet ExpertSet::with(std::size_t j) const {
  if (contains(j)) throw std::invalid_argument("ExpertSet::with: already a member");
  auto copy = members_;
  copy.insert(std::upper_bound(copy.begin(), copy.end(), j), j);
  ExpertSet out;
  out.members_ = std::move(copy);
  return out;
}

std::string_view to_string(UtilityType type) {
  return type == UtilityType::Modular ? "modular" : "submodular";
}

UtilityType parse_utility_type(std::string_view name) {
  if (name == "modular") return UtilityType::Modular;
  if (name == "submodular") return UtilityType::Submodular;
  throw std::invalid_argument("unknown utility '" + std::string(name) + "'");
}

double loss_product(std::span<const double> loss_row, std::span<const std::size_t> members) {
  if (members.size() > kLogDomainThreshold) {
    double log_sum = 0.0;
    for (std::size_t i : members) {
      if (loss_row[i] == 0.0) return 0.0;
      log_sum += std::log(loss_row[i]);
    }
    return std::exp(log_sum);
  }
  double prod = 1.0;
  for (std::size_t i : members) {
    if (loss_row[i] == 0.0) return 0.0;
    prod *= loss_row[i];
  }
  return prod;
}

std::vector<double> leave_one_out_products(std::span<const double> loss_row) {
  const std::size_t k = loss_row.size();
  std::vector<double> out(k, 0.0);
  std::size_t zeros = 0;
  std::size_t zero_at = 0;
  for (std::size_t j = 0; j < k; ++j) {
    if (loss_row[j] == 0.0) {
      ++zeros;
      zero_at = j;
    }
  }
  if (zeros >= 2) return out;
  if (k > kLogDomainThreshold) {
    double log_total = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      if (loss_row[j] != 0.0) log_total += std::log(loss_row[j]);
    }
    if (zeros == 1) {
      out[zero_at] = std::exp(log_total);
      return out;
    }
    for (std::size_t j = 0; j < k; ++j) out[j] = std::exp(log_total - std::log(loss_row[j]));
    return out;
  }
  // Prefix/suffix products avoid dividing by small losses.
  std::vector<double> suffix(k + 1, 1.0);
  for (std::size_t j = k; j-- > 0;) suffix[j] = suffix[j + 1] * loss_row[j];
  double prefix = 1.0;
  for (std::size_t j = 0; j < k; ++j) {
    out[j] = prefix * suffix[j + 1];
    prefix *= loss_row[j];
  }
  return out;
}

double utility(const UtilityKind& kind, const ExpertSet& s, std::span<const double> loss_row) {
  check_members(s, loss_row.size());
  if (kind.type == UtilityType::Modular) {
    if (s.size() > kind.m) throw std::invalid_argument("modular utility: |S| exceeds m");
    double total = 0.0;
    for (std::size_t i : s) total += 1.0 - loss_row[i];
    return total / static_cast<double>(kind.m);
  }
  return 1.0 - loss_product(loss_row, s.members());
}

double marginal_gain(const UtilityKind& kind, std::size_t j, const ExpertSet& s,
                     std::span<const double> loss_row) {
  if (s.contains(j)) throw std::invalid_argument("marginal_gain: expert already in the base set");
  check_members(s, loss_row.size());
  if (kind.type == UtilityType::Modular) return (1.0 - loss_row[j]) / static_cast<double>(kind.m);
  return (1.0 - loss_row[j]) * loss_product(loss_row, s.members());
}

std::vector<double> singleton_lower_bounds(const UtilityKind& kind, std::span<const double> loss_row) {
  std::vector<double> h(loss_row.size());
  if (kind.type == UtilityType::Modular) {
    for (std::size_t j = 0; j < h.size(); ++j) h[j] = (1.0 - loss_row[j]) / static_cast<double>(kind.m);
    return h;
  }
  const auto others = leave_one_out_products(loss_row);
  for (std::size_t j = 0; j < h.size(); ++j) h[j] = (1.0 - loss_row[j]) * others[j];
  return h;
}

double modular_lower_bound(const UtilityKind& kind, std::span<const double> loss_row, const ExpertSet& s) {
  check_members(s, loss_row.size());
  if (s.empty()) return 0.0;
  const auto h = singleton_lower_bounds(kind, loss_row);
  double total = 0.0;
  for (std::size_t j : s) total += h[j];
  return total;
}

double modular_lower_bound(std::span<const double> loss_row, const ExpertSet& s) {
  return modular_lower_bound(UtilityKind::submodular(loss_row.size()), loss_row, s);
}

double residual_g(const UtilityKind& kind, std::span<const double> loss_row, const ExpertSet& s) {
  return utility(kind, s, loss_row) - modular_lower_bound(kind, loss_row, s);
}

double residual_g(std::span<const double> loss_row, const ExpertSet& s) {
  return residual_g(UtilityKind::submodular(loss_row.size()), loss_row, s);
}

double total_utility(const UtilityKind& kind, const ExpertSet& s, const LossMatrix& losses) {
  double total = 0.0;
  for (std::size_t t = 0; t < losses.horizon(); ++t) total += utility(kind, s, losses.row(t));
  return total;
}

double curvature(const LossMatrix& losses, const UtilityKind& kind) {
  if (kind.type == UtilityType::Modular) return 0.0;
  const std::size_t k = losses.experts();
  std::vector<double> singleton(k, 0.0);
  std::vector<double> last_gain(k, 0.0);
  for (std::size_t t = 0; t < losses.horizon(); ++t) {
    const auto row = losses.row(t);
    const auto others = leave_one_out_products(row);
    for (std::size_t j = 0; j < k; ++j) {
      singleton[j] += 1.0 - row[j];
      last_gain[j] += (1.0 - row[j]) * others[j];
    }
  }
  double min_ratio = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < k; ++j) {
    if (singleton[j] > 0.0) min_ratio = std::min(min_ratio, last_gain[j] / singleton[j]);
  }
  if (!std::isfinite(min_ratio)) {
    throw std::domain_error("curvature: every expert has zero singleton utility");
  }
  return std::clamp(1.0 - min_ratio, 0.0, 1.0);
}

double alpha_for(const UtilityKind& kind, const LossMatrix& losses) {
  if (kind.type == UtilityType::Modular) return 1.0;
  return 1.0 - curvature(losses, kind) / std::numbers::e;
}

}  // namespace stratexp
