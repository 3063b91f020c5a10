#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string_view>
#include <vector>

namespace stratexp {

/// Quadratic (Brier) loss (p - r)^2; throws std::domain_error outside [0,1]x{0,1}.
double quadratic_loss(double p, int r);

/// T x K grid of per-round, per-expert losses in [0, 1], stored row-major.
class LossMatrix {
 public:
  LossMatrix() = default;
  LossMatrix(std::size_t horizon, std::size_t experts);
  LossMatrix(std::size_t horizon, std::size_t experts, std::vector<double> values);

  std::size_t horizon() const { return horizon_; }
  std::size_t experts() const { return experts_; }

  std::span<const double> row(std::size_t t) const { return {values_.data() + t * experts_, experts_}; }
  double operator()(std::size_t t, std::size_t i) const { return values_[t * experts_ + i]; }
  /// Sets one entry; throws std::domain_error outside [0, 1].
  void set(std::size_t t, std::size_t i, double loss);
  void set_row(std::size_t t, std::span<const double> losses);

 private:
  std::size_t horizon_ = 0;
  std::size_t experts_ = 0;
  std::vector<double> values_;
};

/// Sorted set of distinct 0-based expert indices.
class ExpertSet {
 public:
  ExpertSet() = default;
  explicit ExpertSet(std::vector<std::size_t> members);
  ExpertSet(std::initializer_list<std::size_t> members);

  std::span<const std::size_t> members() const { return members_; }
  std::size_t size() const { return members_.size(); }
  bool empty() const { return members_.empty(); }
  bool contains(std::size_t j) const;
  /// Copy with j added; j must not be a member.
  ExpertSet with(std::size_t j) const;

  auto begin() const { return members_.begin(); }
  auto end() const { return members_.end(); }

  friend bool operator==(const ExpertSet&, const ExpertSet&) = default;

 private:
  std::vector<std::size_t> members_;
};

enum class UtilityType { Modular, Submodular };

std::string_view to_string(UtilityType type);
UtilityType parse_utility_type(std::string_view name);

struct UtilityKind {
  UtilityType type = UtilityType::Modular;
  std::size_t m = 1;  // normalizer for the modular utility

  static UtilityKind modular(std::size_t m) { return {UtilityType::Modular, m}; }
  static UtilityKind submodular(std::size_t m) { return {UtilityType::Submodular, m}; }
};

/// Product of the selected losses, switching to log-domain accumulation past
/// 30 factors and short-circuiting on exact zeros.
double loss_product(std::span<const double> loss_row, std::span<const std::size_t> members);

/// prod_{k != j} loss_row[k] for every j.
std::vector<double> leave_one_out_products(std::span<const double> loss_row);

/// Modular: (|S| - sum loss) / m. Submodular: 1 - prod loss. f(empty) = 0.
double utility(const UtilityKind& kind, const ExpertSet& s, std::span<const double> loss_row);

/// f(S + j) - f(S); throws std::invalid_argument when j is already in S.
double marginal_gain(const UtilityKind& kind, std::size_t j, const ExpertSet& s,
                     std::span<const double> loss_row);

/// h(S) = sum_{j in S} f(j | [K] \ {j}), the modular lower bound of f.
double modular_lower_bound(const UtilityKind& kind, std::span<const double> loss_row, const ExpertSet& s);
/// Submodular utility shorthand.
double modular_lower_bound(std::span<const double> loss_row, const ExpertSet& s);

/// Per-expert h({j}) for all j.
std::vector<double> singleton_lower_bounds(const UtilityKind& kind, std::span<const double> loss_row);

/// g(S) = f(S) - h(S).
double residual_g(const UtilityKind& kind, std::span<const double> loss_row, const ExpertSet& s);
double residual_g(std::span<const double> loss_row, const ExpertSet& s);

/// Total utility sum_t f_t(S).
double total_utility(const UtilityKind& kind, const ExpertSet& s, const LossMatrix& losses);

/// Curvature of f = sum_t f_t. Experts with f({j}) = 0 are skipped; throws
/// std::domain_error when every expert is skipped.
double curvature(const LossMatrix& losses, const UtilityKind& kind);

/// 1 for modular utility, 1 - curvature / e for submodular.
double alpha_for(const UtilityKind& kind, const LossMatrix& losses);

}  // namespace stratexp
