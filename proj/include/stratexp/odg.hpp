#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "stratexp/rng.hpp"
#include "stratexp/utility.hpp"
#include "stratexp/wsu.hpp"

namespace stratexp {

/// (1 - 1/m)^(m - i) for 1-based position i; throws std::out_of_range
/// unless 1 <= i <= m.
double discount_factor(std::size_t m, std::size_t i);

struct OdgSelection {
  ExpertSet set;
  std::vector<std::size_t> picks;  // v_1, ..., v_m in position order
};

/// Per-expert reward of position i (1-based) given the picks of positions
/// before it: (1 - 1/m)^(m-i) g(j | S_{i-1}) + h(j). An expert already in
/// S_{i-1} has zero residual gain and earns h(j).
///
/// Every reward has the form c_j * (1 - loss_j) with c_j independent of
/// loss_j; `slopes` returns c_j.
struct InstanceFeedback {
  std::vector<double> slopes;
  std::vector<double> rewards;
  std::vector<double> losses;  // 1 - reward, evaluated as (1 - c_j) + c_j * loss_j
};

InstanceFeedback instance_feedback(const UtilityKind& kind, std::span<const double> loss_row,
                                   std::span<const std::size_t> picks, std::size_t position);

/// Online distorted greedy: m WSU instances, instance i choosing position i.
///
/// Alongside the weights, each instance tracks its cumulative reward per
/// expert and the reward it earned, which gives its realized regret.
class OdgState {
 public:
  OdgState(std::size_t experts, std::size_t m, double eta, UtilityKind kind);

  std::size_t experts() const { return experts_; }
  std::size_t m() const { return instances_.size(); }
  const UtilityKind& kind() const { return kind_; }
  const WeightVector& instance(std::size_t position) const { return instances_.at(position - 1); }

  /// max_j sum_t reward_t(j) - sum_t reward_t(v_t) for 1-based position.
  double instance_regret(std::size_t position) const;
  /// Cumulative reward earned by a position (equal to its cumulative absolute loss).
  double instance_earned(std::size_t position) const { return earned_.at(position - 1); }

  /// Applies one round of feedback; picks must be distinct and of length m.
  void feedback(std::span<const double> loss_row, std::span<const std::size_t> picks);

 private:
  std::size_t experts_;
  UtilityKind kind_;
  std::vector<WeightVector> instances_;
  std::vector<std::vector<double>> reward_totals_;
  std::vector<double> earned_;
};

/// Sequential draw: position i samples from its weights conditioned on the
/// experts not yet picked.
OdgSelection odg_select(const OdgState& state, Rng& rng);

/// Functional form of OdgState::feedback.
OdgState odg_feedback(const OdgState& state, std::span<const double> loss_row, std::span<const std::size_t> picks);

/// Sum over positions of the reward earned at the realized picks.
double odg_sum_absolute_losses(const UtilityKind& kind, std::span<const double> loss_row,
                               std::span<const std::size_t> picks);

}  // namespace stratexp
