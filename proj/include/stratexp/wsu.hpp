#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stratexp/rng.hpp"
#include "stratexp/subsets.hpp"
#include "stratexp/utility.hpp"

namespace stratexp {

/// Weighted Score Wagering Mechanism payments under quadratic loss.
///
/// Payment i is w_i * (1 - loss_i + sum_j w_j loss_j / sum_j w_j); with
/// normalized wagers this is the textbook form. Payments are nonnegative and
/// sum to the total wager.
std::vector<double> wswm_payment(std::span<const double> reports, std::span<const double> wagers, int outcome);

/// Probability vector over N experts (or meta-experts) updated by the
/// Weighted-Score Update pi_i <- pi_i * (1 - eta * (l_i - <pi, l>)).
///
/// <pi, l> is taken over pi / sum(pi), so the total is preserved exactly up
/// to rounding. No renormalization happens; a drift of the total outside
/// [1 - 1e-9, 1 + 1e-9] raises std::logic_error.
class WeightVector {
 public:
  WeightVector(std::size_t n, double eta);
  WeightVector(std::vector<double> weights, double eta);

  std::size_t size() const { return weights_.size(); }
  double eta() const { return eta_; }
  std::span<const double> weights() const { return weights_; }
  double operator[](std::size_t i) const { return weights_[i]; }

  /// Throws StepSizeError when eta * max|L| >= 1, leaving the state unchanged.
  void update(std::span<const double> losses);

 private:
  std::vector<double> weights_;
  double eta_;
};

/// Functional form of WeightVector::update.
WeightVector wsu_update(const WeightVector& state, std::span<const double> losses);

/// Inverse-cdf draw over indices in ascending order.
std::size_t wsu_select(const WeightVector& state, Rng& rng);

/// Inverse-cdf draw restricted to indices not in `excluded`, renormalizing the
/// remaining mass. Falls back to uniform over the remaining indices if their
/// mass underflowed to zero.
std::size_t wsu_select_excluding(const WeightVector& state, const ExpertSet& excluded, Rng& rng);

/// min{1/2, sqrt(ln K / T)}.
double wsu_default_step_size(std::size_t experts, std::size_t horizon);

/// min{1/2, sqrt(ln K / budget)} for a known bound on the cumulative absolute
/// loss of learner plus benchmark.
double wsu_adaptive_step_size(std::size_t experts, double loss_budget);

/// sqrt(|L_T| ln K) + ln K with unit constants.
double adaptive_regret_bound(double cumulative_abs_loss, std::size_t experts);

struct MetaStepSize {
  double eta;
  bool horizon_ok;  // T >= 4 m ln(Ke/m)
};

/// sqrt(m ln(Ke/m) / T), capped at 1/2 when the horizon is too short.
MetaStepSize meta_default_step_size(std::size_t experts, std::size_t m, std::size_t horizon);

/// WSU over all C(K, m) subsets; meta-expert loss is 1 - f_t(S), which for
/// the modular utility is the mean loss of the members.
class MetaWsu {
 public:
  MetaWsu(std::size_t experts, std::size_t m, double eta, UtilityKind kind);

  const MetaIndex& index() const { return index_; }
  const WeightVector& weights() const { return weights_; }
  const UtilityKind& kind() const { return kind_; }

  ExpertSet select(Rng& rng) const;
  void update(std::span<const double> loss_row);
  /// Probability that expert i belongs to the sampled set.
  double inclusion_probability(std::size_t i) const;
  /// Meta-expert losses for one round.
  std::vector<double> meta_losses(std::span<const double> loss_row) const;

 private:
  MetaIndex index_;
  UtilityKind kind_;
  WeightVector weights_;
  std::vector<std::size_t> members_;  // flattened unranked subsets, size() * m
};

struct MetaWsuRun {
  std::vector<ExpertSet> sets;
  WeightVector final_weights;
  double eta;
  std::vector<std::string> warnings;
};

/// Runs meta-expert WSU over a loss matrix (modular meta-losses).
MetaWsuRun meta_wsu_run(const LossMatrix& losses, std::size_t m, std::optional<double> eta, Rng& rng);

}  // namespace stratexp
