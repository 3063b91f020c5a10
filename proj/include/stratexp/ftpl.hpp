#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "stratexp/noise.hpp"
#include "stratexp/rng.hpp"
#include "stratexp/utility.hpp"

namespace stratexp {

/// Follow the Perturbed Leader state for the m-experts problem: cumulative
/// losses plus step size, noise law and set size.
class FtplState {
 public:
  /// Throws std::invalid_argument unless 1 <= m <= K and eta exceeds the
  /// noise model's Condition-1 bound (when it has one).
  FtplState(std::size_t experts, std::size_t m, double eta, NoiseModel noise);

  std::size_t experts() const { return cumulative_.size(); }
  std::size_t m() const { return m_; }
  double eta() const { return eta_; }
  const NoiseModel& noise() const { return noise_; }
  std::span<const double> cumulative_losses() const { return cumulative_; }

  /// Adds one round of losses; throws std::domain_error outside [0, 1].
  void update(std::span<const double> loss_row);
  /// Overwrites the cumulative losses (test and audit setup).
  void set_cumulative_losses(std::vector<double> cumulative);

 private:
  std::vector<double> cumulative_;
  std::size_t m_;
  double eta_;
  NoiseModel noise_;
};

/// The m indices with the smallest cumulative + eta * perturbation, ties by
/// ascending index.
ExpertSet ftpl_select_with(const FtplState& state, std::span<const double> perturbations);
/// Draws K fresh perturbations and selects.
ExpertSet ftpl_select(const FtplState& state, Rng& rng);

FtplState ftpl_update(const FtplState& state, std::span<const double> loss_row);

/// sqrt(B T / ln(K/m)). Throws std::invalid_argument when K == m and
/// HorizonError when the result would not exceed B.
double default_step_size(double bound, double horizon, std::size_t experts, std::size_t m);

/// 2B / (eta - 2B); throws std::invalid_argument when eta <= 2B.
double ic_deviation_bound(double bound, double eta);

/// Round-t view of one expert against the others: its cumulative loss L and
/// the m-th smallest perturbed post-round score of the others under each outcome.
struct ConditionalRoundContext {
  double cumulative_loss = 0.0;  // L
  double x0 = 0.0;               // X_0
  double x1 = 0.0;               // X_1
};

/// Ratio of the outcome-0 and outcome-1 selection densities at report p:
/// exp(nu((-(1-p)^2 - (L - X1)) / eta) - nu((-p^2 - (L - X0)) / eta)).
double deviation_factor_A(const ConditionalRoundContext& ctx, double p, const NoiseModel& noise, double eta);

/// Root of h(p) = p - b / (b + (1 - b) A(p)) on [0, 1] by bisection (60
/// iterations, width 1e-10). Throws std::domain_error if h(0) >= 0 or
/// h(1) <= 0 for an interior belief.
double best_response_for(double belief, const std::function<double(double)>& factor);

/// Expert-optimal report given the context. Throws std::invalid_argument when
/// eta <= B for a noise model with |nu'| <= B.
double best_response_conditional(const ConditionalRoundContext& ctx, double belief, const NoiseModel& noise,
                                 double eta);

struct SelectionEstimate {
  double probability = 0.0;
  double standard_error = 0.0;
};

/// Monte Carlo estimate of Pr[i in S_{t+1}] when expert i reports p and the
/// outcome is r. `other_round_losses[j]` is expert j's round-t loss (entry i
/// ignored); every sample draws all K perturbations. Samples are split into
/// fixed chunks with independent streams so the result does not depend on
/// `threads`.
SelectionEstimate selection_probability_mc(const FtplState& state, std::span<const double> other_round_losses,
                                           std::size_t expert, double report, int outcome, std::size_t samples,
                                           std::uint64_t seed, unsigned threads = 1);

/// Conditional-cdf estimator of expert i's next-round selection probability
/// as a smooth function of its report. Opponent perturbations are sampled
/// once; each sample contributes F((X_r - L - loss(p, r)) / eta) exactly.
class ConditionalSelectionSampler {
 public:
  ConditionalSelectionSampler(const FtplState& state, std::span<const double> reports, std::size_t expert,
                              std::size_t samples, Rng& rng);

  double probability(double report, int outcome) const;
  /// Realized opponent thresholds for sample n.
  ConditionalRoundContext context(std::size_t n) const;
  std::size_t samples() const { return x0_.size(); }

 private:
  NoiseModel noise_;
  double eta_;
  double cumulative_;
  bool always_selected_;
  std::vector<double> x0_;
  std::vector<double> x1_;
};

}  // namespace stratexp
