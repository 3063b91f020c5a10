#include "stratexp/wsu.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>

#include "stratexp/errors.hpp"

namespace stratexp {

std::vector<double> wswm_payment(std::span<const double> reports, std::span<const double> wagers, int outcome) {
  if (reports.size() != wagers.size()) throw std::invalid_argument("wswm_payment: size mismatch");
  const std::size_t k = reports.size();
  std::vector<double> loss(k);
  double total_wager = 0.0;
  double weighted_loss = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    if (!(wagers[i] >= 0.0)) throw std::domain_error("wswm_payment: negative wager");
    loss[i] = quadratic_loss(reports[i], outcome);
    total_wager += wagers[i];
    weighted_loss += wagers[i] * loss[i];
  }
  std::vector<double> pay(k, 0.0);
  if (total_wager == 0.0) return pay;
  const double mean_loss = weighted_loss / total_wager;
  for (std::size_t i = 0; i < k; ++i) pay[i] = wagers[i] * (1.0 - loss[i] + mean_loss);
  return pay;
}

WeightVector::WeightVector(std::size_t n, double eta)
    : WeightVector(std::vector<double>(n, n == 0 ? 0.0 : 1.0 / static_cast<double>(n)), eta) {}

WeightVector::WeightVector(std::vector<double> weights, double eta) : weights_(std::move(weights)), eta_(eta) {
  if (weights_.empty()) throw std::invalid_argument("WeightVector: no experts");
  if (!(eta > 0.0)) throw std::invalid_argument("WeightVector: step size must be positive");
  double sum = 0.0;
  for (double w : weights_) {
    if (!(w >= 0.0)) throw std::invalid_argument("WeightVector: negative weight");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("WeightVector: weights must sum to 1");
}

void WeightVector::update(std::span<const double> losses) {
  if (losses.size() != weights_.size()) throw std::invalid_argument("WeightVector::update: size mismatch");
  double avg = 0.0;
  double mass = 0.0;
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    avg += weights_[i] * losses[i];
    mass += weights_[i];
  }
  avg /= mass;
  double max_rel = 0.0;
  for (double l : losses) max_rel = std::max(max_rel, std::abs(l - avg));
  if (eta_ * max_rel >= 1.0) {
    throw StepSizeError("WSU step size violation: eta * max|L| = " + std::to_string(eta_ * max_rel) + " >= 1");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    weights_[i] *= 1.0 - eta_ * (losses[i] - avg);
    sum += weights_[i];
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw std::logic_error("WSU weights drifted off the simplex (sum = " + std::to_string(sum) + ")");
  }
}

WeightVector wsu_update(const WeightVector& state, std::span<const double> losses) {
  WeightVector next = state;
  next.update(losses);
  return next;
}

std::size_t wsu_select(const WeightVector& state, Rng& rng) {
  const double u = uniform01(rng);
  const auto w = state.weights();
  double cum = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] <= 0.0) continue;
    cum += w[i];
    last_positive = i;
    if (u < cum) return i;
  }
  return last_positive;  // u landed in the rounding slack above the total
}

std::size_t wsu_select_excluding(const WeightVector& state, const ExpertSet& excluded, Rng& rng) {
  if (excluded.empty()) return wsu_select(state, rng);
  const auto w = state.weights();
  double mass = 0.0;
  std::size_t remaining = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (excluded.contains(i)) continue;
    mass += w[i];
    ++remaining;
  }
  if (remaining == 0) throw std::invalid_argument("wsu_select_excluding: every expert excluded");
  const double u = uniform01(rng);
  if (!(mass > 0.0)) {
    auto target = static_cast<std::size_t>(u * static_cast<double>(remaining));
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (excluded.contains(i)) continue;
      if (target-- == 0) return i;
    }
  }
  const double threshold = u * mass;
  double cum = 0.0;
  std::size_t last_positive = w.size();
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (excluded.contains(i) || w[i] <= 0.0) continue;
    cum += w[i];
    last_positive = i;
    if (threshold < cum) return i;
  }
  return last_positive;
}

double wsu_default_step_size(std::size_t experts, std::size_t horizon) {
  if (experts < 2 || horizon == 0) return 0.5;
  return std::min(0.5, std::sqrt(std::log(static_cast<double>(experts)) / static_cast<double>(horizon)));
}

double wsu_adaptive_step_size(std::size_t experts, double loss_budget) {
  if (experts < 2 || !(loss_budget > 0.0)) return 0.5;
  return std::min(0.5, std::sqrt(std::log(static_cast<double>(experts)) / loss_budget));
}

double adaptive_regret_bound(double cumulative_abs_loss, std::size_t experts) {
  if (cumulative_abs_loss < 0.0) throw std::invalid_argument("adaptive_regret_bound: negative loss");
  const double log_k = std::log(static_cast<double>(experts));
  return std::sqrt(cumulative_abs_loss * log_k) + log_k;
}

MetaStepSize meta_default_step_size(std::size_t experts, std::size_t m, std::size_t horizon) {
  const double log_term = std::log(static_cast<double>(experts) * std::numbers::e / static_cast<double>(m));
  const double mt = static_cast<double>(m) * log_term;
  const double eta = std::sqrt(mt / static_cast<double>(horizon));
  const bool ok = static_cast<double>(horizon) >= 4.0 * mt;
  return {ok ? eta : std::min(eta, 0.5), ok};
}

MetaWsu::MetaWsu(std::size_t experts, std::size_t m, double eta, UtilityKind kind)
    : index_(experts, m), kind_(kind), weights_(index_.size(), eta), members_(index_.size() * m) {
  for (std::size_t r = 0; r < index_.size(); ++r) {
    index_.unrank_into(r, std::span<std::size_t>(members_.data() + r * m, m));
  }
}

ExpertSet MetaWsu::select(Rng& rng) const { return index_.unrank(wsu_select(weights_, rng)); }

std::vector<double> MetaWsu::meta_losses(std::span<const double> loss_row) const {
  const std::size_t m = index_.m();
  std::vector<double> out(index_.size());
  for (std::size_t r = 0; r < index_.size(); ++r) {
    const std::span<const std::size_t> s(members_.data() + r * m, m);
    if (kind_.type == UtilityType::Modular) {
      double total = 0.0;
      for (std::size_t i : s) total += loss_row[i];
      out[r] = total / static_cast<double>(m);
    } else {
      out[r] = loss_product(loss_row, s);  // 1 - f_t(S)
    }
  }
  return out;
}

void MetaWsu::update(std::span<const double> loss_row) {
  if (loss_row.size() != index_.experts()) throw std::invalid_argument("MetaWsu::update: width mismatch");
  weights_.update(meta_losses(loss_row));
}

double MetaWsu::inclusion_probability(std::size_t i) const {
  const std::size_t m = index_.m();
  double total = 0.0;
  for (std::size_t r = 0; r < index_.size(); ++r) {
    const auto* begin = members_.data() + r * m;
    if (std::find(begin, begin + m, i) != begin + m) total += weights_[r];
  }
  return total;
}

MetaWsuRun meta_wsu_run(const LossMatrix& losses, std::size_t m, std::optional<double> eta, Rng& rng) {
  std::vector<std::string> warnings;
  double step = 0.0;
  if (eta) {
    step = *eta;
  } else {
    const auto def = meta_default_step_size(losses.experts(), m, losses.horizon());
    step = def.eta;
    if (!def.horizon_ok) {
      warnings.push_back("horizon too short for the default meta-WSU step size (T < 4 m ln(Ke/m)); using " +
                         std::to_string(step));
    }
  }
  MetaWsu algo(losses.experts(), m, step, UtilityKind::modular(m));
  std::vector<ExpertSet> sets;
  sets.reserve(losses.horizon());
  for (std::size_t t = 0; t < losses.horizon(); ++t) {
    sets.push_back(algo.select(rng));
    algo.update(losses.row(t));
  }
  return {std::move(sets), algo.weights(), step, std::move(warnings)};
}

}  // namespace stratexp
