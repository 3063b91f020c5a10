#include "stratexp/odg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace stratexp {

double discount_factor(std::size_t m, std::size_t i) {
  if (i < 1 || i > m) throw std::out_of_range("discount_factor: position outside [1, m]");
  if (i == m) return 1.0;
  return std::pow(1.0 - 1.0 / static_cast<double>(m), static_cast<double>(m - i));
}

InstanceFeedback instance_feedback(const UtilityKind& kind, std::span<const double> loss_row,
                                   std::span<const std::size_t> picks, std::size_t position) {
  const std::size_t k = loss_row.size();
  const std::size_t m = kind.m;
  const double d = discount_factor(m, position);
  if (picks.size() < position - 1) throw std::invalid_argument("instance_feedback: missing prefix picks");
  const auto prefix = picks.first(position - 1);
  auto in_prefix = [&](std::size_t j) { return std::find(prefix.begin(), prefix.end(), j) != prefix.end(); };

  InstanceFeedback out;
  out.slopes.resize(k);
  if (kind.type == UtilityType::Modular) {
    std::fill(out.slopes.begin(), out.slopes.end(), 1.0 / static_cast<double>(m));
  } else {
    const double prefix_product = loss_product(loss_row, prefix);
    const auto others = leave_one_out_products(loss_row);
    for (std::size_t j = 0; j < k; ++j) {
      out.slopes[j] = in_prefix(j) ? others[j] : d * prefix_product + (1.0 - d) * others[j];
    }
  }
  out.rewards.resize(k);
  out.losses.resize(k);
  for (std::size_t j = 0; j < k; ++j) {
    const double c = out.slopes[j];
    out.rewards[j] = c * (1.0 - loss_row[j]);
    out.losses[j] = (1.0 - c) + c * loss_row[j];
  }
  return out;
}

OdgState::OdgState(std::size_t experts, std::size_t m, double eta, UtilityKind kind)
    : experts_(experts), kind_(kind), reward_totals_(m, std::vector<double>(experts, 0.0)), earned_(m, 0.0) {
  if (m == 0 || m > experts) throw std::invalid_argument("ODG: need 1 <= m <= K");
  kind_.m = m;
  instances_.reserve(m);
  for (std::size_t i = 0; i < m; ++i) instances_.emplace_back(experts, eta);
}

double OdgState::instance_regret(std::size_t position) const {
  const auto& totals = reward_totals_.at(position - 1);
  return *std::max_element(totals.begin(), totals.end()) - earned_[position - 1];
}

void OdgState::feedback(std::span<const double> loss_row, std::span<const std::size_t> picks) {
  if (loss_row.size() != experts_) throw std::invalid_argument("ODG feedback: width mismatch");
  if (picks.size() != m()) throw std::invalid_argument("ODG feedback: need one pick per position");
  for (std::size_t i = 0; i < picks.size(); ++i) {
    if (picks[i] >= experts_) throw std::out_of_range("ODG feedback: pick out of range");
    if (std::find(picks.begin(), picks.begin() + static_cast<std::ptrdiff_t>(i), picks[i]) !=
        picks.begin() + static_cast<std::ptrdiff_t>(i)) {
      throw std::invalid_argument("ODG feedback: duplicate pick");
    }
  }
  // Compute every position's feedback before mutating so a step-size error
  // leaves the state untouched.
  std::vector<InstanceFeedback> rounds;
  rounds.reserve(m());
  for (std::size_t i = 1; i <= m(); ++i) rounds.push_back(instance_feedback(kind_, loss_row, picks, i));
  std::vector<WeightVector> next = instances_;
  for (std::size_t i = 0; i < m(); ++i) next[i].update(rounds[i].losses);
  instances_ = std::move(next);
  for (std::size_t i = 0; i < m(); ++i) {
    for (std::size_t j = 0; j < experts_; ++j) reward_totals_[i][j] += rounds[i].rewards[j];
    earned_[i] += rounds[i].rewards[picks[i]];
  }
}

OdgSelection odg_select(const OdgState& state, Rng& rng) {
  OdgSelection out;
  out.picks.reserve(state.m());
  for (std::size_t i = 1; i <= state.m(); ++i) {
    const std::size_t v = wsu_select_excluding(state.instance(i), out.set, rng);
    out.picks.push_back(v);
    out.set = out.set.with(v);
  }
  return out;
}

OdgState odg_feedback(const OdgState& state, std::span<const double> loss_row, std::span<const std::size_t> picks) {
  OdgState next = state;
  next.feedback(loss_row, picks);
  return next;
}

double odg_sum_absolute_losses(const UtilityKind& kind, std::span<const double> loss_row,
                               std::span<const std::size_t> picks) {
  double total = 0.0;
  for (std::size_t i = 1; i <= picks.size(); ++i) {
    total += instance_feedback(kind, loss_row, picks, i).rewards[picks[i - 1]];
  }
  return total;
}

}  // namespace stratexp
