#include "stratexp/ftpl.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>
#include <stdexcept>
#include <string>

#include "stratexp/errors.hpp"

namespace stratexp {
namespace {

constexpr std::size_t kChunk = 1u << 14;

// Selection rule shared by every FTPL path: rank by score, ties by index.
bool ranks_before(double score_a, std::size_t a, double score_b, std::size_t b) {
  return score_a < score_b || (score_a == score_b && a < b);
}

}  // namespace

FtplState::FtplState(std::size_t experts, std::size_t m, double eta, NoiseModel noise)
    : cumulative_(experts, 0.0), m_(m), eta_(eta), noise_(noise) {
  if (m == 0 || m > experts) throw std::invalid_argument("FTPL: need 1 <= m <= K");
  if (!(eta > 0.0)) throw std::invalid_argument("FTPL: step size must be positive");
  if (const auto bound = noise.condition1_bound(); bound && !(eta > *bound)) {
    throw std::invalid_argument("FTPL: step size must exceed the noise bound B = " + std::to_string(*bound));
  }
}

void FtplState::update(std::span<const double> loss_row) {
  if (loss_row.size() != cumulative_.size()) throw std::invalid_argument("FTPL update: width mismatch");
  for (double l : loss_row) {
    if (!(l >= 0.0 && l <= 1.0)) throw std::domain_error("FTPL update: loss outside [0, 1]");
  }
  for (std::size_t i = 0; i < cumulative_.size(); ++i) cumulative_[i] += loss_row[i];
}

void FtplState::set_cumulative_losses(std::vector<double> cumulative) {
  if (cumulative.size() != cumulative_.size()) throw std::invalid_argument("FTPL: width mismatch");
  cumulative_ = std::move(cumulative);
}

ExpertSet ftpl_select_with(const FtplState& state, std::span<const double> perturbations) {
  const std::size_t k = state.experts();
  if (perturbations.size() != k) throw std::invalid_argument("ftpl_select: perturbation count mismatch");
  std::vector<double> score(k);
  const auto cum = state.cumulative_losses();
  for (std::size_t i = 0; i < k; ++i) score[i] = cum[i] + state.eta() * perturbations[i];
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  const auto m = static_cast<std::ptrdiff_t>(state.m());
  std::nth_element(order.begin(), order.begin() + m - 1, order.end(),
                   [&](std::size_t a, std::size_t b) { return ranks_before(score[a], a, score[b], b); });
  return ExpertSet(std::vector<std::size_t>(order.begin(), order.begin() + m));
}

ExpertSet ftpl_select(const FtplState& state, Rng& rng) {
  std::vector<double> gamma(state.experts());
  for (double& g : gamma) g = state.noise().sample(rng);
  return ftpl_select_with(state, gamma);
}

FtplState ftpl_update(const FtplState& state, std::span<const double> loss_row) {
  FtplState next = state;
  next.update(loss_row);
  return next;
}

double default_step_size(double bound, double horizon, std::size_t experts, std::size_t m) {
  if (m == 0 || m > experts) throw std::invalid_argument("default_step_size: need 1 <= m <= K");
  if (experts == m) throw std::invalid_argument("default_step_size: degenerate K == m (ln(K/m) = 0)");
  const double eta = std::sqrt(bound * horizon / std::log(static_cast<double>(experts) / static_cast<double>(m)));
  if (!(eta > bound)) {
    throw HorizonError("default_step_size: horizon too short, eta = " + std::to_string(eta) +
                       " does not exceed B = " + std::to_string(bound) + " (need T > B ln(K/m))");
  }
  return eta;
}

double ic_deviation_bound(double bound, double eta) {
  if (!(eta > 2.0 * bound)) throw std::invalid_argument("ic_deviation_bound: requires eta > 2B");
  return 2.0 * bound / (eta - 2.0 * bound);
}

double deviation_factor_A(const ConditionalRoundContext& ctx, double p, const NoiseModel& noise, double eta) {
  const double q = 1.0 - p;
  const double arg1 = (-q * q - (ctx.cumulative_loss - ctx.x1)) / eta;
  const double arg0 = (-p * p - (ctx.cumulative_loss - ctx.x0)) / eta;
  return std::exp(noise.nu(arg1) - noise.nu(arg0));
}

double best_response_for(double belief, const std::function<double(double)>& factor) {
  if (!(belief >= 0.0 && belief <= 1.0)) throw std::domain_error("best response: belief outside [0, 1]");
  if (belief == 0.0 || belief == 1.0) return belief;
  auto h = [&](double p) { return p - belief / (belief + (1.0 - belief) * factor(p)); };
  if (h(0.0) >= 0.0 || h(1.0) <= 0.0) {
    throw std::domain_error("best response: h(0) < 0 < h(1) violated; noise model breaks monotonicity");
  }
  double lo = 0.0;
  double hi = 1.0;
  for (int iter = 0; iter < 60 && hi - lo > 1e-10; ++iter) {
    const double mid = 0.5 * (lo + hi);
    (h(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

double best_response_conditional(const ConditionalRoundContext& ctx, double belief, const NoiseModel& noise,
                                 double eta) {
  if (const auto bound = noise.condition1_bound(); bound && !(eta > *bound)) {
    throw std::invalid_argument("best_response_conditional: requires eta > B");
  }
  return best_response_for(belief, [&](double p) { return deviation_factor_A(ctx, p, noise, eta); });
}

SelectionEstimate selection_probability_mc(const FtplState& state, std::span<const double> other_round_losses,
                                           std::size_t expert, double report, int outcome, std::size_t samples,
                                           std::uint64_t seed, unsigned threads) {
  const std::size_t k = state.experts();
  if (samples == 0) throw std::invalid_argument("selection_probability_mc: need at least one sample");
  if (expert >= k || other_round_losses.size() != k) throw std::invalid_argument("selection_probability_mc: bad input");
  std::vector<double> base(k);
  const auto cum = state.cumulative_losses();
  for (std::size_t j = 0; j < k; ++j) base[j] = cum[j] + other_round_losses[j];
  base[expert] = cum[expert] + quadratic_loss(report, outcome);

  const std::size_t chunks = (samples + kChunk - 1) / kChunk;
  std::vector<std::size_t> hits(chunks, 0);
  auto run_chunk = [&](std::size_t c) {
    Rng rng = make_rng(seed, c);
    const std::size_t n = std::min(kChunk, samples - c * kChunk);
    std::size_t count = 0;
    for (std::size_t s = 0; s < n; ++s) {
      const double mine = base[expert] + state.eta() * state.noise().sample(rng);
      std::size_t ahead = 0;
      for (std::size_t j = 0; j < k; ++j) {
        if (j == expert) continue;
        const double other = base[j] + state.eta() * state.noise().sample(rng);
        if (ranks_before(other, j, mine, expert)) ++ahead;
      }
      if (ahead < state.m()) ++count;
    }
    hits[c] = count;
  };
  threads = std::max(1u, threads);
  if (threads == 1) {
    for (std::size_t c = 0; c < chunks; ++c) run_chunk(c);
  } else {
    std::vector<std::future<void>> jobs;
    for (unsigned w = 0; w < threads; ++w) {
      jobs.push_back(std::async(std::launch::async, [&, w] {
        for (std::size_t c = w; c < chunks; c += threads) run_chunk(c);
      }));
    }
    for (auto& job : jobs) job.get();
  }
  const double total = static_cast<double>(std::accumulate(hits.begin(), hits.end(), std::size_t{0}));
  const double p = total / static_cast<double>(samples);
  return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(samples))};
}

ConditionalSelectionSampler::ConditionalSelectionSampler(const FtplState& state, std::span<const double> reports,
                                                         std::size_t expert, std::size_t samples, Rng& rng)
    : noise_(state.noise()), eta_(state.eta()) {
  const std::size_t k = state.experts();
  if (reports.size() != k || expert >= k) throw std::invalid_argument("ConditionalSelectionSampler: bad input");
  const auto cum = state.cumulative_losses();
  cumulative_ = cum[expert];
  always_selected_ = k - 1 < state.m();
  if (always_selected_) return;
  x0_.resize(samples);
  x1_.resize(samples);
  std::vector<double> s0;
  std::vector<double> s1;
  s0.reserve(k - 1);
  s1.reserve(k - 1);
  const auto mth = static_cast<std::ptrdiff_t>(state.m()) - 1;
  for (std::size_t n = 0; n < samples; ++n) {
    s0.clear();
    s1.clear();
    for (std::size_t j = 0; j < k; ++j) {
      if (j == expert) continue;
      const double noisy = cum[j] + eta_ * noise_.sample(rng);
      s0.push_back(noisy + quadratic_loss(reports[j], 0));
      s1.push_back(noisy + quadratic_loss(reports[j], 1));
    }
    std::nth_element(s0.begin(), s0.begin() + mth, s0.end());
    std::nth_element(s1.begin(), s1.begin() + mth, s1.end());
    x0_[n] = s0[static_cast<std::size_t>(mth)];
    x1_[n] = s1[static_cast<std::size_t>(mth)];
  }
}

double ConditionalSelectionSampler::probability(double report, int outcome) const {
  if (always_selected_) return 1.0;
  const double own = cumulative_ + quadratic_loss(report, outcome);
  const auto& x = outcome == 0 ? x0_ : x1_;
  double total = 0.0;
  for (double threshold : x) total += noise_.cdf_fast((threshold - own) / eta_);
  return total / static_cast<double>(x.size());
}

ConditionalRoundContext ConditionalSelectionSampler::context(std::size_t n) const {
  return {cumulative_, x0_.at(n), x1_.at(n)};
}

}  // namespace stratexp
