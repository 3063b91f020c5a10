#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "stratexp/errors.hpp"
#include "stratexp/ftpl.hpp"
#include "stratexp/subsets.hpp"

using namespace stratexp;

namespace {

const NoiseModel kLaplace(NoiseKind::Laplace);
const NoiseModel kHyperbolic(NoiseKind::Hyperbolic);
const NoiseModel kGaussian(NoiseKind::Gaussian);

FtplState state_with(std::vector<double> cum, std::size_t m, double eta, NoiseModel noise = kLaplace) {
  FtplState s(cum.size(), m, eta, noise);
  s.set_cumulative_losses(std::move(cum));
  return s;
}

// Standard Laplace written out independently of NoiseModel.
double laplace_pdf(double z) { return 0.5 * std::exp(-std::abs(z)); }
double laplace_survival(double z) { return z >= 0.0 ? 0.5 * std::exp(-z) : 1.0 - 0.5 * std::exp(z); }

double h_of(double p, double b, const ConditionalRoundContext& ctx, const NoiseModel& noise, double eta) {
  return p - b / (b + (1.0 - b) * deviation_factor_A(ctx, p, noise, eta));
}

}  // namespace

TEST_CASE("select picks the smallest perturbed scores") {
  // eta = 2 with perturbations half the target scores.
  const auto s = state_with({0, 0, 0, 0}, 2, 2.0);
  const std::vector<double> gamma{3.1 / 2, 0.5 / 2, 2.2 / 2, 0.9 / 2};
  CHECK(ftpl_select_with(s, gamma) == ExpertSet{1, 3});

  const auto leader = state_with({5, 1, 3}, 1, 2.0);
  CHECK(ftpl_select_with(leader, std::vector<double>{0, 0, 0}) == ExpertSet{1});

  const auto tie = state_with({1, 1, 1}, 2, 2.0);
  CHECK(ftpl_select_with(tie, std::vector<double>{0, 0, 0}) == ExpertSet{0, 1});
  CHECK_THROWS_AS(ftpl_select_with(tie, std::vector<double>{0, 0}), std::invalid_argument);
}

TEST_CASE("select matches exhaustive argmin for K <= 10, m <= 4") {
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> u(0.0, 40.0);
  for (int trial = 0; trial < 400; ++trial) {
    const std::size_t k = 2 + trial % 9;
    const std::size_t m = 1 + trial % std::min<std::size_t>(4, k - 1);
    std::vector<double> cum(k);
    for (double& c : cum) c = u(gen);
    auto s = state_with(cum, m, 3.0);
    Rng rng = make_rng(trial, 5);
    std::vector<double> gamma(k);
    for (double& g : gamma) g = kLaplace.sample(rng);

    double best = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> best_set;
    std::vector<std::size_t> idx(m);
    for (std::size_t mask = 0; mask < (std::size_t{1} << k); ++mask) {
      if (static_cast<std::size_t>(__builtin_popcountll(mask)) != m) continue;
      double total = 0.0;
      idx.clear();
      for (std::size_t i = 0; i < k; ++i) {
        if (mask >> i & 1) {
          total += cum[i] + 3.0 * gamma[i];
          idx.push_back(i);
        }
      }
      if (total < best) {
        best = total;
        best_set = idx;
      }
    }
    CHECK(ftpl_select_with(s, gamma) == ExpertSet(best_set));
  }
}

TEST_CASE("ftpl_select draws K perturbations from the rng") {
  const auto s = state_with({0.0, 4.0, 1.0, 2.5, 3.0}, 2, 1.5);
  Rng a = make_rng(8);
  Rng b = make_rng(8);
  std::vector<double> gamma(5);
  for (double& g : gamma) g = kLaplace.sample(b);
  CHECK(ftpl_select(s, a) == ftpl_select_with(s, gamma));
  CHECK(ftpl_select(s, a).size() == 2);
}

TEST_CASE("update accumulates losses") {
  FtplState s(2, 1, 2.0, kLaplace);
  s.update(std::vector<double>{0.0, 0.0});
  CHECK(s.cumulative_losses()[0] == 0.0);
  const auto next = ftpl_update(s, std::vector<double>{0.3, 0.7});
  CHECK(next.cumulative_losses()[0] == 0.3);
  CHECK(next.cumulative_losses()[1] == 0.7);
  CHECK(s.cumulative_losses()[1] == 0.0);

  FtplState ones(3, 2, 2.0, kLaplace);
  for (int t = 0; t < 250; ++t) ones.update(std::vector<double>{1, 1, 1});
  for (double c : ones.cumulative_losses()) CHECK(c == 250.0);

  CHECK_THROWS_AS(s.update(std::vector<double>{0.5, 1.5}), std::domain_error);
  CHECK_THROWS_AS(s.update(std::vector<double>{-0.1, 0.5}), std::domain_error);
  CHECK_THROWS_AS(s.update(std::vector<double>{0.5}), std::invalid_argument);
}

TEST_CASE("state construction guards") {
  CHECK_THROWS_AS(FtplState(3, 0, 2.0, kLaplace), std::invalid_argument);
  CHECK_THROWS_AS(FtplState(3, 4, 2.0, kLaplace), std::invalid_argument);
  CHECK_THROWS_AS(FtplState(3, 1, 1.0, kLaplace), std::invalid_argument);
  CHECK_THROWS_AS(FtplState(3, 1, 0.5, kHyperbolic), std::invalid_argument);
  CHECK_NOTHROW(FtplState(3, 1, 0.5, kGaussian));
  CHECK_THROWS_AS(FtplState(3, 1, 0.0, kGaussian), std::invalid_argument);
}

TEST_CASE("default step size") {
  CHECK(default_step_size(1.0, 284.0, 20, 5) == doctest::Approx(std::sqrt(284.0 / std::log(4.0))).epsilon(1e-14));
  CHECK(default_step_size(1.0, 284.0, 20, 5) == doctest::Approx(14.313).epsilon(1e-4));
  CHECK_THROWS_AS(default_step_size(1.0, std::log(4.0), 20, 5), HorizonError);
  CHECK_THROWS_AS(default_step_size(1.0, 1000.0, 5, 5), std::invalid_argument);
  for (double t : {50.0, 284.0, 8192.0}) {
    CHECK(default_step_size(4.0, t, 20, 5) == doctest::Approx(2.0 * default_step_size(1.0, t, 20, 5)).epsilon(1e-14));
  }
}

TEST_CASE("deviation bound") {
  CHECK(ic_deviation_bound(1.0, 10.0) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(ic_deviation_bound(1.0, 4.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(ic_deviation_bound(1.0, 1e12) < 1e-11);
  CHECK_THROWS_AS(ic_deviation_bound(1.0, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(ic_deviation_bound(1.0, 1.5), std::invalid_argument);
}

TEST_CASE("factor A") {
  CHECK(deviation_factor_A({3.0, 2.0, 2.0}, 0.5, kLaplace, 10.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(deviation_factor_A({-4.0, 7.5, 7.5}, 0.5, kGaussian, 3.0) == doctest::Approx(1.0).epsilon(1e-15));

  // Interval [e^-0.2, e^0.2] for Laplace and Hyperbolic at eta = 10.
  for (const NoiseModel* noise : {&kLaplace, &kHyperbolic}) {
    double lo = 1e9, hi = 0.0;
    for (double gap = -5.0; gap <= 5.0 + 1e-12; gap += 0.25) {
      for (double d = -1.0; d <= 1.0 + 1e-12; d += 0.25) {
        for (double p = 0.0; p <= 1.0 + 1e-12; p += 0.05) {
          const double a = deviation_factor_A({gap, 0.0, d}, std::min(p, 1.0), *noise, 10.0);
          lo = std::min(lo, a);
          hi = std::max(hi, a);
        }
      }
    }
    CHECK(lo >= std::exp(-0.2) * (1 - 1e-12));
    CHECK(hi <= std::exp(0.2) * (1 + 1e-12));
  }

  // Gaussian: |log A| grows with |L - X0|.
  double previous = 0.0;
  for (double gap : {-1.0, -10.0, -100.0, -1000.0}) {
    const double log_a = std::abs(std::log(deviation_factor_A({gap, 0.0, 1.0}, 0.5, kGaussian, 10.0)));
    CHECK(log_a > previous);
    previous = log_a;
  }
  CHECK(previous > 5.0);
}

TEST_CASE("best response with a constant factor") {
  for (double b : {0.0, 0.1, 0.37, 0.5, 0.9, 1.0}) {
    CHECK(best_response_for(b, [](double) { return 1.0; }) == doctest::Approx(b).epsilon(1e-9));
  }
  const double a = std::exp(0.1);
  const double expected = 0.5 / (0.5 + 0.5 * a);
  CHECK(best_response_for(0.5, [a](double) { return a; }) == doctest::Approx(expected).epsilon(1e-9));
  CHECK(expected == doctest::Approx(0.4750).epsilon(1e-4));

  CHECK_THROWS_AS(best_response_for(0.5, [](double) { return std::numeric_limits<double>::infinity(); }),
                  std::domain_error);
  CHECK_THROWS_AS(best_response_for(1.5, [](double) { return 1.0; }), std::domain_error);
}

TEST_CASE("best response stays within the deviation bound") {
  for (const NoiseModel* noise : {&kLaplace, &kHyperbolic}) {
    double worst = 0.0;
    for (int bi = 1; bi <= 19; ++bi) {
      const double b = 0.05 * bi;
      for (double gap = -5.0; gap <= 5.0 + 1e-12; gap += 0.5) {
        for (double d = -1.0; d <= 1.0 + 1e-12; d += 0.5) {
          const double p = best_response_conditional({gap, 0.0, d}, b, *noise, 10.0);
          worst = std::max(worst, std::abs(p - b));
          // p is the root of h.
          const ConditionalRoundContext ctx{gap, 0.0, d};
          CHECK(std::abs(h_of(p, b, ctx, *noise, 10.0)) < 1e-8);
        }
      }
    }
    CHECK(worst <= 0.25);
    CHECK(worst > 0.0);
  }
  CHECK_THROWS_AS(best_response_conditional({0, 0, 0}, 0.5, kLaplace, 1.0), std::invalid_argument);
}

TEST_CASE("h is strictly increasing for bounded noise with eta >= 2B") {
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  std::uniform_real_distribution<double> ud(-1.0, 1.0);
  for (const NoiseModel* noise : {&kLaplace, &kHyperbolic}) {
    for (double eta : {2.0, 3.0, 10.0}) {
      for (int trial = 0; trial < 10; ++trial) {
        const ConditionalRoundContext ctx{u(gen), 0.0, ud(gen)};
        const double b = 0.05 + 0.09 * trial;
        double prev = h_of(0.0, b, ctx, *noise, eta);
        bool increasing = true;
        for (int k = 1; k <= 1000; ++k) {
          const double cur = h_of(k * 1e-3, b, ctx, *noise, eta);
          increasing = increasing && cur > prev;
          prev = cur;
        }
        CHECK(increasing);
      }
    }
  }
}

TEST_CASE("selection probability Monte Carlo") {
  SUBCASE("dominant expert") {
    const auto s = state_with({0, 60, 60, 60, 60}, 2, 2.0);
    const std::vector<double> others{0, 1, 1, 1, 1};
    const auto est = selection_probability_mc(s, others, 0, 0.5, 0, 20000, 3);
    CHECK(est.probability > 0.999);
  }
  SUBCASE("identical experts") {
    const auto s = state_with({2, 2, 2, 2, 2, 2}, 2, 2.0);
    const std::vector<double> others(6, 0.25);
    const auto est = selection_probability_mc(s, others, 3, 0.5, 1, 200000, 11);
    CHECK(std::abs(est.probability - 2.0 / 6.0) <= 3.0 * est.standard_error);
  }
  SUBCASE("thread count does not change the estimate") {
    const auto s = state_with({0, 0.5, 1}, 1, 2.0);
    const std::vector<double> others{0, 0.3, 0.1};
    const auto one = selection_probability_mc(s, others, 0, 0.5, 0, 100000, 9, 1);
    const auto four = selection_probability_mc(s, others, 0, 0.5, 0, 100000, 9, 4);
    CHECK(one.probability == four.probability);
  }
  SUBCASE("K = 3 against quadrature") {
    const double eta = 2.0;
    const auto s = state_with({0, 0.5, 1}, 1, eta);
    const std::vector<double> others{0, 0.3, 0.1};
    const double own = 0.25;   // (0.5 - 0)^2
    const double c1 = 0.8;     // 0.5 + 0.3
    const double c2 = 1.1;     // 1 + 0.1
    auto integrand = [&](double g) {
      const double score = own + eta * g;
      return laplace_pdf(g) * laplace_survival((score - c1) / eta) * laplace_survival((score - c2) / eta);
    };
    using Gk = boost::math::quadrature::gauss_kronrod<double, 61>;
    std::vector<double> cuts{-60.0, 0.0, (c1 - own) / eta, (c2 - own) / eta, 60.0};
    double oracle = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) oracle += Gk::integrate(integrand, cuts[i], cuts[i + 1], 15, 1e-13);
    const auto est = selection_probability_mc(s, others, 0, 0.5, 0, 1000000, 21);
    CHECK(std::abs(est.probability - oracle) <= 3.0 * est.standard_error);

    // The conditional-cdf estimator agrees with the same oracle.
    Rng rng = make_rng(5);
    const std::vector<double> reports{0.5, std::sqrt(0.3), std::sqrt(0.1)};
    ConditionalSelectionSampler sampler(s, reports, 0, 200000, rng);
    CHECK(std::abs(sampler.probability(0.5, 0) - oracle) <= 3.0 * std::sqrt(oracle * (1 - oracle) / 200000));
  }
  SUBCASE("probabilities sum to m") {
    std::mt19937_64 gen(2);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const std::size_t k = 5, m = 2;
    std::vector<double> cum(k), reports(k), losses(k);
    for (std::size_t i = 0; i < k; ++i) {
      cum[i] = 3.0 * u(gen);
      reports[i] = u(gen);
      losses[i] = quadratic_loss(reports[i], 1);
    }
    const auto s = state_with(cum, m, 2.5);
    double total = 0.0, var = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      const auto est = selection_probability_mc(s, losses, i, reports[i], 1, 200000, 100 + i);
      total += est.probability;
      var += est.standard_error * est.standard_error;
    }
    CHECK(std::abs(total - static_cast<double>(m)) <= 3.0 * std::sqrt(var));
  }
  CHECK_THROWS_AS(selection_probability_mc(state_with({0, 0}, 1, 2.0), std::vector<double>{0, 0}, 0, 0.5, 0, 0, 1),
                  std::invalid_argument);
}

TEST_CASE("negated state and perturbations mirror the selection") {
  const std::vector<double> cum{0.0, 0.5, 1.2, 0.7};
  const auto s = state_with(cum, 1, 2.0);
  std::vector<double> neg(cum.size());
  std::transform(cum.begin(), cum.end(), neg.begin(), [](double c) { return -c; });
  const auto mirror = state_with(neg, 1, 2.0);

  Rng rng = make_rng(31);
  std::vector<double> freq_max(4, 0.0), freq_mirror(4, 0.0);
  const int n = 200000;
  std::vector<double> gamma(4), minus(4);
  for (int draw = 0; draw < n; ++draw) {
    for (std::size_t i = 0; i < 4; ++i) {
      gamma[i] = kLaplace.sample(rng);
      minus[i] = -gamma[i];
    }
    // Pathwise: the mirror state picks the original's largest score.
    std::size_t arg_max = 0;
    for (std::size_t i = 1; i < 4; ++i) {
      if (cum[i] + 2.0 * gamma[i] > cum[arg_max] + 2.0 * gamma[arg_max]) arg_max = i;
    }
    const auto picked = ftpl_select_with(mirror, minus);
    CHECK(picked.members()[0] == arg_max);
    freq_max[arg_max] += 1.0;
  }
  // Distributional: independent draws on the mirror state give the same frequencies.
  Rng rng2 = make_rng(32);
  for (int draw = 0; draw < n; ++draw) freq_mirror[ftpl_select(mirror, rng2).members()[0]] += 1.0;
  for (std::size_t i = 0; i < 4; ++i) {
    const double p = freq_max[i] / n;
    const double q = freq_mirror[i] / n;
    const double se = std::sqrt((p * (1 - p) + q * (1 - q)) / n);
    CHECK(std::abs(p - q) <= 4.0 * se + 1e-12);
  }
}

TEST_CASE("conditional sampler contexts") {
  std::mt19937_64 gen(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> cum(7), reports(7);
  for (std::size_t i = 0; i < 7; ++i) {
    cum[i] = 5.0 * u(gen);
    reports[i] = u(gen);
  }
  const auto s = state_with(cum, 3, 4.0, kHyperbolic);
  Rng rng = make_rng(2);
  ConditionalSelectionSampler sampler(s, reports, 2, 5000, rng);
  CHECK(sampler.samples() == 5000);
  for (std::size_t n = 0; n < sampler.samples(); ++n) {
    const auto ctx = sampler.context(n);
    CHECK(std::abs(ctx.x0 - ctx.x1) <= 1.0);
    CHECK(ctx.cumulative_loss == cum[2]);
  }
  // Smooth in the report; truthful reporting is near-optimal.
  const double b = 0.3;
  auto objective = [&](double p) { return (1 - b) * sampler.probability(p, 0) + b * sampler.probability(p, 1); };
  double best_p = 0.0, best = -1.0;
  for (int k = 0; k <= 1000; ++k) {
    const double val = objective(k * 1e-3);
    if (val > best) {
      best = val;
      best_p = k * 1e-3;
    }
  }
  CHECK(std::abs(best_p - b) <= ic_deviation_bound(1.0, 4.0));

  // m >= K - 1 never competes.
  const auto all = state_with({0, 1}, 1, 2.0);
  Rng rng3 = make_rng(3);
  ConditionalSelectionSampler trivially(state_with({0, 1, 2}, 2, 2.0), std::vector<double>{0.1, 0.2, 0.3}, 0, 10, rng3);
  CHECK(trivially.probability(0.9, 0) < 1.0);
  ConditionalSelectionSampler single(all, std::vector<double>{0.1, 0.2}, 0, 10, rng3);
  CHECK(single.probability(0.9, 0) < 1.0);
  ConditionalSelectionSampler sure(state_with({0, 1}, 2, 2.0), std::vector<double>{0.1, 0.2}, 0, 10, rng3);
  CHECK(sure.probability(0.9, 0) == 1.0);
}
