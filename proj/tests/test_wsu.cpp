#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "stratexp/audit.hpp"
#include "stratexp/errors.hpp"
#include "stratexp/learners.hpp"
#include "stratexp/wsu.hpp"

using namespace stratexp;

namespace {

double sum(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0); }

std::vector<double> random_simplex(std::mt19937_64& gen, std::size_t n) {
  std::exponential_distribution<double> e(1.0);
  std::vector<double> w(n);
  for (double& x : w) x = e(gen);
  const double s = sum(w);
  for (double& x : w) x /= s;
  // Restore an exact unit sum on the last coordinate.
  w.back() = 1.0 - std::accumulate(w.begin(), w.end() - 1, 0.0);
  return w;
}

}  // namespace

TEST_CASE("wswm payments") {
  const auto pay = wswm_payment(std::vector<double>{0.8, 0.2}, std::vector<double>{0.5, 0.5}, 1);
  CHECK(pay[0] == doctest::Approx(0.65).epsilon(1e-14));
  CHECK(pay[1] == doctest::Approx(0.35).epsilon(1e-14));

  const std::vector<double> same{0.3, 0.3, 0.3};
  const std::vector<double> wagers{0.1, 2.0, 0.7};
  for (int r : {0, 1}) {
    const auto p = wswm_payment(same, wagers, r);
    for (std::size_t i = 0; i < 3; ++i) CHECK(p[i] == doctest::Approx(wagers[i]).epsilon(1e-14));
  }
  CHECK_THROWS_AS(wswm_payment(std::vector<double>{1.1}, std::vector<double>{1.0}, 0), std::domain_error);
  const auto zero = wswm_payment(std::vector<double>{0.2, 0.9}, std::vector<double>{0.0, 0.0}, 1);
  CHECK(zero == std::vector<double>{0.0, 0.0});
}

TEST_CASE("wswm budget balance on random inputs") {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int n = 0; n < 2000; ++n) {
    const std::size_t k = 1 + n % 9;
    std::vector<double> p(k), w(k);
    for (std::size_t i = 0; i < k; ++i) {
      p[i] = u(gen);
      w[i] = 5.0 * u(gen);
    }
    const auto pay = wswm_payment(p, w, n % 2);
    CHECK(std::abs(sum(pay) - sum(w)) <= 1e-12 * std::max(1.0, sum(w)));
    for (double x : pay) CHECK(x >= 0.0);
  }
}

TEST_CASE("wsu update values") {
  WeightVector w(2, 0.1);
  w.update(std::vector<double>{0.0, 1.0});
  CHECK(w[0] == doctest::Approx(0.525).epsilon(1e-14));
  CHECK(w[1] == doctest::Approx(0.475).epsilon(1e-14));

  WeightVector c(2, 0.4);
  c.update(std::vector<double>{0.37, 0.37});
  CHECK(c[0] == 0.5);
  CHECK(c[1] == 0.5);
}

TEST_CASE("wsu update equals the wagering-mechanism mixture") {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int n = 0; n < 200; ++n) {
    const std::size_t k = 2 + n % 6;
    const double eta = 0.5 * u(gen);
    const auto pi = random_simplex(gen, k);
    std::vector<double> p(k);
    for (double& x : p) x = u(gen);
    const int r = n % 2;
    std::vector<double> loss(k);
    for (std::size_t i = 0; i < k; ++i) loss[i] = quadratic_loss(p[i], r);
    const auto next = wsu_update(WeightVector(pi, eta), loss);
    const auto pay = wswm_payment(p, pi, r);
    for (std::size_t i = 0; i < k; ++i) {
      CHECK(next[i] == doctest::Approx(eta * pay[i] + (1.0 - eta) * pi[i]).epsilon(1e-13));
    }
  }
}

TEST_CASE("simplex preservation and shift invariance") {
  std::mt19937_64 gen(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  WeightVector w(10, 0.5);
  WeightVector shifted(10, 0.5);
  for (int t = 0; t < 5000; ++t) {
    std::vector<double> loss(10);
    for (double& x : loss) x = u(gen);
    std::vector<double> moved = loss;
    const double c = u(gen) - 0.5;
    for (double& x : moved) x += c;
    w.update(loss);
    shifted.update(moved);
    REQUIRE(std::abs(sum(w.weights()) - 1.0) <= 1e-12);
    for (double x : w.weights()) REQUIRE(x > 0.0);
  }
  for (std::size_t i = 0; i < 10; ++i) CHECK(std::abs(w[i] - shifted[i]) <= 1e-15 + 1e-12 * w[i]);
}

TEST_CASE("single-step shift invariance is exact") {
  std::mt19937_64 gen(10);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int n = 0; n < 100; ++n) {
    const auto pi = random_simplex(gen, 6);
    std::vector<double> loss(6);
    for (double& x : loss) x = u(gen);
    std::vector<double> moved = loss;
    for (double& x : moved) x += 0.25;
    const auto a = wsu_update(WeightVector(pi, 0.3), loss);
    const auto b = wsu_update(WeightVector(pi, 0.3), moved);
    for (std::size_t i = 0; i < 6; ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-15);
  }
}

TEST_CASE("step-size violation leaves the state untouched") {
  WeightVector w(std::vector<double>{0.9, 0.1}, 2.0);
  const std::vector<double> before(w.weights().begin(), w.weights().end());
  CHECK_THROWS_AS(w.update(std::vector<double>{0.0, 1.0}), StepSizeError);
  CHECK(std::vector<double>(w.weights().begin(), w.weights().end()) == before);
  CHECK_THROWS_AS(WeightVector(std::vector<double>{0.5, 0.6}, 0.1), std::invalid_argument);
  CHECK_THROWS_AS(WeightVector(3, 0.0), std::invalid_argument);
}

TEST_CASE("selection frequencies") {
  Rng rng = make_rng(1);
  const WeightVector point(std::vector<double>{0.0, 0.0, 1.0}, 0.1);
  for (int n = 0; n < 100; ++n) CHECK(wsu_select(point, rng) == 2);

  const int draws = 100'000;
  std::vector<int> counts(4, 0);
  const WeightVector uniform(4, 0.1);
  for (int n = 0; n < draws; ++n) ++counts[wsu_select(uniform, rng)];
  for (int c : counts) CHECK(std::abs(c / double(draws) - 0.25) <= 0.01);

  int first = 0;
  const WeightVector skew(std::vector<double>{0.7, 0.3}, 0.1);
  for (int n = 0; n < draws; ++n) first += wsu_select(skew, rng) == 0;
  CHECK(std::abs(first / double(draws) - 0.7) <= 0.01);
}

TEST_CASE("conditioned selection") {
  Rng rng = make_rng(2);
  const WeightVector w(std::vector<double>{0.8, 0.15, 0.05}, 0.1);
  int second = 0;
  const int draws = 100'000;
  for (int n = 0; n < draws; ++n) {
    const auto i = wsu_select_excluding(w, ExpertSet{0}, rng);
    REQUIRE(i != 0);
    second += i == 1;
  }
  CHECK(std::abs(second / double(draws) - 0.75) <= 0.01);
  const WeightVector point(std::vector<double>{1.0, 0.0, 0.0}, 0.1);
  for (int n = 0; n < 100; ++n) CHECK(wsu_select_excluding(point, ExpertSet{0}, rng) != 0);
  CHECK_THROWS_AS(wsu_select_excluding(point, ExpertSet{0, 1, 2}, rng), std::invalid_argument);
}

TEST_CASE("default step sizes") {
  CHECK(wsu_default_step_size(10, 1000) == doctest::Approx(std::sqrt(std::log(10.0) / 1000.0)));
  CHECK(wsu_default_step_size(10, 2) == 0.5);
  const auto meta = meta_default_step_size(20, 5, 284);
  CHECK(meta.eta == doctest::Approx(0.2050).epsilon(1e-3));
  CHECK(meta.horizon_ok);
  const auto short_run = meta_default_step_size(20, 5, 10);
  CHECK_FALSE(short_run.horizon_ok);
  CHECK(short_run.eta == 0.5);
}

TEST_CASE("adaptive regret bound") {
  const double t = 1000.0;
  CHECK(adaptive_regret_bound(t, 10) == doctest::Approx(std::sqrt(t * std::log(10.0)) + std::log(10.0)));
  CHECK(adaptive_regret_bound(0.0, 10) == doctest::Approx(std::log(10.0)));
  // Spreading T over m instances maximizes the summed bound at T / m each.
  const std::size_t m = 4;
  double split = 0.0;
  for (std::size_t i = 0; i < m; ++i) split += adaptive_regret_bound(t / m, 10);
  CHECK(split <= std::sqrt(m * t * std::log(10.0)) + m * std::log(10.0) + 1e-9);
  double uneven = adaptive_regret_bound(0.7 * t, 10) + adaptive_regret_bound(0.1 * t, 10) +
                  adaptive_regret_bound(0.1 * t, 10) + adaptive_regret_bound(0.1 * t, 10);
  CHECK(uneven <= split);
  CHECK_THROWS_AS(adaptive_regret_bound(-1.0, 3), std::invalid_argument);
}

TEST_CASE("meta-expert WSU with one member per set is plain WSU") {
  std::mt19937_64 gen(12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  LossMatrix losses(300, 2);
  for (std::size_t t = 0; t < 300; ++t) losses.set_row(t, std::vector<double>{u(gen), u(gen)});
  Rng a = make_rng(77);
  const auto run = meta_wsu_run(losses, 1, 0.2, a);
  Rng b = make_rng(77);
  WeightVector plain(2, 0.2);
  for (std::size_t t = 0; t < 300; ++t) {
    CHECK(run.sets[t] == ExpertSet{wsu_select(plain, b)});
    plain.update(losses.row(t));
  }
  for (std::size_t i = 0; i < 2; ++i) CHECK(run.final_weights[i] == plain[i]);
}

TEST_CASE("meta-expert weights stay uniform under constant losses") {
  LossMatrix losses(50, 5);
  for (std::size_t t = 0; t < 50; ++t) losses.set_row(t, std::vector<double>(5, 0.3));
  Rng rng = make_rng(1);
  const auto run = meta_wsu_run(losses, 2, std::nullopt, rng);
  REQUIRE(run.final_weights.size() == 10);
  for (double w : run.final_weights.weights()) CHECK(w == doctest::Approx(0.1).epsilon(1e-14));
  CHECK(run.warnings.empty());

  // 4 m ln(Ke/m) is about 15.4 here.
  LossMatrix short_run(10, 5);
  for (std::size_t t = 0; t < 10; ++t) short_run.set_row(t, std::vector<double>(5, 0.3));
  const auto capped = meta_wsu_run(short_run, 2, std::nullopt, rng);
  CHECK(capped.eta == 0.5);
  CHECK_FALSE(capped.warnings.empty());
}

TEST_CASE("meta-expert losses and inclusion probabilities") {
  MetaWsu mod(5, 2, 0.3, UtilityKind::modular(2));
  MetaWsu sub(5, 2, 0.3, UtilityKind::submodular(2));
  const std::vector<double> row{0.1, 0.4, 0.9, 0.5, 0.2};
  const auto idx = mod.index().rank(ExpertSet{1, 3});
  CHECK(mod.meta_losses(row)[idx] == doctest::Approx(0.45).epsilon(1e-14));
  CHECK(sub.meta_losses(row)[idx] == doctest::Approx(0.2).epsilon(1e-14));
  mod.update(row);
  double total = 0.0;
  for (std::size_t i = 0; i < 5; ++i) total += mod.inclusion_probability(i);
  CHECK(total == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("truthful reporting maximizes the next WSU weight") {
  std::mt19937_64 gen(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int h = 0; h < 40; ++h) {
    const std::size_t k = h % 2 ? 3 : 10;
    WsuLearner learner(k, 0.3);
    const std::size_t rounds = 1 + h;
    for (std::size_t t = 0; t < rounds; ++t) {
      std::vector<double> loss(k);
      for (double& x : loss) x = u(gen);
      learner.update(loss);
    }
    std::vector<double> reports(k);
    for (double& x : reports) x = u(gen);
    const std::size_t expert = h % k;
    const double belief = h % 7 == 0 ? 0.0 : (h % 11 == 0 ? 1.0 : u(gen));
    Rng rng = make_rng(h);
    const auto res = ic_audit(learner.incentive_probe(reports, expert, rng), belief, 1e-3);
    CHECK(res.deviation <= 1e-3);
  }
}

TEST_CASE("modular meta-WSU inclusion probability is maximized by the belief") {
  std::mt19937_64 gen(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int h = 0; h < 20; ++h) {
    MetaWsuLearner learner(5, 2, 0.2, UtilityKind::modular(2));
    for (int t = 0; t < 10; ++t) {
      std::vector<double> loss(5);
      for (double& x : loss) x = u(gen);
      learner.update(loss);
    }
    std::vector<double> reports(5);
    for (double& x : reports) x = u(gen);
    Rng rng = make_rng(h);
    const double belief = u(gen);
    const auto res = ic_audit(learner.incentive_probe(reports, h % 5, rng), belief, 1e-3);
    CHECK(res.deviation <= 1e-3);
  }
}
