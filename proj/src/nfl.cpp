#include "stratexp/nfl.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "stratexp/csv.hpp"
#include "stratexp/errors.hpp"
#include "stratexp/ftpl.hpp"

namespace stratexp {

double percentile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("percentile of an empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw std::domain_error("percentile: q outside [0, 1]");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

namespace {

template <class F>
void parallel_for(std::size_t jobs, unsigned threads, F&& body) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, jobs));
  if (threads <= 1) {
    for (std::size_t j = 0; j < jobs; ++j) body(j);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  for (unsigned w = 0; w < threads; ++w) {
    pool.emplace_back([&]() {
      for (std::size_t j = next++; j < jobs; j = next++) {
        if (failed) return;
        try {
          body(j);
        } catch (...) {
          if (!failed.exchange(true)) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

void summarize(AlgorithmCurves& c, std::size_t groups, std::size_t runs, std::size_t horizon) {
  c.group_means.assign(groups, std::vector<double>(horizon, 0.0));
  for (std::size_t g = 0; g < groups; ++g) {
    for (std::size_t r = 0; r < runs; ++r) {
      const auto& run = c.runs[g * runs + r];
      for (std::size_t t = 0; t < horizon; ++t) c.group_means[g][t] += run[t] / static_cast<double>(runs);
    }
  }
  c.band.resize(horizon);
  std::vector<double> column(c.runs.size());
  for (std::size_t t = 0; t < horizon; ++t) {
    for (std::size_t n = 0; n < c.runs.size(); ++n) column[n] = c.runs[n][t];
    c.band[t] = {t + 1, std::accumulate(column.begin(), column.end(), 0.0) / static_cast<double>(column.size()),
                 percentile(column, 0.2), percentile(column, 0.8)};
  }
}

std::vector<double> average_regret(const RegretTrace& trace) {
  std::vector<double> out(trace.records.size());
  for (std::size_t n = 0; n < out.size(); ++n) {
    out[n] = trace.records[n].alpha_regret / static_cast<double>(trace.records[n].t);
  }
  return out;
}

}  // namespace

NflResult run_nfl_experiment(const NflConfig& config, const ForecastDataset& dataset) {
  const std::size_t pool = dataset.forecasters.size();
  const std::size_t k = config.experts;
  if (config.m == 0 || config.m > k) throw ConfigError("need 1 <= m <= K");
  if (config.groups == 0 || config.runs == 0) throw ConfigError("groups and runs must be positive");
  std::vector<std::size_t> complete;
  for (std::size_t f = 0; f < pool; ++f) {
    if (dataset.complete(f)) complete.push_back(f);
  }
  if (complete.size() < k) {
    throw ConfigError("only " + std::to_string(complete.size()) + " complete forecasters, K = " + std::to_string(k));
  }

  NflResult result;
  result.horizon = dataset.horizon();
  if (result.horizon == 0) throw DataError("dataset has no games");
  Rng group_rng = make_rng(config.seed, 99);
  result.disjoint_groups = config.groups * k <= complete.size();
  if (result.disjoint_groups) {
    auto order = complete;
    std::shuffle(order.begin(), order.end(), group_rng);
    for (std::size_t g = 0; g < config.groups; ++g) {
      result.groups.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(g * k),
                                 order.begin() + static_cast<std::ptrdiff_t>((g + 1) * k));
    }
  } else {
    for (std::size_t g = 0; g < config.groups; ++g) {
      auto order = complete;
      std::shuffle(order.begin(), order.end(), group_rng);
      result.groups.emplace_back(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k));
    }
  }

  const double bound = NoiseModel(config.noise).condition1_bound().value_or(1.0);
  const double ftpl_eta =
      config.ftpl_eta.value_or(default_step_size(bound, static_cast<double>(result.horizon), k, config.m));
  result.ftpl.algo = "ftpl";
  result.ftpl.eta = ftpl_eta;
  result.ftpl.report_perturbation = ic_deviation_bound(bound, ftpl_eta);
  result.odg.algo = "odg";
  result.odg.eta = wsu_default_step_size(k, result.horizon);

  std::vector<Scenario> scenarios;
  for (const auto& g : result.groups) scenarios.push_back(scenario_from(dataset, g));

  const std::size_t runs = config.runs;
  const std::size_t jobs = config.groups * runs;
  result.ftpl.runs.assign(jobs, {});
  result.odg.runs.assign(jobs, {});
  parallel_for(2 * jobs, config.threads, [&](std::size_t job) {
    const bool is_ftpl = job < jobs;
    const std::size_t slot = job % jobs;
    const std::size_t g = slot / runs;
    SimulationConfig sim;
    sim.seed = config.seed * 1'000'003ULL + g * 1'000ULL + slot % runs;
    sim.learner.utility = UtilityKind::modular(config.m);
    sim.learner.m = config.m;
    if (is_ftpl) {
      sim.learner.algorithm = AlgorithmKind::Ftpl;
      sim.learner.noise = config.noise;
      sim.learner.eta = ftpl_eta;
      sim.policy = AgentPolicy::uniform_perturbed(result.ftpl.report_perturbation);
      result.ftpl.runs[slot] = average_regret(run_experiment(sim, scenarios[g]));
    } else {
      sim.learner.algorithm = AlgorithmKind::Odg;
      sim.policy = AgentPolicy::truthful();
      result.odg.runs[slot] = average_regret(run_experiment(sim, scenarios[g]));
    }
  });
  summarize(result.ftpl, config.groups, runs, result.horizon);
  summarize(result.odg, config.groups, runs, result.horizon);
  return result;
}

void write_band_csv(std::ostream& out, const AlgorithmCurves& curves) {
  write_csv_row(out, {"t", "mean", "p20", "p80"});
  for (const auto& b : curves.band) {
    write_csv_row(out, {std::to_string(b.t), format_double(b.mean), format_double(b.p20), format_double(b.p80)});
  }
}

void write_nfl_meta(std::ostream& out, const NflConfig& config, const NflResult& result) {
  out << "regret_definition=average regret at t is (best fixed m-set utility over rounds 1..t minus algorithm "
         "utility over rounds 1..t) / t, 1-regret, modular utility, true-belief losses\n";
  out << "perturbation_assumption=FTPL agents add U(-d, d) to their belief, redrawn every round, d = 2B/(eta - 2B)\n";
  out << "experts=" << config.experts << "\nm=" << config.m << "\ngroups=" << config.groups
      << "\nruns=" << config.runs << "\nseed=" << config.seed << "\nhorizon=" << result.horizon
      << "\nnoise=" << to_string(config.noise) << "\nftpl_eta=" << format_double(result.ftpl.eta)
      << "\nftpl_report_perturbation=" << format_double(result.ftpl.report_perturbation)
      << "\nodg_eta=" << format_double(result.odg.eta)
      << "\ndisjoint_groups=" << (result.disjoint_groups ? "true" : "false") << '\n';
}

}  // namespace stratexp
