#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "stratexp/dataset.hpp"
#include "stratexp/noise.hpp"

namespace stratexp {

struct NflConfig {
  std::size_t experts = 20;
  std::size_t m = 5;
  std::size_t groups = 5;
  std::size_t runs = 10;
  std::uint64_t seed = 0;
  std::optional<double> ftpl_eta;
  NoiseKind noise = NoiseKind::Laplace;
  unsigned threads = 0;  // 0: hardware concurrency
};

struct BandRow {
  std::size_t t = 0;
  double mean = 0.0;
  double p20 = 0.0;
  double p80 = 0.0;
};

/// Average regret (cumulative 1-regret / t against the best fixed m-set over
/// rounds 1..t) for one algorithm.
struct AlgorithmCurves {
  std::string algo;
  double eta = 0.0;
  double report_perturbation = 0.0;  // FTPL agents' uniform half-width
  std::vector<std::vector<double>> runs;         // [group * runs + run][t - 1]
  std::vector<std::vector<double>> group_means;  // [group][t - 1]
  std::vector<BandRow> band;                     // across all runs
};

struct NflResult {
  std::size_t horizon = 0;
  std::vector<std::vector<std::size_t>> groups;  // forecaster indices into the filtered dataset
  bool disjoint_groups = true;
  AlgorithmCurves ftpl;
  AlgorithmCurves odg;
};

/// Samples `groups` groups of K complete forecasters (disjoint when the pool
/// allows it, otherwise each group drawn independently without replacement),
/// runs FTPL with UniformPerturbed(2B / (eta - 2B)) agents and ODG with
/// truthful agents `runs` times per group, modular utility. Throws ConfigError
/// when fewer than K complete forecasters exist.
NflResult run_nfl_experiment(const NflConfig& config, const ForecastDataset& dataset);

/// Linearly interpolated percentile, q in [0, 1].
double percentile(std::vector<double> values, double q);

/// Header t, mean, p20, p80.
void write_band_csv(std::ostream& out, const AlgorithmCurves& curves);
/// Flat key=value sidecar describing the run and the regret definition.
void write_nfl_meta(std::ostream& out, const NflConfig& config, const NflResult& result);

}  // namespace stratexp
