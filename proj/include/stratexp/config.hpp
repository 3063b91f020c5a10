#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

#include "stratexp/learners.hpp"
#include "stratexp/simulation.hpp"

namespace stratexp {

enum class BeliefSource { IIDUniform, Script, Dataset };
enum class OutcomeSource { BernoulliFromConsensus, Script, Dataset };

std::string_view to_string(BeliefSource source);
std::string_view to_string(OutcomeSource source);
BeliefSource parse_belief_source(std::string_view name);
OutcomeSource parse_outcome_source(std::string_view name);

/// Everything a synthetic or dataset-driven experiment needs. Unset experts
/// and horizon are taken from the script or dataset, or default to 10 and
/// 1000 for i.i.d. beliefs.
struct ExperimentConfig {
  AlgorithmKind algorithm = AlgorithmKind::Ftpl;
  UtilityType utility = UtilityType::Modular;
  std::optional<std::size_t> experts;
  std::size_t m = 1;
  std::optional<std::size_t> horizon;
  std::optional<double> eta;
  NoiseKind noise = NoiseKind::Laplace;
  PolicyKind policy = PolicyKind::Truthful;
  double policy_param = 0.0;
  std::uint64_t seed = 0;
  std::size_t seeds = 1;
  std::size_t groups = 5;
  std::size_t runs = 10;
  std::size_t mc_samples = 100000;
  double grid_step = 1e-3;
  std::size_t audit_every = 16;
  BeliefSource beliefs = BeliefSource::IIDUniform;
  OutcomeSource outcomes = OutcomeSource::BernoulliFromConsensus;
  std::string script;
  std::string data;
};

/// Throws ConfigError on inconsistent settings (m > K, missing script path,
/// dataset outcomes without dataset beliefs, nonpositive step or grid, ...).
void validate(const ExperimentConfig& config);

/// Scenario for one seed. Scripted and dataset sources are reproduced
/// exactly; random parts use stream 0 of `seed`. Dataset beliefs use K
/// complete forecasters drawn with the seed.
Scenario build_scenario(const ExperimentConfig& config, std::uint64_t seed);

SimulationConfig to_simulation_config(const ExperimentConfig& config, std::uint64_t seed);

/// key=value lines, loadable as a config file.
void write_config(std::ostream& out, const ExperimentConfig& config);

}  // namespace stratexp
