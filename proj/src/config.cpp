#include "stratexp/config.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "stratexp/csv.hpp"
#include "stratexp/dataset.hpp"
#include "stratexp/errors.hpp"

namespace stratexp {

std::string_view to_string(BeliefSource source) {
  switch (source) {
    case BeliefSource::IIDUniform: return "iid";
    case BeliefSource::Script: return "script";
    case BeliefSource::Dataset: return "dataset";
  }
  return "unknown";
}

std::string_view to_string(OutcomeSource source) {
  switch (source) {
    case OutcomeSource::BernoulliFromConsensus: return "consensus";
    case OutcomeSource::Script: return "script";
    case OutcomeSource::Dataset: return "dataset";
  }
  return "unknown";
}

BeliefSource parse_belief_source(std::string_view name) {
  if (name == "iid") return BeliefSource::IIDUniform;
  if (name == "script") return BeliefSource::Script;
  if (name == "dataset") return BeliefSource::Dataset;
  throw std::invalid_argument("unknown belief source '" + std::string(name) + "'");
}

OutcomeSource parse_outcome_source(std::string_view name) {
  if (name == "consensus") return OutcomeSource::BernoulliFromConsensus;
  if (name == "script") return OutcomeSource::Script;
  if (name == "dataset") return OutcomeSource::Dataset;
  throw std::invalid_argument("unknown outcome source '" + std::string(name) + "'");
}

void validate(const ExperimentConfig& c) {
  if (c.m == 0) throw ConfigError("m must be positive");
  if (c.experts && c.m > *c.experts) throw ConfigError("m exceeds the number of experts");
  if (c.horizon && *c.horizon == 0) throw ConfigError("horizon must be positive");
  if (c.eta && !(*c.eta > 0.0)) throw ConfigError("eta must be positive");
  if (c.seeds == 0) throw ConfigError("seeds must be positive");
  if (c.mc_samples == 0) throw ConfigError("mc-samples must be positive");
  if (!(c.grid_step > 0.0 && c.grid_step <= 1.0)) throw ConfigError("grid-step must lie in (0, 1]");
  if (c.audit_every == 0) throw ConfigError("audit-every must be positive");
  if (c.algorithm == AlgorithmKind::Wsu && c.m != 1) throw ConfigError("plain WSU needs m = 1");
  if (c.policy == PolicyKind::UniformPerturbed || c.policy == PolicyKind::Extremizer) {
    if (!(c.policy_param >= 0.0)) throw ConfigError("policy parameter must be nonnegative");
  }
  const bool needs_script = c.beliefs == BeliefSource::Script || c.outcomes == OutcomeSource::Script;
  if (needs_script && c.script.empty()) throw ConfigError("script source selected but no script file given");
  const bool needs_data = c.beliefs == BeliefSource::Dataset || c.outcomes == OutcomeSource::Dataset;
  if (needs_data && c.data.empty()) throw ConfigError("dataset source selected but no data file given");
  if ((c.beliefs == BeliefSource::Dataset) != (c.outcomes == OutcomeSource::Dataset)) {
    throw ConfigError("dataset beliefs and dataset outcomes must be used together");
  }
}

namespace {

bool needs_script_file(const ExperimentConfig& c) {
  return c.beliefs == BeliefSource::Script || c.outcomes == OutcomeSource::Script;
}

void check_dimension(const char* what, const std::optional<std::size_t>& wanted, std::size_t actual) {
  if (wanted && *wanted != actual) {
    throw ConfigError(std::string(what) + " = " + std::to_string(*wanted) + " does not match the source (" +
                      std::to_string(actual) + ")");
  }
}

}  // namespace

Scenario build_scenario(const ExperimentConfig& c, std::uint64_t seed) {
  validate(c);
  Rng rng = make_rng(seed, 0);
  Scenario s;
  if (c.beliefs == BeliefSource::Dataset) {
    const auto ds = filter_complete(ingest_nfl_csv(resolve_data_path(c.data)));
    const std::size_t k = c.experts.value_or(ds.forecasters.size());
    if (k > ds.forecasters.size()) {
      throw ConfigError("K = " + std::to_string(k) + " exceeds the " + std::to_string(ds.forecasters.size()) +
                        " complete forecasters");
    }
    check_dimension("horizon", c.horizon, ds.horizon());
    std::vector<std::size_t> order(ds.forecasters.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    order.resize(k);
    s = scenario_from(ds, order);
  } else {
    std::optional<Scenario> script;
    if (needs_script_file(c)) script = read_script_file(resolve_data_path(c.script));
    if (c.beliefs == BeliefSource::Script) {
      check_dimension("experts", c.experts, script->experts);
      check_dimension("horizon", c.horizon, script->horizon);
      s = *script;
    } else {
      const std::size_t k = c.experts.value_or(10);
      const std::size_t t = c.horizon.value_or(script ? script->horizon : 1000);
      s = iid_uniform_scenario(k, t, rng);
      if (script) {
        check_dimension("horizon", std::optional<std::size_t>(t), script->horizon);
        s.outcomes = script->outcomes;
      }
    }
    if (c.outcomes == OutcomeSource::BernoulliFromConsensus && c.beliefs == BeliefSource::Script) {
      draw_consensus_outcomes(s, rng);
    }
  }
  if (c.m > s.experts) throw ConfigError("m exceeds the number of experts");
  s.validate();
  return s;
}

SimulationConfig to_simulation_config(const ExperimentConfig& c, std::uint64_t seed) {
  SimulationConfig sim;
  sim.seed = seed;
  sim.learner.algorithm = c.algorithm;
  sim.learner.utility = UtilityKind{c.utility, c.m};
  sim.learner.m = c.m;
  sim.learner.eta = c.eta;
  sim.learner.noise = c.noise;
  sim.learner.mc_samples = c.mc_samples;
  sim.policy = AgentPolicy{c.policy, c.policy_param, c.audit_every, c.grid_step};
  return sim;
}

void write_config(std::ostream& out, const ExperimentConfig& c) {
  out << "algo=" << to_string(c.algorithm) << '\n';
  out << "utility=" << to_string(c.utility) << '\n';
  if (c.experts) out << "experts=" << *c.experts << '\n';
  out << "m=" << c.m << '\n';
  if (c.horizon) out << "horizon=" << *c.horizon << '\n';
  if (c.eta) out << "eta=" << format_double(*c.eta) << '\n';
  out << "noise=" << to_string(c.noise) << '\n';
  out << "policy=" << to_string(c.policy) << '\n';
  out << "policy-param=" << format_double(c.policy_param) << '\n';
  out << "seed=" << c.seed << '\n';
  out << "seeds=" << c.seeds << '\n';
  out << "groups=" << c.groups << '\n';
  out << "runs=" << c.runs << '\n';
  out << "mc-samples=" << c.mc_samples << '\n';
  out << "grid-step=" << format_double(c.grid_step) << '\n';
  out << "audit-every=" << c.audit_every << '\n';
  out << "beliefs=" << to_string(c.beliefs) << '\n';
  out << "outcomes=" << to_string(c.outcomes) << '\n';
  if (!c.script.empty()) out << "script=" << c.script << '\n';
  if (!c.data.empty()) out << "data=" << c.data << '\n';
}

}  // namespace stratexp
