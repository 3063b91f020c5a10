#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stratexp/audit.hpp"
#include "stratexp/learners.hpp"
#include "stratexp/rng.hpp"
#include "stratexp/utility.hpp"

namespace stratexp {

enum class PolicyKind { Truthful, BestResponse, UniformPerturbed, Extremizer };

std::string_view to_string(PolicyKind kind);
PolicyKind parse_policy_kind(std::string_view name);

/// How every expert turns its belief into a report. Reports are clipped to
/// [0, 1].
///  - UniformPerturbed: b + U(-param, param), redrawn each round.
///  - Extremizer: b + param * sign(b - 1/2).
///  - BestResponse: every `audit_every` rounds each expert audits the learner
///    with the others truthful and keeps the offset argmax - b until the next
///    audit.
struct AgentPolicy {
  PolicyKind kind = PolicyKind::Truthful;
  double param = 0.0;
  std::size_t audit_every = 16;
  double grid_step = 1e-3;

  static AgentPolicy truthful() { return {}; }
  static AgentPolicy uniform_perturbed(double delta) { return {PolicyKind::UniformPerturbed, delta}; }
  static AgentPolicy extremizer(double gamma) { return {PolicyKind::Extremizer, gamma}; }
  static AgentPolicy best_response(std::size_t every = 16) { return {PolicyKind::BestResponse, 0.0, every}; }
};

/// Reports for the stateless policies; BestResponse needs the learner and is
/// handled by the simulator.
std::vector<double> stateless_reports(const AgentPolicy& policy, std::span<const double> beliefs, Rng& rng);

/// Beliefs (T x K) and outcomes (T) of one experiment.
struct Scenario {
  std::size_t horizon = 0;
  std::size_t experts = 0;
  std::vector<double> beliefs;
  std::vector<int> outcomes;

  std::span<const double> belief_row(std::size_t t) const { return {beliefs.data() + t * experts, experts}; }
  /// Quadratic losses of the true beliefs.
  LossMatrix true_losses() const;
  /// Throws DataError on beliefs outside [0, 1], non-binary outcomes or size mismatches.
  void validate() const;
};

/// i.i.d. U(0, 1) beliefs; outcome r_t ~ Bernoulli(mean belief of round t).
Scenario iid_uniform_scenario(std::size_t experts, std::size_t horizon, Rng& rng);
/// Replaces outcomes with Bernoulli(mean belief) draws.
void draw_consensus_outcomes(Scenario& scenario, Rng& rng);

/// Adversarial script: header b0, ..., b{K-1}, outcome; one row per round.
Scenario read_script(std::istream& in, std::string_view source = "<script>");
Scenario read_script_file(const std::string& path);
void write_script(std::ostream& out, const Scenario& scenario);

struct AuditOptions {
  std::size_t every = 16;
  double grid_step = 1e-3;
  std::optional<std::size_t> expert;  // all experts when empty
};

struct AuditRecord {
  std::size_t t = 0;
  std::size_t expert = 0;
  double belief = 0.0;
  double argmax_report = 0.0;
  double deviation = 0.0;
  double gap = 0.0;
};

struct TraceRecord {
  std::size_t t = 0;  // 1-based
  ExpertSet set;
  double util_true = 0.0;
  double cum_util = 0.0;
  double cum_opt = 0.0;
  double alpha = 1.0;
  double alpha_regret = 0.0;
};

/// Per-run record. cum_opt at round t is the best fixed m-set in hindsight
/// over rounds 1..t; at t = T it is the full-horizon optimum.
struct RegretTrace {
  std::string algo;
  std::uint64_t seed = 0;
  double eta = 0.0;
  std::string noise;
  std::string utility;
  std::size_t m = 0;
  std::size_t experts = 0;
  std::vector<TraceRecord> records;
  std::vector<double> instance_regrets;  // ODG only, at the end of the run
  std::vector<AuditRecord> audits;
  std::vector<std::string> warnings;

  double final_alpha_regret() const { return records.empty() ? 0.0 : records.back().alpha_regret; }
};

struct SimulationConfig {
  LearnerOptions learner;
  AgentPolicy policy;
  std::uint64_t seed = 0;
  std::optional<AuditOptions> audit;
};

/// Round loop: select from report-driven state, agents report, outcome
/// revealed, learner updated with report losses, utility recorded with
/// true-belief losses. learner.experts and learner.horizon are taken from the
/// scenario.
RegretTrace run_experiment(const SimulationConfig& config, const Scenario& scenario);

struct OptResult {
  ExpertSet set;
  double total = 0.0;
};

/// Exact best fixed m-set in hindsight. Modular utility uses the top-m fast
/// path (ties to lower index); submodular enumerates and throws
/// CombinatorialBlowup past the subset cap.
OptResult brute_force_opt(const LossMatrix& losses, const UtilityKind& kind, std::size_t m);

/// alpha * opt_total - cumulative utility of the trace.
double alpha_regret(const RegretTrace& trace, double opt_total, double alpha);

void write_trace_csv(std::ostream& out, const RegretTrace& trace, bool header = true);
/// Reads the CSV produced by write_trace_csv (one run); metadata beyond algo
/// and seed is not stored in the file.
RegretTrace read_trace_csv(std::istream& in, std::string_view source = "<trace>");
void write_audit_csv(std::ostream& out, std::span<const AuditRecord> audits, bool header = true);

}  // namespace stratexp
