#include "stratexp/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "stratexp/csv.hpp"
#include "stratexp/errors.hpp"
#include "stratexp/subsets.hpp"

namespace stratexp {

std::string_view to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::Truthful: return "truthful";
    case PolicyKind::BestResponse: return "best-response";
    case PolicyKind::UniformPerturbed: return "uniform-perturbed";
    case PolicyKind::Extremizer: return "extremizer";
  }
  return "unknown";
}

PolicyKind parse_policy_kind(std::string_view name) {
  if (name == "truthful") return PolicyKind::Truthful;
  if (name == "best-response" || name == "best_response") return PolicyKind::BestResponse;
  if (name == "uniform-perturbed" || name == "uniform_perturbed") return PolicyKind::UniformPerturbed;
  if (name == "extremizer") return PolicyKind::Extremizer;
  throw std::invalid_argument("unknown agent policy '" + std::string(name) + "'");
}

std::vector<double> stateless_reports(const AgentPolicy& policy, std::span<const double> beliefs, Rng& rng) {
  std::vector<double> out(beliefs.begin(), beliefs.end());
  switch (policy.kind) {
    case PolicyKind::Truthful:
    case PolicyKind::BestResponse:
      break;
    case PolicyKind::UniformPerturbed:
      for (double& p : out) p = std::clamp(p + policy.param * (2.0 * uniform01(rng) - 1.0), 0.0, 1.0);
      break;
    case PolicyKind::Extremizer:
      for (double& p : out) {
        const double dir = p > 0.5 ? 1.0 : (p < 0.5 ? -1.0 : 0.0);
        p = std::clamp(p + policy.param * dir, 0.0, 1.0);
      }
      break;
  }
  return out;
}

// ---------------------------------------------------------------------------

LossMatrix Scenario::true_losses() const {
  LossMatrix out(horizon, experts);
  for (std::size_t t = 0; t < horizon; ++t) {
    const auto b = belief_row(t);
    for (std::size_t i = 0; i < experts; ++i) out.set(t, i, quadratic_loss(b[i], outcomes[t]));
  }
  return out;
}

void Scenario::validate() const {
  if (beliefs.size() != horizon * experts || outcomes.size() != horizon) {
    throw DataError("scenario: beliefs/outcomes do not match T x K");
  }
  for (double b : beliefs) {
    if (!(b >= 0.0 && b <= 1.0)) throw DataError("scenario: belief outside [0, 1]");
  }
  for (int r : outcomes) {
    if (r != 0 && r != 1) throw DataError("scenario: outcome not binary");
  }
}

Scenario iid_uniform_scenario(std::size_t experts, std::size_t horizon, Rng& rng) {
  Scenario s;
  s.horizon = horizon;
  s.experts = experts;
  s.beliefs.resize(horizon * experts);
  for (double& b : s.beliefs) b = uniform01(rng);
  draw_consensus_outcomes(s, rng);
  return s;
}

void draw_consensus_outcomes(Scenario& s, Rng& rng) {
  s.outcomes.assign(s.horizon, 0);
  for (std::size_t t = 0; t < s.horizon; ++t) {
    const auto b = s.belief_row(t);
    double mean = 0.0;
    for (double x : b) mean += x;
    mean /= static_cast<double>(s.experts);
    s.outcomes[t] = uniform01(rng) < mean ? 1 : 0;
  }
}

Scenario read_script(std::istream& in, std::string_view source) {
  const auto table = read_csv(in, source);
  const std::size_t outcome_col = table.column("outcome");
  std::vector<std::size_t> belief_cols;
  for (std::size_t k = 0;; ++k) {
    const std::string name = "b" + std::to_string(k);
    if (!table.has_column(name)) break;
    belief_cols.push_back(table.column(name));
  }
  if (belief_cols.empty()) throw DataError(std::string(source) + ": script needs columns b0, b1, ...");
  if (table.rows.empty()) throw DataError(std::string(source) + ": script has no rounds");
  Scenario s;
  s.experts = belief_cols.size();
  s.horizon = table.rows.size();
  for (std::size_t n = 0; n < table.rows.size(); ++n) {
    const auto& row = table.rows[n];
    for (std::size_t k = 0; k < belief_cols.size(); ++k) {
      const double b = parse_double(row[belief_cols[k]], source, table.lines[n], table.header[belief_cols[k]]);
      if (!(b >= 0.0 && b <= 1.0)) {
        throw DataError(std::string(source) + ":" + std::to_string(table.lines[n]) + ": belief outside [0, 1]");
      }
      s.beliefs.push_back(b);
    }
    const auto r = parse_integer(row[outcome_col], source, table.lines[n], "outcome");
    if (r != 0 && r != 1) {
      throw DataError(std::string(source) + ":" + std::to_string(table.lines[n]) + ": outcome must be 0 or 1");
    }
    s.outcomes.push_back(static_cast<int>(r));
  }
  return s;
}

Scenario read_script_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  return read_script(in, path);
}

void write_script(std::ostream& out, const Scenario& s) {
  CsvRow header;
  for (std::size_t k = 0; k < s.experts; ++k) header.push_back("b" + std::to_string(k));
  header.push_back("outcome");
  write_csv_row(out, header);
  for (std::size_t t = 0; t < s.horizon; ++t) {
    CsvRow row;
    for (double b : s.belief_row(t)) row.push_back(format_double(b));
    row.push_back(std::to_string(s.outcomes[t]));
    write_csv_row(out, row);
  }
}

// ---------------------------------------------------------------------------

namespace {

// Best fixed set over the rounds seen so far.
class PrefixOptimum {
 public:
  PrefixOptimum(const UtilityKind& kind, std::size_t experts, std::size_t m) : kind_(kind), m_(m) {
    if (kind.type == UtilityType::Modular) {
      totals_.assign(experts, 0.0);
    } else {
      require_enumerable(experts, m);
      for_each_subset(experts, m, [&](std::span<const std::size_t> s) {
        members_.insert(members_.end(), s.begin(), s.end());
      });
      totals_.assign(members_.size() / m, 0.0);
    }
  }

  double add(std::span<const double> loss_row) {
    if (kind_.type == UtilityType::Modular) {
      const double scale = 1.0 / static_cast<double>(kind_.m);
      for (std::size_t i = 0; i < totals_.size(); ++i) totals_[i] += (1.0 - loss_row[i]) * scale;
      scratch_ = totals_;
      std::nth_element(scratch_.begin(), scratch_.begin() + static_cast<std::ptrdiff_t>(m_ - 1), scratch_.end(),
                       std::greater<>());
      double best = 0.0;
      for (std::size_t i = 0; i < m_; ++i) best += scratch_[i];
      return best;
    }
    double best = 0.0;
    for (std::size_t s = 0; s < totals_.size(); ++s) {
      totals_[s] += 1.0 - loss_product(loss_row, std::span<const std::size_t>(members_.data() + s * m_, m_));
      best = std::max(best, totals_[s]);
    }
    return best;
  }

 private:
  UtilityKind kind_;
  std::size_t m_;
  std::vector<double> totals_;
  std::vector<double> scratch_;
  std::vector<std::size_t> members_;
};

}  // namespace

RegretTrace run_experiment(const SimulationConfig& config, const Scenario& scenario) {
  scenario.validate();
  LearnerOptions options = config.learner;
  options.experts = scenario.experts;
  options.horizon = scenario.horizon;
  auto built = make_learner(options);
  Learner& learner = *built.learner;
  const std::size_t k = scenario.experts;
  const std::size_t m = options.m;
  const UtilityKind kind{options.utility.type, m};

  RegretTrace trace;
  trace.algo = std::string(to_string(options.algorithm));
  trace.seed = config.seed;
  trace.eta = learner.eta();
  trace.noise = options.algorithm == AlgorithmKind::Ftpl ? std::string(to_string(options.noise)) : "none";
  trace.utility = std::string(to_string(kind.type));
  trace.m = m;
  trace.experts = k;
  trace.warnings = std::move(built.warnings);

  const LossMatrix truth = scenario.true_losses();
  const double alpha = alpha_for(kind, truth);
  PrefixOptimum prefix(kind, k, m);

  Rng learner_rng = make_rng(config.seed, 1);
  Rng agent_rng = make_rng(config.seed, 2);
  Rng audit_rng = make_rng(config.seed, 3);
  std::vector<double> offsets(k, 0.0);
  double cum_util = 0.0;

  trace.records.reserve(scenario.horizon);
  for (std::size_t t = 0; t < scenario.horizon; ++t) {
    const auto beliefs = scenario.belief_row(t);
    const int outcome = scenario.outcomes[t];
    const ExpertSet chosen = learner.select(learner_rng);

    std::vector<double> reports;
    if (config.policy.kind == PolicyKind::BestResponse) {
      if (t % std::max<std::size_t>(config.policy.audit_every, 1) == 0) {
        for (std::size_t j = 0; j < k; ++j) {
          const auto probe = learner.incentive_probe(beliefs, j, audit_rng);
          offsets[j] = ic_audit(probe, beliefs[j], config.policy.grid_step).argmax_report - beliefs[j];
        }
      }
      reports.resize(k);
      for (std::size_t j = 0; j < k; ++j) reports[j] = std::clamp(beliefs[j] + offsets[j], 0.0, 1.0);
    } else {
      reports = stateless_reports(config.policy, beliefs, agent_rng);
    }

    if (config.audit && t % std::max<std::size_t>(config.audit->every, 1) == 0) {
      for (std::size_t j = 0; j < k; ++j) {
        if (config.audit->expert && *config.audit->expert != j) continue;
        const auto probe = learner.incentive_probe(reports, j, audit_rng);
        const auto res = ic_audit(probe, beliefs[j], config.audit->grid_step);
        trace.audits.push_back({t + 1, j, beliefs[j], res.argmax_report, res.deviation, res.gap});
      }
    }

    const auto observed = report_losses(reports, outcome);
    const auto true_row = truth.row(t);
    const double util = utility(kind, chosen, true_row);
    cum_util += util;
    const double opt = prefix.add(true_row);
    trace.records.push_back({t + 1, chosen, util, cum_util, opt, alpha, alpha * opt - cum_util});
    learner.update(observed);
  }
  trace.instance_regrets = learner.instance_regrets();
  return trace;
}

// ---------------------------------------------------------------------------

OptResult brute_force_opt(const LossMatrix& losses, const UtilityKind& kind, std::size_t m) {
  const std::size_t k = losses.experts();
  if (m == 0 || m > k) throw std::invalid_argument("brute_force_opt: need 1 <= m <= K");
  const UtilityKind u{kind.type, m};
  if (kind.type == UtilityType::Modular) {
    std::vector<double> total_loss(k, 0.0);
    for (std::size_t t = 0; t < losses.horizon(); ++t) {
      for (std::size_t i = 0; i < k; ++i) total_loss[i] += losses(t, i);
    }
    std::vector<std::size_t> order(k);
    for (std::size_t i = 0; i < k; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return total_loss[a] < total_loss[b]; });
    ExpertSet best(std::vector<std::size_t>(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(m)));
    return {best, total_utility(u, best, losses)};
  }
  require_enumerable(k, m);
  OptResult best{{}, -1.0};
  for_each_subset(k, m, [&](std::span<const std::size_t> members) {
    double total = 0.0;
    for (std::size_t t = 0; t < losses.horizon(); ++t) total += 1.0 - loss_product(losses.row(t), members);
    if (total > best.total) best = {ExpertSet(std::vector<std::size_t>(members.begin(), members.end())), total};
  });
  return best;
}

double alpha_regret(const RegretTrace& trace, double opt_total, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::domain_error("alpha_regret: alpha outside (0, 1]");
  const double cum = trace.records.empty() ? 0.0 : trace.records.back().cum_util;
  return alpha * opt_total - cum;
}

// ---------------------------------------------------------------------------

namespace {

std::string format_set(const ExpertSet& s) {
  std::string out;
  for (std::size_t i : s) {
    if (!out.empty()) out += ';';
    out += std::to_string(i);
  }
  return out;
}

ExpertSet parse_set(const std::string& text, std::string_view source, std::size_t line) {
  std::vector<std::size_t> members;
  std::size_t start = 0;
  while (start <= text.size() && !text.empty()) {
    const auto end = std::min(text.find(';', start), text.size());
    members.push_back(static_cast<std::size_t>(parse_integer(text.substr(start, end - start), source, line, "set")));
    start = end + 1;
  }
  return ExpertSet(std::move(members));
}

}  // namespace

void write_trace_csv(std::ostream& out, const RegretTrace& trace, bool header) {
  if (header) {
    write_csv_row(out, {"t", "algo", "seed", "set", "util_true", "cum_util", "cum_opt", "alpha", "alpha_regret"});
  }
  for (const auto& r : trace.records) {
    write_csv_row(out, {std::to_string(r.t), trace.algo, std::to_string(trace.seed), format_set(r.set),
                        format_double(r.util_true), format_double(r.cum_util), format_double(r.cum_opt),
                        format_double(r.alpha), format_double(r.alpha_regret)});
  }
}

RegretTrace read_trace_csv(std::istream& in, std::string_view source) {
  const auto table = read_csv(in, source);
  const std::size_t c_t = table.column("t");
  const std::size_t c_algo = table.column("algo");
  const std::size_t c_seed = table.column("seed");
  const std::size_t c_set = table.column("set");
  const std::size_t c_util = table.column("util_true");
  const std::size_t c_cum = table.column("cum_util");
  const std::size_t c_opt = table.column("cum_opt");
  const std::size_t c_alpha = table.column("alpha");
  const std::size_t c_reg = table.column("alpha_regret");
  RegretTrace trace;
  for (std::size_t n = 0; n < table.rows.size(); ++n) {
    const auto& row = table.rows[n];
    const std::size_t line = table.lines[n];
    if (n == 0) {
      trace.algo = row[c_algo];
      trace.seed = static_cast<std::uint64_t>(parse_integer(row[c_seed], source, line, "seed"));
    }
    TraceRecord r;
    r.t = static_cast<std::size_t>(parse_integer(row[c_t], source, line, "t"));
    r.set = parse_set(row[c_set], source, line);
    r.util_true = parse_double(row[c_util], source, line, "util_true");
    r.cum_util = parse_double(row[c_cum], source, line, "cum_util");
    r.cum_opt = parse_double(row[c_opt], source, line, "cum_opt");
    r.alpha = parse_double(row[c_alpha], source, line, "alpha");
    r.alpha_regret = parse_double(row[c_reg], source, line, "alpha_regret");
    trace.records.push_back(std::move(r));
  }
  if (!trace.records.empty()) trace.m = trace.records.front().set.size();
  return trace;
}

void write_audit_csv(std::ostream& out, std::span<const AuditRecord> audits, bool header) {
  if (header) write_csv_row(out, {"t", "expert", "belief", "argmax_report", "deviation", "gap"});
  for (const auto& a : audits) {
    write_csv_row(out, {std::to_string(a.t), std::to_string(a.expert), format_double(a.belief),
                        format_double(a.argmax_report), format_double(a.deviation), format_double(a.gap)});
  }
}

}  // namespace stratexp
