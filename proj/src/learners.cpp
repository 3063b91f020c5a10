#include "stratexp/learners.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "stratexp/errors.hpp"
#include "stratexp/subsets.hpp"

namespace stratexp {

std::string_view to_string(AlgorithmKind kind) {
  switch (kind) {
    case AlgorithmKind::Wsu: return "wsu";
    case AlgorithmKind::MetaWsu: return "meta-wsu";
    case AlgorithmKind::Ftpl: return "ftpl";
    case AlgorithmKind::Odg: return "odg";
  }
  return "unknown";
}

AlgorithmKind parse_algorithm_kind(std::string_view name) {
  if (name == "wsu") return AlgorithmKind::Wsu;
  if (name == "meta-wsu" || name == "meta_wsu" || name == "metawsu") return AlgorithmKind::MetaWsu;
  if (name == "ftpl") return AlgorithmKind::Ftpl;
  if (name == "odg") return AlgorithmKind::Odg;
  throw std::invalid_argument("unknown algorithm '" + std::string(name) + "'");
}

std::vector<double> report_losses(std::span<const double> reports, int outcome) {
  std::vector<double> out(reports.size());
  for (std::size_t i = 0; i < reports.size(); ++i) out[i] = quadratic_loss(reports[i], outcome);
  return out;
}

namespace {

double weighted_mean(std::span<const double> weights, std::span<const double> losses) {
  double avg = 0.0;
  double mass = 0.0;
  for (std::size_t k = 0; k < weights.size(); ++k) {
    avg += weights[k] * losses[k];
    mass += weights[k];
  }
  return avg / mass;
}

double next_weight(std::span<const double> weights, std::span<const double> losses, double eta, std::size_t j) {
  const double avg = weighted_mean(weights, losses);
  return weights[j] * (1.0 - eta * (losses[j] - avg));
}

std::vector<double> next_weights(std::span<const double> weights, std::span<const double> losses, double eta) {
  const double avg = weighted_mean(weights, losses);
  std::vector<double> out(weights.size());
  for (std::size_t k = 0; k < weights.size(); ++k) out[k] = weights[k] * (1.0 - eta * (losses[k] - avg));
  return out;
}

void check_expert(std::size_t expert, std::size_t k) {
  if (expert >= k) throw std::out_of_range("expert index out of range");
}

}  // namespace

// ---------------------------------------------------------------------------

WsuLearner::WsuLearner(std::size_t experts, double eta) : weights_(experts, eta) {}

ExpertSet WsuLearner::select(Rng& rng) { return ExpertSet{wsu_select(weights_, rng)}; }

void WsuLearner::update(std::span<const double> report_losses) { weights_.update(report_losses); }

IncentiveProbe WsuLearner::incentive_probe(std::span<const double> reports, std::size_t expert, Rng&) const {
  check_expert(expert, experts());
  std::vector<double> rep(reports.begin(), reports.end());
  std::vector<double> w(weights_.weights().begin(), weights_.weights().end());
  const double eta = weights_.eta();
  return [rep, w, eta, expert](double p, int r) mutable {
    rep[expert] = p;
    return next_weight(w, report_losses(rep, r), eta, expert);
  };
}

// ---------------------------------------------------------------------------

MetaWsuLearner::MetaWsuLearner(std::size_t experts, std::size_t m, double eta, UtilityKind utility)
    : algo_(experts, m, eta, utility) {}

ExpertSet MetaWsuLearner::select(Rng& rng) { return algo_.select(rng); }

void MetaWsuLearner::update(std::span<const double> report_losses) { algo_.update(report_losses); }

IncentiveProbe MetaWsuLearner::incentive_probe(std::span<const double> reports, std::size_t expert, Rng&) const {
  check_expert(expert, experts());
  std::vector<double> rep(reports.begin(), reports.end());
  const MetaWsu* algo = &algo_;
  std::vector<char> member(algo_.index().size(), 0);
  std::vector<std::size_t> buf(m());
  for (std::size_t s = 0; s < member.size(); ++s) {
    algo_.index().unrank_into(s, buf);
    member[s] = std::find(buf.begin(), buf.end(), expert) != buf.end();
  }
  return [rep, algo, member, expert](double p, int r) mutable {
    rep[expert] = p;
    const auto meta = algo->meta_losses(report_losses(rep, r));
    const auto w = algo->weights().weights();
    const auto next = next_weights(w, meta, algo->weights().eta());
    double total = 0.0;
    for (std::size_t s = 0; s < next.size(); ++s) {
      if (member[s]) total += next[s];
    }
    return total;
  };
}

// ---------------------------------------------------------------------------

FtplLearner::FtplLearner(std::size_t experts, std::size_t m, double eta, NoiseModel noise, std::size_t mc_samples)
    : state_(experts, m, eta, noise), mc_samples_(mc_samples) {}

ExpertSet FtplLearner::select(Rng& rng) { return ftpl_select(state_, rng); }

void FtplLearner::update(std::span<const double> report_losses) { state_.update(report_losses); }

IncentiveProbe FtplLearner::incentive_probe(std::span<const double> reports, std::size_t expert, Rng& rng) const {
  check_expert(expert, experts());
  auto sampler = std::make_shared<ConditionalSelectionSampler>(state_, reports, expert, mc_samples_, rng);
  return [sampler](double p, int r) { return sampler->probability(p, r); };
}

// ---------------------------------------------------------------------------

OdgLearner::OdgLearner(std::size_t experts, std::size_t m, double eta, UtilityKind utility)
    : state_(experts, m, eta, utility), eta_(eta) {}

ExpertSet OdgLearner::select(Rng& rng) {
  auto sel = odg_select(state_, rng);
  picks_ = std::move(sel.picks);
  return sel.set;
}

void OdgLearner::update(std::span<const double> report_losses) {
  if (picks_.size() != state_.m()) throw std::logic_error("ODG update before select");
  state_.feedback(report_losses, picks_);
}

IncentiveProbe OdgLearner::instance_probe(std::span<const double> reports, std::size_t expert,
                                          std::size_t position) const {
  check_expert(expert, experts());
  if (picks_.size() != state_.m()) throw std::logic_error("ODG probe before select");
  if (position < 1 || position > state_.m()) throw std::out_of_range("ODG position outside [1, m]");
  std::vector<double> rep(reports.begin(), reports.end());
  const auto w = state_.instance(position).weights();
  std::vector<double> weights(w.begin(), w.end());
  const double eta = state_.instance(position).eta();
  return [rep, weights, eta, expert, position, kind = state_.kind(), picks = picks_](double p, int r) mutable {
    rep[expert] = p;
    const auto fb = instance_feedback(kind, report_losses(rep, r), picks, position);
    return next_weight(weights, fb.losses, eta, expert);
  };
}

IncentiveProbe OdgLearner::incentive_probe(std::span<const double> reports, std::size_t expert, Rng&) const {
  std::vector<IncentiveProbe> parts;
  for (std::size_t i = 1; i <= state_.m(); ++i) parts.push_back(instance_probe(reports, expert, i));
  return [parts](double p, int r) {
    double total = 0.0;
    for (const auto& part : parts) total += part(p, r);
    return total;
  };
}

IncentiveProbe OdgLearner::inclusion_probe(std::span<const double> reports, std::size_t expert) const {
  check_expert(expert, experts());
  if (picks_.size() != state_.m()) throw std::logic_error("ODG probe before select");
  double paths = 1.0;
  for (std::size_t i = 0; i < state_.m(); ++i) paths *= static_cast<double>(experts() - i);
  if (paths > 1e5) throw std::length_error("ODG inclusion probability: too many ordered draws to enumerate");
  std::vector<double> rep(reports.begin(), reports.end());
  std::vector<std::vector<double>> weights;
  for (std::size_t i = 1; i <= state_.m(); ++i) {
    const auto w = state_.instance(i).weights();
    weights.emplace_back(w.begin(), w.end());
  }
  return [rep, weights, expert, eta = eta_, kind = state_.kind(), picks = picks_](double p, int r) mutable {
    rep[expert] = p;
    const auto losses = report_losses(rep, r);
    std::vector<std::vector<double>> next;
    for (std::size_t i = 1; i <= weights.size(); ++i) {
      next.push_back(next_weights(weights[i - 1], instance_feedback(kind, losses, picks, i).losses, eta));
    }
    return sequential_inclusion_probability(next, expert);
  };
}

std::vector<double> OdgLearner::instance_regrets() const {
  std::vector<double> out;
  for (std::size_t i = 1; i <= state_.m(); ++i) out.push_back(state_.instance_regret(i));
  return out;
}

namespace {

double inclusion_from(std::span<const std::vector<double>> instances, std::size_t position, std::vector<char>& taken,
                      std::size_t expert) {
  if (position == instances.size()) return 0.0;
  const auto& w = instances[position];
  double mass = 0.0;
  std::size_t remaining = 0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    if (taken[k]) continue;
    mass += w[k];
    ++remaining;
  }
  double total = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    if (taken[k]) continue;
    const double q = mass > 0.0 ? w[k] / mass : 1.0 / static_cast<double>(remaining);
    if (q == 0.0) continue;
    if (k == expert) {
      total += q;
      continue;
    }
    taken[k] = 1;
    total += q * inclusion_from(instances, position + 1, taken, expert);
    taken[k] = 0;
  }
  return total;
}

}  // namespace

double sequential_inclusion_probability(std::span<const std::vector<double>> instances, std::size_t expert) {
  if (instances.empty()) return 0.0;
  std::vector<char> taken(instances.front().size(), 0);
  check_expert(expert, taken.size());
  return inclusion_from(instances, 0, taken, expert);
}

// ---------------------------------------------------------------------------

BuiltLearner make_learner(const LearnerOptions& o) {
  const std::size_t k = o.experts;
  if (o.m == 0 || o.m > k) throw ConfigError("need 1 <= m <= K (m = " + std::to_string(o.m) + ", K = " +
                                             std::to_string(k) + ")");
  if (o.horizon == 0) throw ConfigError("horizon must be positive");
  if (o.eta && !(*o.eta > 0.0)) throw ConfigError("eta must be positive");
  BuiltLearner out;
  switch (o.algorithm) {
    case AlgorithmKind::Wsu: {
      if (o.m != 1) throw ConfigError("plain WSU selects a single expert; use m = 1 or meta-wsu/odg/ftpl");
      out.learner = std::make_unique<WsuLearner>(k, o.eta.value_or(wsu_default_step_size(k, o.horizon)));
      break;
    }
    case AlgorithmKind::MetaWsu: {
      require_enumerable(k, o.m);
      double eta = 0.0;
      if (o.eta) {
        eta = *o.eta;
      } else {
        const auto def = meta_default_step_size(k, o.m, o.horizon);
        eta = def.eta;
        if (!def.horizon_ok) {
          out.warnings.push_back("horizon below 4 m ln(Ke/m); meta-WSU step size capped at " + std::to_string(eta));
        }
      }
      out.learner = std::make_unique<MetaWsuLearner>(k, o.m, eta, UtilityKind{o.utility.type, o.m});
      break;
    }
    case AlgorithmKind::Ftpl: {
      const NoiseModel noise(o.noise);
      double eta = 0.0;
      if (o.eta) {
        eta = *o.eta;
      } else {
        const auto bound = noise.condition1_bound();
        if (!bound) {
          out.warnings.push_back(std::string(to_string(o.noise)) +
                                 " noise has no Condition-1 bound; default step size uses B = 1");
        }
        eta = default_step_size(bound.value_or(1.0), static_cast<double>(o.horizon), k, o.m);
      }
      out.learner = std::make_unique<FtplLearner>(k, o.m, eta, noise, o.mc_samples);
      break;
    }
    case AlgorithmKind::Odg: {
      out.learner = std::make_unique<OdgLearner>(k, o.m, o.eta.value_or(wsu_default_step_size(k, o.horizon)),
                                                 UtilityKind{o.utility.type, o.m});
      break;
    }
  }
  return out;
}

}  // namespace stratexp
