#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stratexp/ftpl.hpp"
#include "stratexp/noise.hpp"
#include "stratexp/odg.hpp"
#include "stratexp/rng.hpp"
#include "stratexp/utility.hpp"
#include "stratexp/wsu.hpp"

namespace stratexp {

enum class AlgorithmKind { Wsu, MetaWsu, Ftpl, Odg };

std::string_view to_string(AlgorithmKind kind);
AlgorithmKind parse_algorithm_kind(std::string_view name);

/// An expert's next-round incentive as a function of its report p and the
/// outcome r, all else frozen.
using IncentiveProbe = std::function<double(double p, int r)>;

/// Common surface of the four set-selection algorithms as driven by the
/// simulator: select from the report-derived state, then observe report losses.
class Learner {
 public:
  virtual ~Learner() = default;

  virtual AlgorithmKind kind() const = 0;
  virtual std::size_t experts() const = 0;
  virtual std::size_t m() const = 0;
  virtual double eta() const = 0;

  virtual ExpertSet select(Rng& rng) = 0;
  virtual void update(std::span<const double> report_losses) = 0;

  /// Probe for `expert` given every expert's report this round (entry
  /// `expert` is ignored). Must be called after select() and before update().
  virtual IncentiveProbe incentive_probe(std::span<const double> reports, std::size_t expert, Rng& rng) const = 0;

  /// Realized regret of each internal no-regret instance (ODG only).
  virtual std::vector<double> instance_regrets() const { return {}; }

  virtual std::unique_ptr<Learner> clone() const = 0;
};

/// Loss row for a report vector under outcome r.
std::vector<double> report_losses(std::span<const double> reports, int outcome);

/// Plain WSU over K experts (m = 1). Incentive: the expert's next weight.
class WsuLearner final : public Learner {
 public:
  WsuLearner(std::size_t experts, double eta);

  AlgorithmKind kind() const override { return AlgorithmKind::Wsu; }
  std::size_t experts() const override { return weights_.size(); }
  std::size_t m() const override { return 1; }
  double eta() const override { return weights_.eta(); }
  const WeightVector& weights() const { return weights_; }

  ExpertSet select(Rng& rng) override;
  void update(std::span<const double> report_losses) override;
  IncentiveProbe incentive_probe(std::span<const double> reports, std::size_t expert, Rng& rng) const override;
  std::unique_ptr<Learner> clone() const override { return std::make_unique<WsuLearner>(*this); }

 private:
  WeightVector weights_;
};

/// WSU over all size-m subsets. Incentive: next-round inclusion probability.
class MetaWsuLearner final : public Learner {
 public:
  MetaWsuLearner(std::size_t experts, std::size_t m, double eta, UtilityKind utility);

  AlgorithmKind kind() const override { return AlgorithmKind::MetaWsu; }
  std::size_t experts() const override { return algo_.index().experts(); }
  std::size_t m() const override { return algo_.index().m(); }
  double eta() const override { return algo_.weights().eta(); }
  const MetaWsu& algorithm() const { return algo_; }

  ExpertSet select(Rng& rng) override;
  void update(std::span<const double> report_losses) override;
  IncentiveProbe incentive_probe(std::span<const double> reports, std::size_t expert, Rng& rng) const override;
  std::unique_ptr<Learner> clone() const override { return std::make_unique<MetaWsuLearner>(*this); }

 private:
  MetaWsu algo_;
};

/// FTPL. Incentive: next-round selection probability, estimated with
/// `mc_samples` opponent perturbation draws.
class FtplLearner final : public Learner {
 public:
  FtplLearner(std::size_t experts, std::size_t m, double eta, NoiseModel noise, std::size_t mc_samples);

  AlgorithmKind kind() const override { return AlgorithmKind::Ftpl; }
  std::size_t experts() const override { return state_.experts(); }
  std::size_t m() const override { return state_.m(); }
  double eta() const override { return state_.eta(); }
  const FtplState& state() const { return state_; }

  ExpertSet select(Rng& rng) override;
  void update(std::span<const double> report_losses) override;
  IncentiveProbe incentive_probe(std::span<const double> reports, std::size_t expert, Rng& rng) const override;
  std::unique_ptr<Learner> clone() const override { return std::make_unique<FtplLearner>(*this); }

 private:
  FtplState state_;
  std::size_t mc_samples_;
};

/// Online distorted greedy. The default incentive is the sum over positions
/// of the expert's next instance weight; instance_probe() exposes one
/// position and inclusion_probe() the exact aggregate inclusion probability.
class OdgLearner final : public Learner {
 public:
  OdgLearner(std::size_t experts, std::size_t m, double eta, UtilityKind utility);

  AlgorithmKind kind() const override { return AlgorithmKind::Odg; }
  std::size_t experts() const override { return state_.experts(); }
  std::size_t m() const override { return state_.m(); }
  double eta() const override { return eta_; }
  const OdgState& state() const { return state_; }
  const std::vector<std::size_t>& last_picks() const { return picks_; }

  ExpertSet select(Rng& rng) override;
  void update(std::span<const double> report_losses) override;
  IncentiveProbe incentive_probe(std::span<const double> reports, std::size_t expert, Rng& rng) const override;
  std::vector<double> instance_regrets() const override;
  std::unique_ptr<Learner> clone() const override { return std::make_unique<OdgLearner>(*this); }

  /// Next weight of `expert` in instance `position` (1-based).
  IncentiveProbe instance_probe(std::span<const double> reports, std::size_t expert, std::size_t position) const;
  /// Next-round probability that `expert` is in the sampled set; exact
  /// enumeration of ordered draws, refused (std::length_error) past 1e5 paths.
  IncentiveProbe inclusion_probe(std::span<const double> reports, std::size_t expert) const;

 private:
  OdgState state_;
  double eta_;
  std::vector<std::size_t> picks_;
};

/// Probability that sequential conditional draws from `instances` (position
/// order) include `expert`.
double sequential_inclusion_probability(std::span<const std::vector<double>> instances, std::size_t expert);

struct LearnerOptions {
  AlgorithmKind algorithm = AlgorithmKind::Ftpl;
  UtilityKind utility = UtilityKind::modular(1);
  std::size_t experts = 0;
  std::size_t m = 1;
  std::size_t horizon = 0;
  std::optional<double> eta;
  NoiseKind noise = NoiseKind::Laplace;
  std::size_t mc_samples = 100000;
};

struct BuiltLearner {
  std::unique_ptr<Learner> learner;
  std::vector<std::string> warnings;
};

/// Constructs a learner with the default step size of its family when no eta
/// is given. FTPL noise without a Condition-1 bound uses the unit scale.
BuiltLearner make_learner(const LearnerOptions& options);

}  // namespace stratexp
