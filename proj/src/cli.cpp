#include "stratexp/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <stdexcept>

#include "stratexp/config.hpp"
#include "stratexp/csv.hpp"
#include "stratexp/dataset.hpp"
#include "stratexp/errors.hpp"
#include "stratexp/nfl.hpp"
#include "stratexp/noise.hpp"
#include "stratexp/simulation.hpp"
#include "stratexp/subsets.hpp"

namespace stratexp {
namespace {

const std::vector<std::string> kAlgorithms{"wsu", "meta-wsu", "ftpl", "odg"};
const std::vector<std::string> kUtilities{"modular", "submodular"};
const std::vector<std::string> kNoises{"laplace", "hyperbolic", "gaussian", "gumbel"};
const std::vector<std::string> kPolicies{"truthful", "best-response", "uniform-perturbed", "extremizer"};

// String-valued options bound before conversion into ExperimentConfig.
struct ExperimentFlags {
  std::string algo = "ftpl";
  std::string utility = "modular";
  std::string noise = "laplace";
  std::string policy = "truthful";
  std::string beliefs = "iid";
  std::string outcomes = "consensus";
  ExperimentConfig config;
  std::optional<std::size_t> experts;
  std::optional<std::size_t> horizon;
  std::optional<double> eta;

  ExperimentConfig resolve() const {
    ExperimentConfig c = config;
    c.algorithm = parse_algorithm_kind(algo);
    c.utility = parse_utility_type(utility);
    c.noise = parse_noise_kind(noise);
    c.policy = parse_policy_kind(policy);
    c.beliefs = parse_belief_source(beliefs);
    c.outcomes = parse_outcome_source(outcomes);
    c.experts = experts;
    c.horizon = horizon;
    c.eta = eta;
    validate(c);
    return c;
  }
};

void add_experiment_flags(CLI::App* app, ExperimentFlags& f) {
  app->add_option("--algo", f.algo, "Algorithm")->check(CLI::IsMember(kAlgorithms))->capture_default_str();
  app->add_option("--utility", f.utility, "Set utility")->check(CLI::IsMember(kUtilities))->capture_default_str();
  app->add_option("-K,--experts", f.experts, "Number of experts K (default: from the source, 10 for iid)");
  app->add_option("-m,--m", f.config.m, "Set size m")->check(CLI::PositiveNumber)->capture_default_str();
  app->add_option("-T,--horizon", f.horizon, "Rounds T (default: from the source, 1000 for iid)");
  app->add_option("--eta", f.eta, "Step size (default: the algorithm's theory-driven default)");
  app->add_option("--noise", f.noise, "FTPL perturbation law")->check(CLI::IsMember(kNoises))->capture_default_str();
  app->add_option("--policy", f.policy, "Agent reporting policy")
      ->check(CLI::IsMember(kPolicies))
      ->capture_default_str();
  app->add_option("--policy-param", f.config.policy_param,
                  "Half-width for uniform-perturbed, push for extremizer")
      ->capture_default_str();
  app->add_option("--seed", f.config.seed, "Base seed")->capture_default_str();
  app->add_option("--seeds", f.config.seeds, "Number of consecutive seeds to run")->capture_default_str();
  app->add_option("--mc-samples", f.config.mc_samples, "FTPL incentive Monte Carlo samples")
      ->capture_default_str();
  app->add_option("--grid-step", f.config.grid_step, "Report grid step for audits")->capture_default_str();
  app->add_option("--audit-every", f.config.audit_every, "Rounds between best-response/audit evaluations")
      ->capture_default_str();
  app->add_option("--beliefs", f.beliefs, "Belief source")
      ->check(CLI::IsMember({"iid", "script", "dataset"}))
      ->capture_default_str();
  app->add_option("--outcomes", f.outcomes, "Outcome source")
      ->check(CLI::IsMember({"consensus", "script", "dataset"}))
      ->capture_default_str();
  app->add_option("--script", f.config.script, "Adversarial script CSV (columns b0..b{K-1}, outcome)");
  app->add_option("--data", f.config.data, "Forecast CSV (game_id,date,forecaster_id,prob_home_win,home_won)");
}

// Writes to the named file, or to `fallback` for "" and "-".
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : out_(&fallback) {
    if (path.empty() || path == "-") return;
    file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
    if (!*file_) throw DataError("cannot write '" + path + "'");
    out_ = file_.get();
  }
  std::ostream& operator*() { return *out_; }

 private:
  std::unique_ptr<std::ofstream> file_;
  std::ostream* out_;
};

void print_warnings(const RegretTrace& trace, std::ostream& err) {
  for (const auto& w : trace.warnings) err << "warning: " << w << '\n';
}

int run_simulate(const ExperimentFlags& flags, const std::string& out_path, std::ostream& out, std::ostream& err) {
  const auto config = flags.resolve();
  Sink sink(out_path, out);
  double total_regret = 0.0;
  for (std::size_t n = 0; n < config.seeds; ++n) {
    const std::uint64_t seed = config.seed + n;
    const auto trace = run_experiment(to_simulation_config(config, seed), build_scenario(config, seed));
    if (n == 0) print_warnings(trace, err);
    write_trace_csv(*sink, trace, n == 0);
    total_regret += trace.final_alpha_regret();
    if (n == 0) {
      err << "algo=" << trace.algo << " K=" << trace.experts << " m=" << trace.m << " eta=" << format_double(trace.eta)
          << " noise=" << trace.noise << " utility=" << trace.utility << '\n';
    }
  }
  err << "mean final alpha-regret over " << config.seeds << " seed(s): "
      << format_double(total_regret / static_cast<double>(config.seeds)) << '\n';
  return kExitOk;
}

int run_audit(const ExperimentFlags& flags, const std::optional<std::size_t>& expert, const std::string& out_path,
              std::ostream& out, std::ostream& err) {
  const auto config = flags.resolve();
  Sink sink(out_path, out);
  double worst = 0.0;
  std::size_t count = 0;
  for (std::size_t n = 0; n < config.seeds; ++n) {
    const std::uint64_t seed = config.seed + n;
    auto sim = to_simulation_config(config, seed);
    sim.audit = AuditOptions{config.audit_every, config.grid_step, expert};
    const auto trace = run_experiment(sim, build_scenario(config, seed));
    if (n == 0) print_warnings(trace, err);
    write_audit_csv(*sink, trace.audits, n == 0);
    for (const auto& a : trace.audits) worst = std::max(worst, a.deviation);
    count += trace.audits.size();
    if (n == 0 && config.algorithm == AlgorithmKind::Ftpl) {
      const double b = NoiseModel(config.noise).condition1_bound().value_or(1.0);
      if (trace.eta > 2.0 * b) {
        err << "deviation bound 2B/(eta-2B) with B=" << format_double(b) << ": "
            << format_double(ic_deviation_bound(b, trace.eta)) << '\n';
      }
    }
  }
  err << "audits=" << count << " max deviation=" << format_double(worst) << '\n';
  return kExitOk;
}

int run_noise_check(const std::string& model, double lo, double hi, double step, const std::string& out_path,
                    std::ostream& out, std::ostream& err) {
  if (!(step > 0.0) || !(hi > lo)) throw ConfigError("noise-check needs lo < hi and step > 0");
  const NoiseModel noise(parse_noise_kind(model));
  const auto grid = make_grid(lo, hi, step);
  Sink sink(out_path, out);
  write_csv_row(*sink, {"z", "nu", "nu_prime", "hazard"});
  double max_hazard = 0.0;
  std::size_t overflow = 0;
  for (double z : grid) {
    double h = 0.0;
    try {
      h = noise.hazard_rate(z);
      max_hazard = std::max(max_hazard, h);
    } catch (const std::overflow_error&) {
      h = INFINITY;
      ++overflow;
    }
    write_csv_row(*sink, {format_double(z), format_double(noise.nu(z)), format_double(noise.nu_prime(z)),
                          format_double(h)});
  }
  const auto c1 = check_condition1(noise, grid);
  const auto bound = noise.condition1_bound();
  err << "model=" << model << " B=" << (bound ? format_double(*bound) : std::string("none"))
      << " max|nu'|=" << format_double(c1.max_abs_nu_prime) << " max_hazard=" << format_double(max_hazard);
  if (bound) err << " hazard<=B:" << (verify_hazard_bound(noise, *bound, grid) ? "yes" : "no");
  if (overflow) err << " survival_underflow_points=" << overflow;
  err << '\n';
  return kExitOk;
}

int run_opt(const ExperimentFlags& flags, std::ostream& out) {
  const auto config = flags.resolve();
  const auto scenario = build_scenario(config, config.seed);
  const auto losses = scenario.true_losses();
  const UtilityKind kind{config.utility, config.m};
  const auto best = brute_force_opt(losses, kind, config.m);
  std::string set;
  for (std::size_t i : best.set) set += (set.empty() ? "" : ";") + std::to_string(i);
  write_csv_row(out, {"set", "total", "alpha", "K", "m", "T"});
  write_csv_row(out, {set, format_double(best.total), format_double(alpha_for(kind, losses)),
                      std::to_string(scenario.experts), std::to_string(config.m), std::to_string(scenario.horizon)});
  return kExitOk;
}

// Fills options not given on the command line from a key=value file.
void apply_config_file(CLI::App* app, const std::string& path) {
  if (path.empty() || !app->parsed()) return;
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  const auto items = CLI::ConfigINI().from_config(in);
  for (const auto& item : items) {
    if (item.name == "++" || item.name == "--") continue;
    if (!item.parents.empty()) throw ConfigError(path + ": sections are not supported ('" + item.fullname() + "')");
    CLI::Option* opt = app->get_option_no_throw("--" + item.name);
    if (opt == nullptr && item.name.size() == 1) opt = app->get_option_no_throw("-" + item.name);
    if (opt == nullptr || item.name == "config") throw ConfigError(path + ": unknown key '" + item.name + "'");
    if (opt->count() > 0) continue;
    try {
      if (opt->get_expected_min() == 0) {
        opt->add_result(item.inputs.empty() ? std::string("true") : item.inputs.front());
      } else {
        opt->add_result(item.inputs);
      }
      opt->run_callback();
    } catch (const CLI::Error& e) {
      throw ConfigError(path + ": " + item.name + ": " + e.what());
    }
  }
}

struct NflFlags {
  NflConfig config;
  std::string data;
  bool synthetic = false;
  std::uint64_t synthetic_seed = 2018;
  std::string noise = "laplace";
  std::string out_dir = "nfl_out";
};

int run_nfl(const NflFlags& f, std::ostream& err) {
  ForecastDataset dataset;
  std::string source;
  if (!f.data.empty()) {
    source = resolve_data_path(f.data);
    dataset = ingest_nfl_csv(source);
  } else if (f.synthetic) {
    source = "synthetic";
    SyntheticDatasetOptions o;
    o.seed = f.synthetic_seed;
    dataset = synthetic_nfl_dataset(o);
  } else {
    throw ConfigError("nfl needs --data FILE or --synthetic");
  }
  const std::size_t total = dataset.forecasters.size();
  dataset = filter_complete(dataset);
  err << "dataset " << source << ": " << dataset.horizon() << " games, " << dataset.forecasters.size() << " of "
      << total << " forecasters complete\n";
  NflConfig config = f.config;
  config.noise = parse_noise_kind(f.noise);
  const auto result = run_nfl_experiment(config, dataset);

  namespace fs = std::filesystem;
  fs::create_directories(f.out_dir);
  const std::string stem = "K" + std::to_string(config.experts);
  for (const AlgorithmCurves* c : {&result.ftpl, &result.odg}) {
    const auto path = (fs::path(f.out_dir) / (c->algo + "_" + stem + "_band.csv")).string();
    std::ofstream band(path, std::ios::binary);
    if (!band) throw DataError("cannot write '" + path + "'");
    write_band_csv(band, *c);
  }
  {
    const auto path = (fs::path(f.out_dir) / ("groups_" + stem + ".csv")).string();
    std::ofstream groups(path, std::ios::binary);
    if (!groups) throw DataError("cannot write '" + path + "'");
    write_csv_row(groups, {"algo", "group", "t", "mean"});
    for (const AlgorithmCurves* c : {&result.ftpl, &result.odg}) {
      for (std::size_t g = 0; g < c->group_means.size(); ++g) {
        for (std::size_t t = 0; t < c->group_means[g].size(); ++t) {
          write_csv_row(groups, {c->algo, std::to_string(g), std::to_string(t + 1), format_double(c->group_means[g][t])});
        }
      }
    }
  }
  {
    const auto path = (fs::path(f.out_dir) / ("run_" + stem + ".meta")).string();
    std::ofstream meta(path, std::ios::binary);
    if (!meta) throw DataError("cannot write '" + path + "'");
    meta << "data=" << source << '\n';
    write_nfl_meta(meta, config, result);
  }
  for (const AlgorithmCurves* c : {&result.ftpl, &result.odg}) {
    const auto& band = c->band;
    err << c->algo << ": eta=" << format_double(c->eta) << " mean average regret t=1: " << format_double(band.front().mean)
        << " t=" << band.back().t << ": " << format_double(band.back().mean) << '\n';
  }
  err << "outputs written to " << f.out_dir << '\n';
  return kExitOk;
}

}  // namespace

int cli_dispatch(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Incentive-compatible online learning for the strategic m-experts problem", "stratexp"};
  app.require_subcommand(1);

  ExperimentFlags sim_flags;
  std::string sim_out;
  auto* sim = app.add_subcommand("simulate", "Run synthetic or scripted experiments; writes a trace CSV");
  add_experiment_flags(sim, sim_flags);
  sim->add_option("-o,--out", sim_out, "Trace CSV path (default: stdout)");
  std::string sim_config;
  sim->add_option("--config", sim_config, "key=value file with any of the options above; flags take precedence");

  ExperimentFlags audit_flags;
  std::string audit_out;
  std::optional<std::size_t> audit_expert;
  auto* audit = app.add_subcommand("audit-ic", "Grid best-response audits along a truthful run; writes an audit CSV");
  add_experiment_flags(audit, audit_flags);
  audit->add_option("--expert", audit_expert, "Audit only this expert (0-based; default: all)");
  audit->add_option("-o,--out", audit_out, "Audit CSV path (default: stdout)");
  std::string audit_config;
  audit->add_option("--config", audit_config, "key=value file with any of the options above; flags take precedence");

  NflFlags nfl_flags;
  auto* nfl = app.add_subcommand("nfl", "Forecast-dataset pipeline: regret bands for FTPL and ODG");
  nfl->add_option("--data", nfl_flags.data, "Forecast CSV; relative paths also resolve under $STRATEXP_DATA_DIR");
  nfl->add_flag("--synthetic", nfl_flags.synthetic, "Use the built-in synthetic dataset (284 games, 274 complete)");
  nfl->add_option("--synthetic-seed", nfl_flags.synthetic_seed, "Seed of the synthetic dataset")->capture_default_str();
  nfl->add_option("-K,--experts", nfl_flags.config.experts, "Forecasters per group")->capture_default_str();
  nfl->add_option("-m,--m", nfl_flags.config.m, "Set size")->capture_default_str();
  nfl->add_option("--groups", nfl_flags.config.groups, "Groups")->capture_default_str();
  nfl->add_option("--runs", nfl_flags.config.runs, "Runs per group and algorithm")->capture_default_str();
  nfl->add_option("--seed", nfl_flags.config.seed, "Seed")->capture_default_str();
  nfl->add_option("--eta", nfl_flags.config.ftpl_eta, "FTPL step size (default sqrt(BT/ln(K/m)))");
  nfl->add_option("--noise", nfl_flags.noise, "FTPL perturbation law")->check(CLI::IsMember(kNoises))->capture_default_str();
  nfl->add_option("--threads", nfl_flags.config.threads, "Worker threads (0: all cores)")->capture_default_str();
  nfl->add_option("--out-dir", nfl_flags.out_dir, "Output directory")->capture_default_str();
  std::string nfl_config;
  nfl->add_option("--config", nfl_config, "key=value file with any of the options above; flags take precedence");

  std::string noise_model = "laplace";
  double lo = -10.0;
  double hi = 10.0;
  double step = 0.01;
  std::string noise_out;
  auto* noise = app.add_subcommand("noise-check", "Tabulate nu, nu' and the hazard rate; summary on stderr");
  noise->add_option("--model", noise_model, "Noise law")->check(CLI::IsMember(kNoises))->capture_default_str();
  noise->add_option("--lo", lo, "Grid start")->capture_default_str();
  noise->add_option("--hi", hi, "Grid end")->capture_default_str();
  noise->add_option("--step", step, "Grid step")->capture_default_str();
  noise->add_option("-o,--out", noise_out, "CSV path (default: stdout)");

  ExperimentFlags opt_flags;
  auto* opt = app.add_subcommand("opt", "Best fixed m-set in hindsight by enumeration");
  add_experiment_flags(opt, opt_flags);
  std::string opt_config;
  opt->add_option("--config", opt_config, "key=value file with any of the options above; flags take precedence");

  try {
    try {
      app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
      return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
      return app.exit(e, out, err);
    } catch (const CLI::ConfigError& e) {
      app.exit(e, out, err);
      return kExitConfig;
    } catch (const CLI::ParseError& e) {
      app.exit(e, out, err);
      return kExitUsage;
    }
    apply_config_file(sim, sim_config);
    apply_config_file(audit, audit_config);
    apply_config_file(nfl, nfl_config);
    apply_config_file(opt, opt_config);
    if (*sim) return run_simulate(sim_flags, sim_out, out, err);
    if (*audit) return run_audit(audit_flags, audit_expert, audit_out, out, err);
    if (*nfl) return run_nfl(nfl_flags, err);
    if (*noise) return run_noise_check(noise_model, lo, hi, step, noise_out, out, err);
    if (*opt) return run_opt(opt_flags, out);
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const CombinatorialBlowup& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const HorizonError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

int cli_dispatch(int argc, char** argv) { return cli_dispatch(argc, argv, std::cout, std::cerr); }

}  // namespace stratexp
