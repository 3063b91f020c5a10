#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "stratexp/config.hpp"
#include "stratexp/csv.hpp"
#include "stratexp/dataset.hpp"
#include "stratexp/errors.hpp"
#include "stratexp/nfl.hpp"

using namespace stratexp;

namespace {

const std::string kFixture = std::string(STRATEXP_TEST_DATA) + "/nfl_fixture.csv";

ForecastDataset parse(const std::string& text) {
  std::istringstream in(text);
  return ingest_nfl_csv(in, "inline");
}

std::string error_of(const std::string& text) {
  try {
    parse(text);
  } catch (const DataError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("csv reader") {
  std::istringstream in("a,b,c\r\n1,\"x,y\",\"say \"\"hi\"\"\"\n\n2,\"multi\nline\",3\n");
  const auto table = read_csv(in);
  CHECK(table.header == CsvRow{"a", "b", "c"});
  REQUIRE(table.rows.size() == 2);
  CHECK(table.rows[0][1] == "x,y");
  CHECK(table.rows[0][2] == "say \"hi\"");
  CHECK(table.rows[1][1] == "multi\nline");
  CHECK(table.lines == std::vector<std::size_t>{2, 4});
  CHECK(table.column("c") == 2);
  CHECK_THROWS_AS(table.column("d"), DataError);

  std::istringstream ragged("a,b\n1,2\n3\n");
  CHECK_THROWS_WITH_AS(read_csv(ragged, "r.csv"), doctest::Contains("r.csv:3"), DataError);
  std::istringstream none("");
  CHECK_THROWS_AS(read_csv(none), DataError);

  std::ostringstream out;
  write_csv_row(out, {"plain", "with,comma", "with\"quote"});
  CHECK(out.str() == "plain,\"with,comma\",\"with\"\"quote\"\n");

  for (double x : {0.1, 1.0 / 3.0, 1e-300, -2.5e17}) CHECK(parse_double(format_double(x), "s", 1, "x") == x);
  CHECK_THROWS_AS(parse_double("0.5x", "s", 1, "x"), DataError);
  CHECK_THROWS_AS(parse_double("", "s", 1, "x"), DataError);
  CHECK_THROWS_AS(parse_integer("1.5", "s", 1, "x"), DataError);
  CHECK(parse_integer("-7", "s", 1, "x") == -7);
}

TEST_CASE("ingest the fixture") {
  const auto ds = ingest_nfl_csv(kFixture);
  REQUIRE(ds.horizon() == 3);
  CHECK(ds.games[0] == Game{"g1", "2018-09-06", 1});
  CHECK(ds.games[1] == Game{"g2", "2018-09-09", 0});
  CHECK(ds.games[2] == Game{"g3", "2018-09-09", 1});
  CHECK(ds.forecasters == std::vector<std::string>{"alice", "bob"});
  CHECK(ds.prediction(0, 1) == 0.35);
  CHECK_FALSE(ds.prediction(1, 1).has_value());
  CHECK(ds.complete(0));
  CHECK_FALSE(ds.complete(1));

  const auto filtered = filter_complete(ds);
  CHECK(filtered.forecasters == std::vector<std::string>{"alice"});
  CHECK(filter_complete(filtered).same_as(filtered));

  const std::vector<std::size_t> pick{0};
  const auto scenario = scenario_from(filtered, pick);
  CHECK(scenario.horizon == 3);
  CHECK(scenario.beliefs == std::vector<double>{0.6, 0.35, 0.5});
  CHECK(scenario.outcomes == std::vector<int>{1, 0, 1});
  const std::vector<std::size_t> incomplete{1};
  CHECK_THROWS_AS(scenario_from(ds, incomplete), DataError);
}

TEST_CASE("ingestion errors") {
  const std::string header = "game_id,date,forecaster_id,prob_home_win,home_won\n";
  CHECK(error_of("game_id,date,forecaster_id,home_won\ng1,2018-01-01,a,1\n").find("prob_home_win") !=
        std::string::npos);
  CHECK(error_of(header + "g1,2018-01-01,a,1.2,1\n").find("inline:2") != std::string::npos);
  CHECK(error_of(header + "g1,2018-01-01,a,0.5,1\ng2,2018-01-02,a,abc,1\n").find("inline:3") != std::string::npos);
  CHECK(error_of(header + "g1,2018-01-01,a,0.5,2\n").find("home_won") != std::string::npos);
  CHECK(error_of(header + "g1,2018-01-01,a,0.5,1\ng1,2018-01-01,b,0.5,0\n").find("disagrees") != std::string::npos);
  CHECK(error_of(header + "g1,2018-01-01,a,0.5,1\ng1,2018-01-01,a,0.6,1\n").find("twice") != std::string::npos);
  CHECK_FALSE(error_of(header).empty());
  CHECK_FALSE(error_of("").empty());
  CHECK_THROWS_AS(ingest_nfl_csv(std::string("/nonexistent/forecasts.csv")), DataError);
  CHECK_THROWS_AS(filter_complete(parse(header + "g1,d,a,0.5,1\ng2,d,b,0.5,1\n")), DataError);
}

TEST_CASE("write and re-ingest") {
  const auto ds = ingest_nfl_csv(kFixture);
  std::stringstream buffer;
  write_nfl_csv(buffer, ds);
  CHECK(ingest_nfl_csv(buffer).same_as(ds));

  const auto synthetic = synthetic_nfl_dataset({20, 6, 3, 5});
  std::stringstream again;
  write_nfl_csv(again, synthetic);
  CHECK(ingest_nfl_csv(again).same_as(synthetic));
}

TEST_CASE("synthetic dataset shape") {
  const auto ds = synthetic_nfl_dataset();
  CHECK(ds.horizon() == 284);
  CHECK(ds.forecasters.size() == 300);
  const auto filtered = filter_complete(ds);
  CHECK(filtered.forecasters.size() == 274);
  CHECK(filtered.horizon() == 284);
  for (const auto& row : filtered.predictions) {
    for (double p : row) {
      CHECK(p >= 0.01);
      CHECK(p <= 0.99);
    }
  }
  std::set<std::string> dates;
  for (const auto& g : ds.games) dates.insert(g.date);
  CHECK(dates.size() > 1);
  CHECK(ds.games.front().date == "2018-09-06");
  CHECK(synthetic_nfl_dataset().same_as(ds));
  CHECK_FALSE(synthetic_nfl_dataset({284, 274, 26, 1}).same_as(ds));
}

TEST_CASE("data directory") {
  ::setenv("STRATEXP_DATA_DIR", "/tmp/stratexp-data", 1);
  CHECK(data_directory() == "/tmp/stratexp-data");
  CHECK(resolve_data_path("nfl.csv") == "/tmp/stratexp-data/nfl.csv");
  CHECK(resolve_data_path("/abs/nfl.csv") == "/abs/nfl.csv");
  CHECK(resolve_data_path(kFixture) == kFixture);
  ::unsetenv("STRATEXP_DATA_DIR");
  CHECK(data_directory() == "data");
}

TEST_CASE("percentile") {
  CHECK(percentile({3.0, 1.0, 2.0}, 0.5) == 2.0);
  CHECK(percentile({1.0, 2.0, 3.0, 4.0, 5.0}, 0.2) == doctest::Approx(1.8));
  CHECK(percentile({1.0, 2.0, 3.0, 4.0, 5.0}, 0.8) == doctest::Approx(4.2));
  CHECK(percentile({7.0}, 0.8) == 7.0);
  CHECK(percentile({1.0, 9.0}, 0.0) == 1.0);
  CHECK(percentile({1.0, 9.0}, 1.0) == 9.0);
  CHECK_THROWS_AS(percentile({}, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(percentile({1.0}, 1.5), std::domain_error);
}

TEST_CASE("forecasting pipeline on a small synthetic dataset") {
  const auto ds = filter_complete(synthetic_nfl_dataset({60, 30, 4, 11}));
  NflConfig cfg;
  cfg.experts = 5;
  cfg.m = 2;
  cfg.groups = 3;
  cfg.runs = 4;
  cfg.seed = 3;
  cfg.threads = 2;
  const auto result = run_nfl_experiment(cfg, ds);
  CHECK(result.horizon == 60);
  CHECK(result.disjoint_groups);
  std::set<std::size_t> seen;
  for (const auto& g : result.groups) {
    CHECK(g.size() == 5);
    for (std::size_t f : g) CHECK(seen.insert(f).second);
  }
  for (const auto* curves : {&result.ftpl, &result.odg}) {
    CHECK(curves->runs.size() == 12);
    CHECK(curves->group_means.size() == 3);
    REQUIRE(curves->band.size() == 60);
    for (const auto& b : curves->band) {
      CHECK(b.p20 <= b.p80);
    }
    std::ostringstream out;
    write_band_csv(out, *curves);
    std::istringstream in(out.str());
    const auto table = read_csv(in);
    CHECK(table.header == CsvRow{"t", "mean", "p20", "p80"});
    CHECK(table.rows.size() == 60);
  }
  CHECK(result.ftpl.report_perturbation == doctest::Approx(2.0 / (result.ftpl.eta - 2.0)));

  // Same seed, any thread count: identical curves.
  cfg.threads = 1;
  const auto serial = run_nfl_experiment(cfg, ds);
  CHECK(serial.ftpl.runs == result.ftpl.runs);
  CHECK(serial.odg.runs == result.odg.runs);

  std::ostringstream meta;
  write_nfl_meta(meta, cfg, result);
  CHECK(meta.str().find("regret_definition=") != std::string::npos);
  CHECK(meta.str().find("disjoint_groups=true") != std::string::npos);

  // Overlapping groups when the pool is too small.
  cfg.experts = 20;
  cfg.m = 5;
  const auto overlap = run_nfl_experiment(cfg, ds);
  CHECK_FALSE(overlap.disjoint_groups);
  for (const auto& g : overlap.groups) CHECK(std::set<std::size_t>(g.begin(), g.end()).size() == 20);

  cfg.experts = 31;
  CHECK_THROWS_AS(run_nfl_experiment(cfg, ds), ConfigError);
}

TEST_CASE("experiment configuration") {
  ExperimentConfig cfg;
  cfg.algorithm = AlgorithmKind::Odg;
  cfg.utility = UtilityType::Submodular;
  cfg.m = 2;
  cfg.experts = 4;
  cfg.horizon = 30;
  CHECK_NOTHROW(validate(cfg));
  const auto scenario = build_scenario(cfg, 7);
  CHECK(scenario.experts == 4);
  CHECK(scenario.horizon == 30);
  CHECK(build_scenario(cfg, 7).beliefs == scenario.beliefs);
  CHECK(build_scenario(cfg, 8).beliefs != scenario.beliefs);

  auto bad = cfg;
  bad.m = 5;
  CHECK_THROWS_AS(validate(bad), ConfigError);
  bad = cfg;
  bad.beliefs = BeliefSource::Script;
  CHECK_THROWS_AS(validate(bad), ConfigError);
  bad = cfg;
  bad.grid_step = 0.0;
  CHECK_THROWS_AS(validate(bad), ConfigError);

  ExperimentConfig data;
  data.beliefs = BeliefSource::Dataset;
  data.outcomes = OutcomeSource::Dataset;
  data.data = kFixture;
  data.experts = 1;
  const auto from_data = build_scenario(data, 0);
  CHECK(from_data.outcomes == std::vector<int>{1, 0, 1});
  data.experts = 2;
  CHECK_THROWS(build_scenario(data, 0));

  std::ostringstream out;
  write_config(out, cfg);
  CHECK(out.str().find("algo=odg") != std::string::npos);
  CHECK(parse_belief_source("script") == BeliefSource::Script);
  CHECK(parse_outcome_source("consensus") == OutcomeSource::BernoulliFromConsensus);
  CHECK_THROWS(parse_belief_source("oracle"));
}
