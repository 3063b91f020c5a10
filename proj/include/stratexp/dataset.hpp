#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stratexp/simulation.hpp"

namespace stratexp {

struct Game {
  std::string id;
  std::string date;  // ISO yyyy-mm-dd
  int home_won = 0;

  friend bool operator==(const Game&, const Game&) = default;
};

/// Forecasts of binary match outcomes. Games are ordered by date then id;
/// forecasters by id. predictions[f][g] is NaN when forecaster f skipped game g.
struct ForecastDataset {
  std::vector<Game> games;
  std::vector<std::string> forecasters;
  std::vector<std::vector<double>> predictions;

  std::size_t horizon() const { return games.size(); }
  std::optional<double> prediction(std::size_t forecaster, std::size_t game) const;
  bool complete(std::size_t forecaster) const;

  /// Structural equality with missing predictions comparing equal.
  bool same_as(const ForecastDataset& other) const;
};

/// Schema: game_id, date, forecaster_id, prob_home_win, home_won (extra
/// columns ignored). Throws DataError for a missing column, a malformed or
/// out-of-range value (with line number), conflicting game rows, a repeated
/// forecaster/game pair, or an empty file.
ForecastDataset ingest_nfl_csv(std::istream& in, std::string_view source = "<forecasts>");
ForecastDataset ingest_nfl_csv(const std::string& path);

void write_nfl_csv(std::ostream& out, const ForecastDataset& dataset);

/// Forecasters with a prediction for every game; idempotent. Throws DataError
/// when nobody is complete.
ForecastDataset filter_complete(const ForecastDataset& dataset);

/// Scenario over the chosen (complete) forecasters in the given order.
Scenario scenario_from(const ForecastDataset& dataset, std::span<const std::size_t> forecasters);

struct SyntheticDatasetOptions {
  std::size_t games = 284;
  std::size_t complete = 274;
  std::size_t incomplete = 26;
  std::uint64_t seed = 2018;
};

/// Offline stand-in with the real file's schema and shape: each game has a
/// latent home-win probability q ~ U(0.2, 0.8) and outcome ~ Bernoulli(q);
/// forecaster f reports clip(q + s_f Z, 0.01, 0.99) with skill s_f ~
/// U(0.02, 0.35). Incomplete forecasters skip a random 1-50% of games.
ForecastDataset synthetic_nfl_dataset(const SyntheticDatasetOptions& options = {});

/// $STRATEXP_DATA_DIR when set, otherwise "data".
std::string data_directory();
/// `path` itself when it exists or is absolute, otherwise data_directory()/path.
std::string resolve_data_path(const std::string& path);

}  // namespace stratexp
