#include "stratexp/dataset.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <random>

#include "stratexp/csv.hpp"
#include "stratexp/errors.hpp"

namespace stratexp {

std::optional<double> ForecastDataset::prediction(std::size_t forecaster, std::size_t game) const {
  const double p = predictions.at(forecaster).at(game);
  if (std::isnan(p)) return std::nullopt;
  return p;
}

bool ForecastDataset::complete(std::size_t forecaster) const {
  const auto& row = predictions.at(forecaster);
  return std::none_of(row.begin(), row.end(), [](double p) { return std::isnan(p); });
}

bool ForecastDataset::same_as(const ForecastDataset& other) const {
  if (games != other.games || forecasters != other.forecasters) return false;
  if (predictions.size() != other.predictions.size()) return false;
  for (std::size_t f = 0; f < predictions.size(); ++f) {
    const auto& a = predictions[f];
    const auto& b = other.predictions[f];
    if (a.size() != b.size()) return false;
    for (std::size_t g = 0; g < a.size(); ++g) {
      if (std::isnan(a[g]) != std::isnan(b[g])) return false;
      if (!std::isnan(a[g]) && a[g] != b[g]) return false;
    }
  }
  return true;
}

ForecastDataset ingest_nfl_csv(std::istream& in, std::string_view source) {
  const auto table = read_csv(in, source);
  const std::size_t c_game = table.column("game_id");
  const std::size_t c_date = table.column("date");
  const std::size_t c_fc = table.column("forecaster_id");
  const std::size_t c_prob = table.column("prob_home_win");
  const std::size_t c_won = table.column("home_won");
  if (table.rows.empty()) throw DataError(std::string(source) + ": no forecast rows");

  auto fail = [&](std::size_t line, const std::string& what) {
    throw DataError(std::string(source) + ":" + std::to_string(line) + ": " + what);
  };

  struct GameInfo {
    std::string date;
    int won;
    std::size_t line;
  };
  std::map<std::string, GameInfo> games;
  std::map<std::string, std::map<std::string, double>> by_forecaster;
  for (std::size_t n = 0; n < table.rows.size(); ++n) {
    const auto& row = table.rows[n];
    const std::size_t line = table.lines[n];
    const std::string& game = row[c_game];
    const std::string& fc = row[c_fc];
    if (game.empty()) fail(line, "empty game_id");
    if (fc.empty()) fail(line, "empty forecaster_id");
    const double p = parse_double(row[c_prob], source, line, "prob_home_win");
    if (!(p >= 0.0 && p <= 1.0)) fail(line, "prob_home_win " + row[c_prob] + " outside [0, 1]");
    const auto won = parse_integer(row[c_won], source, line, "home_won");
    if (won != 0 && won != 1) fail(line, "home_won must be 0 or 1");
    const auto [it, inserted] = games.try_emplace(game, GameInfo{row[c_date], static_cast<int>(won), line});
    if (!inserted) {
      if (it->second.date != row[c_date] || it->second.won != won) {
        fail(line, "game '" + game + "' disagrees with line " + std::to_string(it->second.line));
      }
    }
    if (!by_forecaster[fc].emplace(game, p).second) {
      fail(line, "forecaster '" + fc + "' predicts game '" + game + "' twice");
    }
  }

  ForecastDataset ds;
  for (const auto& [id, info] : games) ds.games.push_back({id, info.date, info.won});
  std::stable_sort(ds.games.begin(), ds.games.end(),
                   [](const Game& a, const Game& b) { return std::tie(a.date, a.id) < std::tie(b.date, b.id); });
  std::map<std::string, std::size_t> game_index;
  for (std::size_t g = 0; g < ds.games.size(); ++g) game_index[ds.games[g].id] = g;
  for (const auto& [fc, preds] : by_forecaster) {
    ds.forecasters.push_back(fc);
    std::vector<double> row(ds.games.size(), std::numeric_limits<double>::quiet_NaN());
    for (const auto& [game, p] : preds) row[game_index.at(game)] = p;
    ds.predictions.push_back(std::move(row));
  }
  return ds;
}

ForecastDataset ingest_nfl_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  return ingest_nfl_csv(in, path);
}

void write_nfl_csv(std::ostream& out, const ForecastDataset& ds) {
  write_csv_row(out, {"game_id", "date", "forecaster_id", "prob_home_win", "home_won"});
  for (std::size_t g = 0; g < ds.games.size(); ++g) {
    const auto& game = ds.games[g];
    for (std::size_t f = 0; f < ds.forecasters.size(); ++f) {
      const auto p = ds.prediction(f, g);
      if (!p) continue;
      write_csv_row(out, {game.id, game.date, ds.forecasters[f], format_double(*p), std::to_string(game.home_won)});
    }
  }
}

ForecastDataset filter_complete(const ForecastDataset& ds) {
  ForecastDataset out;
  out.games = ds.games;
  for (std::size_t f = 0; f < ds.forecasters.size(); ++f) {
    if (!ds.complete(f)) continue;
    out.forecasters.push_back(ds.forecasters[f]);
    out.predictions.push_back(ds.predictions[f]);
  }
  if (out.forecasters.empty()) throw DataError("no forecaster predicted every game");
  return out;
}

Scenario scenario_from(const ForecastDataset& ds, std::span<const std::size_t> forecasters) {
  Scenario s;
  s.horizon = ds.horizon();
  s.experts = forecasters.size();
  s.beliefs.resize(s.horizon * s.experts);
  for (std::size_t k = 0; k < forecasters.size(); ++k) {
    const std::size_t f = forecasters[k];
    if (f >= ds.forecasters.size()) throw std::out_of_range("scenario_from: forecaster index out of range");
    if (!ds.complete(f)) throw DataError("forecaster '" + ds.forecasters[f] + "' has missing predictions");
    for (std::size_t t = 0; t < s.horizon; ++t) s.beliefs[t * s.experts + k] = ds.predictions[f][t];
  }
  s.outcomes.resize(s.horizon);
  for (std::size_t t = 0; t < s.horizon; ++t) s.outcomes[t] = ds.games[t].home_won;
  return s;
}

ForecastDataset synthetic_nfl_dataset(const SyntheticDatasetOptions& o) {
  Rng rng = make_rng(o.seed, 0);
  std::uniform_real_distribution<double> latent(0.2, 0.8);
  std::uniform_real_distribution<double> skill(0.02, 0.35);
  std::uniform_real_distribution<double> skip(0.01, 0.5);
  std::normal_distribution<double> z;

  ForecastDataset ds;
  std::vector<double> q(o.games);
  using namespace std::chrono;
  const sys_days start{2018y / September / 6};
  for (std::size_t g = 0; g < o.games; ++g) {
    q[g] = latent(rng);
    const year_month_day d{start + days{static_cast<int>(g / 16) * 7 + static_cast<int>(g % 16 * 3 / 16)}};
    char date[16];
    std::snprintf(date, sizeof date, "%04d-%02u-%02u", static_cast<int>(d.year()), static_cast<unsigned>(d.month()),
                  static_cast<unsigned>(d.day()));
    char id[32];
    std::snprintf(id, sizeof id, "g%04zu", g + 1);
    ds.games.push_back({id, date, uniform01(rng) < q[g] ? 1 : 0});
  }
  const std::size_t total = o.complete + o.incomplete;
  std::vector<std::size_t> incomplete_slots(total);
  std::iota(incomplete_slots.begin(), incomplete_slots.end(), 0);
  std::shuffle(incomplete_slots.begin(), incomplete_slots.end(), rng);
  std::vector<char> is_incomplete(total, 0);
  for (std::size_t n = 0; n < o.incomplete; ++n) is_incomplete[incomplete_slots[n]] = 1;

  for (std::size_t f = 0; f < total; ++f) {
    char id[32];
    std::snprintf(id, sizeof id, "f%05zu", f + 1);
    ds.forecasters.push_back(id);
    const double s = skill(rng);
    const double miss = is_incomplete[f] ? skip(rng) : 0.0;
    std::vector<double> row(o.games);
    bool missed_any = false;
    for (std::size_t g = 0; g < o.games; ++g) {
      row[g] = std::round(std::clamp(q[g] + s * z(rng), 0.01, 0.99) * 1e4) / 1e4;
      if (miss > 0.0 && uniform01(rng) < miss) {
        row[g] = std::numeric_limits<double>::quiet_NaN();
        missed_any = true;
      }
    }
    if (is_incomplete[f] && !missed_any && o.games > 0) {
      row[static_cast<std::size_t>(uniform01(rng) * static_cast<double>(o.games))] =
          std::numeric_limits<double>::quiet_NaN();
    }
    ds.predictions.push_back(std::move(row));
  }
  return ds;
}

std::string data_directory() {
  const char* env = std::getenv("STRATEXP_DATA_DIR");
  return env && *env ? std::string(env) : std::string("data");
}

std::string resolve_data_path(const std::string& path) {
  namespace fs = std::filesystem;
  const fs::path p(path);
  if (p.is_absolute() || fs::exists(p)) return path;
  return (fs::path(data_directory()) / p).string();
}

}  // namespace stratexp
