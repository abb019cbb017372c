#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <utility>

#include "spendlab/data/types.hpp"

namespace spendlab {

// Rows with day <= train_days go to the first dataset, the rest to the second.
inline std::pair<Dataset, Dataset> split_temporal(const Dataset& ds, std::int32_t train_days) {
  const auto last = ds.max_day();
  if (train_days < 1 || train_days >= last) {
    throw ConfigError("train_days must lie in [1, " + std::to_string(last - 1) + "], got " +
                      std::to_string(train_days));
  }
  Dataset train, test;
  for (Dataset* part : {&train, &test}) {
    part->profiles = ds.profiles;
    part->paid_catalog_size = ds.paid_catalog_size;
    part->download_catalog_size = ds.download_catalog_size;
    part->rng_seed = ds.rng_seed;
  }
  for (const auto& r : ds.interactions) {
    (r.day <= train_days ? train : test).interactions.push_back(r);
  }
  return {std::move(train), std::move(test)};
}

// Summary of one game's historical spends.
struct GameSpendStats {
  std::size_t count = 0;
  double mean = 0.0;
  double std = 0.0;  // population standard deviation

  bool degenerate() const noexcept { return std == 0.0; }
};

using GameStatsMap = std::map<std::int32_t, GameSpendStats>;

// Per-game mean and population standard deviation of spend. With include_zeros
// false, zero-spend rows are skipped and games with only zeros are absent.
inline GameStatsMap build_game_stats(const Dataset& train, bool include_zeros) {
  if (train.interactions.empty()) throw DataError("cannot build game stats from an empty dataset");
  struct Acc {
    std::size_t n = 0;
    double mean = 0.0, m2 = 0.0;
  };
  std::map<std::int32_t, Acc> acc;
  for (const auto& r : train.interactions) {
    if (!include_zeros && r.spend == 0.0) continue;
    auto& a = acc[r.game];
    ++a.n;
    const double delta = r.spend - a.mean;
    a.mean += delta / static_cast<double>(a.n);
    a.m2 += delta * (r.spend - a.mean);
  }
  GameStatsMap out;
  for (const auto& [g, a] : acc) {
    GameSpendStats s;
    s.count = a.n;
    s.mean = a.mean;
    s.std = a.n > 1 ? std::sqrt(std::max(0.0, a.m2 / static_cast<double>(a.n))) : 0.0;
    out.emplace(g, s);
  }
  return out;
}

}  // namespace spendlab
