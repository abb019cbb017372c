#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <unordered_set>
#include <vector>

#include "spendlab/common/errors.hpp"
#include "spendlab/common/rng.hpp"

namespace spendlab {

inline constexpr std::size_t kDefaultNegatives = 100;

// n distinct ids drawn uniformly from [0, catalog) minus the positive and any
// excluded ids. Deterministic in (seed, case_index).
inline std::vector<std::int32_t> sample_negatives(std::int32_t positive, std::int32_t catalog,
                                                  std::size_t n, std::uint64_t seed,
                                                  std::uint64_t case_index,
                                                  std::span<const std::int32_t> exclude = {}) {
  if (positive < 0 || positive >= catalog) throw DataError("positive id outside catalog");
  std::vector<std::int32_t> pool;
  pool.reserve(static_cast<std::size_t>(catalog));
  std::unordered_set<std::int32_t> skip(exclude.begin(), exclude.end());
  skip.insert(positive);
  for (std::int32_t g = 0; g < catalog; ++g) {
    if (!skip.contains(g)) pool.push_back(g);
  }
  if (pool.size() < n) {
    throw ConfigError("cannot draw " + std::to_string(n) + " negatives from a catalog of " +
                      std::to_string(catalog) + " games");
  }
  auto rng = make_rng(seed, streams::kNegatives, case_index);
  for (std::size_t i = 0; i < n; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(n);
  return pool;
}

// 1-indexed rank of scores[positive]: one plus the number of strictly higher
// scores plus a uniformly drawn place among equal scores.
inline std::size_t rank_positive(std::span<const double> scores, std::size_t positive, Rng& tie_rng) {
  const double s = scores[positive];
  if (!std::isfinite(s)) throw NumericError("non-finite score for the positive candidate");
  std::size_t higher = 0, ties = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (i == positive) continue;
    if (!std::isfinite(scores[i])) throw NumericError("non-finite candidate score");
    if (scores[i] > s) {
      ++higher;
    } else if (scores[i] == s) {
      ++ties;
    }
  }
  std::size_t before = 0;
  if (ties > 0) before = std::uniform_int_distribution<std::size_t>(0, ties)(tie_rng);
  return 1 + higher + before;
}

inline std::size_t rank_positive(std::span<const double> scores, std::size_t positive,
                                 std::uint64_t seed, std::uint64_t case_index) {
  auto rng = make_rng(seed, streams::kTies, case_index);
  return rank_positive(scores, positive, rng);
}

inline double hr_at_k(std::size_t rank, std::size_t k) { return rank <= k ? 1.0 : 0.0; }

inline double ndcg_at_k(std::size_t rank, std::size_t k) {
  return rank <= k ? 1.0 / std::log2(static_cast<double>(rank) + 1.0) : 0.0;
}

}  // namespace spendlab
