#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "spendlab/common/errors.hpp"

namespace spendlab {

inline constexpr std::size_t kMaxHistory = 10;

// One observed (user, paid game, day, spend) record.
struct Interaction {
  std::int64_t user = 0;
  std::int32_t game = 0;
  std::int32_t day = 1;
  double spend = 0.0;

  friend bool operator==(const Interaction&, const Interaction&) = default;
};

struct UserProfile {
  std::int64_t user = 0;
  // Recent downloads, most recent first. Ids index the download catalog.
  std::vector<std::int32_t> download_history;
  double total_spend_180 = 0.0;
  std::int32_t payment_count_180 = 0;

  friend bool operator==(const UserProfile&, const UserProfile&) = default;
};

using ProfileMap = std::map<std::int64_t, UserProfile>;

// Immutable after construction; train/test splits share one profile table.
struct Dataset {
  std::vector<Interaction> interactions;
  std::shared_ptr<const ProfileMap> profiles = std::make_shared<const ProfileMap>();
  std::int32_t paid_catalog_size = 0;
  std::int32_t download_catalog_size = 0;
  std::uint64_t rng_seed = 0;

  std::size_t size() const noexcept { return interactions.size(); }

  const UserProfile& profile(std::int64_t user) const {
    auto it = profiles->find(user);
    if (it == profiles->end()) {
      throw DataError("no profile for user " + std::to_string(user));
    }
    return it->second;
  }

  std::int32_t max_day() const noexcept {
    std::int32_t d = 0;
    for (const auto& r : interactions) d = std::max(d, r.day);
    return d;
  }

  // Throws DataError naming the first offending row (0-based) or user.
  void validate() const;
};

inline void validate_interaction(const Interaction& r, std::int32_t paid_catalog_size,
                                 const std::string& where) {
  if (!std::isfinite(r.spend) || r.spend < 0.0) {
    throw DataError(where + ": spend must be finite and >= 0, got " + std::to_string(r.spend));
  }
  if (r.day < 1) throw DataError(where + ": day must be >= 1");
  if (r.game < 0 || (paid_catalog_size > 0 && r.game >= paid_catalog_size)) {
    throw DataError(where + ": game " + std::to_string(r.game) + " outside paid catalog of size " +
                    std::to_string(paid_catalog_size));
  }
}

inline void validate_profile(const UserProfile& p, std::int32_t download_catalog_size,
                             const std::string& where) {
  if (p.download_history.empty()) throw DataError(where + ": empty download history");
  if (p.download_history.size() > kMaxHistory) throw DataError(where + ": history length > 10");
  for (auto id : p.download_history) {
    if (id < 0 || (download_catalog_size > 0 && id >= download_catalog_size)) {
      throw DataError(where + ": history id " + std::to_string(id) + " outside download catalog");
    }
  }
  if (!std::isfinite(p.total_spend_180) || p.total_spend_180 < 0.0) {
    throw DataError(where + ": t180 must be finite and >= 0");
  }
  if (p.payment_count_180 < 0) throw DataError(where + ": f180 must be >= 0");
  if (p.payment_count_180 == 0 && p.total_spend_180 != 0.0) {
    throw DataError(where + ": f180 = 0 requires t180 = 0");
  }
}

inline void Dataset::validate() const {
  if (paid_catalog_size < 1) throw DataError("paid catalog size must be >= 1");
  if (download_catalog_size < 1) throw DataError("download catalog size must be >= 1");
  for (const auto& [id, p] : *profiles) {
    validate_profile(p, download_catalog_size, "profile of user " + std::to_string(id));
  }
  for (std::size_t i = 0; i < interactions.size(); ++i) {
    const auto& r = interactions[i];
    const auto where = "row " + std::to_string(i);
    validate_interaction(r, paid_catalog_size, where);
    if (!profiles->contains(r.user)) {
      throw DataError(where + ": user " + std::to_string(r.user) + " has no profile");
    }
  }
}

}  // namespace spendlab
