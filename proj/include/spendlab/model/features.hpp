#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>

#include "spendlab/data/types.hpp"

namespace spendlab {

inline constexpr std::size_t kDenseFeatures = 3;

struct FeatureVector {
  std::int64_t user = 0;
  // Row in a baseline's user table, -1 for users unseen in training.
  std::int32_t user_index = -1;
  std::int32_t game = 0;
  // Most recent first, right-padded with the pad id (= download catalog size).
  std::array<std::int32_t, kMaxHistory> history{};
  std::int32_t history_len = 0;
  // log1p(t180)/10, log1p(f180)/3, history length/10.
  std::array<double, kDenseFeatures> dense{};
};

// A training row: features plus the standardized target and the raw spend.
struct Example {
  FeatureVector features;
  double target = 0.0;
  double spend = 0.0;
};

class FeatureBuilder {
 public:
  FeatureBuilder() = default;
  FeatureBuilder(std::int32_t paid_catalog_size, std::int32_t download_catalog_size,
                 std::map<std::int64_t, std::int32_t> user_index = {})
      : paid_(paid_catalog_size), download_(download_catalog_size), users_(std::move(user_index)) {}

  // Indexes every user with at least one training interaction, in id order.
  static FeatureBuilder from_training(const Dataset& train) {
    std::map<std::int64_t, std::int32_t> idx;
    for (const auto& r : train.interactions) idx.emplace(r.user, 0);
    std::int32_t next = 0;
    for (auto& [u, i] : idx) i = next++;
    return FeatureBuilder(train.paid_catalog_size, train.download_catalog_size, std::move(idx));
  }

  std::int32_t paid_catalog_size() const noexcept { return paid_; }
  std::int32_t download_catalog_size() const noexcept { return download_; }
  std::int32_t pad_id() const noexcept { return download_; }
  std::int32_t n_users() const noexcept { return static_cast<std::int32_t>(users_.size()); }
  const std::map<std::int64_t, std::int32_t>& user_index() const noexcept { return users_; }

  FeatureVector build(std::int64_t user, std::int32_t game, const UserProfile& profile) const {
    if (game < 0 || game >= paid_) {
      throw DataError("game id " + std::to_string(game) + " outside paid catalog");
    }
    if (profile.download_history.empty() || profile.download_history.size() > kMaxHistory) {
      throw DataError("history length of user " + std::to_string(user) + " outside [1,10]");
    }
    FeatureVector f;
    f.user = user;
    if (auto it = users_.find(user); it != users_.end()) f.user_index = it->second;
    f.game = game;
    f.history.fill(pad_id());
    for (std::size_t i = 0; i < profile.download_history.size(); ++i) {
      const auto id = profile.download_history[i];
      if (id < 0 || id >= download_) {
        throw DataError("history id " + std::to_string(id) + " outside download catalog");
      }
      f.history[i] = id;
    }
    f.history_len = static_cast<std::int32_t>(profile.download_history.size());
    f.dense = {std::log1p(profile.total_spend_180) / 10.0,
               std::log1p(static_cast<double>(profile.payment_count_180)) / 3.0,
               static_cast<double>(f.history_len) / 10.0};
    return f;
  }

  FeatureVector build(const Interaction& r, const UserProfile& profile) const {
    return build(r.user, r.game, profile);
  }

 private:
  std::int32_t paid_ = 0;
  std::int32_t download_ = 0;
  std::map<std::int64_t, std::int32_t> users_;
};

}  // namespace spendlab
