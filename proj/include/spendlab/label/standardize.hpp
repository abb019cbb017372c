#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "spendlab/data/split.hpp"
#include "spendlab/data/types.hpp"

namespace spendlab {

// OV: raw spend, Log: log1p, US: user-sided, GS: game-sided, BS: both-sided.
enum class Scheme { kOV, kLog, kUS, kGS, kBS };

inline Scheme parse_scheme(std::string_view s) {
  std::string lower(s);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "ov") return Scheme::kOV;
  if (lower == "log") return Scheme::kLog;
  if (lower == "us") return Scheme::kUS;
  if (lower == "gs") return Scheme::kGS;
  if (lower == "bs") return Scheme::kBS;
  throw ConfigError("unknown scheme '" + std::string(s) + "' (expected ov|log|us|gs|bs)");
}

inline const char* scheme_name(Scheme s) {
  switch (s) {
    case Scheme::kOV: return "ov";
    case Scheme::kLog: return "log";
    case Scheme::kUS: return "us";
    case Scheme::kGS: return "gs";
    case Scheme::kBS: return "bs";
  }
  return "?";
}

inline double game_sided(double spend, const GameSpendStats& stats) {
  if (stats.degenerate()) return 0.0;
  return (spend - stats.mean) / stats.std;
}

inline double game_sided(double spend, std::int32_t game, const GameStatsMap& stats) {
  auto it = stats.find(game);
  if (it == stats.end()) throw ColdGameError(game);
  return game_sided(spend, it->second);
}

// Spend relative to the user's average payment; users without payment history
// are measured against the global mean nonzero spend instead.
inline double user_sided(double spend, double t180, std::int32_t f180, double global_mean_nonzero) {
  if (f180 <= 0 || t180 <= 0.0) {
    return global_mean_nonzero > 0.0 ? spend / global_mean_nonzero : 0.0;
  }
  return spend / (t180 / static_cast<double>(f180));
}

struct NormStats {
  Scheme scheme = Scheme::kBS;
  double g_mean = 0.0, g_std = 0.0;
  double u_mean = 0.0, u_std = 0.0;

  friend bool operator==(const NormStats&, const NormStats&) = default;
};

inline void to_json(nlohmann::json& j, const NormStats& n) {
  j = {{"scheme", scheme_name(n.scheme)},
       {"g_mean", n.g_mean},
       {"g_std", n.g_std},
       {"u_mean", n.u_mean},
       {"u_std", n.u_std}};
}

inline void from_json(const nlohmann::json& j, NormStats& n) {
  n.scheme = parse_scheme(j.at("scheme").get<std::string>());
  j.at("g_mean").get_to(n.g_mean);
  j.at("g_std").get_to(n.g_std);
  j.at("u_mean").get_to(n.u_mean);
  j.at("u_std").get_to(n.u_std);
}

inline double zscore(double x, double mean, double std) {
  return std > 0.0 ? (x - mean) / std : 0.0;
}

inline double combine_both_sided(double g, double u, const NormStats& norm, double w_game = 0.5,
                                 double w_user = 0.5) {
  return w_game * zscore(g, norm.g_mean, norm.g_std) + w_user * zscore(u, norm.u_mean, norm.u_std);
}

struct StandardizeConfig {
  Scheme scheme = Scheme::kBS;
  // Zero-spend rows count towards each game's mean and std.
  bool game_stats_include_zeros = true;
  double w_game = 0.5;
  double w_user = 0.5;
};

// Fitted once on a training split, then applied unchanged to any row.
class Standardizer {
 public:
  Standardizer() = default;

  static Standardizer fit(const Dataset& train, const StandardizeConfig& cfg) {
    if (train.interactions.empty()) throw DataError("cannot fit a standardizer on an empty dataset");
    Standardizer s;
    s.cfg_ = cfg;
    s.norm_.scheme = cfg.scheme;
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& r : train.interactions) {
      if (r.spend > 0.0) {
        sum += r.spend;
        ++n;
      }
    }
    s.global_mean_nonzero_ = n > 0 ? sum / static_cast<double>(n) : 0.0;
    if (cfg.scheme == Scheme::kGS || cfg.scheme == Scheme::kBS) {
      s.game_stats_ = build_game_stats(train, cfg.game_stats_include_zeros);
    }
    if (cfg.scheme == Scheme::kBS) {
      // Moments of both populations over every training row, zero rows included.
      double gs = 0.0, gss = 0.0, us = 0.0, uss = 0.0;
      std::size_t gn = 0;
      for (const auto& r : train.interactions) {
        const auto& p = train.profile(r.user);
        const double u = s.user_value(r, p);
        us += u;
        uss += u * u;
        if (auto it = s.game_stats_.find(r.game); it != s.game_stats_.end()) {
          const double g = game_sided(r.spend, it->second);
          gs += g;
          gss += g * g;
          ++gn;
        }
      }
      const auto nu = static_cast<double>(train.interactions.size());
      s.norm_.u_mean = us / nu;
      s.norm_.u_std = std::sqrt(std::max(0.0, uss / nu - s.norm_.u_mean * s.norm_.u_mean));
      if (gn > 0) {
        const auto ng = static_cast<double>(gn);
        s.norm_.g_mean = gs / ng;
        s.norm_.g_std = std::sqrt(std::max(0.0, gss / ng - s.norm_.g_mean * s.norm_.g_mean));
      }
    }
    return s;
  }

  double transform(const Interaction& r, const UserProfile& p) const {
    if (r.spend == 0.0) return 0.0;
    switch (cfg_.scheme) {
      case Scheme::kOV: return r.spend;
      case Scheme::kLog: return std::log1p(r.spend);
      case Scheme::kUS: return user_value(r, p);
      case Scheme::kGS: {
        auto it = game_stats_.find(r.game);
        return it == game_stats_.end() ? 0.0 : game_sided(r.spend, it->second);
      }
      case Scheme::kBS: {
        const double u = user_value(r, p);
        auto it = game_stats_.find(r.game);
        if (it == game_stats_.end()) return zscore(u, norm_.u_mean, norm_.u_std);
        return combine_both_sided(game_sided(r.spend, it->second), u, norm_, cfg_.w_game,
                                  cfg_.w_user);
      }
    }
    return r.spend;
  }

  std::vector<double> transform(const Dataset& ds) const {
    std::vector<double> out;
    out.reserve(ds.size());
    for (const auto& r : ds.interactions) out.push_back(transform(r, ds.profile(r.user)));
    return out;
  }

  const StandardizeConfig& config() const noexcept { return cfg_; }
  Scheme scheme() const noexcept { return cfg_.scheme; }
  const NormStats& norm() const noexcept { return norm_; }
  const GameStatsMap& game_stats() const noexcept { return game_stats_; }
  double global_mean_nonzero() const noexcept { return global_mean_nonzero_; }

 private:
  double user_value(const Interaction& r, const UserProfile& p) const {
    return user_sided(r.spend, p.total_spend_180, p.payment_count_180, global_mean_nonzero_);
  }

  StandardizeConfig cfg_;
  NormStats norm_;
  GameStatsMap game_stats_;
  double global_mean_nonzero_ = 0.0;
};

struct LabeledDataset {
  std::vector<double> targets;
  Standardizer standardizer;
};

inline LabeledDataset standardize_dataset(const Dataset& train, const StandardizeConfig& cfg) {
  LabeledDataset out;
  out.standardizer = Standardizer::fit(train, cfg);
  out.targets = out.standardizer.transform(train);
  return out;
}

inline LabeledDataset standardize_dataset(const Dataset& train, Scheme scheme) {
  StandardizeConfig cfg;
  cfg.scheme = scheme;
  return standardize_dataset(train, cfg);
}

}  // namespace spendlab
