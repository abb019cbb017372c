#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "spendlab/common/errors.hpp"

namespace spendlab {

struct StabilityReport {
  std::string metric;
  std::vector<double> values;
  double mean = 0.0;
  double std = 0.0;  // population
  std::optional<double> cov;  // std / |mean|; undefined when mean == 0
};

inline StabilityReport cov(const std::vector<double>& values, std::string metric = {}) {
  if (values.size() < 2) throw ConfigError("CoV needs at least 2 values");
  StabilityReport r;
  r.metric = std::move(metric);
  r.values = values;
  double s = 0.0;
  for (double v : values) s += v;
  r.mean = s / static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - r.mean) * (v - r.mean);
  r.std = std::sqrt(ss / static_cast<double>(values.size()));
  if (r.mean != 0.0) r.cov = r.std / std::abs(r.mean);
  return r;
}

// CoV from already-aggregated moments.
inline std::optional<double> cov_from_moments(double mean, double std) {
  if (mean == 0.0) return std::nullopt;
  return std / std::abs(mean);
}

inline nlohmann::ordered_json to_ordered_json(const StabilityReport& r) {
  nlohmann::ordered_json j{{"metric", r.metric}, {"values", r.values}, {"mean", r.mean}, {"std", r.std}};
  j["cov"] = r.cov ? nlohmann::ordered_json(*r.cov) : nlohmann::ordered_json(nullptr);
  return j;
}

}  // namespace spendlab
