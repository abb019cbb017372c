#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "spendlab/model/features.hpp"
#include "spendlab/tensor/layers.hpp"
#include "spendlab/tensor/param.hpp"

namespace spendlab {

struct ModelConfig {
  std::string type = "collab";
  std::size_t embed_dim = 8;
  std::vector<std::size_t> pref_sizes{8, 16, 32, 8};
  std::size_t cross_layers = 2;
  std::vector<std::size_t> head_sizes{16, 8, 1};
  std::int32_t n_users = 0;  // rows of the user tables (mf, fm)
  std::int32_t paid_catalog_size = 0;
  std::int32_t download_catalog_size = 0;
  std::uint64_t seed = 0;
};

inline void to_json(nlohmann::json& j, const ModelConfig& c) {
  j = {{"type", c.type},
       {"embed_dim", c.embed_dim},
       {"pref_sizes", c.pref_sizes},
       {"cross_layers", c.cross_layers},
       {"head_sizes", c.head_sizes},
       {"n_users", c.n_users},
       {"paid_catalog_size", c.paid_catalog_size},
       {"download_catalog_size", c.download_catalog_size},
       {"seed", c.seed}};
}

inline void from_json(const nlohmann::json& j, ModelConfig& c) {
  j.at("type").get_to(c.type);
  j.at("embed_dim").get_to(c.embed_dim);
  j.at("pref_sizes").get_to(c.pref_sizes);
  j.at("cross_layers").get_to(c.cross_layers);
  j.at("head_sizes").get_to(c.head_sizes);
  j.at("n_users").get_to(c.n_users);
  j.at("paid_catalog_size").get_to(c.paid_catalog_size);
  j.at("download_catalog_size").get_to(c.download_catalog_size);
  j.at("seed").get_to(c.seed);
}

class Model {
 public:
  explicit Model(ModelConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.embed_dim < 1) throw ConfigError("embed_dim must be >= 1");
    if (cfg_.paid_catalog_size < 1 || cfg_.download_catalog_size < 1) {
      throw ConfigError("catalog sizes must be >= 1");
    }
  }
  virtual ~Model() = default;
  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;

  const ModelConfig& config() const noexcept { return cfg_; }
  const std::string& type() const noexcept { return cfg_.type; }
  nlohmann::json hyperparams() const { return cfg_; }
  ParamSet& params() noexcept { return params_; }
  const ParamSet& params() const noexcept { return params_; }

  // The model's prediction: a standardized target, or expected raw spend for ziln.
  virtual double score(const FeatureVector& f) const = 0;

  // Forward, loss and backward for one example. Gradients are scaled by
  // `weight` and added to the parameter grads; returns the unweighted loss.
  virtual double accumulate(const Example& ex, double weight) = 0;

  // Scores f against each candidate game in turn.
  virtual void score_slate(const FeatureVector& f, std::span<const std::int32_t> games,
                           std::span<double> out) const {
    FeatureVector g = f;
    for (std::size_t i = 0; i < games.size(); ++i) {
      g.game = games[i];
      out[i] = score(g);
    }
  }

  // True when the loss consumes raw spend instead of the standardized target.
  virtual bool trains_on_raw_spend() const { return false; }

 protected:
  void check_ids(const FeatureVector& f) const {
    if (f.game < 0 || f.game >= cfg_.paid_catalog_size) {
      throw DataError("game id " + std::to_string(f.game) + " out of range");
    }
    if (f.history_len < 0 || f.history_len > static_cast<std::int32_t>(kMaxHistory)) {
      throw DataError("history length out of range");
    }
    for (std::int32_t i = 0; i < f.history_len; ++i) {
      if (f.history[static_cast<std::size_t>(i)] < 0 ||
          f.history[static_cast<std::size_t>(i)] >= cfg_.download_catalog_size) {
        throw DataError("history id out of range");
      }
    }
    if (f.user_index >= cfg_.n_users) throw DataError("user index out of range");
  }

  ModelConfig cfg_;
  ParamSet params_;
};

inline double squared_error_grad(double pred, double target, double weight, double& loss) {
  const double diff = pred - target;
  loss = diff * diff;
  return 2.0 * diff * weight;
}

}  // namespace spendlab
