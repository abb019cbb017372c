#pragma once

#include <filesystem>
#include <functional>
#include <fstream>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "spendlab/model/zoo.hpp"

namespace spendlab::test {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    path_ = std::filesystem::temp_directory_path() /
            ("spendlab_" + tag + "_" + std::to_string(std::random_device{}()));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

inline std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline Dataset make_dataset(std::vector<Interaction> rows, std::vector<UserProfile> profiles,
                            std::int32_t paid = 10, std::int32_t downloads = 20) {
  auto map = std::make_shared<ProfileMap>();
  for (auto& p : profiles) map->emplace(p.user, std::move(p));
  Dataset ds;
  ds.interactions = std::move(rows);
  ds.profiles = std::move(map);
  ds.paid_catalog_size = paid;
  ds.download_catalog_size = downloads;
  return ds;
}

inline UserProfile profile(std::int64_t user, std::vector<std::int32_t> history, double t180 = 0.0,
                           std::int32_t f180 = 0) {
  UserProfile p;
  p.user = user;
  p.download_history = std::move(history);
  p.total_spend_180 = t180;
  p.payment_count_180 = f180;
  return p;
}

// Small random model configuration of the given type.
inline ModelConfig random_config(const std::string& type, Rng& rng) {
  std::uniform_int_distribution<int> small(1, 4);
  ModelConfig c;
  c.type = type;
  c.embed_dim = static_cast<std::size_t>(small(rng) + 1);
  c.cross_layers = static_cast<std::size_t>(small(rng) - 1);
  c.pref_sizes = {static_cast<std::size_t>(small(rng) + 2), c.embed_dim};
  c.head_sizes = {static_cast<std::size_t>(small(rng) + 1), 1};
  c.n_users = small(rng) + 2;
  c.paid_catalog_size = small(rng) + 4;
  c.download_catalog_size = small(rng) + 6;
  c.seed = rng();
  return c;
}

inline Example random_example(const ModelConfig& c, Rng& rng) {
  std::uniform_int_distribution<std::int32_t> game(0, c.paid_catalog_size - 1);
  std::uniform_int_distribution<std::int32_t> dl(0, c.download_catalog_size - 1);
  std::uniform_int_distribution<std::int32_t> len(1, static_cast<std::int32_t>(kMaxHistory));
  std::uniform_int_distribution<std::int32_t> user(-1, c.n_users - 1);
  Example ex;
  auto& f = ex.features;
  f.user_index = user(rng);
  f.user = f.user_index;
  f.game = game(rng);
  f.history_len = len(rng);
  f.history.fill(c.download_catalog_size);
  for (std::int32_t i = 0; i < f.history_len; ++i) f.history[static_cast<std::size_t>(i)] = dl(rng);
  for (auto& d : f.dense) d = uniform01(rng);
  const bool pays = uniform01(rng) < 0.5;
  ex.spend = pays ? std::exp(2.0 * uniform01(rng)) : 0.0;
  ex.target = pays ? 2.0 * uniform01(rng) - 0.5 : 0.0;
  return ex;
}

// Larger-than-default embeddings so finite differences see real curvature.
inline void perturb_params(ParamSet& params, Rng& rng, double scale = 0.3) {
  std::normal_distribution<double> n(0.0, scale);
  for (std::size_t t = 0; t < params.size(); ++t) {
    for (auto& v : params[t].values) v += n(rng);
  }
}

// Sum of per-example losses; gradients accumulate only when asked for.
inline std::function<double(bool)> model_loss(Model& model, const std::vector<Example>& batch) {
  return [&model, &batch](bool with_grad) {
    double l = 0.0;
    for (const auto& ex : batch) l += model.accumulate(ex, 1.0);
    if (!with_grad) model.params().zero_grad();
    return l;
  };
}

}  // namespace spendlab::test
