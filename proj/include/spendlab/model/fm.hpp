#pragma once

#include <utility>
#include <vector>

#include "spendlab/model/model.hpp"

namespace spendlab {

// Second-order factorization machine over one-hot user and game ids, a
// multi-hot history (each id weighted 1/len) and the dense side features.
class FmModel final : public Model {
 public:
  explicit FmModel(ModelConfig cfg) : Model(std::move(cfg)) {
    users_ = static_cast<std::size_t>(std::max(cfg_.n_users, 0));
    games_ = static_cast<std::size_t>(cfg_.paid_catalog_size);
    downloads_ = static_cast<std::size_t>(cfg_.download_catalog_size);
    const std::size_t n = users_ + games_ + downloads_ + kDenseFeatures;
    w0_ = &params_.add("w0", {1});
    w_ = &params_.add("w", {n});
    v_ = &params_.add("v", {n, cfg_.embed_dim});
    auto rng = make_rng(cfg_.seed, streams::kInit);
    init_embedding(*v_, rng);
  }

  using Active = std::vector<std::pair<std::size_t, double>>;

  // Nonzero (feature index, value) pairs of f.
  Active active_features(const FeatureVector& f) const {
    check_ids(f);
    Active a;
    if (f.user_index >= 0) a.emplace_back(static_cast<std::size_t>(f.user_index), 1.0);
    a.emplace_back(users_ + static_cast<std::size_t>(f.game), 1.0);
    if (f.history_len > 0) {
      const double x = 1.0 / static_cast<double>(f.history_len);
      for (std::int32_t i = 0; i < f.history_len; ++i) {
        a.emplace_back(users_ + games_ + static_cast<std::size_t>(f.history[static_cast<std::size_t>(i)]), x);
      }
    }
    for (std::size_t i = 0; i < kDenseFeatures; ++i) {
      a.emplace_back(users_ + games_ + downloads_ + i, f.dense[i]);
    }
    return a;
  }

  double score(const FeatureVector& f) const override { return score_active(active_features(f)); }

  double score_active(const Active& a) const {
    const std::size_t k = cfg_.embed_dim;
    double s = w0_->values[0];
    for (auto [i, x] : a) s += w_->values[i] * x;
    for (std::size_t q = 0; q < k; ++q) {
      double sum = 0.0, sq = 0.0;
      for (auto [i, x] : a) {
        const double vx = v_->row(i)[q] * x;
        sum += vx;
        sq += vx * vx;
      }
      s += 0.5 * (sum * sum - sq);
    }
    return s;
  }

  double accumulate(const Example& ex, double weight) override {
    const auto a = active_features(ex.features);
    double loss = 0.0;
    const double g = squared_error_grad(score_active(a), ex.target, weight, loss);
    const std::size_t k = cfg_.embed_dim;
    w0_->grad[0] += g;
    for (auto [i, x] : a) w_->grad[i] += g * x;
    for (std::size_t q = 0; q < k; ++q) {
      double sum = 0.0;
      for (auto [i, x] : a) sum += v_->row(i)[q] * x;
      for (auto [i, x] : a) v_->grad_row(i)[q] += g * x * (sum - v_->row(i)[q] * x);
    }
    return loss;
  }

 private:
  std::size_t users_ = 0, games_ = 0, downloads_ = 0;
  ParamTensor* w0_;
  ParamTensor* w_;
  ParamTensor* v_;
};

}  // namespace spendlab
