#pragma once

#include "spendlab/model/model.hpp"

namespace spendlab {

// global + b_u + b_p + <e_u, e_p>. Unseen users contribute nothing.
class MfModel final : public Model {
 public:
  explicit MfModel(ModelConfig cfg) : Model(std::move(cfg)) {
    const std::size_t k = cfg_.embed_dim;
    const auto U = static_cast<std::size_t>(std::max(cfg_.n_users, 0));
    const auto P = static_cast<std::size_t>(cfg_.paid_catalog_size);
    global_ = &params_.add("global_bias", {1});
    user_bias_ = &params_.add("user_bias", {U});
    game_bias_ = &params_.add("game_bias", {P});
    user_emb_ = &params_.add("user_emb", {U, k});
    game_emb_ = &params_.add("game_emb", {P, k});
    auto rng = make_rng(cfg_.seed, streams::kInit);
    init_embedding(*user_emb_, rng);
    init_embedding(*game_emb_, rng);
  }

  double score(const FeatureVector& f) const override {
    check_ids(f);
    const auto p = static_cast<std::size_t>(f.game);
    double s = global_->values[0] + game_bias_->values[p];
    if (f.user_index >= 0) {
      const auto u = static_cast<std::size_t>(f.user_index);
      s += user_bias_->values[u];
      const double* eu = user_emb_->row(u);
      const double* ep = game_emb_->row(p);
      for (std::size_t i = 0; i < cfg_.embed_dim; ++i) s += eu[i] * ep[i];
    }
    return s;
  }

  double accumulate(const Example& ex, double weight) override {
    const auto& f = ex.features;
    double loss = 0.0;
    const double g = squared_error_grad(score(f), ex.target, weight, loss);
    const auto p = static_cast<std::size_t>(f.game);
    global_->grad[0] += g;
    game_bias_->grad[p] += g;
    if (f.user_index >= 0) {
      const auto u = static_cast<std::size_t>(f.user_index);
      user_bias_->grad[u] += g;
      const double* eu = user_emb_->row(u);
      const double* ep = game_emb_->row(p);
      double* geu = user_emb_->grad_row(u);
      double* gep = game_emb_->grad_row(p);
      for (std::size_t i = 0; i < cfg_.embed_dim; ++i) {
        geu[i] += g * ep[i];
        gep[i] += g * eu[i];
      }
    }
    return loss;
  }

 private:
  ParamTensor* global_;
  ParamTensor* user_bias_;
  ParamTensor* game_bias_;
  ParamTensor* user_emb_;
  ParamTensor* game_emb_;
};

}  // namespace spendlab
