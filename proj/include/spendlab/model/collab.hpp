#pragma once

#include <span>
#include <vector>

#include "spendlab/model/cross.hpp"

namespace spendlab {

// ID-free collaborative model. The user's preference vector v_u comes from an
// MLP over the concatenated, padded history embeddings; the collaborative
// signal v_u * v_p is concatenated with the cross-network output and read out
// by the head MLP. Nothing here depends on the user id.
class CollabModel final : public Model {
 public:
  explicit CollabModel(ModelConfig cfg) : Model(std::move(cfg)) {
    check_head_sizes(cfg_.head_sizes);
    if (cfg_.pref_sizes.empty() || cfg_.pref_sizes.back() != cfg_.embed_dim) {
      throw ConfigError("the last preference layer size must equal embed_dim");
    }
    for (auto s : cfg_.pref_sizes) {
      if (s < 1) throw ConfigError("layer sizes must be >= 1");
    }
    const std::size_t k = cfg_.embed_dim;
    tower_ = CrossTower(params_, cfg_);
    pref_ = Mlp(params_, "pref", kMaxHistory * k, cfg_.pref_sizes);
    head_ = Mlp(params_, "head", k + tower_.width(), cfg_.head_sizes);
    auto rng = make_rng(cfg_.seed, streams::kInit);
    tower_.init(rng);
    pref_.init(rng);
    head_.init(rng);
  }

  // v_u for a history; pad slots contribute zero vectors.
  std::vector<double> user_preference(const FeatureVector& f) const {
    Mlp::Cache c;
    const auto out = pref_.forward(history_input(f), c);
    return {out.begin(), out.end()};
  }

  double score(const FeatureVector& f) const override {
    check_ids(f);
    const auto vu = user_preference(f);
    std::vector<double> pooled;
    tower_.pool(f, pooled);
    return score_user(f, vu, pooled);
  }

  void score_slate(const FeatureVector& f, std::span<const std::int32_t> games,
                   std::span<double> out) const override {
    check_ids(f);
    const auto vu = user_preference(f);
    std::vector<double> pooled;
    tower_.pool(f, pooled);
    FeatureVector g = f;
    for (std::size_t i = 0; i < games.size(); ++i) {
      g.game = games[i];
      check_ids(g);
      out[i] = score_user(g, vu, pooled);
    }
  }

  double accumulate(const Example& ex, double weight) override {
    const auto& f = ex.features;
    check_ids(f);
    const std::size_t k = cfg_.embed_dim;
    Mlp::Cache pc, hc;
    CrossTower::Cache tc;
    const auto hin = history_input(f);
    const auto vu_span = pref_.forward(hin, pc);
    const std::vector<double> vu(vu_span.begin(), vu_span.end());
    std::vector<double> pooled;
    tower_.pool(f, pooled);
    const double* vp = tower_.game_emb().row(static_cast<std::size_t>(f.game));
    const std::span<const double> vps(vp, k);
    const auto vup = elementwise_product(vu, vps);
    const auto xl = tower_.forward(f, pooled, tc);
    const auto z = concat({vup, xl});
    const double pred = head_.forward(z, hc)[0];

    double loss = 0.0;
    const double g = squared_error_grad(pred, ex.target, weight, loss);
    std::vector<double> dz(z.size());
    head_.backward(hc, std::span<const double>(&g, 1), dz);
    const auto parts = concat_backward(dz, {k, tower_.width()});
    std::vector<double> dvu(k, 0.0), dvp(k, 0.0);
    elementwise_product_backward(vu, vps, parts[0], dvu, dvp);
    double* gp = tower_.game_emb().grad_row(static_cast<std::size_t>(f.game));
    for (std::size_t q = 0; q < k; ++q) gp[q] += dvp[q];
    tower_.backward(f, tc, parts[1]);
    std::vector<double> dhin(hin.size());
    pref_.backward(pc, dvu, dhin);
    for (std::int32_t i = 0; i < f.history_len; ++i) {
      double* gh = tower_.hist_emb().grad_row(static_cast<std::size_t>(f.history[static_cast<std::size_t>(i)]));
      for (std::size_t q = 0; q < k; ++q) gh[q] += dhin[static_cast<std::size_t>(i) * k + q];
    }
    return loss;
  }

 private:
  std::vector<double> history_input(const FeatureVector& f) const {
    const std::size_t k = cfg_.embed_dim;
    std::vector<double> x(kMaxHistory * k, 0.0);
    for (std::int32_t i = 0; i < f.history_len; ++i) {
      const double* e = tower_.hist_emb().row(static_cast<std::size_t>(f.history[static_cast<std::size_t>(i)]));
      std::copy(e, e + k, x.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(i) * k));
    }
    return x;
  }

  double score_user(const FeatureVector& f, std::span<const double> vu,
                    std::span<const double> pooled) const {
    const std::size_t k = cfg_.embed_dim;
    const double* vp = tower_.game_emb().row(static_cast<std::size_t>(f.game));
    const auto vup = elementwise_product(vu, std::span<const double>(vp, k));
    CrossTower::Cache tc;
    Mlp::Cache hc;
    const auto xl = tower_.forward(f, pooled, tc);
    return head_.forward(concat({vup, xl}), hc)[0];
  }

  CrossTower tower_;
  Mlp pref_;
  Mlp head_;
};

}  // namespace spendlab
