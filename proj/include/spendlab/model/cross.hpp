#pragma once

#include <algorithm>
#include <span>
#include <vector>

#include "spendlab/model/model.hpp"

namespace spendlab {

// Game embedding, mean-pooled history embedding and dense features, passed
// through L residual cross layers: x_{l+1} = x0 * (W_l x_l + b_l) + x_l.
// The embedding tables are owned here and shared with the collaborative branch.
class CrossTower {
 public:
  CrossTower() = default;
  CrossTower(ParamSet& params, const ModelConfig& cfg) : k_(cfg.embed_dim), layers_(cfg.cross_layers) {
    const auto P = static_cast<std::size_t>(cfg.paid_catalog_size);
    const auto D = static_cast<std::size_t>(cfg.download_catalog_size);
    game_emb_ = &params.add("game_emb", {P, k_});
    // Row D is the pad embedding: zero and never updated.
    hist_emb_ = &params.add("hist_emb", {D + 1, k_});
    pad_ = D;
    for (std::size_t l = 0; l < layers_; ++l) {
      W_.push_back(&params.add("cross." + std::to_string(l) + ".weight", {width(), width()}));
      b_.push_back(&params.add("cross." + std::to_string(l) + ".bias", {width()}));
    }
  }

  void init(Rng& rng) {
    init_embedding(*game_emb_, rng);
    init_embedding(*hist_emb_, rng);
    std::fill(hist_emb_->row(pad_), hist_emb_->row(pad_) + k_, 0.0);
    for (std::size_t l = 0; l < layers_; ++l) {
      init_kaiming(*W_[l], rng);
      std::fill(b_[l]->values.begin(), b_[l]->values.end(), 0.0);
    }
  }

  std::size_t width() const noexcept { return 2 * k_ + kDenseFeatures; }
  std::size_t embed_dim() const noexcept { return k_; }
  ParamTensor& game_emb() noexcept { return *game_emb_; }
  const ParamTensor& game_emb() const noexcept { return *game_emb_; }
  ParamTensor& hist_emb() noexcept { return *hist_emb_; }
  const ParamTensor& hist_emb() const noexcept { return *hist_emb_; }

  // Mean of the non-pad history embeddings.
  void pool(const FeatureVector& f, std::vector<double>& pooled) const {
    pooled.assign(k_, 0.0);
    if (f.history_len <= 0) return;
    for (std::int32_t i = 0; i < f.history_len; ++i) {
      const double* e = hist_emb_->row(static_cast<std::size_t>(f.history[static_cast<std::size_t>(i)]));
      for (std::size_t q = 0; q < k_; ++q) pooled[q] += e[q];
    }
    for (auto& v : pooled) v /= static_cast<double>(f.history_len);
  }

  struct Cache {
    std::vector<std::vector<double>> xs;  // xs[0] = x0, xs[l+1] = output of layer l
    std::vector<std::vector<double>> hs;
  };

  std::span<const double> forward(const FeatureVector& f, std::span<const double> pooled,
                                  Cache& c) const {
    c.xs.resize(layers_ + 1);
    c.hs.resize(layers_);
    auto& x0 = c.xs[0];
    x0.resize(width());
    const double* vp = game_emb_->row(static_cast<std::size_t>(f.game));
    std::copy(vp, vp + k_, x0.begin());
    std::copy(pooled.begin(), pooled.end(), x0.begin() + static_cast<std::ptrdiff_t>(k_));
    std::copy(f.dense.begin(), f.dense.end(), x0.begin() + static_cast<std::ptrdiff_t>(2 * k_));
    for (std::size_t l = 0; l < layers_; ++l) {
      c.hs[l].resize(width());
      c.xs[l + 1].resize(width());
      cross_forward(x0, c.xs[l], *W_[l], *b_[l], c.hs[l], c.xs[l + 1]);
    }
    return c.xs.back();
  }

  // Backpropagates dL/dx_L into the cross weights and both embedding tables.
  void backward(const FeatureVector& f, const Cache& c, std::span<const double> dxl) {
    std::vector<double> dx0(width(), 0.0), g(dxl.begin(), dxl.end()), gin(width());
    for (std::size_t l = layers_; l-- > 0;) {
      cross_backward(c.xs[0], c.xs[l], c.hs[l], g, *W_[l], *b_[l], dx0, gin);
      g.swap(gin);
    }
    // x_0 also feeds the residual path directly.
    for (std::size_t i = 0; i < width(); ++i) dx0[i] += g[i];
    double* gp = game_emb_->grad_row(static_cast<std::size_t>(f.game));
    for (std::size_t q = 0; q < k_; ++q) gp[q] += dx0[q];
    if (f.history_len > 0) {
      const double inv = 1.0 / static_cast<double>(f.history_len);
      for (std::int32_t i = 0; i < f.history_len; ++i) {
        double* gh = hist_emb_->grad_row(static_cast<std::size_t>(f.history[static_cast<std::size_t>(i)]));
        for (std::size_t q = 0; q < k_; ++q) gh[q] += dx0[k_ + q] * inv;
      }
    }
  }

 private:
  std::size_t k_ = 0;
  std::size_t layers_ = 0;
  std::size_t pad_ = 0;
  ParamTensor* game_emb_ = nullptr;
  ParamTensor* hist_emb_ = nullptr;
  std::vector<ParamTensor*> W_, b_;
};

inline void check_head_sizes(const std::vector<std::size_t>& sizes) {
  if (sizes.empty() || sizes.back() != 1) throw ConfigError("head_sizes must end in 1");
  for (auto s : sizes) {
    if (s < 1) throw ConfigError("layer sizes must be >= 1");
  }
}

// Cross network followed by the head MLP.
class CrossnetModel final : public Model {
 public:
  explicit CrossnetModel(ModelConfig cfg) : Model(std::move(cfg)) {
    check_head_sizes(cfg_.head_sizes);
    tower_ = CrossTower(params_, cfg_);
    head_ = Mlp(params_, "head", tower_.width(), cfg_.head_sizes);
    auto rng = make_rng(cfg_.seed, streams::kInit);
    tower_.init(rng);
    head_.init(rng);
  }

  double score(const FeatureVector& f) const override {
    check_ids(f);
    std::vector<double> pooled;
    tower_.pool(f, pooled);
    return score_pooled(f, pooled);
  }

  void score_slate(const FeatureVector& f, std::span<const std::int32_t> games,
                   std::span<double> out) const override {
    check_ids(f);
    std::vector<double> pooled;
    tower_.pool(f, pooled);
    FeatureVector g = f;
    for (std::size_t i = 0; i < games.size(); ++i) {
      g.game = games[i];
      check_ids(g);
      out[i] = score_pooled(g, pooled);
    }
  }

  double accumulate(const Example& ex, double weight) override {
    const auto& f = ex.features;
    check_ids(f);
    std::vector<double> pooled;
    tower_.pool(f, pooled);
    CrossTower::Cache tc;
    Mlp::Cache hc;
    const auto xl = tower_.forward(f, pooled, tc);
    const double pred = head_.forward(xl, hc)[0];
    double loss = 0.0;
    const double g = squared_error_grad(pred, ex.target, weight, loss);
    std::vector<double> dxl(tower_.width());
    head_.backward(hc, std::span<const double>(&g, 1), dxl);
    tower_.backward(f, tc, dxl);
    return loss;
  }

  const CrossTower& tower() const noexcept { return tower_; }

 private:
  double score_pooled(const FeatureVector& f, std::span<const double> pooled) const {
    CrossTower::Cache tc;
    Mlp::Cache hc;
    return head_.forward(tower_.forward(f, pooled, tc), hc)[0];
  }

  CrossTower tower_;
  Mlp head_;
};

}  // namespace spendlab
