#pragma once

#include <array>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "spendlab/model/cross.hpp"

namespace spendlab {

inline double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

inline double logistic(double x) {
  return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

struct ZilnOutput {
  double logit = 0.0;
  double mu = 0.0;
  double sigma_raw = 0.0;

  double pay_prob() const { return logistic(logit); }
  double sigma() const { return softplus(sigma_raw); }
  double expected_spend() const {
    const double s = sigma();
    return pay_prob() * std::exp(mu + 0.5 * s * s);
  }
};

// Zero-inflated lognormal negative log-likelihood of a raw spend.
inline double ziln_loss(const ZilnOutput& o, double spend) {
  if (spend <= 0.0) return softplus(o.logit);
  const double s = o.sigma();
  const double ly = std::log(spend);
  const double r = ly - o.mu;
  return softplus(-o.logit) + ly + std::log(s) + 0.5 * std::log(2.0 * std::numbers::pi) +
         r * r / (2.0 * s * s);
}

// d loss / d (logit, mu, sigma_raw).
inline std::array<double, 3> ziln_loss_grad(const ZilnOutput& o, double spend) {
  const double p = o.pay_prob();
  if (spend <= 0.0) return {p, 0.0, 0.0};
  const double s = o.sigma();
  const double r = std::log(spend) - o.mu;
  const double dsigma = 1.0 / s - r * r / (s * s * s);
  return {p - 1.0, -r / (s * s), dsigma * logistic(o.sigma_raw)};
}

// Cross-network features read out by a linear layer into (logit, mu, sigma_raw).
// Trained on raw spends; scores are expected spend.
class ZilnModel final : public Model {
 public:
  explicit ZilnModel(ModelConfig cfg) : Model(std::move(cfg)) {
    tower_ = CrossTower(params_, cfg_);
    out_ = Mlp(params_, "ziln", tower_.width(), {3});
    auto rng = make_rng(cfg_.seed, streams::kInit);
    tower_.init(rng);
    out_.init(rng);
  }

  ZilnOutput forward(const FeatureVector& f) const {
    check_ids(f);
    std::vector<double> pooled;
    tower_.pool(f, pooled);
    CrossTower::Cache tc;
    Mlp::Cache oc;
    const auto o = out_.forward(tower_.forward(f, pooled, tc), oc);
    return {o[0], o[1], o[2]};
  }

  double score(const FeatureVector& f) const override { return forward(f).expected_spend(); }

  double accumulate(const Example& ex, double weight) override {
    const auto& f = ex.features;
    check_ids(f);
    std::vector<double> pooled;
    tower_.pool(f, pooled);
    CrossTower::Cache tc;
    Mlp::Cache oc;
    const auto o = out_.forward(tower_.forward(f, pooled, tc), oc);
    const ZilnOutput z{o[0], o[1], o[2]};
    const double loss = ziln_loss(z, ex.spend);
    auto g = ziln_loss_grad(z, ex.spend);
    for (auto& v : g) v *= weight;
    std::vector<double> dxl(tower_.width());
    out_.backward(oc, g, dxl);
    tower_.backward(f, tc, dxl);
    return loss;
  }

  bool trains_on_raw_spend() const override { return true; }

 private:
  CrossTower tower_;
  Mlp out_;
};

}  // namespace spendlab
