#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "spendlab/tensor/param.hpp"

namespace spendlab {

struct AdamConfig {
  double lr = 1e-5;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

class AdamState {
 public:
  AdamState() = default;
  AdamState(const ParamSet& params, AdamConfig cfg) : cfg_(cfg) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      m_.emplace_back(params[i].size(), 0.0);
      v_.emplace_back(params[i].size(), 0.0);
    }
  }

  const AdamConfig& config() const noexcept { return cfg_; }
  std::int64_t t() const noexcept { return t_; }

  // Bias-corrected update from the accumulated grads, which are zeroed after.
  void step(ParamSet& params) {
    if (params.size() != m_.size()) throw ConfigError("optimizer state does not match parameters");
    for (std::size_t i = 0; i < params.size(); ++i) {
      const auto& p = params[i];
      if (p.size() != m_[i].size()) throw ConfigError("optimizer state shape mismatch for " + p.name);
      for (std::size_t j = 0; j < p.size(); ++j) {
        if (!std::isfinite(p.grad[j])) {
          throw NumericError("non-finite gradient in '" + p.name + "' at index " +
                             std::to_string(j) + " (step " + std::to_string(t_ + 1) + ")");
        }
      }
    }
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
      auto& p = params[i];
      auto& m = m_[i];
      auto& v = v_[i];
      for (std::size_t j = 0; j < p.size(); ++j) {
        const double g = p.grad[j];
        m[j] = cfg_.beta1 * m[j] + (1.0 - cfg_.beta1) * g;
        v[j] = cfg_.beta2 * v[j] + (1.0 - cfg_.beta2) * g * g;
        const double mhat = m[j] / bc1;
        const double vhat = v[j] / bc2;
        p.values[j] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
        if (!std::isfinite(p.values[j])) {
          throw NumericError("parameter '" + p.name + "' became non-finite at index " +
                             std::to_string(j) + " (step " + std::to_string(t_) + ")");
        }
      }
      p.zero_grad();
    }
  }

 private:
  AdamConfig cfg_;
  std::vector<std::vector<double>> m_, v_;
  std::int64_t t_ = 0;
};

}  // namespace spendlab
