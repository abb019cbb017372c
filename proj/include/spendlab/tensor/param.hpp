#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "spendlab/common/errors.hpp"
#include "spendlab/common/rng.hpp"

namespace spendlab {

struct ParamTensor {
  std::string name;
  std::vector<std::size_t> shape;
  std::vector<double> values;
  std::vector<double> grad;

  ParamTensor(std::string n, std::vector<std::size_t> s) : name(std::move(n)), shape(std::move(s)) {
    const auto count = std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                                       std::multiplies<>());
    values.assign(count, 0.0);
    grad.assign(count, 0.0);
  }

  std::size_t size() const noexcept { return values.size(); }
  std::size_t rows() const noexcept { return shape.empty() ? 1 : shape[0]; }
  std::size_t cols() const noexcept { return shape.size() < 2 ? 1 : size() / shape[0]; }

  double* row(std::size_t r) noexcept { return values.data() + r * cols(); }
  const double* row(std::size_t r) const noexcept { return values.data() + r * cols(); }
  double* grad_row(std::size_t r) noexcept { return grad.data() + r * cols(); }

  void zero_grad() { std::fill(grad.begin(), grad.end(), 0.0); }
};

// Owns a model's tensors; pointers handed out by add() stay valid for its lifetime.
class ParamSet {
 public:
  ParamTensor& add(std::string name, std::vector<std::size_t> shape) {
    for (const auto& t : tensors_) {
      if (t->name == name) throw ConfigError("duplicate parameter name '" + name + "'");
    }
    tensors_.push_back(std::make_unique<ParamTensor>(std::move(name), std::move(shape)));
    return *tensors_.back();
  }

  std::size_t size() const noexcept { return tensors_.size(); }
  ParamTensor& operator[](std::size_t i) { return *tensors_[i]; }
  const ParamTensor& operator[](std::size_t i) const { return *tensors_[i]; }

  ParamTensor* find(const std::string& name) {
    for (auto& t : tensors_) {
      if (t->name == name) return t.get();
    }
    return nullptr;
  }

  std::size_t total_size() const {
    std::size_t n = 0;
    for (const auto& t : tensors_) n += t->size();
    return n;
  }

  void zero_grad() {
    for (auto& t : tensors_) t->zero_grad();
  }

  std::vector<std::vector<double>> snapshot() const {
    std::vector<std::vector<double>> out;
    out.reserve(tensors_.size());
    for (const auto& t : tensors_) out.push_back(t->values);
    return out;
  }

  void restore(const std::vector<std::vector<double>>& snap) {
    if (snap.size() != tensors_.size()) throw ConfigError("snapshot does not match parameter set");
    for (std::size_t i = 0; i < snap.size(); ++i) {
      if (snap[i].size() != tensors_[i]->size()) {
        throw ConfigError("snapshot shape mismatch for '" + tensors_[i]->name + "'");
      }
      tensors_[i]->values = snap[i];
    }
  }

 private:
  std::vector<std::unique_ptr<ParamTensor>> tensors_;
};

inline void init_uniform(ParamTensor& t, double bound, Rng& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (auto& v : t.values) v = dist(rng);
}

// Embedding init: uniform in +-0.1/sqrt(k).
inline void init_embedding(ParamTensor& t, Rng& rng) {
  init_uniform(t, 0.1 / std::sqrt(static_cast<double>(t.cols())), rng);
}

// Kaiming normal for a [out, in] weight matrix.
inline void init_kaiming(ParamTensor& w, Rng& rng) {
  std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / static_cast<double>(w.cols())));
  for (auto& v : w.values) v = dist(rng);
}

}  // namespace spendlab
