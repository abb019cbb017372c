#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "spendlab/tensor/param.hpp"

namespace spendlab {

enum class Activation { kIdentity, kRelu };

namespace detail {
inline void require(bool ok, const char* what) {
  if (!ok) throw ConfigError(std::string("shape mismatch: ") + what);
}
}  // namespace detail

// y = act(W x + b) with W stored row-major as [out, in].
inline void dense_forward(std::span<const double> x, const ParamTensor& W, const ParamTensor& b,
                          Activation act, std::span<double> y) {
  const std::size_t out = W.rows(), in = W.cols();
  detail::require(x.size() == in && y.size() == out && b.size() == out, "dense_forward");
  for (std::size_t o = 0; o < out; ++o) {
    const double* w = W.row(o);
    double s = b.values[o];
    for (std::size_t i = 0; i < in; ++i) s += w[i] * x[i];
    y[o] = (act == Activation::kRelu && s < 0.0) ? 0.0 : s;
  }
}

// Accumulates dL/dW and dL/db; writes dL/dx when dx is non-empty. y is the
// post-activation output of the matching forward call.
inline void dense_backward(std::span<const double> x, std::span<const double> y,
                           std::span<const double> dy, ParamTensor& W, ParamTensor& b,
                           Activation act, std::span<double> dx) {
  const std::size_t out = W.rows(), in = W.cols();
  detail::require(x.size() == in && y.size() == out && dy.size() == out, "dense_backward");
  detail::require(dx.empty() || dx.size() == in, "dense_backward dx");
  std::fill(dx.begin(), dx.end(), 0.0);
  for (std::size_t o = 0; o < out; ++o) {
    const double g = (act == Activation::kRelu && y[o] <= 0.0) ? 0.0 : dy[o];
    if (g == 0.0) continue;
    b.grad[o] += g;
    double* gw = W.grad_row(o);
    const double* w = W.row(o);
    for (std::size_t i = 0; i < in; ++i) gw[i] += g * x[i];
    if (!dx.empty()) {
      for (std::size_t i = 0; i < in; ++i) dx[i] += g * w[i];
    }
  }
}

inline std::vector<double> elementwise_product(std::span<const double> a, std::span<const double> b) {
  detail::require(a.size() == b.size(), "elementwise_product");
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

// da += grad * b, db += grad * a.
inline void elementwise_product_backward(std::span<const double> a, std::span<const double> b,
                                         std::span<const double> grad, std::span<double> da,
                                         std::span<double> db) {
  detail::require(a.size() == b.size() && grad.size() == a.size(), "elementwise_product_backward");
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!da.empty()) da[i] += grad[i] * b[i];
    if (!db.empty()) db[i] += grad[i] * a[i];
  }
}

inline std::vector<double> concat(std::initializer_list<std::span<const double>> parts) {
  if (parts.size() == 0) throw ConfigError("concat needs at least one part");
  std::vector<double> out;
  for (auto p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

// Splits a gradient over a concatenation back into per-part slices.
inline std::vector<std::span<const double>> concat_backward(std::span<const double> grad,
                                                            std::initializer_list<std::size_t> sizes) {
  std::vector<std::span<const double>> out;
  std::size_t off = 0;
  for (auto n : sizes) {
    detail::require(off + n <= grad.size(), "concat_backward");
    out.push_back(grad.subspan(off, n));
    off += n;
  }
  detail::require(off == grad.size(), "concat_backward total");
  return out;
}

// One cross layer: y = x0 * (W x + b) + x.
inline void cross_forward(std::span<const double> x0, std::span<const double> x, const ParamTensor& W,
                          const ParamTensor& b, std::span<double> h, std::span<double> y) {
  const std::size_t n = x0.size();
  detail::require(x.size() == n && W.rows() == n && W.cols() == n && b.size() == n &&
                      h.size() == n && y.size() == n,
                  "cross_forward");
  for (std::size_t o = 0; o < n; ++o) {
    const double* w = W.row(o);
    double s = b.values[o];
    for (std::size_t i = 0; i < n; ++i) s += w[i] * x[i];
    h[o] = s;
    y[o] = x0[o] * s + x[o];
  }
}

// h is the pre-product W x + b cached by cross_forward. Accumulates into dx0
// and writes dx.
inline void cross_backward(std::span<const double> x0, std::span<const double> x,
                           std::span<const double> h, std::span<const double> dy, ParamTensor& W,
                           ParamTensor& b, std::span<double> dx0, std::span<double> dx) {
  const std::size_t n = x0.size();
  detail::require(dy.size() == n && dx0.size() == n && dx.size() == n, "cross_backward");
  for (std::size_t i = 0; i < n; ++i) dx[i] = dy[i];
  for (std::size_t o = 0; o < n; ++o) {
    dx0[o] += dy[o] * h[o];
    const double dh = dy[o] * x0[o];
    if (dh == 0.0) continue;
    b.grad[o] += dh;
    double* gw = W.grad_row(o);
    const double* w = W.row(o);
    for (std::size_t i = 0; i < n; ++i) {
      gw[i] += dh * x[i];
      dx[i] += dh * w[i];
    }
  }
}

// Multi-layer perceptron with cached activations for one example.
class Mlp {
 public:
  Mlp() = default;

  // The last layer is linear, the rest use relu.
  Mlp(ParamSet& params, const std::string& prefix, std::size_t in, const std::vector<std::size_t>& sizes) {
    std::size_t prev = in;
    for (std::size_t l = 0; l < sizes.size(); ++l) {
      auto& W = params.add(prefix + "." + std::to_string(l) + ".weight", {sizes[l], prev});
      auto& b = params.add(prefix + "." + std::to_string(l) + ".bias", {sizes[l]});
      layers_.push_back({&W, &b, l + 1 == sizes.size() ? Activation::kIdentity : Activation::kRelu});
      prev = sizes[l];
    }
    in_ = in;
    out_ = prev;
  }

  void init(Rng& rng) {
    for (auto& l : layers_) {
      init_kaiming(*l.W, rng);
      std::fill(l.b->values.begin(), l.b->values.end(), 0.0);
    }
  }

  std::size_t in_size() const noexcept { return in_; }
  std::size_t out_size() const noexcept { return out_; }

  struct Cache {
    std::vector<std::vector<double>> acts;  // acts[0] is the input
  };

  std::span<const double> forward(std::span<const double> x, Cache& c) const {
    c.acts.resize(layers_.size() + 1);
    c.acts[0].assign(x.begin(), x.end());
    for (std::size_t l = 0; l < layers_.size(); ++l) {
      c.acts[l + 1].resize(layers_[l].W->rows());
      dense_forward(c.acts[l], *layers_[l].W, *layers_[l].b, layers_[l].act, c.acts[l + 1]);
    }
    return c.acts.back();
  }

  // Writes dL/dx into dx when non-empty.
  void backward(const Cache& c, std::span<const double> dy, std::span<double> dx) {
    std::vector<double> g(dy.begin(), dy.end()), gin;
    for (std::size_t l = layers_.size(); l-- > 0;) {
      const bool need_dx = l > 0 || !dx.empty();
      gin.assign(need_dx ? layers_[l].W->cols() : 0, 0.0);
      dense_backward(c.acts[l], c.acts[l + 1], g, *layers_[l].W, *layers_[l].b, layers_[l].act, gin);
      g.swap(gin);
    }
    if (!dx.empty()) std::copy(g.begin(), g.end(), dx.begin());
  }

 private:
  struct Layer {
    ParamTensor* W;
    ParamTensor* b;
    Activation act;
  };
  std::vector<Layer> layers_;
  std::size_t in_ = 0, out_ = 0;
};

}  // namespace spendlab
