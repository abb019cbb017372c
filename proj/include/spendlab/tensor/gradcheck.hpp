#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "spendlab/tensor/param.hpp"

namespace spendlab {

struct GradCheckOptions {
  double eps = 1e-5;
  // Coordinates checked per tensor; larger tensors are subsampled.
  std::size_t max_coords_per_tensor = 64;
  // Relative errors are computed against max(|analytic|, |numeric|, abs_floor).
  double abs_floor = 1e-6;
  std::uint64_t seed = 0;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string tensor;
  std::size_t index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t coords_checked = 0;
};

// `loss(with_grad)` must return a deterministic scalar and, when with_grad is
// true, accumulate its gradient into the parameter grads.
inline GradCheckResult grad_check(const std::function<double(bool)>& loss, ParamSet& params,
                                  const GradCheckOptions& opt = {}) {
  params.zero_grad();
  loss(true);
  std::vector<std::vector<double>> analytic;
  for (std::size_t t = 0; t < params.size(); ++t) analytic.push_back(params[t].grad);
  params.zero_grad();

  GradCheckResult res;
  auto rng = make_rng(opt.seed, streams::kGradCheck);
  for (std::size_t t = 0; t < params.size(); ++t) {
    auto& p = params[t];
    std::vector<std::size_t> idx(p.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    if (idx.size() > opt.max_coords_per_tensor) {
      // Every coordinate with a nonzero analytic gradient is a candidate first.
      std::stable_partition(idx.begin(), idx.end(),
                            [&](std::size_t i) { return analytic[t][i] != 0.0; });
      const auto nonzero = static_cast<std::size_t>(
          std::count_if(analytic[t].begin(), analytic[t].end(), [](double g) { return g != 0.0; }));
      const std::size_t take_nz = std::min(nonzero, opt.max_coords_per_tensor * 3 / 4);
      std::shuffle(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(nonzero), rng);
      std::shuffle(idx.begin() + static_cast<std::ptrdiff_t>(nonzero), idx.end(), rng);
      std::vector<std::size_t> pick(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(take_nz));
      const std::size_t rest = opt.max_coords_per_tensor - take_nz;
      for (std::size_t i = 0; i < rest && nonzero + i < idx.size(); ++i) pick.push_back(idx[nonzero + i]);
      idx = std::move(pick);
    }
    for (auto i : idx) {
      const double orig = p.values[i];
      p.values[i] = orig + opt.eps;
      const double up = loss(false);
      p.values[i] = orig - opt.eps;
      const double down = loss(false);
      p.values[i] = orig;
      const double numeric = (up - down) / (2.0 * opt.eps);
      const double a = analytic[t][i];
      const double denom = std::max({std::abs(a), std::abs(numeric), opt.abs_floor});
      const double err = std::abs(a - numeric) / denom;
      ++res.coords_checked;
      if (res.coords_checked == 1 || err > res.max_rel_error) {
        res.max_rel_error = err;
        res.tensor = p.name;
        res.index = i;
        res.analytic = a;
        res.numeric = numeric;
      }
    }
  }
  return res;
}

}  // namespace spendlab
