#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "spendlab/label/standardize.hpp"
#include "spendlab/model/model.hpp"
#include "spendlab/tensor/adam.hpp"

namespace spendlab {

inline double mse_loss(std::span<const double> preds, std::span<const double> targets) {
  if (preds.empty()) throw DataError("mse_loss needs a non-empty batch");
  if (preds.size() != targets.size()) throw DataError("mse_loss needs equal-length inputs");
  double s = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) s += (preds[i] - targets[i]) * (preds[i] - targets[i]);
  return s / static_cast<double>(preds.size());
}

struct TrainConfig {
  Scheme scheme = Scheme::kBS;
  std::size_t batch_size = 1024;
  std::int32_t epochs = 10;  // upper bound when early stopping is active
  double lr = 1e-5;
  std::uint64_t seed = 0;
  std::int64_t eval_every = 0;  // steps between trace points; 0 = once per epoch
  bool streaming = false;
  // Zero-spend rows kept per nonzero row, redrawn every epoch; 0 keeps all rows.
  double zero_ratio = 4.0;
  // Trace points without a validation HR@10 gain before stopping; 0 disables.
  std::int32_t patience = 3;
  bool shuffle = true;

  void validate() const {
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
    if (!(lr >= 0.0) || !std::isfinite(lr)) throw ConfigError("lr must be finite and >= 0");
    if (!(zero_ratio >= 0.0)) throw ConfigError("zero_ratio must be >= 0");
    if (eval_every < 0) throw ConfigError("eval_every must be >= 0");
    if (patience < 0) throw ConfigError("patience must be >= 0");
  }
};

struct TracePoint {
  std::int64_t step = 0;
  double loss = 0.0;  // mean minibatch loss since the previous point
  double hr10 = 0.0;
  double ndcg10 = 0.0;
};

struct TrainTrace {
  std::vector<TracePoint> points;
  std::int64_t steps = 0;
  std::int64_t best_step = 0;  // step whose parameters were kept
  bool stopped_early = false;

  void write_csv(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    out << "step,loss,hr10,ndcg10\n";
    char buf[128];
    for (const auto& p : points) {
      std::snprintf(buf, sizeof buf, "%lld,%.17g,%.17g,%.17g\n", static_cast<long long>(p.step), p.loss,
                    p.hr10, p.ndcg10);
      out << buf;
    }
  }
};

// Returns (HR@10, NDCG@10) for the current parameters.
using TraceEvaluator = std::function<std::pair<double, double>(const Model&)>;

// One Adam step on the mean loss of `batch`; returns that loss (before the step).
template <typename Fetch>
double train_step(Model& model, AdamState& opt, std::size_t n, Fetch&& fetch, std::int64_t step) {
  if (n == 0) return 0.0;
  const double w = 1.0 / static_cast<double>(n);
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) loss += model.accumulate(fetch(i), w);
  loss *= w;
  if (!std::isfinite(loss)) {
    model.params().zero_grad();
    throw NumericError("non-finite training loss at step " + std::to_string(step));
  }
  opt.step(model.params());
  return loss;
}

inline double train_step(Model& model, AdamState& opt, std::span<const Example> batch,
                         std::int64_t step = 0) {
  return train_step(model, opt, batch.size(), [&](std::size_t i) -> const Example& { return batch[i]; },
                    step);
}

// Rows used in one epoch: every nonzero row plus zero_ratio zero rows per
// nonzero row, in original order or shuffled.
inline std::vector<std::size_t> epoch_rows(std::span<const Example> data, const TrainConfig& cfg,
                                           std::int32_t epoch) {
  std::vector<std::size_t> rows;
  auto rng = make_rng(cfg.seed, streams::kShuffle, static_cast<std::uint64_t>(epoch));
  if (cfg.zero_ratio <= 0.0) {
    rows.resize(data.size());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
  } else {
    std::vector<std::size_t> zeros;
    for (std::size_t i = 0; i < data.size(); ++i) {
      (data[i].spend > 0.0 ? rows : zeros).push_back(i);
    }
    const auto keep = std::min(
        zeros.size(), static_cast<std::size_t>(std::llround(cfg.zero_ratio * static_cast<double>(rows.size()))));
    for (std::size_t i = 0; i < keep; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, zeros.size() - 1);
      std::swap(zeros[i], zeros[pick(rng)]);
    }
    rows.insert(rows.end(), zeros.begin(), zeros.begin() + static_cast<std::ptrdiff_t>(keep));
    std::sort(rows.begin(), rows.end());
  }
  if (cfg.shuffle) std::shuffle(rows.begin(), rows.end(), rng);
  return rows;
}

// Minibatch Adam on MSE (or the model's own loss). With an evaluator, a trace
// point is recorded at step 0 and every eval_every steps; with patience > 0 the
// parameters with the best HR@10 are restored at the end.
inline TrainTrace train(Model& model, std::span<const Example> data, const TrainConfig& cfg,
                        const TraceEvaluator& evaluator = {}) {
  cfg.validate();
  if (data.empty()) throw DataError("cannot train on an empty dataset");
  AdamConfig acfg;
  acfg.lr = cfg.lr;
  AdamState opt(model.params(), acfg);
  TrainTrace trace;

  double best = -1.0;
  std::vector<std::vector<double>> best_params;
  std::int32_t since_best = 0;
  double loss_sum = 0.0;
  std::int64_t loss_n = 0;
  bool pending_initial = false;

  auto record = [&](std::int64_t step) {
    TracePoint p;
    p.step = step;
    p.loss = loss_n > 0 ? loss_sum / static_cast<double>(loss_n) : 0.0;
    loss_sum = 0.0;
    loss_n = 0;
    if (evaluator) std::tie(p.hr10, p.ndcg10) = evaluator(model);
    trace.points.push_back(p);
    if (evaluator && cfg.patience > 0) {
      if (p.hr10 > best) {
        best = p.hr10;
        best_params = model.params().snapshot();
        trace.best_step = step;
        since_best = 0;
      } else {
        ++since_best;
      }
    }
  };

  if (evaluator) {
    record(0);
    pending_initial = true;
  }
  std::int64_t step = 0;
  bool stop = false;
  for (std::int32_t epoch = 0; epoch < cfg.epochs && !stop; ++epoch) {
    const auto rows = epoch_rows(data, cfg, epoch);
    for (std::size_t start = 0; start < rows.size() && !stop; start += cfg.batch_size) {
      const std::size_t n = std::min(cfg.batch_size, rows.size() - start);
      const double loss = train_step(
          model, opt, n, [&](std::size_t i) -> const Example& { return data[rows[start + i]]; }, step);
      if (pending_initial) {
        // The step-0 point reports the loss of the untrained model on the first batch.
        trace.points.front().loss = loss;
        pending_initial = false;
      }
      ++step;
      loss_sum += loss;
      ++loss_n;
      if (evaluator && cfg.eval_every > 0 && step % cfg.eval_every == 0) {
        record(step);
        if (cfg.patience > 0 && since_best >= cfg.patience) {
          stop = true;
          trace.stopped_early = true;
        }
      }
    }
    if (evaluator && cfg.eval_every == 0 && !stop) {
      record(step);
      if (cfg.patience > 0 && since_best >= cfg.patience) {
        stop = true;
        trace.stopped_early = true;
      }
    }
  }
  if (evaluator && loss_n > 0) record(step);
  trace.steps = step;
  if (!evaluator || cfg.patience == 0) trace.best_step = step;
  if (!best_params.empty()) model.params().restore(best_params);
  return trace;
}

// A row arriving on the stream: the interaction and its user's profile.
struct StreamRecord {
  Interaction row;
  UserProfile profile;
};

// One step on an incoming batch with frozen label statistics. Equal to the
// corresponding step of an unshuffled train() over the same rows.
inline double streaming_update(Model& model, AdamState& opt, const FeatureBuilder& features,
                               const Standardizer& standardizer, std::span<const StreamRecord> batch,
                               std::int64_t step = 0) {
  if (batch.empty()) return 0.0;
  std::vector<Example> ex;
  ex.reserve(batch.size());
  for (const auto& rec : batch) {
    validate_profile(rec.profile, features.download_catalog_size(), "stream row");
    Example e;
    e.features = features.build(rec.row, rec.profile);
    e.target = standardizer.transform(rec.row, rec.profile);
    e.spend = rec.row.spend;
    ex.push_back(e);
  }
  return train_step(model, opt, ex, step);
}

inline std::vector<Example> make_examples(const Dataset& ds, const FeatureBuilder& features,
                                          const std::vector<double>& targets) {
  if (targets.size() != ds.size()) throw DataError("targets do not match the dataset");
  std::vector<Example> out;
  out.reserve(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto& r = ds.interactions[i];
    out.push_back({features.build(r, ds.profile(r.user)), targets[i], r.spend});
  }
  return out;
}

}  // namespace spendlab
