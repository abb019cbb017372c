#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "spendlab/data/generate.hpp"
#include "spendlab/data/io.hpp"
#include "spendlab/data/split.hpp"
#include "spendlab/eval/evaluate.hpp"
#include "spendlab/eval/stability.hpp"
#include "spendlab/label/standardize.hpp"
#include "spendlab/model/zoo.hpp"
#include "spendlab/train/train.hpp"

namespace spendlab {

struct ExperimentConfig {
  GenConfig gen;
  // When set, data is loaded from this directory instead of generated.
  std::optional<std::filesystem::path> data_dir;
  StandardizeConfig standardize;
  ModelConfig model;
  TrainConfig train;
  EvalConfig eval;
  std::int32_t train_days = 30;
  // Trailing days of the training window held out for trace points and early stopping.
  std::int32_t validation_days = 1;
  std::size_t trace_cases = 2000;
  std::size_t n_runs = 3;
};

inline nlohmann::ordered_json to_ordered_json(const ExperimentConfig& c) {
  nlohmann::ordered_json gen;
  to_json(gen, c.gen);
  nlohmann::ordered_json j;
  j["data_dir"] = c.data_dir ? nlohmann::ordered_json(c.data_dir->string()) : nlohmann::ordered_json(nullptr);
  j["gen"] = gen;
  j["standardize"] = {{"scheme", scheme_name(c.standardize.scheme)},
                      {"game_stats_include_zeros", c.standardize.game_stats_include_zeros},
                      {"w_game", c.standardize.w_game},
                      {"w_user", c.standardize.w_user}};
  j["model"] = {{"type", c.model.type},
                {"embed_dim", c.model.embed_dim},
                {"pref_sizes", c.model.pref_sizes},
                {"cross_layers", c.model.cross_layers},
                {"head_sizes", c.model.head_sizes}};
  j["train"] = {{"batch_size", c.train.batch_size}, {"epochs", c.train.epochs},
                {"lr", c.train.lr},                 {"seed", c.train.seed},
                {"eval_every", c.train.eval_every}, {"streaming", c.train.streaming},
                {"zero_ratio", c.train.zero_ratio}, {"patience", c.train.patience},
                {"shuffle", c.train.shuffle}};
  j["eval"] = {{"ks", c.eval.ks},
               {"n_negatives", c.eval.n_negatives},
               {"seed", c.eval.seed},
               {"exclude_user_games", c.eval.exclude_user_games},
               {"paid_positives", c.eval.paid_positives},
               {"max_cases", c.eval.max_cases},
               {"threads", c.eval.threads}};
  j["train_days"] = c.train_days;
  j["validation_days"] = c.validation_days;
  j["trace_cases"] = c.trace_cases;
  j["n_runs"] = c.n_runs;
  return j;
}

// Data shared by every run of an experiment: the split, the labels and the
// feature builder. Labels are fitted on the rows that are trained on.
struct PreparedData {
  Dataset full;
  Dataset train;  // days <= train_days
  Dataset test;   // days > train_days
  Dataset fit;    // train minus the validation days
  std::optional<Dataset> valid;
  FeatureBuilder features;
  LabeledDataset labels;
  std::vector<Example> examples;
};

inline Dataset load_or_generate(const ExperimentConfig& cfg) {
  if (cfg.data_dir) return load_dataset(dataset_paths_in(*cfg.data_dir));
  return generate_synthetic(cfg.gen);
}

inline PreparedData prepare(Dataset full, const ExperimentConfig& cfg) {
  PreparedData p;
  p.full = std::move(full);
  std::tie(p.train, p.test) = split_temporal(p.full, cfg.train_days);
  if (cfg.validation_days > 0) {
    if (cfg.validation_days >= cfg.train_days) throw ConfigError("validation_days must be < train_days");
    auto [fit, valid] = split_temporal(p.train, cfg.train_days - cfg.validation_days);
    p.fit = std::move(fit);
    p.valid = std::move(valid);
  } else {
    p.fit = p.train;
  }
  if (p.fit.interactions.empty()) throw DataError("no training rows before the validation window");
  p.features = FeatureBuilder::from_training(p.fit);
  p.labels = standardize_dataset(p.fit, cfg.standardize);
  p.examples = make_examples(p.fit, p.features, p.labels.targets);
  return p;
}

inline PreparedData prepare(const ExperimentConfig& cfg) { return prepare(load_or_generate(cfg), cfg); }

struct RunResult {
  std::uint64_t seed = 0;
  std::unique_ptr<Model> model;
  TrainTrace trace;
  EvalReport report;
  double initial_hr10 = 0.0;  // test HR@10 before training
};

inline ModelConfig model_config_for(const ExperimentConfig& cfg, const PreparedData& data,
                                    std::uint64_t seed) {
  ModelConfig m = cfg.model;
  m.n_users = data.features.n_users();
  m.paid_catalog_size = data.full.paid_catalog_size;
  m.download_catalog_size = data.full.download_catalog_size;
  m.seed = seed;
  return m;
}

// Trains one replica with `seed` driving initialization and batch order, then
// evaluates it on the test days.
inline RunResult run_once(const PreparedData& data, const ExperimentConfig& cfg, std::uint64_t seed) {
  RunResult r;
  r.seed = seed;
  r.model = make_model(model_config_for(cfg, data, seed));
  {
    auto pre = cfg.eval;
    r.initial_hr10 = evaluate_ranking(*r.model, data.test, data.features, pre).hr.at(10);
  }
  TrainConfig tc = cfg.train;
  tc.seed = seed;
  EvalConfig trace_eval = cfg.eval;
  trace_eval.max_cases = cfg.trace_cases;
  trace_eval.ks = {10};
  const Dataset& trace_set = data.valid ? *data.valid : data.test;
  // Without a validation window the trace is informational only.
  if (!data.valid) tc.patience = 0;
  TraceEvaluator ev = [&](const Model& m) {
    const auto rep = evaluate_ranking(m, trace_set, data.features, trace_eval);
    return std::pair{rep.hr.at(10), rep.ndcg.at(10)};
  };
  r.trace = train(*r.model, data.examples, tc, ev);
  r.report = evaluate(*r.model, data.fit, data.test, data.features, cfg.eval);
  return r;
}

inline std::vector<std::uint64_t> run_seeds(std::uint64_t base, std::size_t n) {
  std::vector<std::uint64_t> s(n);
  for (std::size_t i = 0; i < n; ++i) s[i] = base + i;
  return s;
}

struct StabilitySummary {
  std::vector<std::uint64_t> seeds;
  std::vector<EvalReport> reports;
  std::vector<StabilityReport> metrics;  // r2, hr@10, ndcg@10
};

inline StabilitySummary summarize_stability(std::vector<std::uint64_t> seeds,
                                            std::vector<EvalReport> reports) {
  if (reports.size() < 2) throw ConfigError("stability needs at least 2 runs");
  StabilitySummary s;
  s.seeds = std::move(seeds);
  s.reports = std::move(reports);
  std::vector<double> r2, hr, nd;
  for (const auto& rep : s.reports) {
    if (!rep.all.r2) throw NumericError("R2 is undefined on the test set");
    r2.push_back(*rep.all.r2);
    hr.push_back(rep.ranking.hr.at(10));
    nd.push_back(rep.ranking.ndcg.at(10));
  }
  s.metrics = {cov(r2, "r2"), cov(hr, "hr@10"), cov(nd, "ndcg@10")};
  return s;
}

inline StabilitySummary stability_run(const PreparedData& data, const ExperimentConfig& cfg,
                                      const std::vector<std::uint64_t>& seeds) {
  if (seeds.size() < 2) throw ConfigError("stability needs at least 2 runs");
  std::vector<EvalReport> reports;
  for (auto s : seeds) reports.push_back(run_once(data, cfg, s).report);
  return summarize_stability(seeds, std::move(reports));
}

inline nlohmann::ordered_json to_ordered_json(const StabilitySummary& s) {
  nlohmann::ordered_json runs = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < s.reports.size(); ++i) {
    auto j = to_ordered_json(s.reports[i]);
    j["run_seed"] = s.seeds[i];
    runs.push_back(j);
  }
  nlohmann::ordered_json metrics = nlohmann::ordered_json::array();
  for (const auto& m : s.metrics) metrics.push_back(to_ordered_json(m));
  return {{"seeds", s.seeds}, {"metrics", metrics}, {"runs", runs}};
}

}  // namespace spendlab
