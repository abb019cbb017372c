#pragma once

#include <algorithm>
#include <cstdint>
#include <exception>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <thread>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "spendlab/data/types.hpp"
#include "spendlab/eval/ranking.hpp"
#include "spendlab/eval/regression.hpp"
#include "spendlab/model/model.hpp"

namespace spendlab {

struct EvalConfig {
  std::vector<std::size_t> ks{1, 5, 10};
  std::size_t n_negatives = kDefaultNegatives;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
  // Also exclude every other game the user interacted with in the evaluated set.
  bool exclude_user_games = false;
  // Only rows with spend > 0 become ranked cases.
  bool paid_positives = false;
  // Evaluate at most this many cases, evenly strided over the eligible rows (0 = all).
  std::size_t max_cases = 0;
};

struct RankingReport {
  std::map<std::size_t, double> hr;
  std::map<std::size_t, double> ndcg;
  std::size_t n_cases = 0;
  std::vector<std::size_t> ranks;
};

// Fitted raw ~ alpha + beta * score, mapping model scores onto the spend scale.
struct Calibration {
  double alpha = 0.0;
  double beta = 1.0;

  double apply(double score) const { return alpha + beta * score; }
};

inline Calibration fit_calibration(std::span<const double> scores, std::span<const double> raw) {
  Calibration c;
  if (scores.empty()) return c;
  const auto n = static_cast<double>(scores.size());
  double ms = 0.0, mr = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    ms += scores[i];
    mr += raw[i];
  }
  ms /= n;
  mr /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    sxy += (scores[i] - ms) * (raw[i] - mr);
    sxx += (scores[i] - ms) * (scores[i] - ms);
  }
  c.beta = sxx > 0.0 ? sxy / sxx : 0.0;
  c.alpha = mr - c.beta * ms;
  return c;
}

struct EvalReport {
  RankingReport ranking;
  RegressionMetrics all;   // every test row
  RegressionMetrics paid;  // spend > 0 rows
  Calibration calibration;
  std::uint64_t seed = 0;
};

namespace detail {

inline std::vector<std::size_t> case_indices(std::size_t n, std::size_t max_cases) {
  std::vector<std::size_t> idx;
  if (max_cases == 0 || max_cases >= n) {
    idx.resize(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    return idx;
  }
  for (std::size_t i = 0; i < max_cases; ++i) idx.push_back(i * n / max_cases);
  return idx;
}

template <typename Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn&& fn) {
  threads = std::max<std::size_t>(1, std::min(threads, n));
  if (threads == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(threads);
  for (std::size_t t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t i = t; i < n; i += threads) fn(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace detail

// One case per test interaction: the interacted game against n sampled
// negatives. Per-case results are reduced in case order, so the report does not
// depend on the thread count.
inline RankingReport evaluate_ranking(const Model& model, const Dataset& test,
                                      const FeatureBuilder& features, const EvalConfig& cfg) {
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < test.size(); ++i) {
    if (!cfg.paid_positives || test.interactions[i].spend > 0.0) eligible.push_back(i);
  }
  if (eligible.empty()) throw DataError("no ranked cases in the evaluation set");
  std::vector<std::size_t> cases;
  for (auto i : detail::case_indices(eligible.size(), cfg.max_cases)) cases.push_back(eligible[i]);
  std::map<std::int64_t, std::vector<std::int32_t>> user_games;
  if (cfg.exclude_user_games) {
    for (const auto& r : test.interactions) user_games[r.user].push_back(r.game);
  }
  std::vector<std::size_t> ranks(cases.size());
  detail::parallel_for(cases.size(), cfg.threads, [&](std::size_t c) {
    const auto& r = test.interactions[cases[c]];
    std::span<const std::int32_t> exclude;
    if (cfg.exclude_user_games) exclude = user_games.at(r.user);
    const auto neg = sample_negatives(r.game, test.paid_catalog_size, cfg.n_negatives, cfg.seed,
                                      cases[c], exclude);
    std::vector<std::int32_t> slate;
    slate.reserve(neg.size() + 1);
    slate.push_back(r.game);
    slate.insert(slate.end(), neg.begin(), neg.end());
    std::vector<double> scores(slate.size());
    model.score_slate(features.build(r, test.profile(r.user)), slate, scores);
    ranks[c] = rank_positive(scores, 0, cfg.seed, cases[c]);
  });
  RankingReport rep;
  rep.n_cases = cases.size();
  for (auto k : cfg.ks) {
    double hr = 0.0, nd = 0.0;
    for (auto rank : ranks) {
      hr += hr_at_k(rank, k);
      nd += ndcg_at_k(rank, k);
    }
    rep.hr[k] = hr / static_cast<double>(ranks.size());
    rep.ndcg[k] = nd / static_cast<double>(ranks.size());
  }
  rep.ranks = std::move(ranks);
  return rep;
}

inline std::vector<double> score_rows(const Model& model, const Dataset& ds,
                                      const FeatureBuilder& features, std::span<const std::size_t> rows,
                                      std::size_t threads) {
  std::vector<double> out(rows.size());
  detail::parallel_for(rows.size(), threads, [&](std::size_t i) {
    const auto& r = ds.interactions[rows[i]];
    out[i] = model.score(features.build(r, ds.profile(r.user)));
  });
  return out;
}

// Calibration rows: an even stride of at most max_rows training rows.
inline Calibration calibrate(const Model& model, const Dataset& train, const FeatureBuilder& features,
                             std::size_t max_rows = 50000, std::size_t threads = 1) {
  const auto rows = detail::case_indices(train.size(), max_rows);
  const auto scores = score_rows(model, train, features, rows, threads);
  std::vector<double> raw;
  raw.reserve(rows.size());
  for (auto i : rows) raw.push_back(train.interactions[i].spend);
  return fit_calibration(scores, raw);
}

// RMSE and R2 on raw spends through `cal`; AUC on raw scores. Computed over all
// rows and over the spend > 0 subset.
inline std::pair<RegressionMetrics, RegressionMetrics> evaluate_regression(
    const Model& model, const Dataset& test, const FeatureBuilder& features, const Calibration& cal,
    std::size_t threads = 1) {
  std::vector<std::size_t> rows(test.size());
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  const auto scores = score_rows(model, test, features, rows, threads);
  std::vector<double> preds, labels, ps, pl, pscore;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double spend = test.interactions[i].spend;
    preds.push_back(cal.apply(scores[i]));
    labels.push_back(spend);
    if (spend > 0.0) {
      ps.push_back(preds.back());
      pl.push_back(spend);
      pscore.push_back(scores[i]);
    }
  }
  return {regression_metrics(preds, labels, scores), regression_metrics(ps, pl, pscore)};
}

inline EvalReport evaluate(const Model& model, const Dataset& train, const Dataset& test,
                           const FeatureBuilder& features, const EvalConfig& cfg) {
  EvalReport rep;
  rep.seed = cfg.seed;
  rep.ranking = evaluate_ranking(model, test, features, cfg);
  rep.calibration = calibrate(model, train, features, 50000, cfg.threads);
  std::tie(rep.all, rep.paid) = evaluate_regression(model, test, features, rep.calibration, cfg.threads);
  return rep;
}

namespace detail {
inline nlohmann::ordered_json opt_json(const std::optional<double>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}
}  // namespace detail

inline nlohmann::ordered_json to_ordered_json(const RegressionMetrics& m) {
  return {{"n", m.n},
          {"rmse", detail::opt_json(m.rmse)},
          {"r2", detail::opt_json(m.r2)},
          {"auc", detail::opt_json(m.auc)}};
}

inline nlohmann::ordered_json to_ordered_json(const EvalReport& r) {
  nlohmann::ordered_json hr, ndcg;
  for (auto [k, v] : r.ranking.hr) hr[std::to_string(k)] = v;
  for (auto [k, v] : r.ranking.ndcg) ndcg[std::to_string(k)] = v;
  return {{"seed", r.seed},
          {"n_cases", r.ranking.n_cases},
          {"hr", hr},
          {"ndcg", ndcg},
          {"regression", {{"all", to_ordered_json(r.all)}, {"paid", to_ordered_json(r.paid)}}},
          {"calibration", {{"alpha", r.calibration.alpha}, {"beta", r.calibration.beta}}}};
}

}  // namespace spendlab
