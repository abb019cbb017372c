#include <gtest/gtest.h>

#include <cmath>

#include "helpers.hpp"
#include "spendlab/pipeline/experiment.hpp"

using namespace spendlab;
using namespace spendlab::test;

namespace {

const PreparedData& small_data() {
  static const PreparedData data = [] {
    ExperimentConfig cfg;
    cfg.gen.n_users = 500;
    cfg.gen.n_download_games = 150;
    cfg.gen.exposures_per_user = 5.0;
    cfg.gen.seed = 2;
    return prepare(cfg);
  }();
  return data;
}

std::unique_ptr<Model> fresh(const std::string& type, std::uint64_t seed = 1) {
  ExperimentConfig cfg;
  cfg.model.type = type;
  return make_model(model_config_for(cfg, small_data(), seed));
}

}  // namespace

TEST(Loss, MseExamples) {
  EXPECT_DOUBLE_EQ(mse_loss(std::vector<double>{1, 2}, std::vector<double>{1, 4}), 2.0);
  EXPECT_EQ(mse_loss(std::vector<double>{3}, std::vector<double>{3}), 0.0);
  EXPECT_THROW(mse_loss(std::vector<double>{}, std::vector<double>{}), DataError);
  EXPECT_THROW(mse_loss(std::vector<double>{1}, std::vector<double>{1, 2}), DataError);
}

TEST(Train, ZeroLearningRateIsAFixedPoint) {
  auto m = fresh("collab");
  const auto before = m->params().snapshot();
  TrainConfig tc;
  tc.lr = 0.0;
  tc.epochs = 1;
  tc.batch_size = 64;
  train(*m, small_data().examples, tc);
  EXPECT_EQ(m->params().snapshot(), before);
}

TEST(Train, SameConfigSameTraceAndParameters) {
  TrainConfig tc;
  tc.lr = 1e-3;
  tc.epochs = 2;
  tc.batch_size = 128;
  tc.seed = 5;
  tc.eval_every = 7;
  TraceEvaluator ev = [](const Model& m) {
    const auto& d = small_data();
    EvalConfig ec;
    ec.max_cases = 50;
    ec.ks = {10};
    const auto r = evaluate_ranking(m, d.test, d.features, ec);
    return std::pair{r.hr.at(10), r.ndcg.at(10)};
  };
  auto a = fresh("crossnet", 3), b = fresh("crossnet", 3);
  const auto ta = train(*a, small_data().examples, tc, ev);
  const auto tb = train(*b, small_data().examples, tc, ev);
  ASSERT_EQ(ta.points.size(), tb.points.size());
  for (std::size_t i = 0; i < ta.points.size(); ++i) {
    EXPECT_EQ(ta.points[i].step, tb.points[i].step);
    EXPECT_EQ(ta.points[i].loss, tb.points[i].loss);
    EXPECT_EQ(ta.points[i].hr10, tb.points[i].hr10);
  }
  EXPECT_EQ(a->params().snapshot(), b->params().snapshot());
}

TEST(Train, TrainingReducesLoss) {
  auto m = fresh("crossnet");
  TrainConfig tc;
  tc.lr = 3e-3;
  tc.epochs = 3;
  tc.batch_size = 64;
  tc.zero_ratio = 0.0;  // the loss below is over every row
  const auto& ex = small_data().examples;
  auto mean_loss = [&] {
    double l = 0.0;
    for (const auto& e : ex) l += (m->score(e.features) - e.target) * (m->score(e.features) - e.target);
    return l / static_cast<double>(ex.size());
  };
  const double before = mean_loss();
  train(*m, ex, tc);
  EXPECT_LT(mean_loss(), before);
}

TEST(Train, EpochRowsKeepEveryPayerAndRatioOfZeros) {
  const auto& ex = small_data().examples;
  std::size_t paid = 0;
  for (const auto& e : ex) paid += e.spend > 0.0 ? 1 : 0;
  TrainConfig tc;
  tc.zero_ratio = 2.0;
  const auto rows = epoch_rows(ex, tc, 0);
  std::size_t got_paid = 0;
  for (auto r : rows) got_paid += ex[r].spend > 0.0 ? 1 : 0;
  EXPECT_EQ(got_paid, paid);
  EXPECT_EQ(rows.size(), std::min(ex.size(), 3 * paid));
  EXPECT_NE(epoch_rows(ex, tc, 0), epoch_rows(ex, tc, 1));
  tc.zero_ratio = 0.0;
  tc.shuffle = false;
  const auto all = epoch_rows(ex, tc, 0);
  ASSERT_EQ(all.size(), ex.size());
  for (std::size_t i = 0; i < all.size(); ++i) EXPECT_EQ(all[i], i);
}

TEST(Train, EarlyStoppingRestoresBestParameters) {
  auto m = fresh("mf");
  const auto initial = m->params().snapshot();
  TrainConfig tc;
  tc.lr = 1e-2;
  tc.epochs = 10;
  tc.batch_size = 256;
  tc.eval_every = 2;
  tc.patience = 2;
  int calls = 0;
  // The untrained model scores best, so training must roll back to it.
  TraceEvaluator ev = [&](const Model&) {
    const double hr = calls++ == 0 ? 0.9 : 0.1;
    return std::pair{hr, hr};
  };
  const auto trace = train(*m, small_data().examples, tc, ev);
  EXPECT_TRUE(trace.stopped_early);
  EXPECT_EQ(trace.best_step, 0);
  EXPECT_EQ(trace.points.size(), 3u);
  EXPECT_EQ(m->params().snapshot(), initial);
}

TEST(Train, InvalidConfigsRejected) {
  auto m = fresh("mf");
  TrainConfig tc;
  tc.batch_size = 0;
  EXPECT_THROW(train(*m, small_data().examples, tc), ConfigError);
  tc = {};
  tc.lr = -1.0;
  EXPECT_THROW(train(*m, small_data().examples, tc), ConfigError);
  EXPECT_THROW(train(*m, std::span<const Example>{}, TrainConfig{}), DataError);
}

TEST(Train, NonFiniteLossNamesTheStep) {
  auto m = fresh("mf");
  std::vector<Example> ex(small_data().examples.begin(), small_data().examples.begin() + 4);
  ex[2].target = std::numeric_limits<double>::infinity();
  TrainConfig tc;
  tc.zero_ratio = 0.0;
  try {
    train(*m, ex, tc);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("step 0"), std::string::npos);
  }
}

TEST(Trace, CsvHeaderAndRows) {
  TrainTrace t;
  t.points = {{0, 1.5, 0.1, 0.05}, {10, 1.25, 0.2, 0.1}};
  TempDir dir("trace");
  t.write_csv(dir / "trace.csv");
  const auto text = read_text(dir / "trace.csv");
  EXPECT_EQ(text.substr(0, text.find('\n')), "step,loss,hr10,ndcg10");
  EXPECT_NE(text.find("\n10,1.25,"), std::string::npos);
}

namespace {

std::vector<StreamRecord> stream_of(const Dataset& ds, std::size_t n) {
  std::vector<StreamRecord> out;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = ds.interactions[i];
    out.push_back({r, ds.profile(r.user)});
  }
  return out;
}

}  // namespace

TEST(Streaming, MatchesUnshuffledSingleEpoch) {
  const auto& d = small_data();
  const std::size_t n = 600, batch = 50;
  const auto stream = stream_of(d.fit, n);
  std::vector<Example> ex(d.examples.begin(), d.examples.begin() + static_cast<std::ptrdiff_t>(n));

  auto a = fresh("collab", 4), b = fresh("collab", 4);
  TrainConfig tc;
  tc.lr = 1e-3;
  tc.epochs = 1;
  tc.batch_size = batch;
  tc.zero_ratio = 0.0;
  tc.shuffle = false;
  train(*a, ex, tc);

  AdamConfig ac;
  ac.lr = tc.lr;
  AdamState opt(b->params(), ac);
  for (std::size_t s = 0; s < n; s += batch) {
    streaming_update(*b, opt, d.features, d.labels.standardizer,
                     std::span<const StreamRecord>(stream).subspan(s, batch), static_cast<std::int64_t>(s / batch));
  }
  const auto pa = a->params().snapshot(), pb = b->params().snapshot();
  double worst = 0.0;
  for (std::size_t t = 0; t < pa.size(); ++t) {
    for (std::size_t i = 0; i < pa[t].size(); ++i) worst = std::max(worst, std::abs(pa[t][i] - pb[t][i]));
  }
  EXPECT_LE(worst, 1e-12);
}

TEST(Streaming, EmptyBatchIsANoOp) {
  const auto& d = small_data();
  auto m = fresh("crossnet");
  AdamState opt(m->params(), AdamConfig{});
  const auto before = m->params().snapshot();
  EXPECT_EQ(streaming_update(*m, opt, d.features, d.labels.standardizer, {}), 0.0);
  EXPECT_EQ(m->params().snapshot(), before);
}

TEST(Streaming, UnseenUserIsAccepted) {
  const auto& d = small_data();
  auto m = fresh("collab");
  AdamConfig ac;
  ac.lr = 1e-2;
  AdamState opt(m->params(), ac);
  StreamRecord rec;
  rec.row = {987654321, 3, 31, 12.0};
  rec.profile = profile(987654321, {1, 2, 3}, 40.0, 2);
  const auto before = m->params().snapshot();
  const double loss = streaming_update(*m, opt, d.features, d.labels.standardizer, std::span(&rec, 1));
  EXPECT_TRUE(std::isfinite(loss));
  EXPECT_NE(m->params().snapshot(), before);
}

TEST(Streaming, BadHistoryIsADataError) {
  const auto& d = small_data();
  auto m = fresh("collab");
  AdamState opt(m->params(), AdamConfig{});
  StreamRecord rec;
  rec.row = {5, 3, 31, 0.0};
  rec.profile = profile(5, {d.features.download_catalog_size()});
  EXPECT_THROW(streaming_update(*m, opt, d.features, d.labels.standardizer, std::span(&rec, 1)), DataError);
}

TEST(Stability, IdenticalSeedsGiveZeroCov) {
  const auto& d = small_data();
  ExperimentConfig cfg;
  cfg.model.type = "mf";
  cfg.train.epochs = 1;
  cfg.train.lr = 1e-3;
  cfg.trace_cases = 50;
  cfg.eval.max_cases = 100;
  const auto s = stability_run(d, cfg, {6, 6});
  ASSERT_EQ(s.metrics.size(), 3u);
  for (const auto& m : s.metrics) {
    ASSERT_TRUE(m.cov.has_value()) << m.metric;
    EXPECT_EQ(*m.cov, 0.0) << m.metric;
  }
  const auto j = to_ordered_json(s);
  EXPECT_EQ(j["runs"].size(), 2u);
  EXPECT_EQ(j["metrics"][0]["metric"], "r2");
  EXPECT_EQ(j["metrics"][1]["metric"], "hr@10");
  EXPECT_THROW(stability_run(d, cfg, {6}), ConfigError);
}
