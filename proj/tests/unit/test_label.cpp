#include <gtest/gtest.h>

#include <cmath>

#include "helpers.hpp"
#include "spendlab/data/generate.hpp"
#include "spendlab/label/standardize.hpp"

using namespace spendlab;
using namespace spendlab::test;

namespace {

GameSpendStats stats_of(const std::vector<double>& xs) {
  std::vector<Interaction> rows;
  for (double x : xs) rows.push_back({1, 0, 1, x});
  return build_game_stats(make_dataset(rows, {profile(1, {0})}), true).at(0);
}

}  // namespace

TEST(GameSided, Examples) {
  const auto s = stats_of({10, 20, 30});
  EXPECT_EQ(game_sided(20.0, s), 0.0);
  EXPECT_NEAR(game_sided(30.0, s), 1.2247, 5e-5);
  EXPECT_NEAR(game_sided(30.0, s), 10.0 / std::sqrt(200.0 / 3.0), 1e-12);
  EXPECT_EQ(game_sided(123.0, stats_of({5})), 0.0);
}

TEST(GameSided, ColdGameRaises) {
  GameStatsMap m{{0, stats_of({1, 2})}};
  EXPECT_THROW(game_sided(3.0, 7, m), ColdGameError);
  try {
    game_sided(3.0, 7, m);
  } catch (const ColdGameError& e) {
    EXPECT_EQ(e.game(), 7);
  }
}

TEST(GameSided, InvariantUnderAffineRescaling) {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> xs(2 + trial % 7);
    for (auto& x : xs) x = 100.0 * uniform01(rng);
    const double a = 0.1 + 10.0 * uniform01(rng), b = 50.0 * uniform01(rng) - 25.0;
    std::vector<double> ys;
    for (double x : xs) ys.push_back(a * x + b);
    const auto sx = stats_of(xs), sy = stats_of(ys);
    for (double x : xs) EXPECT_NEAR(game_sided(x, sx), game_sided(a * x + b, sy), 1e-9);
  }
}

TEST(UserSided, Examples) {
  EXPECT_DOUBLE_EQ(user_sided(50.0, 500.0, 10, 99.0), 1.0);
  EXPECT_EQ(user_sided(0.0, 500.0, 10, 99.0), 0.0);
  EXPECT_DOUBLE_EQ(user_sided(20.0, 0.0, 0, 10.0), 2.0);
}

TEST(UserSided, InvariantUnderCurrencyScaling) {
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const double s = 100.0 * uniform01(rng), t = 1.0 + 1000.0 * uniform01(rng), a = 0.01 + 50.0 * uniform01(rng);
    const std::int32_t f = 1 + static_cast<std::int32_t>(20.0 * uniform01(rng));
    EXPECT_NEAR(user_sided(s, t, f, 1.0), user_sided(a * s, a * t, f, 1.0), 1e-9);
  }
}

TEST(BothSided, Examples) {
  NormStats n;
  n.g_mean = 1.5;
  n.g_std = 2.0;
  n.u_mean = 0.7;
  n.u_std = 0.3;
  EXPECT_EQ(combine_both_sided(1.5, 0.7, n), 0.0);
  EXPECT_DOUBLE_EQ(combine_both_sided(3.5, 0.7, n), 0.5);
}

TEST(BothSided, MatchesRecomputation) {
  Rng rng(9);
  for (int trial = 0; trial < 200; ++trial) {
    NormStats n;
    n.g_mean = uniform01(rng) - 0.5;
    n.g_std = 0.1 + uniform01(rng);
    n.u_mean = 2.0 * uniform01(rng);
    n.u_std = 0.1 + 3.0 * uniform01(rng);
    const double g = 4.0 * uniform01(rng) - 2.0, u = 5.0 * uniform01(rng);
    const double zg = (g - n.g_mean) / n.g_std;
    const double zu = (u - n.u_mean) / n.u_std;
    EXPECT_NEAR(combine_both_sided(g, u, n), (zg + zu) / 2.0, 1e-12);
  }
}

TEST(Standardizer, ZeroSpendIsZeroUnderEveryScheme) {
  GenConfig g;
  g.n_users = 400;
  const auto ds = generate_synthetic(g);
  for (auto scheme : {Scheme::kOV, Scheme::kLog, Scheme::kUS, Scheme::kGS, Scheme::kBS}) {
    const auto lab = standardize_dataset(ds, scheme);
    for (std::size_t i = 0; i < ds.size(); ++i) {
      if (ds.interactions[i].spend == 0.0) ASSERT_EQ(lab.targets[i], 0.0) << scheme_name(scheme);
    }
  }
}

TEST(Standardizer, OvIsIdentityAndLogIsLog1p) {
  GenConfig g;
  g.n_users = 300;
  const auto ds = generate_synthetic(g);
  const auto ov = standardize_dataset(ds, Scheme::kOV);
  const auto lg = standardize_dataset(ds, Scheme::kLog);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    EXPECT_EQ(ov.targets[i], ds.interactions[i].spend);
    EXPECT_EQ(lg.targets[i], std::log1p(ds.interactions[i].spend));
  }
}

TEST(Standardizer, ColdUserAndColdGameFallbacks) {
  // Game 0 has history; game 1 appears only at transform time.
  const auto train = make_dataset({{1, 0, 1, 10.0}, {1, 0, 2, 30.0}, {2, 0, 3, 0.0}},
                                  {profile(1, {0}, 100.0, 5), profile(2, {1})});
  StandardizeConfig cfg;
  cfg.scheme = Scheme::kUS;
  const auto us = Standardizer::fit(train, cfg);
  EXPECT_DOUBLE_EQ(us.global_mean_nonzero(), 20.0);
  EXPECT_DOUBLE_EQ(us.transform({2, 0, 5, 40.0}, train.profile(2)), 2.0);

  cfg.scheme = Scheme::kGS;
  const auto gs = Standardizer::fit(train, cfg);
  EXPECT_EQ(gs.transform({1, 1, 5, 40.0}, train.profile(1)), 0.0);

  cfg.scheme = Scheme::kBS;
  const auto bs = Standardizer::fit(train, cfg);
  const auto& n = bs.norm();
  const double u = user_sided(40.0, 100.0, 5, 20.0);
  EXPECT_NEAR(bs.transform({1, 1, 5, 40.0}, train.profile(1)), (u - n.u_mean) / n.u_std, 1e-12);
}

TEST(Standardizer, BsMomentsCoverEveryTrainingRow) {
  GenConfig g;
  g.n_users = 500;
  const auto ds = generate_synthetic(g);
  const auto lab = standardize_dataset(ds, Scheme::kBS);
  const auto& n = lab.standardizer.norm();
  // Recompute the user-side moments directly.
  double s = 0.0, ss = 0.0;
  for (const auto& r : ds.interactions) {
    const auto& p = ds.profile(r.user);
    const double u = user_sided(r.spend, p.total_spend_180, p.payment_count_180,
                                lab.standardizer.global_mean_nonzero());
    s += u;
    ss += u * u;
  }
  const double m = s / static_cast<double>(ds.size());
  EXPECT_NEAR(n.u_mean, m, 1e-12);
  EXPECT_NEAR(n.u_std, std::sqrt(ss / static_cast<double>(ds.size()) - m * m), 1e-9);
}

TEST(Standardizer, NormStatsJsonRoundTrip) {
  NormStats n{Scheme::kBS, 0.1, 2.0, -0.3, 4.0};
  nlohmann::json j = n;
  EXPECT_EQ(j.get<NormStats>(), n);
}

TEST(Scheme, ParsesCaseInsensitively) {
  EXPECT_EQ(parse_scheme("BS"), Scheme::kBS);
  EXPECT_EQ(parse_scheme("Log"), Scheme::kLog);
  EXPECT_THROW(parse_scheme("zs"), ConfigError);
}
