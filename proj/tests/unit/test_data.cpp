#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "helpers.hpp"
#include "spendlab/data/generate.hpp"
#include "spendlab/data/io.hpp"
#include "spendlab/data/split.hpp"

using namespace spendlab;
using namespace spendlab::test;

TEST(Io, LoadsThreeRowJsonl) {
  TempDir dir("io3");
  write_text(dir / "i.jsonl",
             "{\"user\":1,\"game\":2,\"day\":1,\"spend\":0}\n"
             "{\"user\":1,\"game\":3,\"day\":2,\"spend\":4.5}\n"
             "{\"user\":2,\"game\":2,\"day\":31,\"spend\":0}\n");
  write_text(dir / "p.jsonl",
             "{\"user\":1,\"history\":[0,1],\"t180\":10,\"f180\":2}\n"
             "{\"user\":2,\"history\":[3],\"t180\":0,\"f180\":0}\n");
  const auto ds = load_dataset(dir / "i.jsonl", InteractionFormat::kJsonl, dir / "p.jsonl");
  ASSERT_EQ(ds.size(), 3u);
  EXPECT_EQ(ds.interactions[1], (Interaction{1, 3, 2, 4.5}));
  EXPECT_EQ(ds.paid_catalog_size, 4);
  EXPECT_EQ(ds.download_catalog_size, 4);
}

TEST(Io, NegativeSpendNamesTheRow) {
  TempDir dir("ioneg");
  write_text(dir / "i.jsonl",
             "{\"user\":1,\"game\":2,\"day\":1,\"spend\":0}\n"
             "{\"user\":1,\"game\":2,\"day\":1,\"spend\":-1}\n");
  try {
    load_interactions(dir / "i.jsonl", InteractionFormat::kJsonl);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("row 2"), std::string::npos) << e.what();
  }
}

TEST(Io, CsvErrorsNameRowAndColumn) {
  TempDir dir("iocsv");
  write_text(dir / "i.csv", "user,game,day,spend\n1,2,1,0\n1,x,1,0\n");
  try {
    load_interactions(dir / "i.csv", InteractionFormat::kCsv);
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("row 2"), std::string::npos) << msg;
    EXPECT_NE(msg.find("'game'"), std::string::npos) << msg;
  }
}

TEST(Io, HistoryLongerThanTenIsRejected) {
  TempDir dir("iohist");
  write_text(dir / "p.jsonl", "{\"user\":1,\"history\":[0,1,2,3,4,5,6,7,8,9,10],\"t180\":0,\"f180\":0}\n");
  try {
    load_profiles(dir / "p.jsonl");
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("history length > 10"), std::string::npos) << e.what();
  }
}

TEST(Io, ProfileWithoutPaymentsMustHaveZeroSpend) {
  EXPECT_THROW(validate_profile(profile(1, {0}, 5.0, 0), 0, "p"), DataError);
  EXPECT_NO_THROW(validate_profile(profile(1, {0}, 0.0, 0), 0, "p"));
}

TEST(Io, SaveLoadRoundTrip) {
  GenConfig g;
  g.n_users = 200;
  g.seed = 3;
  const auto ds = generate_synthetic(g);
  TempDir dir("iort");
  save_dataset(ds, dir.path());
  const auto back = load_dataset(dataset_paths_in(dir.path()));
  EXPECT_EQ(back.interactions, ds.interactions);
  EXPECT_EQ(*back.profiles, *ds.profiles);
  EXPECT_EQ(back.paid_catalog_size, ds.paid_catalog_size);
  EXPECT_EQ(back.download_catalog_size, ds.download_catalog_size);
}

TEST(Io, CsvRoundTrip) {
  GenConfig g;
  g.n_users = 50;
  const auto ds = generate_synthetic(g);
  TempDir dir("iocsvrt");
  write_interactions_csv(ds.interactions, dir / "i.csv");
  EXPECT_EQ(load_interactions(dir / "i.csv", InteractionFormat::kCsv), ds.interactions);
}

TEST(Dataset, ValidateFindsMissingProfile) {
  auto ds = make_dataset({{1, 0, 1, 0.0}, {2, 0, 1, 0.0}}, {profile(1, {0})});
  EXPECT_THROW(ds.validate(), DataError);
}

TEST(Generate, SameSeedIsByteIdentical) {
  GenConfig g;
  g.n_users = 500;
  g.seed = 7;
  TempDir a("gena"), b("genb");
  save_dataset(generate_synthetic(g), a.path());
  save_dataset(generate_synthetic(g), b.path());
  for (const char* f : {"interactions.jsonl", "profiles.jsonl", "dataset.json"}) {
    EXPECT_EQ(read_text(a / f), read_text(b / f)) << f;
  }
}

TEST(Generate, OutputSatisfiesInvariants) {
  GenConfig g;
  g.n_users = 1000;
  g.exposures_per_user = 5.0;
  const auto ds = generate_synthetic(g);
  EXPECT_NO_THROW(ds.validate());
  EXPECT_EQ(ds.max_day(), g.n_days);
  for (const auto& [id, p] : *ds.profiles) {
    std::vector<std::int32_t> h = p.download_history;
    std::sort(h.begin(), h.end());
    EXPECT_EQ(std::adjacent_find(h.begin(), h.end()), h.end()) << "repeated history id for user " << id;
  }
}

TEST(Generate, ZeroFractionTracksZeroRate) {
  GenConfig g;
  g.n_users = 5000;
  const auto ds = generate_synthetic(g);
  ASSERT_GE(ds.size(), 90000u);
  const auto zeros = std::count_if(ds.interactions.begin(), ds.interactions.end(),
                                   [](const Interaction& r) { return r.spend == 0.0; });
  const double frac = static_cast<double>(zeros) / static_cast<double>(ds.size());
  // Five binomial standard errors at n = 1e5.
  EXPECT_NEAR(frac, 0.979, 5.0 * std::sqrt(0.979 * 0.021 / static_cast<double>(ds.size())));
}

TEST(Generate, RejectsInvalidConfig) {
  GenConfig g;
  g.zero_rate = 1.5;
  EXPECT_THROW(generate_synthetic(g), ConfigError);
  g = {};
  g.mean_history_len = 11.0;
  EXPECT_THROW(generate_synthetic(g), ConfigError);
  g = {};
  g.exposures_per_user = 400.0;
  g.zero_rate = 0.5;
  EXPECT_THROW(generate_synthetic(g), ConfigError);
}

TEST(Split, Day31IsTheTestSet) {
  GenConfig g;
  g.n_users = 300;
  const auto ds = generate_synthetic(g);
  const auto [train, test] = split_temporal(ds, 30);
  EXPECT_EQ(train.size() + test.size(), ds.size());
  ASSERT_GT(test.size(), 0u);
  for (const auto& r : test.interactions) EXPECT_EQ(r.day, 31);
  for (const auto& r : train.interactions) EXPECT_LE(r.day, 30);
  EXPECT_EQ(train.profiles, ds.profiles);
}

TEST(Split, AllDaysInTrainIsAnError) {
  GenConfig g;
  g.n_users = 100;
  const auto ds = generate_synthetic(g);
  EXPECT_THROW(split_temporal(ds, 31), ConfigError);
  EXPECT_THROW(split_temporal(ds, 0), ConfigError);
}

TEST(GameStats, PopulationMoments) {
  const auto ds = make_dataset({{1, 0, 1, 10.0}, {1, 0, 1, 20.0}, {1, 0, 1, 30.0}, {1, 1, 1, 7.0},
                                {1, 2, 1, 0.0}, {1, 2, 1, 0.0}},
                               {profile(1, {0})});
  const auto stats = build_game_stats(ds, false);
  EXPECT_DOUBLE_EQ(stats.at(0).mean, 20.0);
  EXPECT_NEAR(stats.at(0).std, 8.1650, 5e-5);
  EXPECT_NEAR(stats.at(0).std, std::sqrt(200.0 / 3.0), 1e-12);
  EXPECT_EQ(stats.at(1).std, 0.0);
  EXPECT_TRUE(stats.at(1).degenerate());
  EXPECT_FALSE(stats.contains(2));
  const auto with_zeros = build_game_stats(ds, true);
  ASSERT_TRUE(with_zeros.contains(2));
  EXPECT_EQ(with_zeros.at(2).mean, 0.0);
}
