#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include <json.hpp>

#include "spendlab/common/rng.hpp"
#include "spendlab/data/types.hpp"

namespace spendlab {

// Synthetic data with the pathologies of real spend logs: mostly-zero labels,
// a heavy multiplicative tail, and download behaviour driven by latent taste.
//
// Every user u has a taste vector z_u. Paid games carry latent vectors y_p, a
// popularity offset and a price level; download-catalog games carry vectors w_d.
// Paid downloads are drawn without replacement with log-weight
// download_affinity * <z_u, y_p> + pop_p. Whether a download pays follows a
// logistic curve in the standardized taste match, with the intercept solved so
// the overall zero fraction equals zero_rate. Paying amounts are lognormal:
// spend_median * price_p * propensity_u * noise.
struct GenConfig {
  std::int64_t n_users = 5000;
  std::int32_t n_paid_games = 432;
  std::int32_t n_download_games = 7507;
  std::int32_t n_days = 31;
  double zero_rate = 0.979;
  double spend_median = 11.0;
  double tail_shape = 0.3;          // per-purchase lognormal sigma
  double user_spend_sigma = 1.8;    // sigma of the per-user spend propensity
  double game_price_sigma = 0.8;    // sigma of the per-game price level
  std::int32_t latent_dim = 4;
  double downloads_per_user = 20.0;
  // Zero-spend pairs with paid games the user did not download, per user.
  double exposures_per_user = 0.0;
  double mean_history_len = 3.78;
  double download_affinity = 2.0;
  double history_affinity = 3.0;
  double pay_affinity = 1.5;
  double popularity_sigma = 0.2;
  double taste_drift = 0.0;         // older history items follow an older taste
  // Game vectors share one norm, so download odds carry no hidden popularity.
  bool equal_item_norm = true;
  double cold_user_rate = 0.03;     // users without payments in the last 180 days
  double mean_payments_180 = 5.0;
  std::uint64_t seed = 0;

  void validate() const {
    auto positive = [](bool ok, const char* what) {
      if (!ok) throw ConfigError(std::string("invalid generator config: ") + what);
    };
    positive(n_users >= 1, "n_users must be >= 1");
    positive(n_paid_games >= 1, "n_paid_games must be >= 1");
    positive(n_download_games >= 1, "n_download_games must be >= 1");
    positive(n_days >= 1, "n_days must be >= 1");
    positive(zero_rate >= 0.0 && zero_rate <= 1.0, "zero_rate must lie in [0,1]");
    positive(spend_median > 0.0, "spend_median must be > 0");
    positive(tail_shape >= 0.0 && user_spend_sigma >= 0.0 && game_price_sigma >= 0.0,
             "sigmas must be >= 0");
    positive(latent_dim >= 1, "latent_dim must be >= 1");
    positive(downloads_per_user >= 0.0, "downloads_per_user must be >= 0");
    positive(exposures_per_user >= 0.0, "exposures_per_user must be >= 0");
    positive(mean_history_len >= 1.0 && mean_history_len <= static_cast<double>(kMaxHistory),
             "mean_history_len must lie in [1,10]");
    positive(cold_user_rate >= 0.0 && cold_user_rate <= 1.0, "cold_user_rate must lie in [0,1]");
    positive(mean_payments_180 >= 1.0, "mean_payments_180 must be >= 1");
    positive(taste_drift >= 0.0, "taste_drift must be >= 0");
  }
};

inline void to_json(nlohmann::ordered_json& j, const GenConfig& c) {
  j = {{"n_users", c.n_users},
       {"n_paid_games", c.n_paid_games},
       {"n_download_games", c.n_download_games},
       {"n_days", c.n_days},
       {"zero_rate", c.zero_rate},
       {"spend_median", c.spend_median},
       {"tail_shape", c.tail_shape},
       {"user_spend_sigma", c.user_spend_sigma},
       {"game_price_sigma", c.game_price_sigma},
       {"latent_dim", c.latent_dim},
       {"downloads_per_user", c.downloads_per_user},
       {"exposures_per_user", c.exposures_per_user},
       {"mean_history_len", c.mean_history_len},
       {"download_affinity", c.download_affinity},
       {"history_affinity", c.history_affinity},
       {"pay_affinity", c.pay_affinity},
       {"popularity_sigma", c.popularity_sigma},
       {"taste_drift", c.taste_drift},
       {"equal_item_norm", c.equal_item_norm},
       {"cold_user_rate", c.cold_user_rate},
       {"mean_payments_180", c.mean_payments_180},
       {"seed", c.seed}};
}

namespace detail {

// Ratio r of the length law P(L = l) ~ r^l on [1, 10] whose mean is `mean`.
inline double history_length_ratio(double mean) {
  auto mean_of = [](double r) {
    double num = 0.0, den = 0.0, w = 1.0;
    for (std::size_t l = 1; l <= kMaxHistory; ++l) {
      w *= r;
      num += static_cast<double>(l) * w;
      den += w;
    }
    return num / den;
  };
  double lo = 1e-6, hi = 1e3;
  for (int it = 0; it < 200; ++it) {
    const double mid = std::sqrt(lo * hi);
    (mean_of(mid) < mean ? lo : hi) = mid;
  }
  return std::sqrt(lo * hi);
}

inline double sigmoid(double x) {
  return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
}

inline double gumbel(Rng& rng) {
  double u = uniform01(rng);
  u = std::clamp(u, 1e-300, 1.0 - 1e-16);
  return -std::log(-std::log(u));
}

inline double round_cents(double x) { return std::round(x * 100.0) / 100.0; }

struct DraftRow {
  Interaction row;
  double match = 0.0;   // taste match of the pair
  double pay_u = 0.0;   // uniform draw deciding payment
  double noise = 0.0;   // lognormal purchase noise
  bool exposure = false;  // never pays
};

}  // namespace detail

inline Dataset generate_synthetic(const GenConfig& cfg) {
  cfg.validate();
  const auto d = static_cast<std::size_t>(cfg.latent_dim);
  const auto P = static_cast<std::size_t>(cfg.n_paid_games);
  const auto D = static_cast<std::size_t>(cfg.n_download_games);
  const double latent_sd = std::pow(static_cast<double>(d), -0.25);

  // Catalog-level draws.
  auto crng = make_rng(cfg.seed, streams::kCatalog);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> game_vec(P * d), game_pop(P), game_price(P);
  std::vector<double> dl_vec(D * d), dl_pop(D);
  for (auto& v : game_vec) v = latent_sd * normal(crng);
  for (auto& v : game_pop) v = cfg.popularity_sigma * normal(crng);
  for (auto& v : game_price) v = std::exp(cfg.game_price_sigma * normal(crng));
  for (auto& v : dl_vec) v = latent_sd * normal(crng);
  for (auto& v : dl_pop) v = cfg.popularity_sigma * normal(crng);
  if (cfg.equal_item_norm) {
    // Rescale each vector to the expected norm sqrt(d) * latent_sd.
    const double target = std::sqrt(static_cast<double>(d)) * latent_sd;
    for (auto* vecs : {&game_vec, &dl_vec}) {
      for (std::size_t i = 0; i < vecs->size(); i += d) {
        double n2 = 0.0;
        for (std::size_t k = 0; k < d; ++k) n2 += (*vecs)[i + k] * (*vecs)[i + k];
        const double scale = n2 > 0.0 ? target / std::sqrt(n2) : 0.0;
        for (std::size_t k = 0; k < d; ++k) (*vecs)[i + k] *= scale;
      }
    }
  }

  const double len_ratio = detail::history_length_ratio(cfg.mean_history_len);
  std::vector<double> len_weights(kMaxHistory);
  {
    double w = 1.0;
    for (auto& lw : len_weights) lw = (w *= len_ratio);
  }

  auto profiles = std::make_shared<ProfileMap>();
  std::vector<detail::DraftRow> drafts;
  drafts.reserve(static_cast<std::size_t>(static_cast<double>(cfg.n_users) * cfg.downloads_per_user));
  std::vector<double> user_propensity(static_cast<std::size_t>(cfg.n_users));

  std::vector<double> taste(d), old_taste(d), step_taste(d), scores;
  std::vector<std::int32_t> order;
  for (std::int64_t u = 0; u < cfg.n_users; ++u) {
    auto rng = make_rng(cfg.seed, streams::kUser, static_cast<std::uint64_t>(u));
    normal.reset();
    for (auto& v : taste) v = latent_sd * normal(rng);
    for (auto& v : old_taste) v = latent_sd * normal(rng);
    const double propensity = std::exp(cfg.user_spend_sigma * normal(rng));
    user_propensity[static_cast<std::size_t>(u)] = propensity;

    // Download history, most recent first; older slots drift toward an older taste.
    UserProfile prof;
    prof.user = u;
    const std::size_t len =
        1 + std::discrete_distribution<std::size_t>(len_weights.begin(), len_weights.end())(rng);
    const std::size_t hist_len = std::min(len, D);
    scores.assign(D, 0.0);
    std::vector<bool> taken(D, false);
    for (std::size_t pos = 0; pos < hist_len; ++pos) {
      const double lambda = std::min(1.0, cfg.taste_drift * static_cast<double>(pos));
      const double keep = std::sqrt(1.0 - lambda * lambda);
      for (std::size_t k = 0; k < d; ++k) step_taste[k] = keep * taste[k] + lambda * old_taste[k];
      std::size_t best = 0;
      double best_score = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < D; ++j) {
        const double g = detail::gumbel(rng);
        if (taken[j]) continue;
        double dot = 0.0;
        for (std::size_t k = 0; k < d; ++k) dot += dl_vec[j * d + k] * step_taste[k];
        const double s = cfg.history_affinity * dot + dl_pop[j] + g;
        if (s > best_score) {
          best_score = s;
          best = j;
        }
      }
      taken[best] = true;
      prof.download_history.push_back(static_cast<std::int32_t>(best));
    }

    // Payment behaviour over the previous 180 days.
    if (uniform01(rng) < cfg.cold_user_rate) {
      prof.payment_count_180 = 0;
      prof.total_spend_180 = 0.0;
    } else {
      prof.payment_count_180 =
          1 + std::poisson_distribution<std::int32_t>(cfg.mean_payments_180 - 1.0)(rng);
      double total = 0.0;
      for (std::int32_t i = 0; i < prof.payment_count_180; ++i) {
        total += std::max(0.01, detail::round_cents(cfg.spend_median * propensity *
                                                    std::exp(cfg.tail_shape * normal(rng))));
      }
      prof.total_spend_180 = detail::round_cents(total);
    }
    profiles->emplace(u, std::move(prof));

    // Paid-game downloads inside the window, without replacement.
    const auto n_dl = std::min<std::size_t>(
        P, cfg.downloads_per_user > 0.0
               ? static_cast<std::size_t>(std::poisson_distribution<std::int64_t>(cfg.downloads_per_user)(rng))
               : 0);
    scores.resize(P);
    std::vector<double> match(P);
    for (std::size_t p = 0; p < P; ++p) {
      double dot = 0.0;
      for (std::size_t k = 0; k < d; ++k) dot += game_vec[p * d + k] * taste[k];
      match[p] = dot + game_pop[p] / std::max(cfg.download_affinity, 1e-12);
      scores[p] = cfg.download_affinity * dot + game_pop[p] + detail::gumbel(rng);
    }
    order.resize(P);
    std::iota(order.begin(), order.end(), 0);
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_dl), order.end(),
                      [&](std::int32_t a, std::int32_t b) { return scores[a] > scores[b]; });
    for (std::size_t i = 0; i < n_dl; ++i) {
      detail::DraftRow dr;
      dr.row.user = u;
      dr.row.game = order[i];
      dr.row.day = std::uniform_int_distribution<std::int32_t>(1, cfg.n_days)(rng);
      dr.match = match[static_cast<std::size_t>(order[i])];
      dr.pay_u = uniform01(rng);
      dr.noise = std::exp(cfg.tail_shape * normal(rng));
      drafts.push_back(dr);
    }

    // Exposures: uniform over the paid games left undownloaded.
    if (cfg.exposures_per_user > 0.0) {
      const auto n_exp = std::min<std::size_t>(
          P - n_dl,
          static_cast<std::size_t>(std::poisson_distribution<std::int64_t>(cfg.exposures_per_user)(rng)));
      for (std::size_t i = 0; i < n_exp; ++i) {
        std::uniform_int_distribution<std::size_t> pick(n_dl + i, P - 1);
        std::swap(order[n_dl + i], order[pick(rng)]);
        detail::DraftRow dr;
        dr.row.user = u;
        dr.row.game = order[n_dl + i];
        dr.row.day = std::uniform_int_distribution<std::int32_t>(1, cfg.n_days)(rng);
        dr.exposure = true;
        drafts.push_back(dr);
      }
    }
  }

  // Standardize the taste match over all downloads and solve the pay intercept
  // so that the zero fraction over every row equals zero_rate.
  std::size_t n_downloads = 0;
  double mean = 0.0, sq = 0.0;
  for (const auto& dr : drafts) {
    if (dr.exposure) continue;
    mean += dr.match;
    ++n_downloads;
  }
  mean /= static_cast<double>(std::max<std::size_t>(n_downloads, 1));
  for (const auto& dr : drafts) {
    if (!dr.exposure) sq += (dr.match - mean) * (dr.match - mean);
  }
  const double sd = n_downloads == 0 ? 1.0 : std::sqrt(sq / static_cast<double>(n_downloads));
  std::vector<double> z(drafts.size());
  for (std::size_t i = 0; i < drafts.size(); ++i) {
    z[i] = sd > 0.0 ? (drafts[i].match - mean) / sd : 0.0;
  }
  const double pay_rate = n_downloads == 0 ? 0.0
                                           : (1.0 - cfg.zero_rate) * static_cast<double>(drafts.size()) /
                                                 static_cast<double>(n_downloads);
  if (pay_rate > 1.0 + 1e-12) {
    throw ConfigError("zero_rate is unreachable: downloads would need a pay rate above 1");
  }
  auto mean_pay = [&](double c) {
    double s = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
      if (!drafts[i].exposure) s += detail::sigmoid(c + cfg.pay_affinity * z[i]);
    }
    return s / static_cast<double>(std::max<std::size_t>(n_downloads, 1));
  };
  double lo = -60.0, hi = 60.0;
  for (int it = 0; it < 100; ++it) {
    const double mid = 0.5 * (lo + hi);
    (mean_pay(mid) < pay_rate ? lo : hi) = mid;
  }
  const double intercept = 0.5 * (lo + hi);

  Dataset ds;
  ds.paid_catalog_size = cfg.n_paid_games;
  ds.download_catalog_size = cfg.n_download_games;
  ds.rng_seed = cfg.seed;
  ds.interactions.reserve(drafts.size());
  for (std::size_t i = 0; i < drafts.size(); ++i) {
    auto r = drafts[i].row;
    bool pays = false;
    if (drafts[i].exposure) {
      pays = false;
    } else if (pay_rate >= 1.0) {
      pays = true;
    } else if (pay_rate > 0.0) {
      pays = drafts[i].pay_u < detail::sigmoid(intercept + cfg.pay_affinity * z[i]);
    }
    if (pays) {
      const double amount = cfg.spend_median * game_price[static_cast<std::size_t>(r.game)] *
                            user_propensity[static_cast<std::size_t>(r.user)] * drafts[i].noise;
      r.spend = std::max(0.01, detail::round_cents(amount));
    }
    ds.interactions.push_back(r);
  }
  std::stable_sort(ds.interactions.begin(), ds.interactions.end(),
                   [](const Interaction& a, const Interaction& b) { return a.day < b.day; });
  ds.profiles = std::move(profiles);
  return ds;
}

}  // namespace spendlab
