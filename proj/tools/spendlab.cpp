// spendlab command line: generate, standardize, train, eval, compare, stability.
//
// Every option can also come from a TOML or JSON config file (--config) or from
// a SPENDLAB_<OPTION> environment variable. Command-line flags win over the
// environment, which wins over the file.

#include <cctype>
#include <cstdlib>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "spendlab/pipeline/benchmark.hpp"
#include "spendlab/pipeline/experiment.hpp"

namespace fs = std::filesystem;
using namespace spendlab;

namespace {

std::string env_name(const std::string& flag) {
  std::string s = "SPENDLAB_";
  for (char c : flag) s += c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return s;
}

// Reads TOML, or JSON when the file starts with '{'. JSON objects must be flat.
// Keys whose environment variable is set are dropped, so the environment wins.
class TomlOrJsonConfig : public CLI::ConfigTOML {
 public:
  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    auto items = parse(input);
    std::erase_if(items, [](const CLI::ConfigItem& it) { return std::getenv(env_name(it.name).c_str()) != nullptr; });
    return items;
  }

 private:
  std::vector<CLI::ConfigItem> parse(std::istream& input) const {
    std::string text((std::istreambuf_iterator<char>(input)), std::istreambuf_iterator<char>());
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string::npos || text[first] != '{') {
      std::istringstream in(text);
      return CLI::ConfigTOML::from_config(in);
    }
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw CLI::ConversionError("config file is not valid JSON: " + std::string(e.what()));
    }
    std::vector<CLI::ConfigItem> items;
    for (const auto& [key, value] : j.items()) {
      CLI::ConfigItem item;
      item.name = key;
      auto scalar = [](const nlohmann::json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); };
      if (value.is_object()) throw CLI::ConversionError("config key '" + key + "' must not be an object");
      if (value.is_array()) {
        for (const auto& v : value) item.inputs.push_back(scalar(v));
      } else {
        item.inputs.push_back(scalar(value));
      }
      items.push_back(std::move(item));
    }
    return items;
  }
};

struct Options {
  std::string preset = "default";
  std::string data_dir;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  std::string checkpoint;
  std::vector<std::string> models{"mf", "fm", "crossnet", "collab"};
  std::size_t runs = 3;
};

void write_json(const fs::path& path, const nlohmann::ordered_json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

nlohmann::ordered_json echo(const ExperimentConfig& cfg, const Options& o, const std::string& command) {
  auto j = to_ordered_json(cfg);
  j["command"] = command;
  j["preset"] = o.preset;
  j["seed"] = o.seed;
  if (command == "compare") j["models"] = o.models;
  if (command == "stability") j["runs"] = o.runs;
  if (command == "eval") j["checkpoint"] = o.checkpoint;
  return j;
}

void write_targets(const Dataset& ds, const std::vector<double>& targets, const fs::path& path) {
  write_interactions_jsonl(ds.interactions, path, &targets);
}

void write_standardizer(const Standardizer& s, const fs::path& path) {
  nlohmann::ordered_json games = nlohmann::ordered_json::array();
  for (const auto& [g, st] : s.game_stats()) {
    games.push_back({{"game", g}, {"count", st.count}, {"mean", st.mean}, {"std", st.std}});
  }
  nlohmann::json norm = s.norm();
  write_json(path, {{"scheme", scheme_name(s.scheme())},
                    {"game_stats_include_zeros", s.config().game_stats_include_zeros},
                    {"w_game", s.config().w_game},
                    {"w_user", s.config().w_user},
                    {"global_mean_nonzero", s.global_mean_nonzero()},
                    {"norm", norm},
                    {"game_stats", games}});
}

void write_report(const EvalReport& rep, const fs::path& dir) {
  write_json(dir / "report.json", to_ordered_json(rep));
  std::ofstream csv(dir / "report.csv", std::ios::binary);
  csv << "metric,value\n";
  for (auto [k, v] : rep.ranking.hr) csv << "hr@" << k << ',' << nlohmann::json(v).dump() << '\n';
  for (auto [k, v] : rep.ranking.ndcg) csv << "ndcg@" << k << ',' << nlohmann::json(v).dump() << '\n';
  auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v).dump() : std::string(); };
  for (const auto& [name, m] : {std::pair{"all", &rep.all}, std::pair{"paid", &rep.paid}}) {
    csv << "rmse_" << name << ',' << opt(m->rmse) << '\n';
    csv << "r2_" << name << ',' << opt(m->r2) << '\n';
    csv << "auc_" << name << ',' << opt(m->auc) << '\n';
  }
}

int cmd_generate(const ExperimentConfig& cfg, const Options& o) {
  const fs::path out = o.out_dir;
  const auto ds = generate_synthetic(cfg.gen);
  nlohmann::ordered_json gen;
  to_json(gen, cfg.gen);
  save_dataset(ds, out, gen);
  write_json(out / "config.json", echo(cfg, o, "generate"));
  std::printf("wrote %zu interactions for %zu users to %s\n", ds.size(), ds.profiles->size(),
              out.string().c_str());
  return 0;
}

int cmd_standardize(const ExperimentConfig& cfg, const Options& o) {
  const fs::path out = o.out_dir;
  fs::create_directories(out);
  const auto data = prepare(cfg);
  write_targets(data.fit, data.labels.targets, out / "targets.jsonl");
  write_standardizer(data.labels.standardizer, out / "standardizer.json");
  write_json(out / "config.json", echo(cfg, o, "standardize"));
  std::printf("standardized %zu rows with scheme %s\n", data.fit.size(), scheme_name(cfg.standardize.scheme));
  return 0;
}

int cmd_train(const ExperimentConfig& cfg, const Options& o) {
  const fs::path out = o.out_dir;
  fs::create_directories(out);
  const auto data = prepare(cfg);
  auto r = run_once(data, cfg, o.seed);
  save_checkpoint(*r.model, out / "model.ckpt");
  r.trace.write_csv(out / "trace.csv");
  write_targets(data.fit, data.labels.targets, out / "targets.jsonl");
  write_standardizer(data.labels.standardizer, out / "standardizer.json");
  write_report(r.report, out);
  write_json(out / "config.json", echo(cfg, o, "train"));
  std::printf("%s: %lld steps, HR@10 %.4f -> %.4f\n", cfg.model.type.c_str(),
              static_cast<long long>(r.trace.steps), r.initial_hr10, r.report.ranking.hr.at(10));
  return 0;
}

int cmd_eval(const ExperimentConfig& cfg, const Options& o) {
  if (o.checkpoint.empty()) throw ConfigError("eval needs --checkpoint");
  const fs::path out = o.out_dir;
  fs::create_directories(out);
  auto model = load_checkpoint(o.checkpoint);
  const auto data = prepare(cfg);
  const auto& mc = model->config();
  if (mc.paid_catalog_size != data.full.paid_catalog_size ||
      mc.download_catalog_size != data.full.download_catalog_size) {
    throw DataError("checkpoint catalog sizes do not match the dataset");
  }
  const auto rep = evaluate(*model, data.fit, data.test, data.features, cfg.eval);
  write_report(rep, out);
  write_json(out / "config.json", echo(cfg, o, "eval"));
  std::printf("%s: HR@10 %.4f NDCG@10 %.4f over %zu cases\n", model->type().c_str(), rep.ranking.hr.at(10),
              rep.ranking.ndcg.at(10), rep.ranking.n_cases);
  return 0;
}

int cmd_compare(ExperimentConfig cfg, const Options& o) {
  if (o.models.empty()) throw ConfigError("compare needs at least one model");
  const fs::path out = o.out_dir;
  fs::create_directories(out);
  const auto data = prepare(cfg);
  const std::vector<std::size_t> ks{1, 5, 10};
  cfg.eval.ks = ks;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  std::ofstream csv(out / "compare.csv", std::ios::binary);
  csv << "model,seed,hr@1,hr@5,hr@10,ndcg@1,ndcg@5,ndcg@10\n";
  for (const auto& m : o.models) {
    cfg.model.type = parse_model_type(m);
    const auto r = run_once(data, cfg, o.seed);
    nlohmann::ordered_json row{{"model", m}, {"seed", o.seed}};
    csv << m << ',' << o.seed;
    for (auto k : ks) {
      row["hr@" + std::to_string(k)] = r.report.ranking.hr.at(k);
      csv << ',' << nlohmann::json(r.report.ranking.hr.at(k)).dump();
    }
    for (auto k : ks) {
      row["ndcg@" + std::to_string(k)] = r.report.ranking.ndcg.at(k);
      csv << ',' << nlohmann::json(r.report.ranking.ndcg.at(k)).dump();
    }
    csv << '\n';
    rows.push_back(row);
    std::printf("%-9s HR@10 %.4f NDCG@10 %.4f\n", m.c_str(), r.report.ranking.hr.at(10),
                r.report.ranking.ndcg.at(10));
  }
  write_json(out / "compare.json", {{"seeds", {o.seed}}, {"rows", rows}});
  write_json(out / "config.json", echo(cfg, o, "compare"));
  return 0;
}

int cmd_stability(const ExperimentConfig& cfg, const Options& o) {
  if (o.runs < 2) throw ConfigError("stability needs --runs >= 2 (CoV is undefined for one run)");
  const fs::path out = o.out_dir;
  fs::create_directories(out);
  const auto data = prepare(cfg);
  const auto summary = stability_run(data, cfg, run_seeds(o.seed, o.runs));
  write_json(out / "stability.json", to_ordered_json(summary));
  write_json(out / "config.json", echo(cfg, o, "stability"));
  for (const auto& m : summary.metrics) {
    std::printf("%-8s mean %.5f std %.5f cov %s\n", m.metric.c_str(), m.mean, m.std,
                m.cov ? std::to_string(*m.cov).c_str() : "undefined");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"spendlab: spend prediction experiments"};
  app.config_formatter(std::make_shared<TomlOrJsonConfig>());
  app.set_config("--config", "", "TOML or JSON file with option values");
  app.require_subcommand(1);

  Options o;
  ExperimentConfig cfg;
  std::string scheme = "bs";

  auto add = [&](const std::string& flag, auto& target, const std::string& help) {
    return app.add_option("--" + flag, target, help)->envname(env_name(flag));
  };
  auto add_flag = [&](const std::string& flag, bool& target, const std::string& help) {
    return app.add_flag("--" + flag + ",!--no-" + flag, target, help)->envname(env_name(flag));
  };

  add("preset", o.preset, "default | benchmark")->check(CLI::IsMember({"default", "benchmark"}));
  add("data", o.data_dir, "dataset directory (otherwise generated)");
  add("out", o.out_dir, "output directory");
  add("seed", o.seed, "seed for generation, initialization, batch order and evaluation");
  add("checkpoint", o.checkpoint, "checkpoint manifest for eval");
  add("models", o.models, "models for compare")->delimiter(',');
  add("runs", o.runs, "seeded runs for stability");

  GenConfig& g = cfg.gen;
  add("users", g.n_users, "synthetic users");
  add("paid-games", g.n_paid_games, "paid catalog size");
  add("download-games", g.n_download_games, "download catalog size");
  add("days", g.n_days, "days in the window");
  add("zero-rate", g.zero_rate, "fraction of zero-spend rows");
  add("spend-median", g.spend_median, "median paying amount");
  add("latent-dim", g.latent_dim, "generator taste dimension");
  add("downloads", g.downloads_per_user, "mean paid-game downloads per user");
  add("exposures", g.exposures_per_user, "mean zero-spend exposure rows per user");
  add("pay-affinity", g.pay_affinity, "taste effect on paying");

  add("scheme", scheme, "label scheme")->check(CLI::IsMember({"ov", "log", "us", "gs", "bs"}, CLI::ignore_case));
  add_flag("zero-game-stats", cfg.standardize.game_stats_include_zeros,
           "count zero-spend rows in per-game statistics");

  add("model", cfg.model.type, "mf | fm | crossnet | collab | ziln")
      ->check(CLI::IsMember({"mf", "fm", "crossnet", "collab", "ziln"}));
  add("embed-dim", cfg.model.embed_dim, "embedding width");
  add("cross-layers", cfg.model.cross_layers, "cross network depth");
  add("pref-sizes", cfg.model.pref_sizes, "preference MLP widths")->delimiter(',');

  add("epochs", cfg.train.epochs, "maximum epochs");
  add("batch-size", cfg.train.batch_size, "rows per step");
  add("lr", cfg.train.lr, "Adam learning rate");
  add("zero-ratio", cfg.train.zero_ratio, "zero rows kept per nonzero row each epoch (0 keeps all)");
  add("patience", cfg.train.patience, "trace points without improvement before stopping (0 disables)");
  add("eval-every", cfg.train.eval_every, "steps between trace points (0 = once per epoch)");
  add_flag("shuffle", cfg.train.shuffle, "shuffle rows each epoch");
  add("train-days", cfg.train_days, "last training day");
  add("validation-days", cfg.validation_days, "trailing training days held out for early stopping");
  add("trace-cases", cfg.trace_cases, "validation cases per trace point");

  add("k", cfg.eval.ks, "cutoffs for HR and NDCG")->delimiter(',');
  add("negatives", cfg.eval.n_negatives, "sampled negatives per case");
  add_flag("paid-positives", cfg.eval.paid_positives, "rank only rows with spend > 0");
  add("max-cases", cfg.eval.max_cases, "cap on ranked cases (0 = all)");
  add("threads", cfg.eval.threads, "evaluation threads");

  auto* generate = app.add_subcommand("generate", "write a synthetic dataset");
  auto* standardize = app.add_subcommand("standardize", "fit label standardization and write targets");
  auto* train = app.add_subcommand("train", "train one model and write checkpoint, trace and report");
  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint on the test days");
  auto* compare = app.add_subcommand("compare", "train and rank several models");
  auto* stability = app.add_subcommand("stability", "seeded retrainings and CoV per metric");
  for (auto* sub : {generate, standardize, train, eval, compare, stability}) sub->fallthrough();

  try {
    app.parse(argc, argv);
    // A preset only supplies defaults: reset to it and parse again so every
    // explicit value, from any source, still wins.
    if (o.preset == "benchmark") {
      cfg = benchmark_config();
      app.clear();
      app.parse(argc, argv);
    }
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    cfg.standardize.scheme = parse_scheme(scheme);
    cfg.gen.seed = o.seed;
    cfg.train.seed = o.seed;
    cfg.eval.seed = o.seed;
    cfg.n_runs = o.runs;
    if (!o.data_dir.empty()) cfg.data_dir = o.data_dir;
    cfg.gen.validate();
    cfg.train.validate();
    if (cfg.eval.ks.empty()) throw ConfigError("--k needs at least one cutoff");
    if (std::find(cfg.eval.ks.begin(), cfg.eval.ks.end(), std::size_t{10}) == cfg.eval.ks.end()) {
      cfg.eval.ks.push_back(10);  // HR@10 drives traces and stability
    }

    if (*generate) return cmd_generate(cfg, o);
    if (*standardize) return cmd_standardize(cfg, o);
    if (*train) return cmd_train(cfg, o);
    if (*eval) return cmd_eval(cfg, o);
    if (*compare) return cmd_compare(cfg, o);
    if (*stability) return cmd_stability(cfg, o);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 3;
  } catch (const NumericError& e) {
    std::fprintf(stderr, "numeric error: %s\n", e.what());
    return 4;
  } catch (const fs::filesystem_error& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return 3;
  }
  return 2;
}
