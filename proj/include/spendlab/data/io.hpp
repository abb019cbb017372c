#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "spendlab/data/types.hpp"

namespace spendlab {

enum class InteractionFormat { kJsonl, kCsv };

inline InteractionFormat parse_interaction_format(std::string_view s) {
  if (s == "jsonl" || s == "json") return InteractionFormat::kJsonl;
  if (s == "csv") return InteractionFormat::kCsv;
  throw ConfigError("unknown interaction format '" + std::string(s) + "' (expected jsonl|csv)");
}

inline InteractionFormat format_from_path(const std::filesystem::path& p) {
  return p.extension() == ".csv" ? InteractionFormat::kCsv : InteractionFormat::kJsonl;
}

namespace detail {

inline std::ifstream open_for_read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

template <typename T>
T json_field(const nlohmann::json& j, const char* key, std::size_t row) {
  auto it = j.find(key);
  if (it == j.end()) {
    throw DataError("row " + std::to_string(row) + ": missing column '" + key + "'");
  }
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception&) {
    throw DataError("row " + std::to_string(row) + ": column '" + key + "' has the wrong type");
  }
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
    out.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

template <typename T>
T parse_number(const std::string& cell, std::size_t row, const std::string& column) {
  try {
    std::size_t used = 0;
    T v{};
    if constexpr (std::is_floating_point_v<T>) {
      v = static_cast<T>(std::stod(cell, &used));
    } else {
      v = static_cast<T>(std::stoll(cell, &used));
    }
    if (used != cell.size()) throw std::invalid_argument(cell);
    return v;
  } catch (const std::exception&) {
    throw DataError("row " + std::to_string(row) + ": column '" + column + "' is not a number: '" +
                    cell + "'");
  }
}

}  // namespace detail

// Rows are numbered from 1 (the line number for JSONL, the data row for CSV).
inline std::vector<Interaction> load_interactions(const std::filesystem::path& path,
                                                  InteractionFormat format) {
  auto in = detail::open_for_read(path);
  std::vector<Interaction> rows;
  std::string line;
  std::size_t row = 0;
  if (format == InteractionFormat::kJsonl) {
    while (std::getline(in, line)) {
      ++row;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(line);
      } catch (const nlohmann::json::parse_error& e) {
        throw DataError("row " + std::to_string(row) + ": parse error: " + e.what());
      }
      Interaction r;
      r.user = detail::json_field<std::int64_t>(j, "user", row);
      r.game = detail::json_field<std::int32_t>(j, "game", row);
      r.day = detail::json_field<std::int32_t>(j, "day", row);
      r.spend = detail::json_field<double>(j, "spend", row);
      validate_interaction(r, 0, "row " + std::to_string(row));
      rows.push_back(r);
    }
    return rows;
  }

  if (!std::getline(in, line)) throw DataError(path.string() + ": empty CSV file");
  const auto header = detail::split_csv_line(line);
  auto column = [&](const std::string& name) -> std::size_t {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    throw DataError(path.string() + ": missing column '" + name + "' in header");
  };
  const std::size_t cu = column("user"), cg = column("game"), cd = column("day"),
                    cs = column("spend");
  while (std::getline(in, line)) {
    ++row;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != header.size()) {
      throw DataError("row " + std::to_string(row) + ": expected " + std::to_string(header.size()) +
                      " columns, got " + std::to_string(cells.size()));
    }
    Interaction r;
    r.user = detail::parse_number<std::int64_t>(cells[cu], row, "user");
    r.game = detail::parse_number<std::int32_t>(cells[cg], row, "game");
    r.day = detail::parse_number<std::int32_t>(cells[cd], row, "day");
    r.spend = detail::parse_number<double>(cells[cs], row, "spend");
    validate_interaction(r, 0, "row " + std::to_string(row));
    rows.push_back(r);
  }
  return rows;
}

inline ProfileMap load_profiles(const std::filesystem::path& path) {
  auto in = detail::open_for_read(path);
  ProfileMap out;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw DataError("profile row " + std::to_string(row) + ": parse error: " + e.what());
    }
    UserProfile p;
    p.user = detail::json_field<std::int64_t>(j, "user", row);
    p.download_history = detail::json_field<std::vector<std::int32_t>>(j, "history", row);
    p.total_spend_180 = detail::json_field<double>(j, "t180", row);
    p.payment_count_180 = detail::json_field<std::int32_t>(j, "f180", row);
    validate_profile(p, 0, "profile row " + std::to_string(row));
    if (!out.emplace(p.user, std::move(p)).second) {
      throw DataError("profile row " + std::to_string(row) + ": duplicate user");
    }
  }
  return out;
}

struct DatasetPaths {
  std::filesystem::path interactions;
  std::filesystem::path profiles;
  // Optional dataset.json carrying catalog sizes and the generating seed.
  std::filesystem::path meta;
  InteractionFormat format = InteractionFormat::kJsonl;
};

inline DatasetPaths dataset_paths_in(const std::filesystem::path& dir) {
  DatasetPaths p;
  p.interactions = dir / "interactions.jsonl";
  if (!std::filesystem::exists(p.interactions) && std::filesystem::exists(dir / "interactions.csv")) {
    p.interactions = dir / "interactions.csv";
    p.format = InteractionFormat::kCsv;
  }
  p.profiles = dir / "profiles.jsonl";
  p.meta = dir / "dataset.json";
  return p;
}

inline Dataset load_dataset(const DatasetPaths& paths) {
  Dataset ds;
  ds.interactions = load_interactions(paths.interactions, paths.format);
  ds.profiles = std::make_shared<const ProfileMap>(load_profiles(paths.profiles));
  if (!paths.meta.empty() && std::filesystem::exists(paths.meta)) {
    auto in = detail::open_for_read(paths.meta);
    nlohmann::json meta;
    try {
      meta = nlohmann::json::parse(in);
      ds.paid_catalog_size = meta.at("paid_catalog_size").get<std::int32_t>();
      ds.download_catalog_size = meta.at("download_catalog_size").get<std::int32_t>();
      ds.rng_seed = meta.value("seed", std::uint64_t{0});
    } catch (const nlohmann::json::exception& e) {
      throw DataError(paths.meta.string() + ": " + e.what());
    }
  } else {
    for (const auto& r : ds.interactions) {
      ds.paid_catalog_size = std::max(ds.paid_catalog_size, r.game + 1);
    }
    for (const auto& [id, p] : *ds.profiles) {
      for (auto h : p.download_history) {
        ds.download_catalog_size = std::max(ds.download_catalog_size, h + 1);
      }
    }
  }
  ds.validate();
  return ds;
}

inline Dataset load_dataset(const std::filesystem::path& interactions, InteractionFormat format,
                            const std::filesystem::path& profiles) {
  return load_dataset(DatasetPaths{interactions, profiles, {}, format});
}

inline nlohmann::ordered_json interaction_json(const Interaction& r) {
  return {{"user", r.user}, {"game", r.game}, {"day", r.day}, {"spend", r.spend}};
}

inline void write_interactions_jsonl(const std::vector<Interaction>& rows,
                                     const std::filesystem::path& path,
                                     const std::vector<double>* targets = nullptr) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto j = interaction_json(rows[i]);
    if (targets) j["target"] = (*targets)[i];
    out << j.dump() << '\n';
  }
}

inline void write_interactions_csv(const std::vector<Interaction>& rows,
                                   const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << "user,game,day,spend\n";
  for (const auto& r : rows) {
    out << r.user << ',' << r.game << ',' << r.day << ',' << nlohmann::json(r.spend).dump() << '\n';
  }
}

inline void write_profiles_jsonl(const ProfileMap& profiles, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& [id, p] : profiles) {
    nlohmann::ordered_json j{{"user", p.user},
                             {"history", p.download_history},
                             {"t180", p.total_spend_180},
                             {"f180", p.payment_count_180}};
    out << j.dump() << '\n';
  }
}

// Writes interactions.jsonl, profiles.jsonl and dataset.json into dir.
inline void save_dataset(const Dataset& ds, const std::filesystem::path& dir,
                         const nlohmann::ordered_json& generator_echo = {}) {
  std::filesystem::create_directories(dir);
  write_interactions_jsonl(ds.interactions, dir / "interactions.jsonl");
  write_profiles_jsonl(*ds.profiles, dir / "profiles.jsonl");
  nlohmann::ordered_json meta{{"paid_catalog_size", ds.paid_catalog_size},
                              {"download_catalog_size", ds.download_catalog_size},
                              {"seed", ds.rng_seed},
                              {"n_interactions", ds.interactions.size()},
                              {"n_users", ds.profiles->size()}};
  if (!generator_echo.is_null()) meta["generator"] = generator_echo;
  std::ofstream out(dir / "dataset.json", std::ios::binary);
  out << meta.dump(2) << '\n';
}

}  // namespace spendlab
