#pragma once

#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "spendlab/tensor/param.hpp"

namespace spendlab {

// A checkpoint is a JSON manifest at `path` plus raw little-endian float64
// values at `path` + ".bin", in manifest order.
inline constexpr int kCheckpointVersion = 1;

inline std::filesystem::path checkpoint_data_path(const std::filesystem::path& manifest) {
  auto p = manifest;
  p += ".bin";
  return p;
}

namespace detail {

inline std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline void put_le(std::string& out, double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) {
    out.push_back(static_cast<char>(bits & 0xff));
    bits >>= 8;
  }
}

inline double get_le(const char* p) {
  std::uint64_t bits = 0;
  for (int i = 7; i >= 0; --i) bits = (bits << 8) | static_cast<unsigned char>(p[i]);
  return std::bit_cast<double>(bits);
}

inline std::string hex64(std::uint64_t v) {
  std::ostringstream s;
  s << std::hex;
  s.width(16);
  s.fill('0');
  s << v;
  return s.str();
}

}  // namespace detail

inline void save_tensors(const std::filesystem::path& path, const std::string& model_type,
                         const nlohmann::json& hyperparams, const ParamSet& params) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::string blob;
  blob.reserve(params.total_size() * 8);
  nlohmann::json tensors = nlohmann::json::array();
  std::size_t offset = 0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& t = params[i];
    tensors.push_back({{"name", t.name}, {"shape", t.shape}, {"offset", offset}});
    for (double v : t.values) detail::put_le(blob, v);
    offset += t.size();
  }
  nlohmann::json manifest{{"format", "spendlab-checkpoint"},
                          {"version", kCheckpointVersion},
                          {"model_type", model_type},
                          {"hyperparams", hyperparams},
                          {"tensors", tensors},
                          {"data_bytes", blob.size()},
                          {"checksum", detail::hex64(detail::fnv1a(blob))}};
  {
    std::ofstream out(checkpoint_data_path(path), std::ios::binary);
    if (!out) throw DataError("cannot write " + checkpoint_data_path(path).string());
    out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << manifest.dump(2) << '\n';
}

struct CheckpointManifest {
  std::string model_type;
  nlohmann::json hyperparams;
  nlohmann::json tensors;
  std::string data;  // verified raw bytes
};

inline CheckpointManifest read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  nlohmann::json m;
  try {
    m = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw DataError("checkpoint manifest " + path.string() + " is unreadable: " + e.what());
  }
  CheckpointManifest out;
  try {
    if (m.at("format").get<std::string>() != "spendlab-checkpoint") {
      throw DataError("not a spendlab checkpoint: " + path.string());
    }
    const int version = m.at("version").get<int>();
    if (version != kCheckpointVersion) {
      throw DataError("unsupported checkpoint version " + std::to_string(version));
    }
    out.model_type = m.at("model_type").get<std::string>();
    out.hyperparams = m.at("hyperparams");
    out.tensors = m.at("tensors");
    const auto bytes = m.at("data_bytes").get<std::size_t>();
    std::ifstream din(checkpoint_data_path(path), std::ios::binary);
    if (!din) throw DataError("missing checkpoint data " + checkpoint_data_path(path).string());
    out.data.assign(std::istreambuf_iterator<char>(din), std::istreambuf_iterator<char>());
    if (out.data.size() != bytes) {
      throw DataError("checkpoint data is truncated or padded: expected " + std::to_string(bytes) +
                      " bytes, found " + std::to_string(out.data.size()));
    }
    if (detail::hex64(detail::fnv1a(out.data)) != m.at("checksum").get<std::string>()) {
      throw DataError("checkpoint data checksum mismatch");
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError("checkpoint manifest " + path.string() + " is malformed: " + e.what());
  }
  return out;
}

// Copies values into a freshly built ParamSet; names and shapes must match exactly.
inline void load_tensors(const CheckpointManifest& ck, ParamSet& params) {
  if (ck.tensors.size() != params.size()) {
    throw DataError("checkpoint has " + std::to_string(ck.tensors.size()) + " tensors, model has " +
                    std::to_string(params.size()));
  }
  std::vector<std::vector<double>> staged(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& t = params[i];
    const auto& j = ck.tensors[i];
    const auto name = j.at("name").get<std::string>();
    const auto shape = j.at("shape").get<std::vector<std::size_t>>();
    const auto offset = j.at("offset").get<std::size_t>();
    if (name != t.name || shape != t.shape) {
      throw DataError("checkpoint tensor '" + name + "' does not match model tensor '" + t.name + "'");
    }
    if ((offset + t.size()) * 8 > ck.data.size()) {
      throw DataError("checkpoint tensor '" + name + "' extends past the data file");
    }
    staged[i].resize(t.size());
    for (std::size_t k = 0; k < t.size(); ++k) {
      staged[i][k] = detail::get_le(ck.data.data() + (offset + k) * 8);
    }
  }
  params.restore(staged);
}

}  // namespace spendlab
