#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <string_view>

#include "spendlab/model/collab.hpp"
#include "spendlab/model/cross.hpp"
#include "spendlab/model/fm.hpp"
#include "spendlab/model/mf.hpp"
#include "spendlab/model/ziln.hpp"
#include "spendlab/tensor/checkpoint.hpp"

namespace spendlab {

inline constexpr std::string_view kModelTypes[] = {"mf", "fm", "crossnet", "collab", "ziln"};

inline std::string parse_model_type(std::string_view s) {
  for (auto t : kModelTypes) {
    if (s == t) return std::string(t);
  }
  throw ConfigError("unknown model '" + std::string(s) + "' (expected mf|fm|crossnet|collab|ziln)");
}

inline std::unique_ptr<Model> make_model(const ModelConfig& cfg) {
  const auto type = parse_model_type(cfg.type);
  if (type == "mf") return std::make_unique<MfModel>(cfg);
  if (type == "fm") return std::make_unique<FmModel>(cfg);
  if (type == "crossnet") return std::make_unique<CrossnetModel>(cfg);
  if (type == "collab") return std::make_unique<CollabModel>(cfg);
  return std::make_unique<ZilnModel>(cfg);
}

inline void save_checkpoint(const Model& model, const std::filesystem::path& path) {
  save_tensors(path, model.type(), model.hyperparams(), model.params());
}

// Rebuilds the model from the manifest, then loads values. When expected_type
// is non-empty, a checkpoint of another type is rejected.
inline std::unique_ptr<Model> load_checkpoint(const std::filesystem::path& path,
                                              std::string_view expected_type = {}) {
  const auto ck = read_checkpoint(path);
  if (!expected_type.empty() && ck.model_type != expected_type) {
    throw DataError("checkpoint holds a '" + ck.model_type + "' model, expected '" +
                    std::string(expected_type) + "'");
  }
  ModelConfig cfg;
  try {
    cfg = ck.hyperparams.get<ModelConfig>();
  } catch (const nlohmann::json::exception& e) {
    throw DataError("checkpoint hyperparams are malformed: " + std::string(e.what()));
  }
  if (cfg.type != ck.model_type) throw DataError("checkpoint model_type disagrees with hyperparams");
  auto model = make_model(cfg);
  load_tensors(ck, model->params());
  return model;
}

// Loads values into an existing model of the same type and shape.
inline void load_checkpoint_into(Model& model, const std::filesystem::path& path) {
  const auto ck = read_checkpoint(path);
  if (ck.model_type != model.type()) {
    throw DataError("checkpoint holds a '" + ck.model_type + "' model, expected '" + model.type() + "'");
  }
  load_tensors(ck, model.params());
}

}  // namespace spendlab
