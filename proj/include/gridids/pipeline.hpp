#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "gridids/dataset.hpp"
#include "gridids/preprocess.hpp"

namespace gridids {

/// The fitted preprocessing a saved model expects its inputs to have gone through.
/// Stored as JSON next to the model file; doubles round-trip exactly.
struct PipelineSpec {
  FeatureSchema input_schema;
  ImputeStats impute;
  std::vector<std::string> drop;
  std::vector<PhasorQuadruple> phasor_groups;
  ScalerParams scaler;
  /// Column order after feature steps; checked against the prepared data.
  std::vector<std::string> feature_names;

  bool operator==(const PipelineSpec&) const;
};

/// Impute, drop, derive and scale `raw` exactly as during training. Throws DimensionMismatch
/// when the resulting columns differ from feature_names.
Dataset prepare(const PipelineSpec& spec, const RawDataset& raw);

nlohmann::json pipeline_to_json(const PipelineSpec& spec);
PipelineSpec pipeline_from_json(const nlohmann::json& j);

/// "<model>.pipeline.json"
std::filesystem::path pipeline_path(const std::filesystem::path& model_path);
void save_pipeline(const std::filesystem::path& path, const PipelineSpec& spec);
PipelineSpec load_pipeline(const std::filesystem::path& path);

}  // namespace gridids
