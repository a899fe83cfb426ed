#include "gridids/pipeline.hpp"

#include <fstream>

#include "gridids/error.hpp"

namespace gridids {

namespace {

bool same(const PhasorQuadruple& a, const PhasorQuadruple& b) {
  return a.v_mag == b.v_mag && a.v_angle == b.v_angle && a.i_mag == b.i_mag && a.i_angle == b.i_angle &&
         a.s_mag == b.s_mag && a.s_angle == b.s_angle;
}

// JSON numbers cannot hold NaN; fills are finite, scaler stats are finite for finite data.
nlohmann::json doubles(const std::vector<double>& v) { return v; }

}  // namespace

bool PipelineSpec::operator==(const PipelineSpec& o) const {
  if (input_schema.feature_names != o.input_schema.feature_names ||
      input_schema.feature_kinds != o.input_schema.feature_kinds ||
      input_schema.label_column != o.input_schema.label_column)
    return false;
  if (impute.policy != o.impute.policy || impute.fill != o.impute.fill || drop != o.drop) return false;
  if (phasor_groups.size() != o.phasor_groups.size()) return false;
  for (std::size_t i = 0; i < phasor_groups.size(); ++i)
    if (!same(phasor_groups[i], o.phasor_groups[i])) return false;
  return scaler.kind == o.scaler.kind && scaler.mean == o.scaler.mean && scaler.stddev == o.scaler.stddev &&
         scaler.min == o.scaler.min && scaler.max == o.scaler.max && feature_names == o.feature_names;
}

Dataset prepare(const PipelineSpec& spec, const RawDataset& raw) {
  Dataset d = apply_imputer(spec.impute, raw);
  if (!spec.drop.empty()) d = drop_features(d, spec.drop);
  if (!spec.phasor_groups.empty()) d = derive_apparent_power(d, spec.phasor_groups);
  if (d.schema.feature_names != spec.feature_names)
    throw Error(ErrorCode::DimensionMismatch, "prepared columns do not match the model's features");
  return apply_scaler(spec.scaler, d);
}

nlohmann::json pipeline_to_json(const PipelineSpec& spec) {
  nlohmann::json kinds = nlohmann::json::array();
  for (auto k : spec.input_schema.feature_kinds) kinds.push_back(k == FeatureKind::LogOrStatus ? "log" : "measurement");
  nlohmann::json groups = nlohmann::json::array();
  for (const auto& g : spec.phasor_groups)
    groups.push_back({g.v_mag, g.v_angle, g.i_mag, g.i_angle, g.s_mag, g.s_angle});
  return {{"schema_version", 1},
          {"input_features", spec.input_schema.feature_names},
          {"input_kinds", kinds},
          {"label_column", spec.input_schema.label_column},
          {"impute_policy", static_cast<int>(spec.impute.policy)},
          {"impute_fill", doubles(spec.impute.fill)},
          {"drop", spec.drop},
          {"phasor_groups", groups},
          {"scaler_kind", static_cast<int>(spec.scaler.kind)},
          {"scaler_mean", doubles(spec.scaler.mean)},
          {"scaler_stddev", doubles(spec.scaler.stddev)},
          {"scaler_min", doubles(spec.scaler.min)},
          {"scaler_max", doubles(spec.scaler.max)},
          {"features", spec.feature_names}};
}

PipelineSpec pipeline_from_json(const nlohmann::json& j) {
  try {
    PipelineSpec s;
    s.input_schema.feature_names = j.at("input_features").get<std::vector<std::string>>();
    for (const auto& k : j.at("input_kinds"))
      s.input_schema.feature_kinds.push_back(k == "log" ? FeatureKind::LogOrStatus : FeatureKind::Measurement);
    s.input_schema.label_column = j.at("label_column").get<std::string>();
    s.input_schema.validate();
    s.impute.policy = static_cast<ImputePolicy>(j.at("impute_policy").get<int>());
    s.impute.fill = j.at("impute_fill").get<std::vector<double>>();
    s.drop = j.at("drop").get<std::vector<std::string>>();
    for (const auto& g : j.at("phasor_groups")) {
      const auto p = g.get<std::vector<std::string>>();
      if (p.size() != 6) throw Error(ErrorCode::Format, "phasor group needs 6 names");
      s.phasor_groups.push_back({p[0], p[1], p[2], p[3], p[4], p[5]});
    }
    s.scaler.kind = static_cast<ScalerKind>(j.at("scaler_kind").get<int>());
    s.scaler.mean = j.at("scaler_mean").get<std::vector<double>>();
    s.scaler.stddev = j.at("scaler_stddev").get<std::vector<double>>();
    s.scaler.min = j.at("scaler_min").get<std::vector<double>>();
    s.scaler.max = j.at("scaler_max").get<std::vector<double>>();
    s.feature_names = j.at("features").get<std::vector<std::string>>();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Format, std::string("bad pipeline file: ") + e.what());
  }
}

std::filesystem::path pipeline_path(const std::filesystem::path& model_path) {
  return model_path.string() + ".pipeline.json";
}

void save_pipeline(const std::filesystem::path& path, const PipelineSpec& spec) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path.string() + "'");
  out << pipeline_to_json(spec).dump(1) << '\n';
}

PipelineSpec load_pipeline(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Format, std::string("bad pipeline file: ") + e.what());
  }
  return pipeline_from_json(j);
}

}  // namespace gridids
