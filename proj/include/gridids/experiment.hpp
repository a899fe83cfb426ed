#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "gridids/dataset.hpp"
#include "gridids/demo.hpp"
#include "gridids/forest.hpp"
#include "gridids/preprocess.hpp"
#include "gridids/resample.hpp"

namespace gridids {

enum class ModelChoice { Flat, Hierarchical, PrimaryDefault };

std::string_view to_string(ModelChoice m);
std::string_view to_string(ImputePolicy p);
std::string_view to_string(ScalerKind k);
ImputePolicy parse_impute_policy(std::string_view name);
ScalerKind parse_scaler(std::string_view name);

/// Everything one pipeline run needs. Keys accepted by apply_setting() are listed in the README.
struct ExperimentConfig {
  std::vector<std::filesystem::path> inputs;
  bool demo = false;
  DemoConfig demo_config;

  std::string label_column = "marker";
  LabelTaxonomy taxonomy = LabelTaxonomy::power_system_default();
  bool drop_logs = true;
  std::vector<std::string> drop_list;          // empty: the schema's log/status columns
  bool apparent_power = false;
  std::vector<PhasorQuadruple> phasor_groups;  // empty: the shipped power-system groups

  ImputePolicy imputation = ImputePolicy::Zero;
  bool impute_on_train_only = false;
  ScalerKind scaler = ScalerKind::Standard;
  bool scale_before_resample = true;
  bool resample_before_split = false;
  ResampleConfig resample;  // resample.seed is derived from `seed`

  double train_fraction = 0.8;
  SplitMode split_mode = SplitMode::Stratified;
  std::uint64_t seed = 42;

  ModelChoice model = ModelChoice::Hierarchical;
  ForestParams flat;    // flat model; also the source of the layer defaults
  ForestParams layer1;
  ForestParams layer2;
  /// Train every model kind and report each one for comparison.
  bool baselines = true;
  std::size_t top_n = 10;

  std::filesystem::path out;
  std::filesystem::path model_out;

  void validate() const;
};

/// Applies one `key = value` setting. Throws InvalidArgument for unknown keys or bad values.
void apply_setting(ExperimentConfig& cfg, std::string_view key, std::string_view value);

/// Flat key/value text: one `key = value` per line, `#` starts a comment.
ExperimentConfig parse_config(std::string_view text, ExperimentConfig base = {});
ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base = {});

nlohmann::json config_to_json(const ExperimentConfig& cfg);

/// Pipeline: load -> impute -> drop/derive features -> split -> scale -> resample(train)
/// -> train -> evaluate. Returns the report as JSON (schema_version 1). Timings live under
/// the "timings" key; everything else is a pure function of the config.
/// Errors are rethrown as StageError naming the failing stage.
nlohmann::json run_experiment(const ExperimentConfig& cfg);

/// Report without its wall-clock section.
nlohmann::json report_body(const nlohmann::json& report);

enum class SweepAxis { Imputation, Resampler, Scaler, MaxFeatures, Criterion, NEstimators, FeatureSet };

SweepAxis parse_sweep_axis(std::string_view name);
std::string_view to_string(SweepAxis axis);

/// Runs run_experiment once per value with everything else fixed. A failing row records its
/// error and the sweep continues.
nlohmann::json sweep(const ExperimentConfig& cfg, SweepAxis axis, const std::vector<std::string>& values);

/// Tab-separated rendering of a sweep result.
std::string sweep_table(const nlohmann::json& sweep_result);

enum class PlotKind { ClassPopulation, ImportanceTopN, ModelComparison };

PlotKind parse_plot_kind(std::string_view name);

struct PlotOptions {
  std::string population_stage = "full";  // full | train | resampled
  std::string importance_model;           // empty: first model in the report
  std::optional<std::size_t> top_n;
};

/// Two-column CSV (with a header line) for plotting. Populations ascend by class label,
/// importances descend by value. Throws MissingSection.
std::string emit_plot_data(const nlohmann::json& report, PlotKind kind, const PlotOptions& options = {});

}  // namespace gridids
