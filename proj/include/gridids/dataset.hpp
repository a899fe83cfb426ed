#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gridids/matrix.hpp"

namespace gridids {

enum class FeatureKind { Measurement, LogOrStatus };

struct FeatureSchema {
  std::vector<std::string> feature_names;
  std::vector<FeatureKind> feature_kinds;
  std::string label_column = "marker";

  std::size_t size() const noexcept { return feature_names.size(); }

  /// Index of `name`, or npos when absent.
  std::size_t index_of(std::string_view name) const;
  std::vector<std::string> names_of_kind(FeatureKind kind) const;

  /// Throws InvalidArgument on empty/duplicate names or a kind vector of the wrong length.
  void validate() const;

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

/// Measurements before imputation. Missing cells are stored as NaN.
struct RawDataset {
  FeatureSchema schema;
  Matrix values;
  std::vector<int> labels;

  std::size_t rows() const noexcept { return labels.size(); }
};

struct Dataset {
  FeatureSchema schema;
  Matrix values;
  std::vector<int> labels;

  std::size_t rows() const noexcept { return labels.size(); }
  std::size_t features() const noexcept { return schema.size(); }

  Dataset select_rows(std::span<const std::size_t> idx) const;
};

/// Natural events vs attack scenarios. The markers are the binary labels used by
/// the first layer of the hierarchical model.
struct LabelTaxonomy {
  std::set<int> natural_labels;
  std::set<int> attack_labels;
  int natural_marker = 1;
  int attack_marker = 0;

  /// 1-6, 13, 14, 41 natural; 7-12, 15-30, 35-40 attack.
  static LabelTaxonomy power_system_default();

  bool is_natural(int label) const { return natural_labels.count(label) != 0; }
  bool is_attack(int label) const { return attack_labels.count(label) != 0; }
  bool contains(int label) const { return is_natural(label) || is_attack(label); }
  std::set<int> universe() const;

  void validate() const;

  bool operator==(const LabelTaxonomy&) const = default;
};

struct ClassDistribution {
  std::map<int, std::uint64_t> counts;
  std::map<int, double> proportions;

  std::size_t n_classes() const noexcept { return counts.size(); }
  std::uint64_t total() const;
};

// ---- operations -----------------------------------------------------------

/// True for the tokens treated as a missing measurement: empty, NaN/nan, inf/Inf/-inf.
bool is_missing_token(std::string_view token);

/// Reads the header line of a CSV file.
std::vector<std::string> read_csv_header(const std::filesystem::path& path);

/// Schema from a CSV header: every column except `label_column` is a feature. Columns named
/// like the shipped power-system schema's log/status features are tagged LogOrStatus.
FeatureSchema infer_schema(const std::filesystem::path& path, const std::string& label_column = "marker");

/// Loads one CSV. Columns are matched to the schema by name; extra columns are ignored.
RawDataset load_csv(const std::filesystem::path& path, const FeatureSchema& schema);

/// Loads several CSVs and concatenates them in argument order.
RawDataset load_csv(std::span<const std::filesystem::path> paths, const FeatureSchema& schema);

RawDataset concat(const RawDataset& a, const RawDataset& b);

enum class ImputePolicy { Mean, Median, Drop, Zero };

/// Per-column fill values fitted for Mean/Median. Empty for Drop/Zero.
struct ImputeStats {
  ImputePolicy policy = ImputePolicy::Zero;
  std::vector<double> fill;
};

ImputeStats fit_imputer(const RawDataset& raw, ImputePolicy policy);
ImputeStats fit_imputer(const RawDataset& raw, ImputePolicy policy, std::span<const std::size_t> rows);
Dataset apply_imputer(const ImputeStats& stats, const RawDataset& raw);

/// fit_imputer + apply_imputer over the whole dataset.
Dataset impute_missing(const RawDataset& raw, ImputePolicy policy);

enum class SplitMode { Stratified, Shuffle };

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Row partition for a train/test split. Both index lists are ascending.
/// Stratified: per class, round(fraction * count) rows clamped to [1, count-1] go to train.
SplitIndices split_indices(std::span<const int> labels, double train_fraction, std::uint64_t seed,
                           SplitMode mode = SplitMode::Stratified);

struct TrainTest {
  Dataset train;
  Dataset test;
};

TrainTest split_train_test(const Dataset& data, double train_fraction, std::uint64_t seed,
                           SplitMode mode = SplitMode::Stratified);

ClassDistribution class_population(std::span<const int> labels);
inline ClassDistribution class_population(const Dataset& data) { return class_population(data.labels); }

}  // namespace gridids
