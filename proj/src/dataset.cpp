#include "gridids/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <unordered_map>
#include <unordered_set>

#include "gridids/error.hpp"
#include "gridids/power_system.hpp"
#include "gridids/rng.hpp"

namespace gridids {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::LabelParse: return "LabelParse";
    case ErrorCode::EmptyFile: return "EmptyFile";
    case ErrorCode::AllMissingColumn: return "AllMissingColumn";
    case ErrorCode::EmptyResult: return "EmptyResult";
    case ErrorCode::ClassTooSmall: return "ClassTooSmall";
    case ErrorCode::UnknownFeature: return "UnknownFeature";
    case ErrorCode::OutputNameCollision: return "OutputNameCollision";
    case ErrorCode::NotEnoughNeighbors: return "NotEnoughNeighbors";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::UnknownLabel: return "UnknownLabel";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::MissingSection: return "MissingSection";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Io: return "Io";
    case ErrorCode::Format: return "Format";
  }
  return "Unknown";
}

// ---- schema / taxonomy ------------------------------------------------------

std::size_t FeatureSchema::index_of(std::string_view name) const {
  auto it = std::find(feature_names.begin(), feature_names.end(), name);
  return it == feature_names.end() ? npos : static_cast<std::size_t>(it - feature_names.begin());
}

std::vector<std::string> FeatureSchema::names_of_kind(FeatureKind kind) const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < feature_names.size(); ++i)
    if (feature_kinds[i] == kind) out.push_back(feature_names[i]);
  return out;
}

void FeatureSchema::validate() const {
  if (feature_kinds.size() != feature_names.size())
    throw Error(ErrorCode::InvalidArgument, "feature kind list length differs from feature name list");
  std::unordered_set<std::string> seen;
  for (const auto& n : feature_names) {
    if (n.empty()) throw Error(ErrorCode::InvalidArgument, "empty feature name");
    if (!seen.insert(n).second) throw Error(ErrorCode::InvalidArgument, "duplicate feature name '" + n + "'");
  }
  if (label_column.empty()) throw Error(ErrorCode::InvalidArgument, "empty label column name");
  if (seen.count(label_column))
    throw Error(ErrorCode::InvalidArgument, "label column '" + label_column + "' is also a feature");
}

Dataset Dataset::select_rows(std::span<const std::size_t> idx) const {
  Dataset out;
  out.schema = schema;
  out.values = values.select_rows(idx);
  out.labels.reserve(idx.size());
  for (auto i : idx) out.labels.push_back(labels[i]);
  return out;
}

LabelTaxonomy LabelTaxonomy::power_system_default() {
  LabelTaxonomy t;
  for (int c = 1; c <= 6; ++c) t.natural_labels.insert(c);
  t.natural_labels.insert({13, 14, 41});
  for (int c = 7; c <= 12; ++c) t.attack_labels.insert(c);
  for (int c = 15; c <= 30; ++c) t.attack_labels.insert(c);
  for (int c = 35; c <= 40; ++c) t.attack_labels.insert(c);
  return t;
}

std::set<int> LabelTaxonomy::universe() const {
  std::set<int> u = natural_labels;
  u.insert(attack_labels.begin(), attack_labels.end());
  return u;
}

void LabelTaxonomy::validate() const {
  for (int n : natural_labels)
    if (attack_labels.count(n))
      throw Error(ErrorCode::InvalidArgument, "label " + std::to_string(n) + " is both natural and attack");
  if (natural_marker == attack_marker)
    throw Error(ErrorCode::InvalidArgument, "natural and attack markers must differ");
}

std::uint64_t ClassDistribution::total() const {
  std::uint64_t t = 0;
  for (const auto& [label, n] : counts) t += n;
  return t;
}

// ---- CSV --------------------------------------------------------------------

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(trim(line.substr(start)));
      break;
    }
    out.push_back(trim(line.substr(start, pos - start)));
    start = pos + 1;
  }
  return out;
}

double parse_cell(std::string_view token) {
  constexpr double missing = std::numeric_limits<double>::quiet_NaN();
  if (is_missing_token(token)) return missing;
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || ptr != token.data() + token.size() || !std::isfinite(v)) return missing;
  return v;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path.string() + "'");
  return in;
}

}  // namespace

bool is_missing_token(std::string_view token) {
  token = trim(token);
  return token.empty() || token == "NaN" || token == "nan" || token == "inf" || token == "-inf" ||
         token == "Inf" || token == "-Inf" || token == "+inf";
}

std::vector<std::string> read_csv_header(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::string line;
  if (!std::getline(in, line) || trim(line).empty()) throw Error(ErrorCode::EmptyFile, path.string());
  // Strip a UTF-8 byte-order mark.
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  std::vector<std::string> out;
  for (auto f : split_fields(line)) out.emplace_back(f);
  return out;
}

FeatureSchema infer_schema(const std::filesystem::path& path, const std::string& label_column) {
  const auto header = read_csv_header(path);
  const auto reference = power_system_schema();
  FeatureSchema schema;
  schema.label_column = label_column;
  bool found_label = false;
  for (const auto& name : header) {
    if (name == label_column) {
      found_label = true;
      continue;
    }
    const auto ref = reference.index_of(name);
    schema.feature_names.push_back(name);
    schema.feature_kinds.push_back(ref == FeatureSchema::npos ? FeatureKind::Measurement
                                                             : reference.feature_kinds[ref]);
  }
  if (!found_label)
    throw Error(ErrorCode::MissingColumn, "label column '" + label_column + "' not in " + path.string());
  schema.validate();
  return schema;
}

RawDataset load_csv(const std::filesystem::path& path, const FeatureSchema& schema) {
  schema.validate();
  auto in = open_input(path);
  std::string line;
  if (!std::getline(in, line) || trim(line).empty()) throw Error(ErrorCode::EmptyFile, path.string());
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);

  std::unordered_map<std::string, std::size_t> column;
  {
    const auto header = split_fields(line);
    for (std::size_t i = 0; i < header.size(); ++i) column.emplace(std::string(header[i]), i);
  }
  auto locate = [&](const std::string& name) {
    auto it = column.find(name);
    if (it == column.end())
      throw Error(ErrorCode::MissingColumn, "column '" + name + "' not found in " + path.string());
    return it->second;
  };
  std::vector<std::size_t> source(schema.size());
  for (std::size_t j = 0; j < schema.size(); ++j) source[j] = locate(schema.feature_names[j]);
  const std::size_t label_col = locate(schema.label_column);

  RawDataset raw;
  raw.schema = schema;
  raw.values = Matrix(0, schema.size());
  std::vector<double> row(schema.size());
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() < column.size())
      throw Error(ErrorCode::Format, path.string() + ":" + std::to_string(line_no) + ": expected " +
                                         std::to_string(column.size()) + " fields, got " +
                                         std::to_string(fields.size()));
    for (std::size_t j = 0; j < source.size(); ++j) row[j] = parse_cell(fields[source[j]]);
    const auto label_token = fields[label_col];
    int label = 0;
    auto [ptr, ec] = std::from_chars(label_token.data(), label_token.data() + label_token.size(), label);
    if (ec != std::errc() || ptr != label_token.data() + label_token.size())
      throw Error(ErrorCode::LabelParse, path.string() + ":" + std::to_string(line_no) + ": '" +
                                             std::string(label_token) + "' is not an integer label");
    raw.values.append_row(row);
    raw.labels.push_back(label);
  }
  if (raw.labels.empty()) throw Error(ErrorCode::EmptyFile, path.string() + " has no data rows");
  return raw;
}

RawDataset load_csv(std::span<const std::filesystem::path> paths, const FeatureSchema& schema) {
  if (paths.empty()) throw Error(ErrorCode::InvalidArgument, "no input files");
  RawDataset out = load_csv(paths.front(), schema);
  for (std::size_t i = 1; i < paths.size(); ++i) out = concat(out, load_csv(paths[i], schema));
  return out;
}

RawDataset concat(const RawDataset& a, const RawDataset& b) {
  if (a.schema.feature_names != b.schema.feature_names)
    throw Error(ErrorCode::DimensionMismatch, "cannot concatenate datasets with different schemas");
  RawDataset out = a;
  out.values.reserve_rows(a.rows() + b.rows());
  for (std::size_t i = 0; i < b.rows(); ++i) out.values.append_row(b.values.row(i));
  out.labels.insert(out.labels.end(), b.labels.begin(), b.labels.end());
  return out;
}

// ---- imputation ---------------------------------------------------------------

ImputeStats fit_imputer(const RawDataset& raw, ImputePolicy policy) {
  std::vector<std::size_t> all(raw.rows());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return fit_imputer(raw, policy, all);
}

ImputeStats fit_imputer(const RawDataset& raw, ImputePolicy policy, std::span<const std::size_t> rows) {
  ImputeStats stats;
  stats.policy = policy;
  if (policy != ImputePolicy::Mean && policy != ImputePolicy::Median) return stats;

  const std::size_t cols = raw.values.cols();
  stats.fill.resize(cols);
  std::vector<double> present;
  for (std::size_t j = 0; j < cols; ++j) {
    present.clear();
    for (auto i : rows) {
      const double v = raw.values(i, j);
      if (!std::isnan(v)) present.push_back(v);
    }
    if (present.empty())
      throw Error(ErrorCode::AllMissingColumn, "column '" + raw.schema.feature_names[j] + "' has no present values");
    if (policy == ImputePolicy::Mean) {
      double sum = 0.0;
      for (double v : present) sum += v;
      stats.fill[j] = sum / static_cast<double>(present.size());
    } else {
      const std::size_t n = present.size();
      const std::size_t mid = n / 2;
      std::nth_element(present.begin(), present.begin() + mid, present.end());
      double m = present[mid];
      if (n % 2 == 0) {
        const double lower = *std::max_element(present.begin(), present.begin() + mid);
        m = 0.5 * (lower + m);
      }
      stats.fill[j] = m;
    }
  }
  return stats;
}

Dataset apply_imputer(const ImputeStats& stats, const RawDataset& raw) {
  Dataset out;
  out.schema = raw.schema;
  const std::size_t cols = raw.values.cols();
  if (!stats.fill.empty() && stats.fill.size() != cols)
    throw Error(ErrorCode::DimensionMismatch, "imputer fitted on a different column count");

  if (stats.policy == ImputePolicy::Drop) {
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < raw.rows(); ++i) {
      auto r = raw.values.row(i);
      if (std::none_of(r.begin(), r.end(), [](double v) { return std::isnan(v); })) keep.push_back(i);
    }
    if (keep.empty()) throw Error(ErrorCode::EmptyResult, "every row contains a missing value");
    out.values = raw.values.select_rows(keep);
    for (auto i : keep) out.labels.push_back(raw.labels[i]);
    return out;
  }

  out.values = raw.values;
  out.labels = raw.labels;
  for (std::size_t i = 0; i < out.values.rows(); ++i)
    for (std::size_t j = 0; j < cols; ++j)
      if (std::isnan(out.values(i, j))) out.values(i, j) = stats.policy == ImputePolicy::Zero ? 0.0 : stats.fill[j];
  return out;
}

Dataset impute_missing(const RawDataset& raw, ImputePolicy policy) {
  return apply_imputer(fit_imputer(raw, policy), raw);
}

// ---- split --------------------------------------------------------------------

SplitIndices split_indices(std::span<const int> labels, double train_fraction, std::uint64_t seed,
                           SplitMode mode) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw Error(ErrorCode::InvalidArgument, "train fraction must lie in (0, 1)");
  const std::size_t n = labels.size();
  SplitIndices out;

  if (mode == SplitMode::Shuffle) {
    if (n < 2) throw Error(ErrorCode::ClassTooSmall, "need at least two rows to split");
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    Rng rng(derive_seed(seed, 0));
    rng.shuffle(perm.begin(), perm.end());
    auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
    n_train = std::clamp<std::size_t>(n_train, 1, n - 1);
    out.train.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
    out.test.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train), perm.end());
  } else {
    std::map<int, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < n; ++i) by_class[labels[i]].push_back(i);
    for (auto& [label, rows] : by_class) {
      if (rows.size() < 2)
        throw Error(ErrorCode::ClassTooSmall,
                    "class " + std::to_string(label) + " has a single row and cannot appear on both sides");
      Rng rng(derive_seed(seed, static_cast<std::uint64_t>(static_cast<std::int64_t>(label))));
      rng.shuffle(rows.begin(), rows.end());
      auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(rows.size())));
      n_train = std::clamp<std::size_t>(n_train, 1, rows.size() - 1);
      out.train.insert(out.train.end(), rows.begin(), rows.begin() + static_cast<std::ptrdiff_t>(n_train));
      out.test.insert(out.test.end(), rows.begin() + static_cast<std::ptrdiff_t>(n_train), rows.end());
    }
  }
  std::sort(out.train.begin(), out.train.end());
  std::sort(out.test.begin(), out.test.end());
  return out;
}

TrainTest split_train_test(const Dataset& data, double train_fraction, std::uint64_t seed, SplitMode mode) {
  const auto idx = split_indices(data.labels, train_fraction, seed, mode);
  return {data.select_rows(idx.train), data.select_rows(idx.test)};
}

ClassDistribution class_population(std::span<const int> labels) {
  if (labels.empty()) throw Error(ErrorCode::EmptyResult, "class population of an empty dataset");
  ClassDistribution d;
  for (int l : labels) ++d.counts[l];
  const auto total = static_cast<double>(labels.size());
  for (const auto& [label, n] : d.counts) d.proportions[label] = static_cast<double>(n) / total;
  return d;
}

}  // namespace gridids
