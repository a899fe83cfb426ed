#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "gridids/dataset.hpp"
#include "gridids/rng.hpp"

namespace testing {

inline gridids::FeatureSchema plain_schema(std::size_t features) {
  gridids::FeatureSchema s;
  for (std::size_t j = 0; j < features; ++j) {
    s.feature_names.push_back("f" + std::to_string(j));
    s.feature_kinds.push_back(gridids::FeatureKind::Measurement);
  }
  return s;
}

inline gridids::Dataset make_dataset(std::size_t features, const std::vector<std::vector<double>>& rows,
                                     std::vector<int> labels) {
  gridids::Dataset d;
  d.schema = plain_schema(features);
  d.values = gridids::Matrix(0, features);
  for (const auto& r : rows) d.values.append_row(r);
  d.labels = std::move(labels);
  return d;
}

/// Isotropic Gaussian blobs: class c centered at centers[c], `per_class[c]` rows.
inline gridids::Dataset blobs(const std::vector<std::vector<double>>& centers, const std::vector<std::size_t>& per_class,
                              double sigma, std::uint64_t seed, const std::vector<int>& labels = {}) {
  const std::size_t f = centers.front().size();
  gridids::Dataset d;
  d.schema = plain_schema(f);
  d.values = gridids::Matrix(0, f);
  gridids::Rng rng(seed);
  std::vector<double> row(f);
  for (std::size_t c = 0; c < centers.size(); ++c)
    for (std::size_t i = 0; i < per_class[c]; ++i) {
      for (std::size_t j = 0; j < f; ++j) row[j] = centers[c][j] + sigma * rng.normal();
      d.values.append_row(row);
      d.labels.push_back(labels.empty() ? static_cast<int>(c) : labels[c]);
    }
  return d;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    gridids::Rng rng(std::hash<std::string>{}(tag) ^ static_cast<std::uint64_t>(
                         std::filesystem::file_time_type::clock::now().time_since_epoch().count()));
    path_ = std::filesystem::temp_directory_path() / ("gridids-" + tag + "-" + std::to_string(rng.next() % 1000000007));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::filesystem::path file(const std::string& name) const { return path_ / name; }
  std::filesystem::path write(const std::string& name, const std::string& text) const {
    const auto p = file(name);
    std::ofstream(p) << text;
    return p;
  }

 private:
  std::filesystem::path path_;
};

}  // namespace testing
