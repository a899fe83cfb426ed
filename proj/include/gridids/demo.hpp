#pragma once

#include <cstdint>
#include <filesystem>

#include "gridids/dataset.hpp"

namespace gridids {

/// Synthetic stand-in for the PMU dataset: the 128-column power-system schema and the 37
/// scenario labels of the default taxonomy, one Gaussian cluster per class, with class
/// centers scattered around a natural and an attack family center. Class 36 gets
/// `majority_rows`, class 21 gets majority_rows / imbalance, the rest fall in between.
/// Log/status columns carry no class signal.
struct DemoConfig {
  std::size_t majority_rows = 185;
  double imbalance = 3.7;
  /// Class-center offset in units of the per-feature noise deviation.
  double separation = 1.0;
  /// Offset between the natural and attack family centers, in the same units.
  double family_separation = 1.0;
  double missing_rate = 0.002;
  std::uint64_t seed = 7;
};

RawDataset generate_demo(const DemoConfig& cfg);

/// Writes a header row and one line per row; missing cells are written as NaN.
void write_csv(const std::filesystem::path& path, const RawDataset& data);
void write_csv(const std::filesystem::path& path, const Dataset& data);

}  // namespace gridids
