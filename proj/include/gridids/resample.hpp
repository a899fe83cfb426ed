#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "gridids/dataset.hpp"

namespace gridids {

enum class ResampleMethod { None, ROS, SMOTE, BorderlineSMOTE, ADASYN };

/// Serialized names: none, ros, smote, borderline-smote, adasyn.
std::string_view to_string(ResampleMethod m);
ResampleMethod parse_resample_method(std::string_view name);

struct ResampleConfig {
  ResampleMethod method = ResampleMethod::BorderlineSMOTE;
  std::size_t k_neighbors = 5;
  std::size_t m_neighbors = 10;
  /// Defaults to the majority class count. Must be >= every class count.
  std::optional<std::size_t> target_count;
  /// When set, ADASYN generates exactly target - count rows per class (largest remainder
  /// rounding). When cleared, per-row allocations are rounded independently, so class
  /// totals can overshoot the target.
  bool adasyn_cap = true;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Dispatches on cfg.method. Output = all input rows in input order, then synthetic rows
/// grouped by ascending class label.
Dataset resample(const Dataset& train, const ResampleConfig& cfg);

Dataset random_oversample(const Dataset& train, const ResampleConfig& cfg);
Dataset smote(const Dataset& train, const ResampleConfig& cfg);
Dataset borderline_smote(const Dataset& train, const ResampleConfig& cfg);
Dataset adasyn(const Dataset& train, const ResampleConfig& cfg);

enum class BorderlineCategory { Safe, Danger, Noise };

/// Category from the number of other-class rows among the m nearest neighbors:
/// noise if all m, danger if m/2 <= count < m, safe otherwise.
BorderlineCategory borderline_category(std::size_t other_class, std::size_t m);

/// ADASYN allocation for one class. `ratios` are r_i (other-class fraction among the k
/// nearest neighbors). Weights are r_i / sum(r), or uniform when sum(r) == 0.
struct AdasynAllocation {
  std::vector<double> weights;
  std::vector<std::size_t> counts;
};

/// capped: largest-remainder rounding of weights * deficit (sum == deficit exactly, ties to
/// the lower index). Uncapped: each count rounded half-up independently.
AdasynAllocation adasyn_allocation(std::span<const double> ratios, std::size_t deficit, bool capped = true);

}  // namespace gridids
