#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "gridids/dataset.hpp"
#include "gridids/matrix.hpp"

namespace gridids {

enum class Criterion { Gini, Entropy };
enum class MaxFeatures { Sqrt, Log2, All };

std::string_view to_string(Criterion c);
std::string_view to_string(MaxFeatures m);
Criterion parse_criterion(std::string_view name);
MaxFeatures parse_max_features(std::string_view name);

// ---- impurity ---------------------------------------------------------------

/// 1 - sum p_i^2
double gini(const ClassDistribution& dist);
/// sum p_i (1 - p_i); algebraically equal to gini().
double gini_sum_form(const ClassDistribution& dist);
/// -sum p_i log2 p_i, with 0 log 0 = 0.
double entropy(const ClassDistribution& dist);

/// Impurity of a node from its per-class counts. This is the path used by tree training,
/// so split search and any re-evaluation of a split agree bit for bit.
double impurity(std::span<const std::uint64_t> counts, Criterion criterion);

/// parent - (n_left/n) * left - (n_right/n) * right, n = n_left + n_right.
double impurity_decrease(double parent, double left, double right, std::uint64_t n_left, std::uint64_t n_right);

/// Decrease for a parent split into `left` and `right`; child sizes are their count totals.
double impurity_decrease(const ClassDistribution& parent, const ClassDistribution& left,
                         const ClassDistribution& right, Criterion criterion);

/// Splits whose impurity decrease does not exceed this are not made.
inline constexpr double kMinImpurityDecrease = 1e-12;

// ---- splitting ----------------------------------------------------------------

struct SplitRecord {
  std::size_t feature = 0;
  double threshold = 0.0;  // rows with x <= threshold go left
  double parent_impurity = 0.0;
  double left_impurity = 0.0;
  double right_impurity = 0.0;
  std::uint64_t n_left = 0;
  std::uint64_t n_right = 0;

  std::uint64_t n_samples() const noexcept { return n_left + n_right; }
  double left_proportion() const noexcept {
    return static_cast<double>(n_left) / static_cast<double>(n_samples());
  }
  double right_proportion() const noexcept {
    return static_cast<double>(n_right) / static_cast<double>(n_samples());
  }
  double decrease() const {
    return impurity_decrease(parent_impurity, left_impurity, right_impurity, n_left, n_right);
  }
};

/// Threshold halfway between two consecutive distinct sorted values, kept strictly below `hi`.
double midpoint_threshold(double lo, double hi);

/// Best (feature, threshold) over `features` for the node holding `rows`. Candidate
/// thresholds are midpoints between consecutive distinct values. Ties go to the lower
/// feature index, then the lower threshold. Absent when no candidate decreases impurity
/// by more than kMinImpurityDecrease.
/// `class_index[i]` is the class of row i in [0, n_classes).
std::optional<SplitRecord> best_split(const Matrix& x, std::span<const std::uint32_t> class_index,
                                      std::size_t n_classes, std::span<const std::size_t> rows,
                                      std::span<const std::size_t> features, Criterion criterion);

// ---- trees ----------------------------------------------------------------------

struct ForestParams {
  std::size_t n_estimators = 330;
  MaxFeatures max_features = MaxFeatures::Log2;
  Criterion criterion = Criterion::Gini;
  std::optional<std::size_t> max_depth;  // unlimited when empty
  std::size_t min_samples_split = 2;
  bool bootstrap = true;
  std::uint64_t seed = 0;

  void validate() const;

  /// Untuned baseline: 100 trees, sqrt features, Gini.
  static ForestParams primary_default();

  bool operator==(const ForestParams&) const = default;
};

/// Number of features examined per node: ceil(sqrt F), ceil(log2 F) or F; at least 1.
std::size_t features_per_node(MaxFeatures m, std::size_t n_features);

struct TreeNode {
  // internal node: left/right are child indices (> 0); leaf: both 0
  std::uint32_t left = 0;
  std::uint32_t right = 0;
  std::uint32_t feature = 0;
  double threshold = 0.0;
  double impurity = 0.0;
  std::uint64_t n_samples = 0;
  // leaf only
  std::uint32_t prediction = 0;  // class index, argmax of counts (ties to lower)
  std::uint32_t counts_begin = 0;
  std::uint32_t counts_size = 0;

  bool is_leaf() const noexcept { return left == 0; }
  bool operator==(const TreeNode&) const = default;
};

/// Sparse leaf class count: (class index, count).
struct LeafCount {
  std::uint32_t class_index = 0;
  std::uint64_t count = 0;
  bool operator==(const LeafCount&) const = default;
};

class DecisionTree {
 public:
  DecisionTree() = default;
  DecisionTree(std::vector<TreeNode> nodes, std::vector<LeafCount> leaf_counts)
      : nodes_(std::move(nodes)), leaf_counts_(std::move(leaf_counts)) {}

  const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
  const std::vector<LeafCount>& leaf_counts() const noexcept { return leaf_counts_; }
  std::span<const LeafCount> counts_of(const TreeNode& leaf) const {
    return {leaf_counts_.data() + leaf.counts_begin, leaf.counts_size};
  }

  std::size_t leaf_index(std::span<const double> row) const;
  std::uint32_t predict_index(std::span<const double> row) const { return nodes_[leaf_index(row)].prediction; }

  /// Split record of an internal node; absent for leaves.
  std::optional<SplitRecord> split_record(std::size_t node) const;

  std::size_t depth() const;
  std::size_t leaf_count() const;

  bool operator==(const DecisionTree&) const = default;

 private:
  std::vector<TreeNode> nodes_;
  std::vector<LeafCount> leaf_counts_;
};

/// Sorted distinct labels of a dataset; class indices refer to positions in this list.
std::vector<int> label_universe(std::span<const int> labels);

/// One CART tree. Class indices in leaves refer to label_universe(train.labels).
DecisionTree train_tree(const Dataset& train, const ForestParams& params, std::uint64_t tree_seed);

// ---- forest ------------------------------------------------------------------------

class Forest {
 public:
  Forest() = default;
  Forest(ForestParams params, std::size_t feature_count, std::vector<int> labels, std::vector<DecisionTree> trees)
      : params_(params), feature_count_(feature_count), labels_(std::move(labels)), trees_(std::move(trees)) {}

  const ForestParams& params() const noexcept { return params_; }
  std::size_t feature_count() const noexcept { return feature_count_; }
  const std::vector<int>& labels() const noexcept { return labels_; }
  const std::vector<DecisionTree>& trees() const noexcept { return trees_; }

  /// Majority vote over trees, ties to the lower label. Throws DimensionMismatch.
  int predict(std::span<const double> row) const;
  /// Per-tree predicted labels for one row.
  std::vector<int> tree_predictions(std::span<const double> row) const;

  /// predict() for every row; parallel over rows when built with OpenMP.
  std::vector<int> predict_batch(const Matrix& rows) const;
  std::vector<int> predict_batch_serial(const Matrix& rows) const;

  bool operator==(const Forest&) const = default;

 private:
  ForestParams params_;
  std::size_t feature_count_ = 0;
  std::vector<int> labels_;
  std::vector<DecisionTree> trees_;
};

/// Trains params.n_estimators trees; tree i uses seed derive_seed(params.seed, i), so the
/// result does not depend on the thread count. Parallel over trees with OpenMP.
Forest train_forest(const Dataset& train, const ForestParams& params);
/// Single-threaded reference for train_forest.
Forest train_forest_serial(const Dataset& train, const ForestParams& params);

/// Mean decrease in impurity of one tree, normalized to sum 1 (all zeros for a bare leaf).
std::vector<double> mdi_importance(const DecisionTree& tree, std::size_t n_features);
/// Mean of the per-tree normalized importances.
std::vector<double> mdi_importance(const Forest& forest);

}  // namespace gridids
