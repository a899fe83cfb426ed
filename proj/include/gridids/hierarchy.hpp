#pragma once

#include <optional>
#include <span>
#include <vector>

#include "gridids/dataset.hpp"
#include "gridids/forest.hpp"
#include "gridids/metrics.hpp"

namespace gridids {

/// Two-layer model: layer 1 votes natural vs attack; rows voted attack go to layer 2,
/// which names the attack class.
struct HierarchicalModel {
  Forest layer1;  // labels {attack_marker, natural_marker}
  Forest layer2;  // attack labels only
  LabelTaxonomy taxonomy;

  bool operator==(const HierarchicalModel&) const = default;
};

struct Verdict {
  enum class Kind { Natural, Attack };
  Kind kind = Kind::Natural;
  int attack_label = 0;  // meaningful for Attack only

  static Verdict natural() { return {Kind::Natural, 0}; }
  static Verdict attack(int label) { return {Kind::Attack, label}; }
  bool is_natural() const noexcept { return kind == Kind::Natural; }
  bool operator==(const Verdict&) const = default;
};

/// Label used for the aggregate "Natural" class in hierarchical confusion accounting.
inline constexpr int kNaturalClass = -1;

/// Natural labels -> natural_marker, attack labels -> attack_marker. Throws UnknownLabel.
Dataset remap_binary(const Dataset& data, const LabelTaxonomy& taxonomy);

/// Keeps attack rows with their original labels. Throws UnknownLabel / EmptyResult.
Dataset filter_attacks(const Dataset& data, const LabelTaxonomy& taxonomy);

HierarchicalModel train_hierarchical(const Dataset& train, const LabelTaxonomy& taxonomy,
                                     const ForestParams& layer1_params, const ForestParams& layer2_params);

Verdict predict_hierarchical(const HierarchicalModel& model, std::span<const double> row);
std::vector<Verdict> predict_hierarchical_batch(const HierarchicalModel& model, const Matrix& rows);

/// Verdict as a single label: kNaturalClass or the attack label.
int verdict_label(const Verdict& v);
/// True label collapsed the same way: natural labels -> kNaturalClass.
int collapse_label(int label, const LabelTaxonomy& taxonomy);

struct HierarchicalReport {
  /// Natural rows correct iff verdict Natural; attack rows correct iff Attack(exact label).
  double overall_accuracy = 0.0;
  /// Fraction of attack-truth rows predicted with their exact label.
  double attack_accuracy = 0.0;
  /// Fraction of natural-truth rows predicted Natural.
  double natural_accuracy = 0.0;

  /// Layer 1 on the binary-remapped test set; labels are the taxonomy markers.
  MulticlassReport layer1;
  /// Positive class = natural_marker.
  ConfusionCounts layer1_natural_counts;

  /// Attack-truth rows only; a Natural verdict appears as kNaturalClass.
  std::optional<MulticlassReport> layer2_attack_rows;
  /// Rows routed to layer 2; natural truths appear as kNaturalClass.
  std::optional<MulticlassReport> layer2_routed_rows;

  /// Attack labels plus kNaturalClass over all test rows.
  MulticlassReport joint;

  std::size_t rows = 0;
  std::size_t routed_to_layer2 = 0;
};

HierarchicalReport evaluate_hierarchical(const HierarchicalModel& model, const Dataset& test);

}  // namespace gridids
