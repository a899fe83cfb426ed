#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <vector>

namespace gridids {

struct ConfusionCounts {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  std::uint64_t tn = 0;

  std::uint64_t total() const noexcept { return tp + fp + fn + tn; }
  bool operator==(const ConfusionCounts&) const = default;
};

struct MetricSet {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// One-vs-rest tally with `positive` as the positive class.
ConfusionCounts confusion(std::span<const int> predictions, std::span<const int> truth, int positive);

/// accuracy (TP+TN)/total, precision TP/(TP+FP), recall TP/(TP+FN), f1 2TP/(2TP+FN+FP).
/// A zero denominator yields 0.
MetricSet metric_set(const ConfusionCounts& c);

struct ClassMetrics {
  ConfusionCounts counts;
  MetricSet metrics;
  std::uint64_t support = 0;  // rows whose true label is this class
};

struct MulticlassReport {
  std::map<int, ClassMetrics> per_class;
  MetricSet macro;
  MetricSet weighted;  // weights = true-class support
  double accuracy = 0.0;  // exact-match fraction
  std::uint64_t rows = 0;
};

/// Throws LengthMismatch on unequal lengths, UnknownLabel if a label is outside `universe`.
MulticlassReport multiclass_report(std::span<const int> predictions, std::span<const int> truth,
                                   std::span<const int> universe);

/// Fraction of positions where predictions == truth.
double accuracy(std::span<const int> predictions, std::span<const int> truth);

}  // namespace gridids
