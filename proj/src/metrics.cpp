#include "gridids/metrics.hpp"

#include <algorithm>
#include <string>

#include "gridids/error.hpp"

namespace gridids {

namespace {

double ratio(std::uint64_t num, std::uint64_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

void check_lengths(std::span<const int> predictions, std::span<const int> truth) {
  if (predictions.size() != truth.size())
    throw Error(ErrorCode::LengthMismatch, std::to_string(predictions.size()) + " predictions vs " +
                                               std::to_string(truth.size()) + " truth labels");
  if (truth.empty()) throw Error(ErrorCode::EmptyResult, "no rows to evaluate");
}

}  // namespace

ConfusionCounts confusion(std::span<const int> predictions, std::span<const int> truth, int positive) {
  check_lengths(predictions, truth);
  ConfusionCounts c;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool p = predictions[i] == positive;
    const bool t = truth[i] == positive;
    if (p && t) ++c.tp;
    else if (p) ++c.fp;
    else if (t) ++c.fn;
    else ++c.tn;
  }
  return c;
}

MetricSet metric_set(const ConfusionCounts& c) {
  MetricSet m;
  m.accuracy = ratio(c.tp + c.tn, c.total());
  m.precision = ratio(c.tp, c.tp + c.fp);
  m.recall = ratio(c.tp, c.tp + c.fn);
  m.f1 = ratio(2 * c.tp, 2 * c.tp + c.fn + c.fp);
  return m;
}

double accuracy(std::span<const int> predictions, std::span<const int> truth) {
  check_lengths(predictions, truth);
  std::uint64_t hit = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hit += predictions[i] == truth[i];
  return ratio(hit, truth.size());
}

MulticlassReport multiclass_report(std::span<const int> predictions, std::span<const int> truth,
                                   std::span<const int> universe) {
  check_lengths(predictions, truth);
  std::vector<int> labels(universe.begin(), universe.end());
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
  auto known = [&](int l) { return std::binary_search(labels.begin(), labels.end(), l); };
  for (std::size_t i = 0; i < truth.size(); ++i)
    if (!known(truth[i]) || !known(predictions[i]))
      throw Error(ErrorCode::UnknownLabel, "label outside the evaluation universe at row " + std::to_string(i));

  MulticlassReport r;
  r.rows = truth.size();
  r.accuracy = accuracy(predictions, truth);
  for (int l : labels) {
    ClassMetrics cm;
    cm.counts = confusion(predictions, truth, l);
    cm.metrics = metric_set(cm.counts);
    cm.support = cm.counts.tp + cm.counts.fn;
    r.per_class.emplace(l, cm);
  }
  // Both averages are sum(metric * weight); with equal supports the two weights round to
  // the same double, so balanced data gives identical macro and weighted values.
  const double uniform = 1.0 / static_cast<double>(labels.size());
  const double n = static_cast<double>(truth.size());
  for (const auto& [l, cm] : r.per_class) {
    const double w = static_cast<double>(cm.support) / n;
    r.macro.accuracy += cm.metrics.accuracy * uniform;
    r.macro.precision += cm.metrics.precision * uniform;
    r.macro.recall += cm.metrics.recall * uniform;
    r.macro.f1 += cm.metrics.f1 * uniform;
    r.weighted.accuracy += cm.metrics.accuracy * w;
    r.weighted.precision += cm.metrics.precision * w;
    r.weighted.recall += cm.metrics.recall * w;
    r.weighted.f1 += cm.metrics.f1 * w;
  }
  return r;
}

}  // namespace gridids
