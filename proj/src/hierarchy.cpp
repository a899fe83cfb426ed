#include "gridids/hierarchy.hpp"

#include <algorithm>
#include <set>
#include <string>

#include "gridids/error.hpp"

namespace gridids {

namespace {

void check_labels(const Dataset& data, const LabelTaxonomy& taxonomy) {
  for (int l : data.labels)
    if (!taxonomy.contains(l)) throw Error(ErrorCode::UnknownLabel, "label " + std::to_string(l) + " is not in the taxonomy");
}

}  // namespace

Dataset remap_binary(const Dataset& data, const LabelTaxonomy& taxonomy) {
  check_labels(data, taxonomy);
  Dataset out = data;
  for (auto& l : out.labels) l = taxonomy.is_natural(l) ? taxonomy.natural_marker : taxonomy.attack_marker;
  return out;
}

Dataset filter_attacks(const Dataset& data, const LabelTaxonomy& taxonomy) {
  check_labels(data, taxonomy);
  std::vector<std::size_t> keep;
  for (std::size_t i = 0; i < data.rows(); ++i)
    if (taxonomy.is_attack(data.labels[i])) keep.push_back(i);
  if (keep.empty()) throw Error(ErrorCode::EmptyResult, "no attack rows");
  return data.select_rows(keep);
}

HierarchicalModel train_hierarchical(const Dataset& train, const LabelTaxonomy& taxonomy,
                                     const ForestParams& layer1_params, const ForestParams& layer2_params) {
  taxonomy.validate();
  const Dataset binary = remap_binary(train, taxonomy);
  const auto has = [&](int marker) { return std::find(binary.labels.begin(), binary.labels.end(), marker) != binary.labels.end(); };
  if (!has(taxonomy.natural_marker) || !has(taxonomy.attack_marker))
    throw Error(ErrorCode::ClassTooSmall, "training data needs at least one natural and one attack row");
  const Dataset attacks = filter_attacks(train, taxonomy);
  for (int l : attacks.labels)
    if (taxonomy.is_natural(l)) throw Error(ErrorCode::InvalidArgument, "natural row leaked into layer 2 training");

  HierarchicalModel m;
  m.taxonomy = taxonomy;
  m.layer1 = train_forest(binary, layer1_params);
  m.layer2 = train_forest(attacks, layer2_params);
  return m;
}

Verdict predict_hierarchical(const HierarchicalModel& model, std::span<const double> row) {
  if (model.layer1.predict(row) == model.taxonomy.natural_marker) return Verdict::natural();
  return Verdict::attack(model.layer2.predict(row));
}

std::vector<Verdict> predict_hierarchical_batch(const HierarchicalModel& model, const Matrix& rows) {
  const auto first = model.layer1.predict_batch(rows);
  std::vector<std::size_t> routed;
  for (std::size_t i = 0; i < first.size(); ++i)
    if (first[i] != model.taxonomy.natural_marker) routed.push_back(i);
  const auto second = model.layer2.predict_batch(rows.select_rows(routed));
  std::vector<Verdict> out(first.size(), Verdict::natural());
  for (std::size_t k = 0; k < routed.size(); ++k) out[routed[k]] = Verdict::attack(second[k]);
  return out;
}

int verdict_label(const Verdict& v) { return v.is_natural() ? kNaturalClass : v.attack_label; }

int collapse_label(int label, const LabelTaxonomy& taxonomy) {
  return taxonomy.is_natural(label) ? kNaturalClass : label;
}

HierarchicalReport evaluate_hierarchical(const HierarchicalModel& model, const Dataset& test) {
  check_labels(test, model.taxonomy);
  const auto& tax = model.taxonomy;
  const auto verdicts = predict_hierarchical_batch(model, test.values);

  HierarchicalReport r;
  r.rows = test.rows();
  std::vector<int> pred_joint, truth_joint;
  std::vector<int> pred_bin, truth_bin;
  std::vector<int> pred_attack_rows, truth_attack_rows;
  std::vector<int> pred_routed, truth_routed;
  std::size_t correct = 0, n_attack = 0, attack_correct = 0, n_natural = 0, natural_correct = 0;

  for (std::size_t i = 0; i < test.rows(); ++i) {
    const int truth = test.labels[i];
    const auto& v = verdicts[i];
    const int p = verdict_label(v);
    const int t = collapse_label(truth, tax);
    pred_joint.push_back(p);
    truth_joint.push_back(t);
    pred_bin.push_back(v.is_natural() ? tax.natural_marker : tax.attack_marker);
    truth_bin.push_back(tax.is_natural(truth) ? tax.natural_marker : tax.attack_marker);
    const bool ok = p == t;
    correct += ok;
    if (tax.is_attack(truth)) {
      ++n_attack;
      attack_correct += ok;
      pred_attack_rows.push_back(p);
      truth_attack_rows.push_back(truth);
    } else {
      ++n_natural;
      natural_correct += ok;
    }
    if (!v.is_natural()) {
      pred_routed.push_back(p);
      truth_routed.push_back(t);
    }
  }
  r.routed_to_layer2 = pred_routed.size();
  r.overall_accuracy = r.rows ? static_cast<double>(correct) / static_cast<double>(r.rows) : 0.0;
  r.attack_accuracy = n_attack ? static_cast<double>(attack_correct) / static_cast<double>(n_attack) : 0.0;
  r.natural_accuracy = n_natural ? static_cast<double>(natural_correct) / static_cast<double>(n_natural) : 0.0;

  const std::vector<int> markers{std::min(tax.attack_marker, tax.natural_marker),
                                 std::max(tax.attack_marker, tax.natural_marker)};
  r.layer1 = multiclass_report(pred_bin, truth_bin, markers);
  r.layer1_natural_counts = confusion(pred_bin, truth_bin, tax.natural_marker);

  std::set<int> joint_universe(tax.attack_labels.begin(), tax.attack_labels.end());
  joint_universe.insert(kNaturalClass);
  for (int l : model.layer2.labels()) joint_universe.insert(l);
  const std::vector<int> universe(joint_universe.begin(), joint_universe.end());
  r.joint = multiclass_report(pred_joint, truth_joint, universe);
  if (!pred_attack_rows.empty()) r.layer2_attack_rows = multiclass_report(pred_attack_rows, truth_attack_rows, universe);
  if (!pred_routed.empty()) r.layer2_routed_rows = multiclass_report(pred_routed, truth_routed, universe);
  return r;
}

}  // namespace gridids
