#include "gridids/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>

#include "gridids/error.hpp"
#include "gridids/rng.hpp"

namespace gridids {

std::string_view to_string(Criterion c) { return c == Criterion::Gini ? "gini" : "entropy"; }

std::string_view to_string(MaxFeatures m) {
  switch (m) {
    case MaxFeatures::Sqrt: return "sqrt";
    case MaxFeatures::Log2: return "log2";
    case MaxFeatures::All: return "all";
  }
  return "log2";
}

Criterion parse_criterion(std::string_view name) {
  if (name == "gini") return Criterion::Gini;
  if (name == "entropy") return Criterion::Entropy;
  throw Error(ErrorCode::InvalidArgument, "unknown criterion '" + std::string(name) + "'");
}

MaxFeatures parse_max_features(std::string_view name) {
  if (name == "sqrt") return MaxFeatures::Sqrt;
  if (name == "log2") return MaxFeatures::Log2;
  if (name == "all") return MaxFeatures::All;
  throw Error(ErrorCode::InvalidArgument, "unknown max_features '" + std::string(name) + "'");
}

// ---- impurity ---------------------------------------------------------------------

double gini(const ClassDistribution& dist) {
  double s = 0.0;
  for (const auto& [label, p] : dist.proportions) s += p * p;
  return 1.0 - s;
}

double gini_sum_form(const ClassDistribution& dist) {
  double s = 0.0;
  for (const auto& [label, p] : dist.proportions) s += p * (1.0 - p);
  return s;
}

double entropy(const ClassDistribution& dist) {
  double h = 0.0;
  for (const auto& [label, p] : dist.proportions)
    if (p > 0.0) h -= p * std::log2(p);
  return h;
}

namespace {

double gini_from_sumsq(std::uint64_t sumsq, std::uint64_t n) {
  const double nn = static_cast<double>(n);
  return 1.0 - static_cast<double>(sumsq) / (nn * nn);
}

double entropy_from_counts(std::span<const std::uint64_t> counts, std::uint64_t n) {
  const double nn = static_cast<double>(n);
  double h = 0.0;
  for (auto c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / nn;
    h -= p * std::log2(p);
  }
  return h;
}

std::vector<std::uint64_t> dense_counts(const ClassDistribution& d, const std::vector<int>& universe) {
  std::vector<std::uint64_t> out(universe.size(), 0);
  for (const auto& [label, n] : d.counts) {
    const auto it = std::lower_bound(universe.begin(), universe.end(), label);
    out[static_cast<std::size_t>(it - universe.begin())] = n;
  }
  return out;
}

}  // namespace

double impurity(std::span<const std::uint64_t> counts, Criterion criterion) {
  std::uint64_t n = 0;
  std::uint64_t sumsq = 0;
  for (auto c : counts) {
    n += c;
    sumsq += c * c;
  }
  if (n == 0) return 0.0;
  return criterion == Criterion::Gini ? gini_from_sumsq(sumsq, n) : entropy_from_counts(counts, n);
}

double impurity_decrease(double parent, double left, double right, std::uint64_t n_left, std::uint64_t n_right) {
  const double n = static_cast<double>(n_left + n_right);
  return parent - (static_cast<double>(n_left) / n) * left - (static_cast<double>(n_right) / n) * right;
}

double impurity_decrease(const ClassDistribution& parent, const ClassDistribution& left,
                         const ClassDistribution& right, Criterion criterion) {
  std::vector<int> universe;
  for (const auto& [label, n] : parent.counts) universe.push_back(label);
  const auto nl = left.total();
  const auto nr = right.total();
  if (nl == 0 || nr == 0 || nl + nr != parent.total())
    throw Error(ErrorCode::InvalidArgument, "child counts must be positive and sum to the parent count");
  for (const auto* child : {&left, &right})
    for (const auto& [label, n] : child->counts)
      if (!parent.counts.count(label) || parent.counts.at(label) < n)
        throw Error(ErrorCode::InvalidArgument, "child class counts exceed the parent's");
  return impurity_decrease(impurity(dense_counts(parent, universe), criterion),
                           impurity(dense_counts(left, universe), criterion),
                           impurity(dense_counts(right, universe), criterion), nl, nr);
}

double midpoint_threshold(double lo, double hi) {
  double t = lo + (hi - lo) * 0.5;
  if (!(t < hi) || !std::isfinite(t)) t = lo;
  return t;
}

// ---- split search ---------------------------------------------------------------------

namespace {

struct Candidate {
  double threshold = 0.0;
  double decrease = 0.0;
  double left_impurity = 0.0;
  double right_impurity = 0.0;
  std::uint64_t n_left = 0;
};

/// Scratch buffers for one thread of split search.
struct SplitScratch {
  std::vector<std::pair<double, std::uint32_t>> sorted;
  std::vector<std::uint64_t> left;
  std::vector<std::uint64_t> right;
};

enum class FeatureScan { Constant, NoGain, Found };

/// Sweeps every midpoint threshold of feature `f` over the node rows.
FeatureScan scan_feature(const Matrix& x, std::span<const std::uint32_t> y, std::span<const std::size_t> rows,
                         std::size_t f, Criterion criterion, std::span<const std::uint64_t> parent_counts,
                         double parent_impurity, SplitScratch& s, Candidate& best) {
  const std::size_t n = rows.size();
  double lo = x(rows[0], f);
  double hi = lo;
  for (auto r : rows) {
    const double v = x(r, f);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  if (!(lo < hi)) return FeatureScan::Constant;

  s.sorted.clear();
  for (auto r : rows) s.sorted.emplace_back(x(r, f), y[r]);
  std::sort(s.sorted.begin(), s.sorted.end());

  const std::size_t n_classes = parent_counts.size();
  s.left.assign(n_classes, 0);
  s.right.assign(parent_counts.begin(), parent_counts.end());
  std::uint64_t sum_left = 0;
  std::uint64_t sum_right = 0;
  for (auto c : parent_counts) sum_right += c * c;

  bool found = false;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const auto c = s.sorted[i].second;
    sum_left += 2 * s.left[c] + 1;
    ++s.left[c];
    sum_right -= 2 * s.right[c] - 1;
    --s.right[c];
    if (!(s.sorted[i].first < s.sorted[i + 1].first)) continue;

    const std::uint64_t n_left = i + 1;
    const std::uint64_t n_right = n - n_left;
    double gl, gr;
    if (criterion == Criterion::Gini) {
      gl = gini_from_sumsq(sum_left, n_left);
      gr = gini_from_sumsq(sum_right, n_right);
    } else {
      gl = entropy_from_counts(s.left, n_left);
      gr = entropy_from_counts(s.right, n_right);
    }
    const double dec = impurity_decrease(parent_impurity, gl, gr, n_left, n_right);
    if (dec > kMinImpurityDecrease && (!found || dec > best.decrease)) {
      found = true;
      best = {midpoint_threshold(s.sorted[i].first, s.sorted[i + 1].first), dec, gl, gr, n_left};
    }
  }
  return found ? FeatureScan::Found : FeatureScan::NoGain;
}

bool better(const Candidate& c, std::size_t feature, const std::optional<SplitRecord>& best, double best_decrease) {
  if (!best) return true;
  if (c.decrease != best_decrease) return c.decrease > best_decrease;
  return feature < best->feature;
}

SplitRecord make_record(std::size_t feature, const Candidate& c, double parent_impurity, std::size_t n) {
  SplitRecord r;
  r.feature = feature;
  r.threshold = c.threshold;
  r.parent_impurity = parent_impurity;
  r.left_impurity = c.left_impurity;
  r.right_impurity = c.right_impurity;
  r.n_left = c.n_left;
  r.n_right = n - c.n_left;
  return r;
}

}  // namespace

std::optional<SplitRecord> best_split(const Matrix& x, std::span<const std::uint32_t> class_index,
                                      std::size_t n_classes, std::span<const std::size_t> rows,
                                      std::span<const std::size_t> features, Criterion criterion) {
  if (rows.size() < 2 || features.empty()) return std::nullopt;
  std::vector<std::uint64_t> counts(n_classes, 0);
  for (auto r : rows) ++counts[class_index[r]];
  const double parent = impurity(counts, criterion);

  SplitScratch scratch;
  std::optional<SplitRecord> best;
  double best_decrease = 0.0;
  for (auto f : features) {
    Candidate c;
    if (scan_feature(x, class_index, rows, f, criterion, counts, parent, scratch, c) != FeatureScan::Found) continue;
    if (better(c, f, best, best_decrease)) {
      best = make_record(f, c, parent, rows.size());
      best_decrease = c.decrease;
    }
  }
  return best;
}

// ---- trees ----------------------------------------------------------------------------

void ForestParams::validate() const {
  if (n_estimators < 1) throw Error(ErrorCode::InvalidArgument, "n_estimators must be >= 1");
  if (min_samples_split < 2) throw Error(ErrorCode::InvalidArgument, "min_samples_split must be >= 2");
  if (max_depth && *max_depth < 1) throw Error(ErrorCode::InvalidArgument, "max_depth must be >= 1");
}

ForestParams ForestParams::primary_default() {
  ForestParams p;
  p.n_estimators = 100;
  p.max_features = MaxFeatures::Sqrt;
  p.criterion = Criterion::Gini;
  return p;
}

std::size_t features_per_node(MaxFeatures m, std::size_t n_features) {
  if (n_features == 0) return 0;
  std::size_t k = n_features;
  if (m == MaxFeatures::Sqrt) {
    k = 1;
    while (k * k < n_features) ++k;
  } else if (m == MaxFeatures::Log2) {
    k = 0;
    while ((std::size_t{1} << k) < n_features) ++k;
  }
  return std::max<std::size_t>(k, 1);
}

std::size_t DecisionTree::leaf_index(std::span<const double> row) const {
  std::size_t i = 0;
  while (!nodes_[i].is_leaf()) {
    const auto& n = nodes_[i];
    i = row[n.feature] <= n.threshold ? n.left : n.right;
  }
  return i;
}

std::optional<SplitRecord> DecisionTree::split_record(std::size_t node) const {
  const auto& n = nodes_.at(node);
  if (n.is_leaf()) return std::nullopt;
  SplitRecord r;
  r.feature = n.feature;
  r.threshold = n.threshold;
  r.parent_impurity = n.impurity;
  r.left_impurity = nodes_[n.left].impurity;
  r.right_impurity = nodes_[n.right].impurity;
  r.n_left = nodes_[n.left].n_samples;
  r.n_right = nodes_[n.right].n_samples;
  return r;
}

std::size_t DecisionTree::depth() const {
  if (nodes_.empty()) return 0;
  std::vector<std::size_t> d(nodes_.size(), 0);
  std::size_t deepest = 0;
  // children always follow their parent
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    deepest = std::max(deepest, d[i]);
    if (!nodes_[i].is_leaf()) d[nodes_[i].left] = d[nodes_[i].right] = d[i] + 1;
  }
  return deepest;
}

std::size_t DecisionTree::leaf_count() const {
  return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

std::vector<int> label_universe(std::span<const int> labels) {
  std::vector<int> u(labels.begin(), labels.end());
  std::sort(u.begin(), u.end());
  u.erase(std::unique(u.begin(), u.end()), u.end());
  return u;
}

namespace {

std::vector<std::uint32_t> class_indices(std::span<const int> labels, const std::vector<int>& universe) {
  std::vector<std::uint32_t> y(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i)
    y[i] = static_cast<std::uint32_t>(std::lower_bound(universe.begin(), universe.end(), labels[i]) - universe.begin());
  return y;
}

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& x, std::span<const std::uint32_t> y, std::size_t n_classes, const ForestParams& params,
              std::uint64_t seed)
      : x_(x), y_(y), n_classes_(n_classes), params_(params), rng_(seed) {}

  DecisionTree build() {
    const std::size_t n = x_.rows();
    samples_.resize(n);
    if (params_.bootstrap) {
      for (auto& s : samples_) s = static_cast<std::size_t>(rng_.below(n));
    } else {
      std::iota(samples_.begin(), samples_.end(), std::size_t{0});
    }
    feature_order_.resize(x_.cols());
    std::iota(feature_order_.begin(), feature_order_.end(), std::size_t{0});
    const std::size_t mtry = features_per_node(params_.max_features, x_.cols());

    struct Pending {
      std::size_t node, begin, end, depth;
    };
    std::vector<Pending> stack{{0, 0, n, 0}};
    nodes_.emplace_back();
    std::vector<std::uint64_t> counts(n_classes_);

    while (!stack.empty()) {
      const auto [id, begin, end, depth] = stack.back();
      stack.pop_back();
      const std::span<const std::size_t> rows(samples_.data() + begin, end - begin);

      std::fill(counts.begin(), counts.end(), 0);
      for (auto r : rows) ++counts[y_[r]];
      const double node_impurity = impurity(counts, params_.criterion);
      nodes_[id].impurity = node_impurity;
      nodes_[id].n_samples = rows.size();

      const auto distinct = std::count_if(counts.begin(), counts.end(), [](std::uint64_t c) { return c > 0; });
      const bool stop = distinct <= 1 || rows.size() < params_.min_samples_split ||
                        (params_.max_depth && depth >= *params_.max_depth);
      std::optional<SplitRecord> split;
      if (!stop) split = search(rows, counts, node_impurity, mtry);
      if (!split) {
        make_leaf(id, counts);
        continue;
      }

      auto mid = std::partition(samples_.begin() + static_cast<std::ptrdiff_t>(begin),
                                samples_.begin() + static_cast<std::ptrdiff_t>(end),
                                [&](std::size_t r) { return x_(r, split->feature) <= split->threshold; });
      const auto split_at = static_cast<std::size_t>(mid - samples_.begin());
      const auto left = static_cast<std::uint32_t>(nodes_.size());
      nodes_.emplace_back();
      nodes_.emplace_back();
      auto& node = nodes_[id];
      node.feature = static_cast<std::uint32_t>(split->feature);
      node.threshold = split->threshold;
      node.left = left;
      node.right = left + 1;
      stack.push_back({left + 1, split_at, end, depth + 1});
      stack.push_back({left, begin, split_at, depth + 1});
    }
    return DecisionTree(std::move(nodes_), std::move(leaf_counts_));
  }

 private:
  // Features are drawn without replacement until `mtry` non-constant ones have been scanned
  // (or all features are exhausted); constant features do not count toward mtry.
  std::optional<SplitRecord> search(std::span<const std::size_t> rows, std::span<const std::uint64_t> counts,
                                    double parent, std::size_t mtry) {
    std::optional<SplitRecord> best;
    double best_decrease = 0.0;
    std::size_t visited = 0;
    const std::size_t f_total = feature_order_.size();
    for (std::size_t i = 0; i < f_total && visited < mtry; ++i) {
      const auto j = i + static_cast<std::size_t>(rng_.below(f_total - i));
      std::swap(feature_order_[i], feature_order_[j]);
      const auto f = feature_order_[i];
      Candidate c;
      const auto scan = scan_feature(x_, y_, rows, f, params_.criterion, counts, parent, scratch_, c);
      if (scan == FeatureScan::Constant) continue;
      ++visited;
      if (scan == FeatureScan::Found && better(c, f, best, best_decrease)) {
        best = make_record(f, c, parent, rows.size());
        best_decrease = c.decrease;
      }
    }
    return best;
  }

  void make_leaf(std::size_t id, std::span<const std::uint64_t> counts) {
    auto& node = nodes_[id];
    node.left = node.right = 0;
    node.counts_begin = static_cast<std::uint32_t>(leaf_counts_.size());
    std::uint64_t top = 0;
    for (std::size_t c = 0; c < counts.size(); ++c) {
      if (counts[c] == 0) continue;
      leaf_counts_.push_back({static_cast<std::uint32_t>(c), counts[c]});
      if (counts[c] > top) {
        top = counts[c];
        node.prediction = static_cast<std::uint32_t>(c);
      }
    }
    node.counts_size = static_cast<std::uint32_t>(leaf_counts_.size() - node.counts_begin);
  }

  const Matrix& x_;
  std::span<const std::uint32_t> y_;
  std::size_t n_classes_;
  const ForestParams& params_;
  Rng rng_;
  std::vector<std::size_t> samples_;
  std::vector<std::size_t> feature_order_;
  std::vector<TreeNode> nodes_;
  std::vector<LeafCount> leaf_counts_;
  SplitScratch scratch_;
};

void check_trainable(const Dataset& train, const ForestParams& params) {
  params.validate();
  if (train.rows() == 0) throw Error(ErrorCode::EmptyResult, "cannot train on an empty dataset");
  if (train.values.cols() == 0) throw Error(ErrorCode::InvalidArgument, "cannot train without features");
}

}  // namespace

DecisionTree train_tree(const Dataset& train, const ForestParams& params, std::uint64_t tree_seed) {
  check_trainable(train, params);
  const auto universe = label_universe(train.labels);
  const auto y = class_indices(train.labels, universe);
  return TreeBuilder(train.values, y, universe.size(), params, tree_seed).build();
}

Forest train_forest_serial(const Dataset& train, const ForestParams& params) {
  check_trainable(train, params);
  auto universe = label_universe(train.labels);
  const auto y = class_indices(train.labels, universe);
  std::vector<DecisionTree> trees;
  trees.reserve(params.n_estimators);
  for (std::size_t t = 0; t < params.n_estimators; ++t)
    trees.push_back(TreeBuilder(train.values, y, universe.size(), params, derive_seed(params.seed, t)).build());
  return Forest(params, train.values.cols(), std::move(universe), std::move(trees));
}

Forest train_forest(const Dataset& train, const ForestParams& params) {
  check_trainable(train, params);
  auto universe = label_universe(train.labels);
  const auto y = class_indices(train.labels, universe);
  std::vector<DecisionTree> trees(params.n_estimators);
  const auto n = static_cast<std::ptrdiff_t>(params.n_estimators);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t t = 0; t < n; ++t) {
    trees[static_cast<std::size_t>(t)] =
        TreeBuilder(train.values, y, universe.size(), params, derive_seed(params.seed, static_cast<std::uint64_t>(t)))
            .build();
  }
  return Forest(params, train.values.cols(), std::move(universe), std::move(trees));
}

// ---- prediction -------------------------------------------------------------------------

int Forest::predict(std::span<const double> row) const {
  if (row.size() != feature_count_)
    throw Error(ErrorCode::DimensionMismatch, "row has " + std::to_string(row.size()) + " features, forest expects " +
                                                  std::to_string(feature_count_));
  std::vector<std::uint32_t> votes(labels_.size(), 0);
  for (const auto& t : trees_) ++votes[t.predict_index(row)];
  // max_element returns the first maximum, i.e. the lowest label
  return labels_[static_cast<std::size_t>(std::max_element(votes.begin(), votes.end()) - votes.begin())];
}

std::vector<int> Forest::tree_predictions(std::span<const double> row) const {
  if (row.size() != feature_count_) throw Error(ErrorCode::DimensionMismatch, "row length differs from forest features");
  std::vector<int> out;
  out.reserve(trees_.size());
  for (const auto& t : trees_) out.push_back(labels_[t.predict_index(row)]);
  return out;
}

std::vector<int> Forest::predict_batch_serial(const Matrix& rows) const {
  std::vector<int> out(rows.rows());
  for (std::size_t i = 0; i < rows.rows(); ++i) out[i] = predict(rows.row(i));
  return out;
}

std::vector<int> Forest::predict_batch(const Matrix& rows) const {
  if (rows.rows() > 0 && rows.cols() != feature_count_)
    throw Error(ErrorCode::DimensionMismatch, "rows have " + std::to_string(rows.cols()) + " features, forest expects " +
                                                  std::to_string(feature_count_));
  std::vector<int> out(rows.rows());
  const auto n = static_cast<std::ptrdiff_t>(rows.rows());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = predict(rows.row(static_cast<std::size_t>(i)));
  return out;
}

// ---- importance ---------------------------------------------------------------------------

std::vector<double> mdi_importance(const DecisionTree& tree, std::size_t n_features) {
  std::vector<double> imp(n_features, 0.0);
  const auto& nodes = tree.nodes();
  if (nodes.empty()) return imp;
  const double root = static_cast<double>(nodes[0].n_samples);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto rec = tree.split_record(i);
    if (!rec) continue;
    imp[rec->feature] += (static_cast<double>(rec->n_samples()) / root) * rec->decrease();
  }
  const double total = std::accumulate(imp.begin(), imp.end(), 0.0);
  if (total > 0.0)
    for (auto& v : imp) v /= total;
  return imp;
}

std::vector<double> mdi_importance(const Forest& forest) {
  std::vector<double> mean(forest.feature_count(), 0.0);
  if (forest.trees().empty()) return mean;
  for (const auto& t : forest.trees()) {
    const auto imp = mdi_importance(t, forest.feature_count());
    for (std::size_t j = 0; j < mean.size(); ++j) mean[j] += imp[j];
  }
  for (auto& v : mean) v /= static_cast<double>(forest.trees().size());
  return mean;
}

}  // namespace gridids
