#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "gridids/error.hpp"
#include "gridids/forest.hpp"
#include "gridids/rng.hpp"
#include "support.hpp"

using namespace gridids;

namespace {

ClassDistribution dist_of(const std::vector<std::uint64_t>& counts) {
  ClassDistribution d;
  std::uint64_t n = 0;
  for (std::size_t i = 0; i < counts.size(); ++i)
    if (counts[i]) {
      d.counts[static_cast<int>(i)] = counts[i];
      n += counts[i];
    }
  for (const auto& [l, c] : d.counts) d.proportions[l] = static_cast<double>(c) / static_cast<double>(n);
  return d;
}

double gini_direct(const std::vector<std::uint64_t>& counts) {
  double n = 0;
  for (auto c : counts) n += static_cast<double>(c);
  double s = 0;
  for (auto c : counts) s += (static_cast<double>(c) / n) * (static_cast<double>(c) / n);
  return 1.0 - s;
}

}  // namespace

TEST_CASE("gini forms agree and match direct evaluation") {
  Rng r(11);
  for (int t = 0; t < 1000; ++t) {
    std::vector<std::uint64_t> counts(1 + r.below(8));
    for (auto& c : counts) c = r.below(200);
    counts[0] += 1;
    const auto d = dist_of(counts);
    CHECK(std::abs(gini(d) - gini_sum_form(d)) <= 1e-12);
    CHECK(std::abs(gini(d) - gini_direct(counts)) <= 1e-12);
    CHECK(std::abs(impurity(counts, Criterion::Gini) - gini_direct(counts)) <= 1e-12);
  }
}

TEST_CASE("impurity extremes") {
  const std::vector<std::uint64_t> pure{0, 9, 0};
  CHECK(impurity(pure, Criterion::Gini) == 0.0);
  CHECK(impurity(pure, Criterion::Entropy) == 0.0);
  const std::vector<std::uint64_t> uniform4{5, 5, 5, 5};
  CHECK(impurity(uniform4, Criterion::Gini) == doctest::Approx(0.75));
  CHECK(impurity(uniform4, Criterion::Entropy) == doctest::Approx(2.0));
  CHECK(entropy(dist_of(uniform4)) == doctest::Approx(2.0));
  CHECK(impurity(std::vector<std::uint64_t>{}, Criterion::Gini) == 0.0);
}

TEST_CASE("impurity decrease of a distribution split") {
  const auto parent = dist_of({4, 4});
  const auto left = dist_of({4, 0});
  const auto right = dist_of({0, 4});
  CHECK(impurity_decrease(parent, left, right, Criterion::Gini) == doctest::Approx(0.5));
  CHECK(impurity_decrease(parent, left, right, Criterion::Entropy) == doctest::Approx(1.0));
  CHECK(impurity_decrease(parent, dist_of({2, 2}), dist_of({2, 2}), Criterion::Gini) == 0.0);
  CHECK_THROWS_AS(impurity_decrease(parent, left, dist_of({0, 3}), Criterion::Gini), Error);
}

TEST_CASE("impurity decrease is never negative for a real split") {
  Rng r(12);
  for (int t = 0; t < 500; ++t) {
    std::vector<std::uint64_t> lc(4), rc(4), pc(4);
    for (int k = 0; k < 4; ++k) {
      lc[k] = r.below(30);
      rc[k] = r.below(30);
      pc[k] = lc[k] + rc[k];
    }
    lc[0] += 1;
    rc[1] += 1;
    pc[0] += 1;
    pc[1] += 1;
    for (auto crit : {Criterion::Gini, Criterion::Entropy})
      CHECK(impurity_decrease(dist_of(pc), dist_of(lc), dist_of(rc), crit) >= -1e-12);
  }
}

TEST_CASE("midpoint threshold separates its neighbours") {
  CHECK(midpoint_threshold(1.0, 3.0) == 2.0);
  const double lo = 1.0;
  const double hi = std::nextafter(1.0, 2.0);
  const double t = midpoint_threshold(lo, hi);
  CHECK(t >= lo);
  CHECK(t < hi);
}

TEST_CASE("best split on a hand example") {
  Matrix x(6, 2);
  const double f0[] = {1, 2, 3, 4, 5, 6};
  const double f1[] = {5, 5, 5, 5, 5, 5};
  for (std::size_t i = 0; i < 6; ++i) {
    x(i, 0) = f0[i];
    x(i, 1) = f1[i];
  }
  const std::vector<std::uint32_t> y{0, 0, 0, 1, 1, 1};
  const std::vector<std::size_t> rows{0, 1, 2, 3, 4, 5};
  const std::vector<std::size_t> features{0, 1};
  const auto s = best_split(x, y, 2, rows, features, Criterion::Gini);
  REQUIRE(s);
  CHECK(s->feature == 0);
  CHECK(s->threshold == 3.5);
  CHECK(s->n_left == 3);
  CHECK(s->n_right == 3);
  CHECK(s->decrease() == doctest::Approx(0.5));
  CHECK(s->left_proportion() == 0.5);

  const std::vector<std::size_t> only_constant{1};
  CHECK_FALSE(best_split(x, y, 2, rows, only_constant, Criterion::Gini));
  const std::vector<std::uint32_t> pure(6, 1);
  CHECK_FALSE(best_split(x, pure, 2, rows, features, Criterion::Gini));
}

TEST_CASE("best split ties go to the lower feature index") {
  Matrix x(4, 3);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 3; ++j) x(i, j) = static_cast<double>(i);
  const std::vector<std::uint32_t> y{0, 0, 1, 1};
  const std::vector<std::size_t> rows{0, 1, 2, 3};
  const std::vector<std::size_t> features{2, 1};
  const auto s = best_split(x, y, 2, rows, features, Criterion::Gini);
  REQUIRE(s);
  CHECK(s->feature == 1);
}

TEST_CASE("best split equals exhaustive enumeration") {
  Rng r(13);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 2 + r.below(30), f = 1 + r.below(4), k = 2 + r.below(3);
    Matrix x(n, f);
    std::vector<std::uint32_t> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < f; ++j) x(i, j) = static_cast<double>(r.below(6));
      y[i] = static_cast<std::uint32_t>(r.below(k));
    }
    std::vector<std::size_t> rows(n), features(f);
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    std::iota(features.begin(), features.end(), std::size_t{0});
    for (auto crit : {Criterion::Gini, Criterion::Entropy}) {
      std::vector<std::uint64_t> parent(k, 0);
      for (auto c : y) ++parent[c];
      const double pi = impurity(parent, crit);
      double best = -1;
      for (std::size_t j = 0; j < f; ++j) {
        std::vector<double> vals;
        for (std::size_t i = 0; i < n; ++i) vals.push_back(x(i, j));
        std::sort(vals.begin(), vals.end());
        vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
        for (std::size_t v = 0; v + 1 < vals.size(); ++v) {
          const double thr = midpoint_threshold(vals[v], vals[v + 1]);
          std::vector<std::uint64_t> l(k, 0), rr(k, 0);
          std::uint64_t nl = 0, nr = 0;
          for (std::size_t i = 0; i < n; ++i) {
            if (x(i, j) <= thr) ++l[y[i]], ++nl;
            else ++rr[y[i]], ++nr;
          }
          best = std::max(best, impurity_decrease(pi, impurity(l, crit), impurity(rr, crit), nl, nr));
        }
      }
      const auto s = best_split(x, y, k, rows, features, crit);
      if (best > kMinImpurityDecrease) {
        REQUIRE(s);
        CHECK(s->decrease() == best);
      } else {
        CHECK_FALSE(s);
      }
    }
  }
}

TEST_CASE("features per node") {
  CHECK(features_per_node(MaxFeatures::Sqrt, 96) == 10);
  CHECK(features_per_node(MaxFeatures::Log2, 96) == 7);
  CHECK(features_per_node(MaxFeatures::All, 96) == 96);
  CHECK(features_per_node(MaxFeatures::Sqrt, 1) == 1);
  CHECK(features_per_node(MaxFeatures::Log2, 1) == 1);
  CHECK(features_per_node(MaxFeatures::Sqrt, 16) == 4);
  CHECK(features_per_node(MaxFeatures::Log2, 16) == 4);
}

TEST_CASE("params parse and validate") {
  CHECK(parse_criterion("entropy") == Criterion::Entropy);
  CHECK(parse_max_features("log2") == MaxFeatures::Log2);
  CHECK_THROWS_AS(parse_max_features("half"), Error);
  ForestParams p;
  CHECK(p.n_estimators == 330);
  CHECK(p.max_features == MaxFeatures::Log2);
  p.n_estimators = 0;
  CHECK_THROWS_AS(p.validate(), Error);
  const auto d = ForestParams::primary_default();
  CHECK(d.n_estimators == 100);
  CHECK(d.max_features == MaxFeatures::Sqrt);
}

namespace {

Dataset three_blobs(std::uint64_t seed) {
  return testing::blobs({{0, 0, 0, 0}, {3, 0, 0, 0}, {0, 3, 0, 0}}, {40, 30, 20}, 1.0, seed, {4, 7, 9});
}

}  // namespace

TEST_CASE("tree structure invariants") {
  const auto d = three_blobs(1);
  ForestParams p;
  p.bootstrap = false;
  p.max_features = MaxFeatures::All;
  const auto tree = train_tree(d, p, 5);
  const auto& nodes = tree.nodes();
  REQUIRE(!nodes.empty());
  CHECK(nodes[0].n_samples == d.rows());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto& n = nodes[i];
    if (n.is_leaf()) {
      std::uint64_t sum = 0;
      std::uint64_t best = 0;
      for (const auto& lc : tree.counts_of(n)) {
        sum += lc.count;
        best = std::max(best, lc.count);
      }
      CHECK(sum == n.n_samples);
      const auto counts = tree.counts_of(n);
      const auto it = std::find_if(counts.begin(), counts.end(), [&](const LeafCount& c) { return c.count == best; });
      CHECK(n.prediction == it->class_index);
      CHECK_FALSE(tree.split_record(i));
    } else {
      CHECK(n.left > i);
      CHECK(n.right > i);
      CHECK(nodes[n.left].n_samples + nodes[n.right].n_samples == n.n_samples);
      const auto rec = tree.split_record(i);
      REQUIRE(rec);
      CHECK(rec->decrease() > kMinImpurityDecrease);
    }
  }
  // distinct points, all features, no bootstrap: the tree fits the training set
  std::size_t hit = 0;
  const auto universe = label_universe(d.labels);
  for (std::size_t i = 0; i < d.rows(); ++i) hit += universe[tree.predict_index(d.values.row(i))] == d.labels[i];
  CHECK(hit == d.rows());
}

TEST_CASE("depth and split-size limits hold") {
  const auto d = three_blobs(2);
  ForestParams p;
  p.max_depth = 2;
  CHECK(train_tree(d, p, 1).depth() <= 2);
  p.max_depth.reset();
  p.min_samples_split = 30;
  const auto tree = train_tree(d, p, 1);
  for (const auto& n : tree.nodes())
    if (!n.is_leaf()) CHECK(n.n_samples >= 30);
}

TEST_CASE("parallel and serial training are identical") {
  const auto d = three_blobs(3);
  ForestParams p;
  p.n_estimators = 25;
  p.seed = 77;
  const auto a = train_forest(d, p);
  const auto b = train_forest_serial(d, p);
  CHECK(a == b);
  CHECK(a.predict_batch(d.values) == b.predict_batch_serial(d.values));
  p.seed = 78;
  CHECK_FALSE(train_forest(d, p) == a);
}

TEST_CASE("deterministic trees without randomness agree") {
  const auto d = three_blobs(4);
  ForestParams p;
  p.n_estimators = 4;
  p.bootstrap = false;
  p.max_features = MaxFeatures::All;
  const auto f = train_forest(d, p);
  for (const auto& t : f.trees()) CHECK(t == f.trees().front());
}

TEST_CASE("forest learns separated blobs") {
  const auto train = three_blobs(5);
  const auto test = three_blobs(6);
  ForestParams p;
  p.n_estimators = 50;
  const auto f = train_forest(train, p);
  const auto pred = f.predict_batch(test.values);
  std::size_t hit = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hit += pred[i] == test.labels[i];
  CHECK(static_cast<double>(hit) / static_cast<double>(pred.size()) > 0.85);
  CHECK(f.labels() == std::vector<int>{4, 7, 9});
}

TEST_CASE("vote ties go to the lower label") {
  auto leaf = [](std::uint32_t cls) {
    TreeNode n;
    n.prediction = cls;
    n.n_samples = 1;
    return DecisionTree({n}, {});
  };
  const Forest f(ForestParams{}, 1, {3, 5}, {leaf(1), leaf(0)});
  const std::vector<double> row{0.0};
  CHECK(f.predict(row) == 3);
  CHECK(f.tree_predictions(row) == std::vector<int>{5, 3});
  const Forest g(ForestParams{}, 1, {3, 5}, {leaf(1), leaf(0), leaf(1)});
  CHECK(g.predict(row) == 5);
  const std::vector<double> wrong{0.0, 1.0};
  CHECK_THROWS_AS(f.predict(wrong), Error);
}

TEST_CASE("MDI importance is normalized and finds the informative feature") {
  Rng r(9);
  Dataset d;
  d.schema = testing::plain_schema(4);
  d.values = Matrix(0, 4);
  for (int i = 0; i < 300; ++i) {
    const int label = static_cast<int>(r.below(2));
    const std::vector<double> row{label * 4.0 + r.normal(), r.normal(), r.normal(), r.normal()};
    d.values.append_row(row);
    d.labels.push_back(label);
  }
  ForestParams p;
  p.n_estimators = 30;
  const auto f = train_forest(d, p);
  const auto imp = mdi_importance(f);
  CHECK(std::accumulate(imp.begin(), imp.end(), 0.0) == doctest::Approx(1.0));
  for (double v : imp) CHECK(v >= 0.0);
  CHECK(std::max_element(imp.begin(), imp.end()) - imp.begin() == 0);
  for (const auto& t : f.trees()) {
    const auto ti = mdi_importance(t, 4);
    CHECK(std::accumulate(ti.begin(), ti.end(), 0.0) == doctest::Approx(1.0));
  }
}

TEST_CASE("bare leaf has zero importance") {
  TreeNode n;
  n.n_samples = 3;
  const DecisionTree t({n}, {});
  CHECK(mdi_importance(t, 2) == std::vector<double>{0.0, 0.0});
}

TEST_CASE("training rejects empty input") {
  Dataset d;
  d.schema = testing::plain_schema(2);
  d.values = Matrix(0, 2);
  CHECK_THROWS_AS(train_forest(d, ForestParams{}), Error);
}
