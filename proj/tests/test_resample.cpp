#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "doctest.h"
#include "gridids/error.hpp"
#include "gridids/resample.hpp"
#include "gridids/rng.hpp"
#include "support.hpp"

using namespace gridids;

namespace {

Dataset imbalanced(std::uint64_t seed) {
  return testing::blobs({{0, 0, 0}, {2, 0, 0}, {0, 2, 0}, {0, 0, 2}}, {60, 25, 12, 5}, 1.0, seed, {10, 20, 30, 40});
}

/// True when `s` lies on a segment between two rows of `pool`.
bool on_some_segment(const Matrix& x, const std::vector<std::size_t>& pool, std::span<const double> s) {
  for (auto a : pool)
    for (auto b : pool) {
      const auto ra = x.row(a), rb = x.row(b);
      double u = -1;
      for (std::size_t j = 0; j < s.size(); ++j)
        if (rb[j] != ra[j]) {
          u = (s[j] - ra[j]) / (rb[j] - ra[j]);
          break;
        }
      if (u < 0) {
        if (std::equal(ra.begin(), ra.end(), s.begin())) return true;
        continue;
      }
      if (u > 1.0) continue;
      bool ok = true;
      for (std::size_t j = 0; j < s.size() && ok; ++j)
        ok = std::abs(ra[j] + u * (rb[j] - ra[j]) - s[j]) <= 1e-9 * (1.0 + std::abs(s[j]));
      if (ok) return true;
    }
  return false;
}

const ResampleMethod kMethods[] = {ResampleMethod::ROS, ResampleMethod::SMOTE, ResampleMethod::BorderlineSMOTE,
                                   ResampleMethod::ADASYN};

}  // namespace

TEST_CASE("method names round-trip") {
  for (auto m : {ResampleMethod::None, ResampleMethod::ROS, ResampleMethod::SMOTE, ResampleMethod::BorderlineSMOTE,
                 ResampleMethod::ADASYN})
    CHECK(parse_resample_method(to_string(m)) == m);
  CHECK_THROWS_AS(parse_resample_method("tomek"), Error);
}

TEST_CASE("every method balances to the majority count") {
  const auto d = imbalanced(1);
  for (auto m : kMethods) {
    CAPTURE(to_string(m));
    ResampleConfig cfg;
    cfg.method = m;
    cfg.seed = 9;
    const auto out = resample(d, cfg);
    const auto pop = class_population(out.labels);
    for (const auto& [label, n] : pop.counts) CHECK(n == 60);
    CHECK(out.rows() == 240);
  }
}

TEST_CASE("explicit target count") {
  const auto d = imbalanced(2);
  ResampleConfig cfg;
  cfg.method = ResampleMethod::SMOTE;
  cfg.target_count = 75;
  for (const auto& [label, n] : class_population(resample(d, cfg).labels).counts) CHECK(n == 75);
  cfg.target_count = 30;
  CHECK_THROWS_AS(resample(d, cfg), Error);
}

TEST_CASE("original rows come first, synthetics grouped by ascending class") {
  const auto d = imbalanced(3);
  for (auto m : kMethods) {
    CAPTURE(to_string(m));
    ResampleConfig cfg;
    cfg.method = m;
    const auto out = resample(d, cfg);
    for (std::size_t i = 0; i < d.rows(); ++i) {
      CHECK(out.labels[i] == d.labels[i]);
      CHECK(std::equal(d.values.row(i).begin(), d.values.row(i).end(), out.values.row(i).begin()));
    }
    CHECK(std::is_sorted(out.labels.begin() + static_cast<std::ptrdiff_t>(d.rows()), out.labels.end()));
  }
}

TEST_CASE("synthetic rows are convex combinations of same-class rows") {
  const auto d = imbalanced(4);
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < d.rows(); ++i) by_class[d.labels[i]].push_back(i);
  for (auto m : kMethods) {
    CAPTURE(to_string(m));
    ResampleConfig cfg;
    cfg.method = m;
    const auto out = resample(d, cfg);
    for (std::size_t i = d.rows(); i < out.rows(); ++i) CHECK(on_some_segment(d.values, by_class[out.labels[i]], out.values.row(i)));
  }
}

TEST_CASE("random oversampling duplicates existing rows") {
  const auto d = imbalanced(5);
  ResampleConfig cfg;
  cfg.method = ResampleMethod::ROS;
  const auto out = resample(d, cfg);
  for (std::size_t i = d.rows(); i < out.rows(); ++i) {
    bool found = false;
    for (std::size_t k = 0; k < d.rows() && !found; ++k)
      found = d.labels[k] == out.labels[i] &&
              std::equal(d.values.row(k).begin(), d.values.row(k).end(), out.values.row(i).begin());
    CHECK(found);
  }
}

TEST_CASE("resampling is deterministic per seed") {
  const auto d = imbalanced(6);
  for (auto m : kMethods) {
    ResampleConfig cfg;
    cfg.method = m;
    cfg.seed = 1;
    const auto a = resample(d, cfg);
    const auto b = resample(d, cfg);
    CHECK(a.values == b.values);
    CHECK(a.labels == b.labels);
    cfg.seed = 2;
    CHECK_FALSE(resample(d, cfg).values == a.values);
  }
}

TEST_CASE("none returns the input") {
  const auto d = imbalanced(7);
  ResampleConfig cfg;
  cfg.method = ResampleMethod::None;
  const auto out = resample(d, cfg);
  CHECK(out.values == d.values);
  CHECK(out.labels == d.labels);
}

TEST_CASE("a single-row minority class cannot be interpolated") {
  auto d = testing::make_dataset(1, {{0}, {1}, {2}, {10}}, {0, 0, 0, 1});
  for (auto m : {ResampleMethod::SMOTE, ResampleMethod::BorderlineSMOTE, ResampleMethod::ADASYN}) {
    ResampleConfig cfg;
    cfg.method = m;
    cfg.k_neighbors = 2;
    cfg.m_neighbors = 2;
    try {
      resample(d, cfg);
      FAIL("expected ClassTooSmall");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::ClassTooSmall);
    }
  }
  ResampleConfig ros;
  ros.method = ResampleMethod::ROS;
  CHECK(resample(d, ros).rows() == 6);
}

TEST_CASE("small classes use every available neighbour") {
  // class 1 has 3 rows, fewer than k + 1
  const auto d = testing::make_dataset(1, {{0}, {1}, {2}, {3}, {4}, {10}, {11}, {12}}, {0, 0, 0, 0, 0, 1, 1, 1});
  ResampleConfig cfg;
  cfg.method = ResampleMethod::SMOTE;
  const auto out = resample(d, cfg);
  CHECK(out.rows() == 10);
  for (std::size_t i = 8; i < 10; ++i) {
    CHECK(out.values(i, 0) >= 10.0);
    CHECK(out.values(i, 0) <= 12.0);
  }
}

TEST_CASE("borderline categories") {
  CHECK(borderline_category(10, 10) == BorderlineCategory::Noise);
  CHECK(borderline_category(5, 10) == BorderlineCategory::Danger);
  CHECK(borderline_category(9, 10) == BorderlineCategory::Danger);
  CHECK(borderline_category(4, 10) == BorderlineCategory::Safe);
  CHECK(borderline_category(0, 10) == BorderlineCategory::Safe);
  CHECK(borderline_category(2, 5) == BorderlineCategory::Safe);
  CHECK(borderline_category(3, 5) == BorderlineCategory::Danger);
}

TEST_CASE("borderline smote interpolates from danger rows") {
  // class 1: two rows deep inside class 0, five far away on their own
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for (int i = 0; i < 20; ++i) {
    rows.push_back({static_cast<double>(i), 0.0});
    labels.push_back(0);
  }
  for (double x : {9.5, 10.5}) {
    rows.push_back({x, 0.0});
    labels.push_back(1);
  }
  for (double x : {100.0, 101.0, 102.0, 103.0, 104.0}) {
    rows.push_back({x, 0.0});
    labels.push_back(1);
  }
  const auto d = testing::make_dataset(2, rows, labels);
  ResampleConfig cfg;
  cfg.method = ResampleMethod::BorderlineSMOTE;
  cfg.m_neighbors = 4;
  cfg.k_neighbors = 1;
  const auto out = resample(d, cfg);
  for (std::size_t i = d.rows(); i < out.rows(); ++i) CHECK(out.values(i, 0) < 50.0);
}

TEST_CASE("adasyn allocation sums to the deficit") {
  Rng r(21);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> ratios(1 + r.below(40));
    for (auto& v : ratios) v = static_cast<double>(r.below(6)) / 5.0;
    const std::size_t deficit = r.below(500);
    const auto a = adasyn_allocation(ratios, deficit);
    CHECK(std::accumulate(a.counts.begin(), a.counts.end(), std::size_t{0}) == deficit);
    CHECK(std::abs(std::accumulate(a.weights.begin(), a.weights.end(), 0.0) - 1.0) <= 1e-9);
    // largest remainder: no count is more than one away from its exact share
    for (std::size_t i = 0; i < ratios.size(); ++i)
      CHECK(std::abs(static_cast<double>(a.counts[i]) - a.weights[i] * static_cast<double>(deficit)) < 1.0 + 1e-9);
  }
}

TEST_CASE("adasyn allocation edge cases") {
  const std::vector<double> zeros{0, 0, 0, 0};
  const auto a = adasyn_allocation(zeros, 6);
  CHECK(a.weights == std::vector<double>(4, 0.25));
  CHECK(a.counts == std::vector<std::size_t>{2, 2, 1, 1});
  const std::vector<double> r{0.2, 0.8};
  CHECK(adasyn_allocation(r, 10).counts == std::vector<std::size_t>{2, 8});
  const std::vector<double> thirds{1, 1, 1};
  CHECK(adasyn_allocation(thirds, 2, true).counts == std::vector<std::size_t>{1, 1, 0});
  CHECK(adasyn_allocation(thirds, 2, false).counts == std::vector<std::size_t>{1, 1, 1});
  CHECK(adasyn_allocation({}, 5).counts.empty());
}

TEST_CASE("uncapped adasyn may overshoot") {
  const auto d = imbalanced(8);
  ResampleConfig cfg;
  cfg.method = ResampleMethod::ADASYN;
  cfg.adasyn_cap = false;
  const auto pop = class_population(resample(d, cfg).labels);
  for (const auto& [label, n] : pop.counts) CHECK(std::abs(static_cast<long>(n) - 60) <= 30);
}
