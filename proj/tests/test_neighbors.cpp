#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "gridids/error.hpp"
#include "gridids/neighbors.hpp"
#include "gridids/rng.hpp"

using namespace gridids;

namespace {

Matrix random_points(std::size_t n, std::size_t f, std::uint64_t seed, int grid = 0) {
  Rng r(seed);
  Matrix m(n, f);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < f; ++j) m(i, j) = grid ? static_cast<double>(r.below(grid)) : r.normal();
  return m;
}

}  // namespace

TEST_CASE("neighbors on a line") {
  Matrix m(5, 1, std::vector<double>{0, 1, 3, 6, 10});
  const auto n = k_nearest(m, 2, 2);
  CHECK(n.query == 2);
  CHECK(n.neighbors == std::vector<std::size_t>{1, 0});
  CHECK(n.distances == std::vector<double>{2.0, 3.0});
}

TEST_CASE("equal distances go to the lower index") {
  Matrix m(5, 1, std::vector<double>{5, 4, 6, 4, 6});
  const auto n = k_nearest(m, 0, 4);
  CHECK(n.neighbors == std::vector<std::size_t>{1, 2, 3, 4});
}

TEST_CASE("restricting candidates") {
  Matrix m(5, 1, std::vector<double>{0, 1, 3, 6, 10});
  const std::vector<std::size_t> within{0, 3, 4};
  const auto n = k_nearest(m, 0, 2, std::span<const std::size_t>(within));
  CHECK(n.neighbors == std::vector<std::size_t>{3, 4});
  CHECK_THROWS_AS(k_nearest(m, 0, 3, std::span<const std::size_t>(within)), Error);
  CHECK_THROWS_AS(k_nearest(m, 0, 5), Error);
}

TEST_CASE("matches a sort-everything oracle") {
  const auto m = random_points(80, 3, 4, 4);  // coarse grid: plenty of ties
  for (std::size_t q = 0; q < m.rows(); ++q) {
    std::vector<std::pair<double, std::size_t>> all;
    for (std::size_t i = 0; i < m.rows(); ++i) {
      if (i == q) continue;
      double s = 0;
      for (std::size_t j = 0; j < 3; ++j) s += (m(q, j) - m(i, j)) * (m(q, j) - m(i, j));
      all.emplace_back(s, i);
    }
    std::sort(all.begin(), all.end());
    const auto n = k_nearest(m, q, 7);
    for (std::size_t k = 0; k < 7; ++k) CHECK(n.neighbors[k] == all[k].second);
    CHECK(std::find(n.neighbors.begin(), n.neighbors.end(), q) == n.neighbors.end());
    CHECK(std::is_sorted(n.distances.begin(), n.distances.end()));
  }
}

TEST_CASE("batch and serial batch agree") {
  const auto m = random_points(200, 4, 5);
  std::vector<std::size_t> queries(m.rows());
  std::iota(queries.begin(), queries.end(), std::size_t{0});
  const auto a = k_nearest_batch(m, queries, 5);
  const auto b = k_nearest_batch_serial(m, queries, 5);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].neighbors == b[i].neighbors);
    CHECK(a[i].distances == b[i].distances);
  }
}
