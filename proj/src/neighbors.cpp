#include "gridids/neighbors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include "gridids/error.hpp"

namespace gridids {

namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    const double d = a[j] - b[j];
    s += d * d;
  }
  return s;
}

// Reuses `scratch` across queries of one thread.
NeighborIndex nearest_impl(const Matrix& data, std::size_t query, std::size_t k,
                           std::optional<std::span<const std::size_t>> within,
                           std::vector<std::pair<double, std::size_t>>& scratch) {
  scratch.clear();
  const auto q = data.row(query);
  if (within) {
    for (auto i : *within)
      if (i != query) scratch.emplace_back(squared_distance(q, data.row(i)), i);
  } else {
    for (std::size_t i = 0; i < data.rows(); ++i)
      if (i != query) scratch.emplace_back(squared_distance(q, data.row(i)), i);
  }
  if (k > scratch.size())
    throw Error(ErrorCode::NotEnoughNeighbors,
                "asked for " + std::to_string(k) + " neighbors, only " + std::to_string(scratch.size()) + " candidates");
  // pair ordering gives (distance, lower index) tie-breaking
  std::partial_sort(scratch.begin(), scratch.begin() + static_cast<std::ptrdiff_t>(k), scratch.end());
  NeighborIndex out;
  out.query = query;
  out.neighbors.reserve(k);
  out.distances.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    out.neighbors.push_back(scratch[i].second);
    out.distances.push_back(std::sqrt(scratch[i].first));
  }
  return out;
}

}  // namespace

NeighborIndex k_nearest(const Matrix& data, std::size_t query, std::size_t k,
                        std::optional<std::span<const std::size_t>> within) {
  if (query >= data.rows()) throw Error(ErrorCode::InvalidArgument, "query row out of range");
  std::vector<std::pair<double, std::size_t>> scratch;
  return nearest_impl(data, query, k, within, scratch);
}

std::vector<NeighborIndex> k_nearest_batch_serial(const Matrix& data, std::span<const std::size_t> queries,
                                                  std::size_t k, std::optional<std::span<const std::size_t>> within) {
  std::vector<NeighborIndex> out;
  out.reserve(queries.size());
  std::vector<std::pair<double, std::size_t>> scratch;
  for (auto q : queries) out.push_back(nearest_impl(data, q, k, within, scratch));
  return out;
}

std::vector<NeighborIndex> k_nearest_batch(const Matrix& data, std::span<const std::size_t> queries, std::size_t k,
                                           std::optional<std::span<const std::size_t>> within) {
  const std::size_t candidates = within ? within->size() : data.rows();
  // the query itself may or may not be a candidate; k_nearest_impl re-checks exactly
  if (k > candidates) throw Error(ErrorCode::NotEnoughNeighbors, "k exceeds candidate count");
  std::vector<NeighborIndex> out(queries.size());
  const auto n = static_cast<std::ptrdiff_t>(queries.size());
  bool failed = false;
#pragma omp parallel
  {
    std::vector<std::pair<double, std::size_t>> scratch;
#pragma omp for schedule(dynamic, 16)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      try {
        out[static_cast<std::size_t>(i)] = nearest_impl(data, queries[static_cast<std::size_t>(i)], k, within, scratch);
      } catch (const Error&) {
#pragma omp atomic write
        failed = true;
      }
    }
  }
  if (failed) throw Error(ErrorCode::NotEnoughNeighbors, "k exceeds candidate count for some query");
  return out;
}

}  // namespace gridids
