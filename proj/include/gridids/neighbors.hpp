#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "gridids/matrix.hpp"

namespace gridids {

/// Neighbors of one query row, nearest first. Never contains the query itself.
struct NeighborIndex {
  std::size_t query = 0;
  std::vector<std::size_t> neighbors;
  std::vector<double> distances;  // Euclidean
};

/// Exact k nearest rows of `query` by Euclidean distance, ties to the lower row index.
/// Candidates are `within` (when given) or all rows, minus the query row.
/// Throws NotEnoughNeighbors if fewer than k candidates exist.
NeighborIndex k_nearest(const Matrix& data, std::size_t query, std::size_t k,
                        std::optional<std::span<const std::size_t>> within = std::nullopt);

/// k_nearest for every row in `queries`. Parallel over queries when built with OpenMP.
std::vector<NeighborIndex> k_nearest_batch(const Matrix& data, std::span<const std::size_t> queries, std::size_t k,
                                           std::optional<std::span<const std::size_t>> within = std::nullopt);

/// Single-threaded reference for k_nearest_batch.
std::vector<NeighborIndex> k_nearest_batch_serial(const Matrix& data, std::span<const std::size_t> queries,
                                                  std::size_t k,
                                                  std::optional<std::span<const std::size_t>> within = std::nullopt);

}  // namespace gridids
