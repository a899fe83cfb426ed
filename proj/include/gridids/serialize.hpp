#pragma once

#include <filesystem>
#include <iosfwd>

#include "gridids/forest.hpp"
#include "gridids/hierarchy.hpp"

namespace gridids {

// Model files are little-endian binary. Integers are fixed width; doubles are stored as their
// IEEE-754 bit pattern, so a loaded model predicts exactly like the saved one.
//
// Forest ("GRIDRF", version 1):
//   magic[6] u32 version
//   u64 n_estimators, u8 max_features (0 sqrt, 1 log2, 2 all), u8 criterion (0 gini, 1 entropy),
//   u8 has_max_depth, u64 max_depth, u64 min_samples_split, u8 bootstrap, u64 seed
//   u64 feature_count, u64 n_labels, i32 labels[n_labels]
//   u64 n_trees, then per tree:
//     u64 n_nodes, per node: u32 left, u32 right, u32 feature, f64 threshold, f64 impurity,
//                            u64 n_samples, u32 prediction, u32 counts_begin, u32 counts_size
//     u64 n_leaf_counts, per entry: u32 class_index, u64 count
//
// Hierarchical model ("GRIDHM", version 1):
//   magic[6] u32 version
//   u64 n_natural, i32 natural[n], u64 n_attack, i32 attack[n], i32 natural_marker, i32 attack_marker
//   layer 1 forest record, layer 2 forest record (each a complete forest encoding as above)

inline constexpr std::uint32_t kModelFormatVersion = 1;

void write_forest(std::ostream& out, const Forest& forest);
Forest read_forest(std::istream& in);

void write_hierarchical(std::ostream& out, const HierarchicalModel& model);
HierarchicalModel read_hierarchical(std::istream& in);

enum class ModelKind { Forest, Hierarchical };

/// Reads the magic of a model file. Throws Format for anything else.
ModelKind model_kind(const std::filesystem::path& path);

void save_forest(const std::filesystem::path& path, const Forest& forest);
Forest load_forest(const std::filesystem::path& path);
void save_hierarchical(const std::filesystem::path& path, const HierarchicalModel& model);
HierarchicalModel load_hierarchical(const std::filesystem::path& path);

}  // namespace gridids
