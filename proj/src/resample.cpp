#include "gridids/resample.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "gridids/error.hpp"
#include "gridids/neighbors.hpp"
#include "gridids/rng.hpp"

namespace gridids {

std::string_view to_string(ResampleMethod m) {
  switch (m) {
    case ResampleMethod::None: return "none";
    case ResampleMethod::ROS: return "ros";
    case ResampleMethod::SMOTE: return "smote";
    case ResampleMethod::BorderlineSMOTE: return "borderline-smote";
    case ResampleMethod::ADASYN: return "adasyn";
  }
  return "none";
}

ResampleMethod parse_resample_method(std::string_view name) {
  for (auto m : {ResampleMethod::None, ResampleMethod::ROS, ResampleMethod::SMOTE, ResampleMethod::BorderlineSMOTE,
                 ResampleMethod::ADASYN})
    if (to_string(m) == name) return m;
  throw Error(ErrorCode::InvalidArgument, "unknown resampler '" + std::string(name) + "'");
}

void ResampleConfig::validate() const {
  if (k_neighbors < 1) throw Error(ErrorCode::InvalidArgument, "k_neighbors must be >= 1");
  if (m_neighbors < 1) throw Error(ErrorCode::InvalidArgument, "m_neighbors must be >= 1");
  if (target_count && *target_count < 1) throw Error(ErrorCode::InvalidArgument, "target_count must be >= 1");
}

BorderlineCategory borderline_category(std::size_t other_class, std::size_t m) {
  if (other_class >= m) return BorderlineCategory::Noise;
  if (2 * other_class >= m) return BorderlineCategory::Danger;
  return BorderlineCategory::Safe;
}

AdasynAllocation adasyn_allocation(std::span<const double> ratios, std::size_t deficit, bool capped) {
  AdasynAllocation a;
  const std::size_t n = ratios.size();
  if (n == 0) return a;
  const double sum = std::accumulate(ratios.begin(), ratios.end(), 0.0);
  a.weights.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    a.weights[i] = sum > 0.0 ? ratios[i] / sum : 1.0 / static_cast<double>(n);

  a.counts.assign(n, 0);
  const auto g = static_cast<double>(deficit);
  if (!capped) {
    for (std::size_t i = 0; i < n; ++i) a.counts[i] = static_cast<std::size_t>(std::floor(a.weights[i] * g + 0.5));
    return a;
  }
  std::vector<double> remainder(n);
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double share = a.weights[i] * g;
    a.counts[i] = std::min(deficit, static_cast<std::size_t>(std::floor(share)));
    remainder[i] = share - static_cast<double>(a.counts[i]);
    assigned += a.counts[i];
  }
  // Floating error can push the floors past the deficit; take back from the smallest remainders.
  while (assigned > deficit) {
    std::size_t pick = n;
    for (std::size_t i = 0; i < n; ++i)
      if (a.counts[i] > 0 && (pick == n || remainder[i] < remainder[pick])) pick = i;
    --a.counts[pick];
    remainder[pick] += 1.0;
    --assigned;
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return remainder[x] > remainder[y]; });
  for (std::size_t r = 0; assigned < deficit; r = (r + 1) % n, ++assigned) ++a.counts[order[r]];
  return a;
}

namespace {

struct ClassPlan {
  int label;
  std::vector<std::size_t> rows;
  std::size_t deficit;
};

std::vector<ClassPlan> plan_classes(const Dataset& train, const ResampleConfig& cfg) {
  cfg.validate();
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < train.rows(); ++i) by_class[train.labels[i]].push_back(i);
  std::size_t majority = 0;
  for (const auto& [label, rows] : by_class) majority = std::max(majority, rows.size());
  const std::size_t target = cfg.target_count.value_or(majority);
  if (target < majority)
    throw Error(ErrorCode::InvalidArgument, "target_count " + std::to_string(target) +
                                                " is below the majority class count " + std::to_string(majority));
  std::vector<ClassPlan> plan;
  for (auto& [label, rows] : by_class) {
    const std::size_t deficit = target - rows.size();
    plan.push_back({label, std::move(rows), deficit});
  }
  return plan;
}

Rng class_stream(const ResampleConfig& cfg, int label) {
  return Rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(static_cast<std::int64_t>(label))));
}

void require_interpolable(const ClassPlan& c) {
  if (c.deficit > 0 && c.rows.size() < 2)
    throw Error(ErrorCode::ClassTooSmall,
                "class " + std::to_string(c.label) + " needs at least 2 rows for interpolation, has " +
                    std::to_string(c.rows.size()));
}

/// Same-class neighbor lists, indexed by position within `c.rows`.
std::vector<NeighborIndex> same_class_neighbors(const Matrix& x, const ClassPlan& c, std::size_t k) {
  const std::size_t k_eff = std::min(k, c.rows.size() - 1);
  return k_nearest_batch(x, c.rows, k_eff, std::span<const std::size_t>(c.rows));
}

void interpolate(const Matrix& x, std::size_t from, std::size_t toward, double u, std::vector<double>& buf) {
  const auto a = x.row(from);
  const auto b = x.row(toward);
  for (std::size_t j = 0; j < a.size(); ++j) buf[j] = a[j] + u * (b[j] - a[j]);
}

/// SMOTE synthesis: `count` rows, each from a uniformly drawn source position toward a
/// uniformly drawn member of its same-class neighbor list.
void synthesize(const Matrix& x, const ClassPlan& c, const std::vector<NeighborIndex>& nn,
                std::span<const std::size_t> source_positions, std::size_t count, Rng& rng, Dataset& out) {
  std::vector<double> buf(x.cols());
  for (std::size_t s = 0; s < count; ++s) {
    const auto pos = source_positions[rng.below(source_positions.size())];
    const auto& neighbors = nn[pos].neighbors;
    const auto toward = neighbors[rng.below(neighbors.size())];
    const double u = rng.uniform01();
    interpolate(x, c.rows[pos], toward, u, buf);
    out.values.append_row(buf);
    out.labels.push_back(c.label);
  }
}

std::size_t other_class_count(const Dataset& train, const NeighborIndex& n, int label) {
  std::size_t other = 0;
  for (auto j : n.neighbors)
    if (train.labels[j] != label) ++other;
  return other;
}

Dataset copy_input(const Dataset& train, const std::vector<ClassPlan>& plan) {
  std::size_t extra = 0;
  for (const auto& c : plan) extra += c.deficit;
  Dataset out = train;
  out.values.reserve_rows(train.rows() + extra);
  out.labels.reserve(train.rows() + extra);
  return out;
}

}  // namespace

Dataset random_oversample(const Dataset& train, const ResampleConfig& cfg) {
  const auto plan = plan_classes(train, cfg);
  Dataset out = copy_input(train, plan);
  for (const auto& c : plan) {
    auto rng = class_stream(cfg, c.label);
    for (std::size_t s = 0; s < c.deficit; ++s) {
      const auto src = c.rows[rng.below(c.rows.size())];
      out.values.append_row(train.values.row(src));
      out.labels.push_back(c.label);
    }
  }
  return out;
}

Dataset smote(const Dataset& train, const ResampleConfig& cfg) {
  const auto plan = plan_classes(train, cfg);
  for (const auto& c : plan) require_interpolable(c);
  Dataset out = copy_input(train, plan);
  for (const auto& c : plan) {
    if (c.deficit == 0) continue;
    const auto nn = same_class_neighbors(train.values, c, cfg.k_neighbors);
    std::vector<std::size_t> sources(c.rows.size());
    std::iota(sources.begin(), sources.end(), std::size_t{0});
    auto rng = class_stream(cfg, c.label);
    synthesize(train.values, c, nn, sources, c.deficit, rng, out);
  }
  return out;
}

Dataset borderline_smote(const Dataset& train, const ResampleConfig& cfg) {
  const auto plan = plan_classes(train, cfg);
  for (const auto& c : plan) require_interpolable(c);
  if (cfg.m_neighbors + 1 > train.rows())
    throw Error(ErrorCode::NotEnoughNeighbors, "m_neighbors exceeds training rows - 1");
  Dataset out = copy_input(train, plan);
  for (const auto& c : plan) {
    if (c.deficit == 0) continue;
    const auto census = k_nearest_batch(train.values, c.rows, cfg.m_neighbors);
    std::vector<std::size_t> danger;
    for (std::size_t p = 0; p < c.rows.size(); ++p)
      if (borderline_category(other_class_count(train, census[p], c.label), cfg.m_neighbors) ==
          BorderlineCategory::Danger)
        danger.push_back(p);
    if (danger.empty()) {
      danger.resize(c.rows.size());
      std::iota(danger.begin(), danger.end(), std::size_t{0});
    }
    const auto nn = same_class_neighbors(train.values, c, cfg.k_neighbors);
    auto rng = class_stream(cfg, c.label);
    synthesize(train.values, c, nn, danger, c.deficit, rng, out);
  }
  return out;
}

Dataset adasyn(const Dataset& train, const ResampleConfig& cfg) {
  const auto plan = plan_classes(train, cfg);
  for (const auto& c : plan) require_interpolable(c);
  if (cfg.k_neighbors + 1 > train.rows())
    throw Error(ErrorCode::NotEnoughNeighbors, "k_neighbors exceeds training rows - 1");
  std::size_t extra = 0;
  std::vector<AdasynAllocation> allocations(plan.size());
  for (std::size_t ci = 0; ci < plan.size(); ++ci) {
    const auto& c = plan[ci];
    if (c.deficit == 0) continue;
    const auto census = k_nearest_batch(train.values, c.rows, cfg.k_neighbors);
    std::vector<double> ratios(c.rows.size());
    for (std::size_t p = 0; p < c.rows.size(); ++p)
      ratios[p] = static_cast<double>(other_class_count(train, census[p], c.label)) /
                  static_cast<double>(cfg.k_neighbors);
    allocations[ci] = adasyn_allocation(ratios, c.deficit, cfg.adasyn_cap);
    for (auto g : allocations[ci].counts) extra += g;
  }

  Dataset out = train;
  out.values.reserve_rows(train.rows() + extra);
  std::vector<double> buf(train.values.cols());
  for (std::size_t ci = 0; ci < plan.size(); ++ci) {
    const auto& c = plan[ci];
    if (c.deficit == 0) continue;
    const auto nn = same_class_neighbors(train.values, c, cfg.k_neighbors);
    auto rng = class_stream(cfg, c.label);
    for (std::size_t p = 0; p < c.rows.size(); ++p) {
      const auto& neighbors = nn[p].neighbors;
      for (std::size_t s = 0; s < allocations[ci].counts[p]; ++s) {
        const auto toward = neighbors[rng.below(neighbors.size())];
        const double u = rng.uniform01();
        interpolate(train.values, c.rows[p], toward, u, buf);
        out.values.append_row(buf);
        out.labels.push_back(c.label);
      }
    }
  }
  return out;
}

Dataset resample(const Dataset& train, const ResampleConfig& cfg) {
  switch (cfg.method) {
    case ResampleMethod::None: return train;
    case ResampleMethod::ROS: return random_oversample(train, cfg);
    case ResampleMethod::SMOTE: return smote(train, cfg);
    case ResampleMethod::BorderlineSMOTE: return borderline_smote(train, cfg);
    case ResampleMethod::ADASYN: return adasyn(train, cfg);
  }
  return train;
}

}  // namespace gridids
