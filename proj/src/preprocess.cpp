#include "gridids/preprocess.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "gridids/error.hpp"

namespace gridids {

ScalerParams fit_scaler(const Dataset& train, ScalerKind kind) {
  if (train.rows() == 0) throw Error(ErrorCode::EmptyResult, "cannot fit a scaler on an empty dataset");
  const std::size_t n = train.rows();
  const std::size_t f = train.values.cols();
  ScalerParams p;
  p.kind = kind;
  p.mean.assign(f, 0.0);
  p.stddev.assign(f, 0.0);
  p.min.assign(f, 0.0);
  p.max.assign(f, 0.0);
  for (std::size_t j = 0; j < f; ++j) {
    double sum = 0.0;
    double lo = train.values(0, j);
    double hi = lo;
    for (std::size_t i = 0; i < n; ++i) {
      const double v = train.values(i, j);
      sum += v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    const double mean = sum / static_cast<double>(n);
    // Two-pass variance; the one-pass form loses everything for PMU-scale magnitudes.
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = train.values(i, j) - mean;
      ss += d * d;
    }
    p.mean[j] = mean;
    p.stddev[j] = std::sqrt(ss / static_cast<double>(n));
    p.min[j] = lo;
    p.max[j] = hi;
  }
  return p;
}

Dataset apply_scaler(const ScalerParams& params, const Dataset& data) {
  if (data.values.cols() != params.size())
    throw Error(ErrorCode::DimensionMismatch, "scaler fitted on " + std::to_string(params.size()) +
                                                  " features, data has " + std::to_string(data.values.cols()));
  Dataset out = data;
  if (params.kind == ScalerKind::None) return out;
  for (std::size_t j = 0; j < params.size(); ++j) {
    double offset = 0.0;
    double denom = 0.0;
    switch (params.kind) {
      case ScalerKind::Standard:
        offset = params.mean[j];
        denom = params.stddev[j];
        break;
      case ScalerKind::MeanNormalization:
        offset = params.mean[j];
        denom = params.max[j] - params.min[j];
        break;
      case ScalerKind::MinMax:
        offset = params.min[j];
        denom = params.max[j] - params.min[j];
        break;
      case ScalerKind::None:
        break;
    }
    for (std::size_t i = 0; i < out.rows(); ++i) {
      double& v = out.values(i, j);
      v = denom > 0.0 ? (v - offset) / denom : 0.0;
    }
  }
  return out;
}

Dataset drop_features(const Dataset& data, std::span<const std::string> names) {
  std::vector<bool> drop(data.features(), false);
  for (const auto& name : names) {
    const auto j = data.schema.index_of(name);
    if (j == FeatureSchema::npos) throw Error(ErrorCode::UnknownFeature, "cannot drop unknown feature '" + name + "'");
    drop[j] = true;
  }
  std::vector<std::size_t> keep;
  for (std::size_t j = 0; j < drop.size(); ++j)
    if (!drop[j]) keep.push_back(j);

  Dataset out;
  out.schema.label_column = data.schema.label_column;
  for (auto j : keep) {
    out.schema.feature_names.push_back(data.schema.feature_names[j]);
    out.schema.feature_kinds.push_back(data.schema.feature_kinds[j]);
  }
  out.values = Matrix(data.rows(), keep.size());
  for (std::size_t i = 0; i < data.rows(); ++i)
    for (std::size_t k = 0; k < keep.size(); ++k) out.values(i, k) = data.values(i, keep[k]);
  out.labels = data.labels;
  return out;
}

double wrap_degrees(double angle) {
  double a = std::fmod(angle, 360.0);
  if (a > 180.0) a -= 360.0;
  if (a <= -180.0) a += 360.0;
  return a;
}

Dataset derive_apparent_power(const Dataset& data, std::span<const PhasorQuadruple> groups) {
  struct Sources {
    std::size_t v_mag, v_angle, i_mag, i_angle;
  };
  std::vector<Sources> src;
  std::unordered_set<std::string> removed;
  auto locate = [&](const std::string& name) {
    const auto j = data.schema.index_of(name);
    if (j == FeatureSchema::npos) throw Error(ErrorCode::UnknownFeature, "phasor feature '" + name + "' not in schema");
    return j;
  };
  for (const auto& g : groups) {
    src.push_back({locate(g.v_mag), locate(g.v_angle), locate(g.i_mag), locate(g.i_angle)});
    removed.insert({g.v_mag, g.v_angle, g.i_mag, g.i_angle});
  }

  std::unordered_set<std::string> taken;
  for (const auto& name : data.schema.feature_names)
    if (!removed.count(name)) taken.insert(name);
  for (const auto& g : groups) {
    for (const auto* out_name : {&g.s_mag, &g.s_angle}) {
      if (out_name->empty() || !taken.insert(*out_name).second)
        throw Error(ErrorCode::OutputNameCollision, "apparent power output '" + *out_name + "' collides");
    }
  }

  std::vector<std::string> drop_list(removed.begin(), removed.end());
  Dataset kept = drop_features(data, drop_list);

  const std::size_t base = kept.features();
  Dataset out;
  out.schema = kept.schema;
  for (const auto& g : groups) {
    out.schema.feature_names.push_back(g.s_mag);
    out.schema.feature_kinds.push_back(FeatureKind::Measurement);
    out.schema.feature_names.push_back(g.s_angle);
    out.schema.feature_kinds.push_back(FeatureKind::Measurement);
  }
  out.values = Matrix(data.rows(), base + 2 * groups.size());
  for (std::size_t i = 0; i < data.rows(); ++i) {
    for (std::size_t j = 0; j < base; ++j) out.values(i, j) = kept.values(i, j);
    for (std::size_t g = 0; g < src.size(); ++g) {
      const auto& s = src[g];
      out.values(i, base + 2 * g) = data.values(i, s.v_mag) * data.values(i, s.i_mag);
      out.values(i, base + 2 * g + 1) = wrap_degrees(data.values(i, s.v_angle) - data.values(i, s.i_angle));
    }
  }
  out.labels = data.labels;
  return out;
}

}  // namespace gridids
