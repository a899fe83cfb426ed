#pragma once

#include <span>
#include <string>
#include <vector>

#include "gridids/dataset.hpp"

namespace gridids {

enum class ScalerKind { None, Standard, MeanNormalization, MinMax };

/// Per-feature statistics of the fit set. `stddev` uses the population (divide by n) convention.
struct ScalerParams {
  ScalerKind kind = ScalerKind::Standard;
  std::vector<double> mean;
  std::vector<double> stddev;
  std::vector<double> min;
  std::vector<double> max;

  std::size_t size() const noexcept { return mean.size(); }
};

ScalerParams fit_scaler(const Dataset& train, ScalerKind kind);

/// Standard: (x - mean) / sd. MeanNormalization: (x - mean) / (max - min).
/// MinMax: (x - min) / (max - min). A zero denominator maps the whole feature to 0.
Dataset apply_scaler(const ScalerParams& params, const Dataset& data);

/// Removes the named columns; remaining order is preserved.
Dataset drop_features(const Dataset& data, std::span<const std::string> names);

/// One voltage/current phasor pair fused into apparent power S = |V||I| at angle(V) - angle(I).
struct PhasorQuadruple {
  std::string v_mag;
  std::string v_angle;
  std::string i_mag;
  std::string i_angle;
  std::string s_mag;
  std::string s_angle;
};

/// Wraps an angle in degrees into (-180, 180].
double wrap_degrees(double angle);

/// Appends (s_mag, s_angle) per group, in group order, and removes the four source columns.
Dataset derive_apparent_power(const Dataset& data, std::span<const PhasorQuadruple> groups);

}  // namespace gridids
