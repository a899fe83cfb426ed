#include "gridids/demo.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <string>

#include "gridids/error.hpp"
#include "gridids/power_system.hpp"
#include "gridids/preprocess.hpp"
#include "gridids/rng.hpp"

namespace gridids {

namespace {

struct FeatureModel {
  double base = 0.0;
  double noise = 1.0;
  double informative = 0.0;  // scale of class offsets, in noise units
  bool angle = false;
};

FeatureModel feature_model(const std::string& name, FeatureKind kind, Rng& rng) {
  FeatureModel m;
  if (kind == FeatureKind::LogOrStatus) {
    if (name.find(":F") != std::string::npos) {
      m.base = 60.0;
      m.noise = 0.01;
    } else if (name.find(":DF") != std::string::npos) {
      m.noise = 0.005;
    } else if (name.find("PA:Z") != std::string::npos) {
      m.base = name.back() == 'H' ? 20.0 : 8.0;
      m.noise = 1.0;
    } else {
      m.noise = 0.0;  // logs and status flags: discrete, handled by caller
    }
    return m;
  }
  m.angle = name.find("-PA") != std::string::npos;
  if (m.angle) {
    m.base = -150.0 + 300.0 * rng.uniform01();
    m.noise = 2.0;
  } else if (name.back() == 'V') {
    m.base = 131000.0;
    m.noise = 800.0;
  } else {
    m.base = 420.0;
    m.noise = 25.0;
  }
  m.informative = 0.25 + 0.75 * rng.uniform01();
  return m;
}

void write_number(std::string& line, double v) {
  if (std::isnan(v)) {
    line += "NaN";
    return;
  }
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  line.append(buf, ptr);
}

template <typename Data>
void write_csv_impl(const std::filesystem::path& path, const Data& data) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path.string() + "'");
  std::string line;
  for (const auto& n : data.schema.feature_names) line += n + ",";
  line += data.schema.label_column + "\n";
  out << line;
  for (std::size_t i = 0; i < data.labels.size(); ++i) {
    line.clear();
    for (double v : data.values.row(i)) {
      write_number(line, v);
      line += ',';
    }
    line += std::to_string(data.labels[i]);
    line += '\n';
    out << line;
  }
  if (!out) throw Error(ErrorCode::Io, "write to '" + path.string() + "' failed");
}

}  // namespace

RawDataset generate_demo(const DemoConfig& cfg) {
  if (cfg.majority_rows < 2 || !(cfg.imbalance >= 1.0))
    throw Error(ErrorCode::InvalidArgument, "demo needs majority_rows >= 2 and imbalance >= 1");
  const auto schema = power_system_schema();
  const auto taxonomy = LabelTaxonomy::power_system_default();
  const auto universe = taxonomy.universe();
  const std::vector<int> labels(universe.begin(), universe.end());
  const std::size_t f = schema.size();

  Rng layout(derive_seed(cfg.seed, 0));
  std::vector<FeatureModel> models;
  for (std::size_t j = 0; j < f; ++j) models.push_back(feature_model(schema.feature_names[j], schema.feature_kinds[j], layout));

  // Natural events share one family center and attacks another; classes scatter around them.
  std::vector<double> natural_center(f), attack_center(f);
  for (std::size_t j = 0; j < f; ++j) {
    const double spread = cfg.family_separation * models[j].informative * models[j].noise;
    natural_center[j] = models[j].base + layout.normal() * spread;
    attack_center[j] = models[j].base + layout.normal() * spread;
  }

  const auto minority = std::max<std::size_t>(
      2, static_cast<std::size_t>(std::llround(static_cast<double>(cfg.majority_rows) / cfg.imbalance)));
  RawDataset raw;
  raw.schema = schema;
  raw.values = Matrix(0, f);
  std::vector<double> row(f);
  for (int label : labels) {
    std::size_t count = minority + static_cast<std::size_t>(layout.below(cfg.majority_rows - minority + 1));
    if (label == 36) count = cfg.majority_rows;
    if (label == 21) count = minority;

    Rng rng(derive_seed(cfg.seed, 1000 + static_cast<std::uint64_t>(label)));
    const auto& family = taxonomy.is_natural(label) ? natural_center : attack_center;
    std::vector<double> center(f);
    for (std::size_t j = 0; j < f; ++j)
      center[j] = family[j] + rng.normal() * cfg.separation * models[j].informative * models[j].noise;
    for (std::size_t s = 0; s < count; ++s) {
      for (std::size_t j = 0; j < f; ++j) {
        const auto& m = models[j];
        if (schema.feature_kinds[j] == FeatureKind::LogOrStatus && m.noise == 0.0) {
          row[j] = rng.uniform01() < 0.05 ? 1.0 : 0.0;
          continue;
        }
        double v = center[j] + rng.normal() * m.noise;
        if (m.angle) v = wrap_degrees(v);
        row[j] = v;
        if (rng.uniform01() < cfg.missing_rate) row[j] = std::numeric_limits<double>::quiet_NaN();
      }
      raw.values.append_row(row);
      raw.labels.push_back(label);
    }
  }
  return raw;
}

void write_csv(const std::filesystem::path& path, const RawDataset& data) { write_csv_impl(path, data); }
void write_csv(const std::filesystem::path& path, const Dataset& data) { write_csv_impl(path, data); }

}  // namespace gridids
