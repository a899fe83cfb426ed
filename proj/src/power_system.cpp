#include "gridids/power_system.hpp"

#include <string>

namespace gridids {

namespace {

std::string relay(int r) { return "R" + std::to_string(r); }

}  // namespace

FeatureSchema power_system_schema() {
  FeatureSchema s;
  auto add = [&s](std::string name, FeatureKind kind) {
    s.feature_names.push_back(std::move(name));
    s.feature_kinds.push_back(kind);
  };
  for (int r = 1; r <= 4; ++r) {
    for (int k = 1; k <= 12; ++k) {
      const bool voltage = k <= 3 || (k >= 7 && k <= 9);
      add(relay(r) + "-PA" + std::to_string(k) + (voltage ? ":VH" : ":IH"), FeatureKind::Measurement);
      add(relay(r) + "-PM" + std::to_string(k) + (voltage ? ":V" : ":I"), FeatureKind::Measurement);
    }
    add(relay(r) + ":F", FeatureKind::LogOrStatus);
    add(relay(r) + ":DF", FeatureKind::LogOrStatus);
    add(relay(r) + "-PA:Z", FeatureKind::LogOrStatus);
    add(relay(r) + "-PA:ZH", FeatureKind::LogOrStatus);
    add(relay(r) + ":S", FeatureKind::LogOrStatus);
  }
  for (int r = 1; r <= 4; ++r) add("control_panel_log" + std::to_string(r), FeatureKind::LogOrStatus);
  for (int r = 1; r <= 4; ++r) add("relay" + std::to_string(r) + "_log", FeatureKind::LogOrStatus);
  for (int r = 1; r <= 4; ++r) add("snort_log" + std::to_string(r), FeatureKind::LogOrStatus);
  s.label_column = "marker";
  return s;
}

std::vector<PhasorQuadruple> power_system_phasor_groups() {
  std::vector<PhasorQuadruple> groups;
  for (int r = 1; r <= 4; ++r) {
    for (int phase = 1; phase <= 3; ++phase) {
      const auto v = std::to_string(phase);
      const auto i = std::to_string(phase + 3);
      groups.push_back({relay(r) + "-PM" + v + ":V", relay(r) + "-PA" + v + ":VH", relay(r) + "-PM" + i + ":I",
                        relay(r) + "-PA" + i + ":IH", relay(r) + "-S" + v + ":MAG", relay(r) + "-S" + v + ":ANG"});
    }
  }
  return groups;
}

}  // namespace gridids
