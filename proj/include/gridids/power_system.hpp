#pragma once

#include <vector>

#include "gridids/dataset.hpp"
#include "gridids/preprocess.hpp"

namespace gridids {

/// The 128-feature layout of the multiclass PMU/relay dataset: four relays R1..R4, each with
/// 12 phasor angle/magnitude pairs (PA1..PA12 / PM1..PM12), frequency, frequency delta,
/// apparent impedance and its angle, and a status flag; followed by control panel, relay and
/// snort log columns.
///
/// Tagged LogOrStatus (32 columns, the default drop list): the 12 log columns plus each
/// relay's F, DF, PA:Z, PA:ZH and S columns. Dropping them leaves the 96 phasor columns.
FeatureSchema power_system_schema();

/// Phase A/B/C voltage (PA1..PA3 / PM1..PM3) paired with phase A/B/C current
/// (PA4..PA6 / PM4..PM6) for each relay: 12 groups.
std::vector<PhasorQuadruple> power_system_phasor_groups();

}  // namespace gridids
