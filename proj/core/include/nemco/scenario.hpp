#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "nemco/distribution.hpp"
#include "nemco/types.hpp"

namespace nemco {

/// Scenario generator for Monte-Carlo runs: a 24-slot clock-hour solar
/// profile, an EV demand distribution, and a uniformly distributed
/// connection-time offset. Offset j means the EV connects j hours earlier
/// than the base alignment, which shifts the on-peak window j intervals
/// later inside the horizon; the horizon always covers the whole leading
/// off-peak / on-peak / trailing off-peak structure.
struct ScenarioModel {
  std::array<DistributionSpec, 24> solar_by_hour;
  DistributionSpec demand;
  int offset_min = 0;
  int offset_max = 0;
  int day_hour_at_t0 = 8;  // clock hour of interval 0 at offset 0
  double scale = 1.0;      // renewable multiplier (benchmarks sweep this)

  int clock_hour(int t, int offset) const {
    const int h = (day_hour_at_t0 - offset + t) % 24;
    return h < 0 ? h + 24 : h;
  }

  /// Throws std::invalid_argument when distributions are malformed, the
  /// demand support is unbounded, or an admissible offset would push the
  /// on-peak window outside the horizon.
  void validate(const HouseholdConfig& config) const;
};

struct Realization {
  std::vector<double> r;  // realized renewable per interval
  double y0 = 0.0;        // EV demand at connection
  int offset = 0;         // connection offset
};

/// Tariff with the on-peak window shifted `offset` intervals later. A tariff
/// without an on-peak block is returned unchanged.
TariffSchedule shifted_tariff(const TariffSchedule& base, int offset);

/// Per-interval renewable distributions for one alignment, with the model
/// scale times extra_scale folded in.
std::vector<DistributionSpec> interval_distributions(const ScenarioModel& model,
                                                     int offset, int T,
                                                     double extra_scale = 1.0);

/// Draws one episode as a pure function of (seed, episode_index): offset
/// first, then EV demand, then the renewable trajectory. Identical across
/// thread counts and platforms.
Realization sample_scenario(const ScenarioModel& model,
                            const HouseholdConfig& config, uint64_t seed,
                            uint64_t episode_index, double extra_scale = 1.0);

}  // namespace nemco
