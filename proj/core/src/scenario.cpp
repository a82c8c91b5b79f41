#include "nemco/scenario.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "nemco/rng.hpp"

namespace nemco {

void ScenarioModel::validate(const HouseholdConfig& config) const {
  for (const DistributionSpec& dist : solar_by_hour) dist.validate();
  demand.validate();
  if (!std::isfinite(demand.upper_bound())) {
    throw std::invalid_argument(
        "scenario: EV demand distribution must have a bounded support");
  }
  if (offset_min > offset_max) {
    throw std::invalid_argument("scenario: offset_min > offset_max");
  }
  if (!(scale > 0.0)) {
    throw std::invalid_argument("scenario: scale must be > 0");
  }
  if (day_hour_at_t0 < 0 || day_hour_at_t0 > 23) {
    throw std::invalid_argument("scenario: day_hour_at_t0 must be in [0, 23]");
  }
  const TariffSchedule& tf = config.tariff;
  if (!tf.on.empty()) {
    for (int j : {offset_min, offset_max}) {
      if (tf.on.begin + j < 0 || tf.on.end + j > tf.horizon_T) {
        std::ostringstream oss;
        oss << "scenario: offset " << j
            << " pushes the on-peak window outside the horizon";
        throw std::invalid_argument(oss.str());
      }
    }
  }
}

TariffSchedule shifted_tariff(const TariffSchedule& base, int offset) {
  if (offset == 0 || base.on.empty()) return base;
  TariffSchedule tf = base;
  tf.on = {base.on.begin + offset, base.on.end + offset};
  if (tf.on.begin < 0 || tf.on.end > tf.horizon_T) {
    throw std::invalid_argument("shifted_tariff: offset out of range");
  }
  tf.off1 = {0, tf.on.begin};
  tf.off2 = {tf.on.end, tf.horizon_T};
  return tf;
}

std::vector<DistributionSpec> interval_distributions(const ScenarioModel& model,
                                                     int offset, int T,
                                                     double extra_scale) {
  std::vector<DistributionSpec> dists;
  dists.reserve(static_cast<size_t>(T));
  for (int t = 0; t < T; ++t) {
    DistributionSpec dist =
        model.solar_by_hour[static_cast<size_t>(model.clock_hour(t, offset))];
    dist.scale *= model.scale * extra_scale;
    dists.push_back(std::move(dist));
  }
  return dists;
}

Realization sample_scenario(const ScenarioModel& model,
                            const HouseholdConfig& config, uint64_t seed,
                            uint64_t episode_index, double extra_scale) {
  CounterRng rng(seed, episode_index);
  Realization out;
  out.offset = static_cast<int>(
      rng.uniform_int(model.offset_min, model.offset_max));
  out.y0 = model.demand.quantile(rng.uniform01());

  const int T = config.horizon();
  const std::vector<DistributionSpec> dists =
      interval_distributions(model, out.offset, T, extra_scale);
  out.r.resize(static_cast<size_t>(T));
  for (int t = 0; t < T; ++t) {
    out.r[static_cast<size_t>(t)] =
        dists[static_cast<size_t>(t)].quantile(rng.uniform01());
  }
  return out;
}

}  // namespace nemco
