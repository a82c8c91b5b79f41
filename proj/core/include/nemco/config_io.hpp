#pragma once

#include <stdexcept>
#include <string>

#include "nemco/scenario.hpp"
#include "nemco/types.hpp"

namespace nemco {

/// Thrown on unreadable files, malformed JSON, or schema errors; the message
/// names the offending JSON path (e.g. "storage.eta_c").
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Loads a household config from JSON with top-level keys
/// horizon, tariff, storage, ev, devices, penalty, salvage.
/// The EV efficiency is normalized to 1 on ingestion (demand rescaled).
HouseholdConfig load_household_config(const std::string& path);
HouseholdConfig parse_household_config(const std::string& text,
                                       const std::string& origin);

/// Loads a scenario model from JSON with keys
/// day_hour_at_t0, connection, solar, demand. Histogram files are resolved
/// relative to the scenario file's directory.
ScenarioModel load_scenario(const std::string& path);
ScenarioModel parse_scenario(const std::string& text,
                             const std::string& origin,
                             const std::string& base_dir = ".");

}  // namespace nemco
