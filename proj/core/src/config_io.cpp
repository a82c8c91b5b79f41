#include "nemco/config_io.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "nemco/model.hpp"

namespace nemco {

namespace {

using nlohmann::json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path);
  std::ostringstream oss;
  oss << in.rdbuf();
  return oss.str();
}

json parse_json(const std::string& text, const std::string& origin) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ConfigError(origin + ": malformed JSON");
  return j;
}

const json& require(const json& j, const std::string& key,
                    const std::string& path) {
  const auto it = j.find(key);
  if (it == j.end()) throw ConfigError(path + "." + key + ": missing");
  return *it;
}

double number(const json& j, const std::string& key, const std::string& path) {
  const json& v = require(j, key, path);
  if (!v.is_number()) {
    throw ConfigError(path + "." + key + ": expected a number");
  }
  return v.get<double>();
}

double number_or(const json& j, const std::string& key, double fallback) {
  const auto it = j.find(key);
  return it != j.end() && it->is_number() ? it->get<double>() : fallback;
}

int integer(const json& j, const std::string& key, const std::string& path) {
  const json& v = require(j, key, path);
  if (!v.is_number_integer()) {
    throw ConfigError(path + "." + key + ": expected an integer");
  }
  return v.get<int>();
}

DistributionSpec parse_histogram_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read histogram file " + path);
  std::vector<double> edges;
  std::vector<double> weights;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream iss(line);
    double lo, hi, w;
    if (!(iss >> lo >> hi >> w)) {
      throw ConfigError(path + ": expected rows of 'lo,hi,weight'");
    }
    if (edges.empty()) {
      edges.push_back(lo);
    } else if (std::abs(edges.back() - lo) > 1e-12) {
      throw ConfigError(path + ": bins must be contiguous");
    }
    edges.push_back(hi);
    weights.push_back(w);
  }
  if (weights.empty()) throw ConfigError(path + ": no bins");
  return DistributionSpec::histogram(std::move(edges), std::move(weights));
}

DistributionSpec parse_demand(const json& j, const std::string& path,
                              const std::string& base_dir) {
  const std::string family =
      require(j, "family", path).get<std::string>();
  DistributionSpec dist;
  if (family == "point") {
    dist = DistributionSpec::point(number(j, "value", path));
  } else if (family == "truncated_normal") {
    dist = DistributionSpec::truncated_normal(
        number(j, "mean", path), number(j, "sd", path),
        number_or(j, "lo", 0.0), number(j, "hi", path));
  } else if (family == "histogram") {
    const std::string file = require(j, "file", path).get<std::string>();
    dist = parse_histogram_file(
        (std::filesystem::path(base_dir) / file).string());
  } else {
    throw ConfigError(path + ".family: unknown family '" + family + "'");
  }
  dist.scale = number_or(j, "scale", 1.0);
  dist.validate();
  return dist;
}

}  // namespace

HouseholdConfig parse_household_config(const std::string& text,
                                       const std::string& origin) {
  const json j = parse_json(text, origin);
  HouseholdConfig cfg;

  const json& horizon = require(j, "horizon", origin);
  cfg.tariff.horizon_T = integer(horizon, "T", "horizon");
  const int on_start = integer(horizon, "on_start", "horizon");
  const int on_end = integer(horizon, "on_end", "horizon");
  cfg.tariff.off1 = {0, on_start};
  cfg.tariff.on = {on_start, on_end};
  cfg.tariff.off2 = {on_end, cfg.tariff.horizon_T};

  const json& tariff = require(j, "tariff", origin);
  cfg.tariff.pi_off_plus = number(tariff, "off_plus", "tariff");
  cfg.tariff.pi_off_minus = number(tariff, "off_minus", "tariff");
  cfg.tariff.pi_on_plus = number(tariff, "on_plus", "tariff");
  cfg.tariff.pi_on_minus = number(tariff, "on_minus", "tariff");
  cfg.tariff.pi_zero = number_or(tariff, "fixed", 0.0);

  const json& storage = require(j, "storage", origin);
  cfg.capacity_B = number(storage, "capacity", "storage");
  cfg.e_chg_max = number(storage, "charge_max", "storage");
  cfg.e_dis_max = number(storage, "discharge_max", "storage");
  cfg.eta_c = number(storage, "eta_c", "storage");
  cfg.eta_d = number(storage, "eta_d", "storage");
  cfg.s0 = number(storage, "initial_soc", "storage");

  const json& ev = require(j, "ev", origin);
  cfg.v_max = number(ev, "charger_max", "ev");
  cfg.eta_ev = number_or(ev, "efficiency", 1.0);
  cfg.y0 = number(ev, "demand", "ev");

  const json& devices = require(j, "devices", origin);
  if (!devices.is_array() || devices.empty()) {
    throw ConfigError("devices: expected a non-empty array");
  }
  for (size_t i = 0; i < devices.size(); ++i) {
    const std::string path = "devices[" + std::to_string(i) + "]";
    DeviceUtility dev;
    dev.a = number(devices[i], "a", path);
    dev.b = number(devices[i], "b", path);
    dev.d_max = number(devices[i], "d_max", path);
    cfg.devices.push_back(dev);
  }

  cfg.alpha = number(require(j, "penalty", origin), "alpha", "penalty");
  cfg.beta = number(require(j, "salvage", origin), "beta", "salvage");

  return normalize_ev_efficiency(cfg);
}

HouseholdConfig load_household_config(const std::string& path) {
  return parse_household_config(read_file(path), path);
}

ScenarioModel parse_scenario(const std::string& text, const std::string& origin,
                             const std::string& base_dir) {
  const json j = parse_json(text, origin);
  ScenarioModel model;
  model.day_hour_at_t0 = integer(j, "day_hour_at_t0", origin);

  const json& connection = require(j, "connection", origin);
  model.offset_min = integer(connection, "offset_min", "connection");
  model.offset_max = integer(connection, "offset_max", "connection");

  const json& solar = require(j, "solar", origin);
  const std::string family = require(solar, "family", "solar").get<std::string>();
  model.scale = number_or(solar, "scale", 1.0);
  const json& means = require(solar, "hour_mean", "solar");
  if (!means.is_array() || means.size() != 24) {
    throw ConfigError("solar.hour_mean: expected 24 entries");
  }

  DistributionSpec histogram_base;
  if (family == "histogram") {
    const std::string file = require(solar, "file", "solar").get<std::string>();
    histogram_base =
        parse_histogram_file((std::filesystem::path(base_dir) / file).string());
    // Normalize the histogram to unit mean so hour_mean keeps its meaning.
    QuadratureSpec quad;
    quad.nodes = 512;
    const double m = quadrature_mean(make_quadrature(histogram_base, quad));
    if (m > 0.0) {
      for (double& e : histogram_base.edges) e /= m;
    }
  }

  for (int h = 0; h < 24; ++h) {
    const double mean = means[static_cast<size_t>(h)].get<double>();
    if (mean < 0.0) throw ConfigError("solar.hour_mean: negative entry");
    DistributionSpec dist;
    if (mean == 0.0) {
      dist = DistributionSpec::point(0.0);
    } else if (family == "lognormal") {
      const double sigma = number(solar, "sigma", "solar");
      // Location set so the mean equals hour_mean[h] exactly.
      dist = DistributionSpec::log_normal(std::log(mean) - 0.5 * sigma * sigma,
                                          sigma);
    } else if (family == "truncated_normal") {
      const double sd_frac = number(solar, "sd_frac", "solar");
      dist = DistributionSpec::truncated_normal(mean, sd_frac * mean, 0.0,
                                                mean * 4.0);
    } else if (family == "histogram") {
      dist = histogram_base;
      dist.scale = mean;
    } else {
      throw ConfigError("solar.family: unknown family '" + family + "'");
    }
    model.solar_by_hour[static_cast<size_t>(h)] = std::move(dist);
  }

  model.demand = parse_demand(require(j, "demand", origin), "demand", base_dir);
  return model;
}

ScenarioModel load_scenario(const std::string& path) {
  const std::string dir = std::filesystem::path(path).parent_path().string();
  return parse_scenario(read_file(path), path, dir.empty() ? "." : dir);
}

}  // namespace nemco
