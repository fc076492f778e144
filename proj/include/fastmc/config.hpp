#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fastmc/engine.hpp"
#include "fastmc/error.hpp"
#include "fastmc/external.hpp"
#include "fastmc/ito_model.hpp"
#include "fastmc/model_file.hpp"
#include "fastmc/sampling.hpp"
#include "fastmc/sde_sim.hpp"
#include "fastmc/system_sim.hpp"

namespace fastmc {

/// Experiment configuration: a flat JSON object of dotted keys. Unknown keys
/// are rejected. Defaults reproduce the offshore-wind frequency case.
struct ExperimentConfig {
  std::string preset = "wind";  // gaussian | beta | gamma | laplace | wind
  double preset_a = 0.0;
  double preset_b = 1.0;
  std::string model_file;       // overrides preset when set
  std::vector<double> xi0;      // empty: equilibrium / stationary mean

  double t0 = 0.0;
  double horizon = 60.0;
  double step = 0.05;

  std::string method = "fast";  // fast | traditional
  std::size_t N = 21;
  std::size_t K = 6;
  std::uint64_t seed = 1;
  FastOptions fast;
  EstimateMode estimates = EstimateMode::prefix;
  std::size_t rerun_from = 1;

  std::string rrf = "frequency";  // frequency | endpoint | external
  std::string rrf_command;
  std::size_t rrf_component = 0;
  FrequencyModel freq;
  bool schedule_set = false;
  TripEvent trip;
  double window_start = 0.0;
  double window_end = 60.0;

  std::size_t compare_traditional_N = 1000;
  std::size_t compare_fast_N = 400;
  std::optional<std::size_t> compare_traditional_from;  // default traditional_N - 4
  std::size_t compare_fast_from = 1;

  std::size_t workers = 1;
};

namespace detail {

using json = nlohmann::json;

inline double cfg_number(const json& v, const std::string& key) {
  if (!v.is_number()) throw InputError("config '" + key + "': expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw InputError("config '" + key + "': non-finite number");
  return x;
}

inline std::size_t cfg_count(const json& v, const std::string& key, std::size_t min) {
  if (!v.is_number_integer() || v.get<long long>() < static_cast<long long>(min)) {
    throw InputError("config '" + key + "': expected an integer >= " + std::to_string(min));
  }
  return v.get<std::size_t>();
}

inline bool cfg_bool(const json& v, const std::string& key) {
  if (!v.is_boolean()) throw InputError("config '" + key + "': expected true or false");
  return v.get<bool>();
}

inline std::string cfg_string(const json& v, const std::string& key) {
  if (!v.is_string()) throw InputError("config '" + key + "': expected a string");
  return v.get<std::string>();
}

}  // namespace detail

/// Parses a config object. Relative model file paths resolve against base_dir.
inline ExperimentConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {}) {
  using detail::cfg_bool;
  using detail::cfg_count;
  using detail::cfg_number;
  using detail::cfg_string;
  if (!j.is_object()) throw InputError("config: expected a JSON object");
  ExperimentConfig c;
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    const auto& v = it.value();
    if (k == "model.preset") {
      c.preset = cfg_string(v, k);
      if (c.preset != "wind" && !parse_preset_kind(c.preset)) {
        throw InputError("config 'model.preset': unknown preset '" + c.preset +
                         "' (expected gaussian, beta, gamma, laplace or wind)");
      }
    } else if (k == "model.a") {
      c.preset_a = cfg_number(v, k);
    } else if (k == "model.b") {
      c.preset_b = cfg_number(v, k);
    } else if (k == "model.file") {
      const std::filesystem::path p = cfg_string(v, k);
      c.model_file = (p.is_relative() && !base_dir.empty() ? base_dir / p : p).string();
    } else if (k == "xi0") {
      if (v.is_number()) {
        c.xi0 = {cfg_number(v, k)};
      } else if (v.is_array()) {
        c.xi0.clear();
        for (const auto& x : v) c.xi0.push_back(cfg_number(x, k));
      } else {
        throw InputError("config 'xi0': expected a number or an array of numbers");
      }
    } else if (k == "grid.t0") {
      c.t0 = cfg_number(v, k);
    } else if (k == "grid.T") {
      c.horizon = cfg_number(v, k);
    } else if (k == "grid.h") {
      c.step = cfg_number(v, k);
    } else if (k == "method") {
      c.method = cfg_string(v, k);
      if (c.method != "fast" && c.method != "traditional") {
        throw InputError("config 'method': expected 'fast' or 'traditional', got '" + c.method + "'");
      }
    } else if (k == "N") {
      c.N = cfg_count(v, k, 1);
    } else if (k == "K") {
      c.K = cfg_count(v, k, 1);
    } else if (k == "seed") {
      if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
        throw InputError("config 'seed': expected a non-negative integer");
      }
      c.seed = v.get<std::uint64_t>();
    } else if (k == "fast.decorrelate") {
      c.fast.decorrelate = cfg_bool(v, k);
    } else if (k == "fast.placement") {
      const auto s = cfg_string(v, k);
      if (s == "random") c.fast.placement = Placement::uniform_in_stratum;
      else if (s == "midpoint") c.fast.placement = Placement::midpoint;
      else throw InputError("config 'fast.placement': expected 'random' or 'midpoint'");
    } else if (k == "fast.ito_correction") {
      c.fast.ito_correction = cfg_bool(v, k);
    } else if (k == "fast.sampling") {
      const auto s = cfg_string(v, k);
      if (s == "lhs") c.fast.sampling = SampleMethod::lhs;
      else if (s == "srs") c.fast.sampling = SampleMethod::srs;
      else throw InputError("config 'fast.sampling': expected 'lhs' or 'srs'");
    } else if (k == "estimates") {
      const auto s = cfg_string(v, k);
      if (s == "prefix") c.estimates = EstimateMode::prefix;
      else if (s == "rerun") c.estimates = EstimateMode::rerun;
      else throw InputError("config 'estimates': expected 'prefix' or 'rerun'");
    } else if (k == "rerun.from") {
      c.rerun_from = cfg_count(v, k, 1);
    } else if (k == "rrf") {
      c.rrf = cfg_string(v, k);
      if (c.rrf != "frequency" && c.rrf != "endpoint" && c.rrf != "external") {
        throw InputError("config 'rrf': expected 'frequency', 'endpoint' or 'external', got '" + c.rrf + "'");
      }
    } else if (k == "rrf.command") {
      c.rrf_command = cfg_string(v, k);
    } else if (k == "rrf.component") {
      c.rrf_component = cfg_count(v, k, 0);
    } else if (k == "freq.H") {
      c.freq.inertia = cfg_number(v, k);
    } else if (k == "freq.D") {
      c.freq.damping = cfg_number(v, k);
    } else if (k == "freq.R") {
      c.freq.droop = cfg_number(v, k);
    } else if (k == "freq.Tg") {
      c.freq.governor_time = cfg_number(v, k);
    } else if (k == "freq.Pbase") {
      c.freq.base_power = cfg_number(v, k);
    } else if (k == "freq.wind_base") {
      c.freq.wind_base = cfg_number(v, k);
    } else if (k == "freq.schedule") {
      c.freq.schedule = cfg_number(v, k);
      c.schedule_set = true;
    } else if (k == "trip.time") {
      c.trip.time = cfg_number(v, k);
    } else if (k == "trip.lost_power") {
      c.trip.lost_power = cfg_number(v, k);
    } else if (k == "window.start") {
      c.window_start = cfg_number(v, k);
    } else if (k == "window.end") {
      c.window_end = cfg_number(v, k);
    } else if (k == "compare.traditional_N") {
      c.compare_traditional_N = cfg_count(v, k, 1);
    } else if (k == "compare.fast_N") {
      c.compare_fast_N = cfg_count(v, k, 1);
    } else if (k == "compare.traditional_from") {
      c.compare_traditional_from = cfg_count(v, k, 1);
    } else if (k == "compare.fast_from") {
      c.compare_fast_from = cfg_count(v, k, 1);
    } else if (k == "workers") {
      c.workers = cfg_count(v, k, 1);
    } else {
      throw InputError("config: unknown key '" + k + "'");
    }
  }
  if (c.rrf == "external" && c.rrf_command.empty()) throw InputError("config 'rrf.command': required when rrf is 'external'");
  if (c.freq.inertia <= 0 || c.freq.governor_time <= 0 || c.freq.droop <= 0 || c.freq.base_power <= 0) {
    throw InputError("config 'freq.*': H, Tg, R and Pbase must be positive");
  }
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  const auto j = model_file::read_json_file(path);
  try {
    return parse_config(j, std::filesystem::path(path).parent_path());
  } catch (const InputError& e) {
    throw InputError("'" + path + "': " + e.what());
  }
}

/// Objects an experiment needs, built from its config.
struct Experiment {
  ExperimentConfig config;
  ItoModel model;
  TimeGrid grid;
  std::vector<double> xi0;
  ResponseFunction rrf;

  RunOptions run_options() const { return {config.workers, config.estimates, config.rerun_from}; }
};

inline ItoModel build_model(const ExperimentConfig& c) {
  if (!c.model_file.empty()) return model_file::load(c.model_file);
  if (c.preset == "wind") return wind_power_model();
  DistributionPreset p{*parse_preset_kind(c.preset), c.preset_a, c.preset_b};
  try {
    return make_preset(p);
  } catch (const InputError& e) {
    throw InputError(std::string("config 'model.a'/'model.b': ") + e.what());
  }
}

inline std::vector<double> default_initial_state(const ExperimentConfig& c, const ItoModel& model) {
  if (!c.xi0.empty()) {
    if (c.xi0.size() != model.dim()) {
      throw InputError("config 'xi0': expected " + std::to_string(model.dim()) + " values");
    }
    return c.xi0;
  }
  if (c.model_file.empty()) {
    if (c.preset == "wind") return {wind_power_equilibrium()};
    return {stationary_moments({*parse_preset_kind(c.preset), c.preset_a, c.preset_b}).mean};
  }
  try {
    return drift_equilibrium(model, std::vector<double>(model.dim(), 0.0));
  } catch (const Error&) {
    throw InputError("config 'xi0': required for this model (no drift equilibrium found)");
  }
}

inline Experiment build_experiment(const ExperimentConfig& c) {
  ItoModel model = build_model(c);
  TimeGrid grid = [&] {
    try {
      return TimeGrid(c.t0, c.horizon, c.step);
    } catch (const InputError& e) {
      throw InputError(std::string("config 'grid.*': ") + e.what());
    }
  }();
  auto xi0 = default_initial_state(c, model);
  if (c.rrf_component >= model.dim()) throw InputError("config 'rrf.component': exceeds the model dimension");
  ResponseFunction rrf;
  if (c.rrf == "frequency") {
    FrequencyRrf f;
    f.model = c.freq;
    if (!c.schedule_set) f.model.schedule = xi0[c.rrf_component];
    f.event = c.trip;
    f.window_start = c.window_start;
    f.window_end = c.window_end;
    f.component = c.rrf_component;
    f.model.validate();
    if (c.window_start < grid.t0() || c.window_end > grid.horizon() || c.window_start > c.window_end) {
      throw InputError("config 'window.*': window must lie inside the grid");
    }
    rrf = f;
  } else if (c.rrf == "endpoint") {
    rrf = EndpointRrf{c.rrf_component};
  } else {
    rrf = ExternalRrf(c.rrf_command);
  }
  return Experiment{c, std::move(model), grid, std::move(xi0), std::move(rrf)};
}

}  // namespace fastmc
