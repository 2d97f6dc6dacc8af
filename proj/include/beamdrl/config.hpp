// Copyright 2026 The beamdrl Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Experiment configuration: a flat `key = value` text format with units in
// the key names. Unknown or repeated keys are errors; anything not given
// keeps its default.

#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <functional>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "beamdrl/agents.hpp"
#include "beamdrl/baselines.hpp"
#include "beamdrl/channel.hpp"
#include "beamdrl/env.hpp"
#include "beamdrl/errors.hpp"

namespace beamdrl {

inline const std::vector<std::string>& known_policies() {
  static const std::vector<std::string> names{"ddrl", "pdrl", "cdrl", "zf", "sah", "greedy", "random"};
  return names;
}

struct ExperimentConfig {
  EnvConfig env;
  double doppler_hz = 197.2;  // 3.55 km/h at 60 GHz, rho = J0(2 pi f_d dt) = 0.6514
  double slot_duration_s = 1e-3;
  std::optional<double> correlation_override;  // replaces the Jakes value when set
  double angular_spread_deg = 10.0;
  DqnConfig dqn;
  std::vector<std::string> policies{"ddrl", "zf", "sah", "greedy", "random"};
  std::size_t slots = 20000;
  std::vector<std::size_t> reschedule_slots;
  std::vector<std::uint64_t> seeds{1};
  std::size_t ma_window = 500;
  std::size_t greedy_max_sweeps = 10;

  // Temporal correlation actually used by the channel.
  double rho() const {
    return correlation_override ? *correlation_override : jakes_rho(doppler_hz, slot_duration_s);
  }

  // Environment settings with the derived quantities filled in.
  EnvConfig resolved_env() const {
    EnvConfig e = env;
    e.channel.rho = rho();
    e.channel.angular_spread_rad = angular_spread_deg * std::numbers::pi / 180.0;
    return e;
  }

  void validate() const;

  friend bool operator==(const ExperimentConfig& a, const ExperimentConfig& b);
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const auto end = comma == std::string_view::npos ? s.size() : comma;
    std::string item = trim(s.substr(start, end - start));
    if (!item.empty()) out.push_back(std::move(item));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline double parse_real(const std::string& key, std::string_view v) {
  double x = 0.0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || p != v.data() + v.size() || !std::isfinite(x)) {
    throw ConfigError(key + ": expected a finite number, got '" + std::string(v) + "'");
  }
  return x;
}

inline std::uint64_t parse_uint(const std::string& key, std::string_view v) {
  std::uint64_t x = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || p != v.data() + v.size()) {
    throw ConfigError(key + ": expected a non-negative integer, got '" + std::string(v) + "'");
  }
  return x;
}

inline bool parse_bool(const std::string& key, std::string_view v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError(key + ": expected true or false, got '" + std::string(v) + "'");
}

// Shortest representation that reads back to the same double.
inline std::string format_real(double x) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
  if (ec != std::errc()) throw Error("format_real: conversion failed");
  return std::string(buf, p);
}

template <typename T>
std::string join(const std::vector<T>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    if constexpr (std::is_same_v<T, std::string>) {
      out += v[i];
    } else {
      out += std::to_string(v[i]);
    }
  }
  return out;
}

struct ConfigKey {
  std::string name;
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, const std::string&)> set;
};

inline ConfigKey size_key(std::string name, std::size_t& (*field)(ExperimentConfig&)) {
  return {name,
          [field](const ExperimentConfig& c) {
            return std::to_string(field(const_cast<ExperimentConfig&>(c)));
          },
          [field, name](ExperimentConfig& c, const std::string& v) {
            field(c) = static_cast<std::size_t>(parse_uint(name, v));
          }};
}

inline ConfigKey real_key(std::string name, double& (*field)(ExperimentConfig&)) {
  return {name,
          [field](const ExperimentConfig& c) {
            return format_real(field(const_cast<ExperimentConfig&>(c)));
          },
          [field, name](ExperimentConfig& c, const std::string& v) { field(c) = parse_real(name, v); }};
}

inline ConfigKey bool_key(std::string name, bool& (*field)(ExperimentConfig&)) {
  return {name,
          [field](const ExperimentConfig& c) {
            return std::string(field(const_cast<ExperimentConfig&>(c)) ? "true" : "false");
          },
          [field, name](ExperimentConfig& c, const std::string& v) { field(c) = parse_bool(name, v); }};
}

// Every accepted key, in the order save_config writes them.
inline const std::vector<ConfigKey>& config_keys() {
  using C = ExperimentConfig;
  static const std::vector<ConfigKey> keys = [] {
    std::vector<ConfigKey> k;
    k.push_back(size_key("tx_antennas", [](C& c) -> std::size_t& { return c.env.channel.tx_antennas; }));
    k.push_back(size_key("rx_antennas", [](C& c) -> std::size_t& { return c.env.channel.rx_antennas; }));
    k.push_back(size_key("users", [](C& c) -> std::size_t& { return c.env.channel.users; }));
    k.push_back(size_key("streams_per_user", [](C& c) -> std::size_t& { return c.env.streams; }));
    k.push_back(size_key("paths", [](C& c) -> std::size_t& { return c.env.channel.paths; }));
    k.push_back(bool_key("clustered_angles", [](C& c) -> bool& { return c.env.channel.clustered; }));
    k.push_back(real_key("angular_spread_deg", [](C& c) -> double& { return c.angular_spread_deg; }));
    k.push_back(real_key("power_dbm", [](C& c) -> double& { return c.env.power_dbm; }));
    k.push_back(real_key("noise_dbm", [](C& c) -> double& { return c.env.noise_dbm; }));
    k.push_back(real_key("distance_m", [](C& c) -> double& { return c.env.channel.distance_m; }));
    k.push_back(real_key("ref_distance_m", [](C& c) -> double& { return c.env.channel.ref_distance_m; }));
    k.push_back(real_key("ref_loss_db", [](C& c) -> double& { return c.env.channel.ref_loss_db; }));
    k.push_back(real_key("path_loss_exponent", [](C& c) -> double& { return c.env.channel.path_loss_exponent; }));
    k.push_back(real_key("shadowing_std_db", [](C& c) -> double& { return c.env.channel.shadowing_std_db; }));
    k.push_back(real_key("doppler_hz", [](C& c) -> double& { return c.doppler_hz; }));
    k.push_back(real_key("slot_duration_s", [](C& c) -> double& { return c.slot_duration_s; }));
    k.push_back({"correlation_override",
                 [](const C& c) {
                   return c.correlation_override ? format_real(*c.correlation_override) : std::string("none");
                 },
                 [](C& c, const std::string& v) {
                   if (v == "none") {
                     c.correlation_override.reset();
                   } else {
                     c.correlation_override = parse_real("correlation_override", v);
                   }
                 }});
    k.push_back(size_key("tx_codebook_size", [](C& c) -> std::size_t& { return c.env.tx_codebook; }));
    k.push_back(size_key("rx_codebook_size", [](C& c) -> std::size_t& { return c.env.rx_codebook; }));
    k.push_back(size_key("codebook_phases", [](C& c) -> std::size_t& { return c.env.phases; }));
    k.push_back(real_key("penalty_weight", [](C& c) -> double& { return c.env.penalty_weight; }));
    k.push_back(size_key("hidden1", [](C& c) -> std::size_t& { return c.dqn.hidden1; }));
    k.push_back(size_key("hidden2", [](C& c) -> std::size_t& { return c.dqn.hidden2; }));
    k.push_back(size_key("replay_capacity", [](C& c) -> std::size_t& { return c.dqn.replay_capacity; }));
    k.push_back(size_key("warmup_slots", [](C& c) -> std::size_t& { return c.dqn.warmup_slots; }));
    k.push_back(size_key("batch_size", [](C& c) -> std::size_t& { return c.dqn.batch_size; }));
    k.push_back(size_key("target_sync_interval", [](C& c) -> std::size_t& { return c.dqn.target_sync; }));
    k.push_back(real_key("discount", [](C& c) -> double& { return c.dqn.discount; }));
    k.push_back(size_key("updates_per_slot", [](C& c) -> std::size_t& { return c.dqn.updates_per_slot; }));
    k.push_back(bool_key("normalize_state", [](C& c) -> bool& { return c.dqn.normalize_state; }));
    k.push_back(real_key("epsilon_initial", [](C& c) -> double& { return c.dqn.schedules.eps0; }));
    k.push_back(real_key("epsilon_min", [](C& c) -> double& { return c.dqn.schedules.eps_min; }));
    k.push_back(real_key("epsilon_decay", [](C& c) -> double& { return c.dqn.schedules.eps_decay; }));
    k.push_back(real_key("lr_initial", [](C& c) -> double& { return c.dqn.schedules.lr0; }));
    k.push_back(real_key("lr_decay", [](C& c) -> double& { return c.dqn.schedules.lr_decay; }));
    k.push_back({"lr_schedule",
                 [](const C& c) {
                   return std::string(c.dqn.schedules.lr_mode == LrSchedule::kInverseTime ? "inverse_time"
                                                                                         : "recurrence");
                 },
                 [](C& c, const std::string& v) {
                   if (v == "inverse_time") {
                     c.dqn.schedules.lr_mode = LrSchedule::kInverseTime;
                   } else if (v == "recurrence") {
                     c.dqn.schedules.lr_mode = LrSchedule::kRecurrence;
                   } else {
                     throw ConfigError("lr_schedule: expected inverse_time or recurrence, got '" + v + "'");
                   }
                 }});
    k.push_back({"policies", [](const C& c) { return join(c.policies); },
                 [](C& c, const std::string& v) { c.policies = split_list(v); }});
    k.push_back(size_key("slots", [](C& c) -> std::size_t& { return c.slots; }));
    k.push_back({"reschedule_slots", [](const C& c) { return join(c.reschedule_slots); },
                 [](C& c, const std::string& v) {
                   c.reschedule_slots.clear();
                   for (const auto& s : split_list(v)) {
                     c.reschedule_slots.push_back(static_cast<std::size_t>(parse_uint("reschedule_slots", s)));
                   }
                 }});
    k.push_back({"seeds", [](const C& c) { return join(c.seeds); },
                 [](C& c, const std::string& v) {
                   c.seeds.clear();
                   for (const auto& s : split_list(v)) c.seeds.push_back(parse_uint("seeds", s));
                 }});
    k.push_back(size_key("ma_window", [](C& c) -> std::size_t& { return c.ma_window; }));
    k.push_back(size_key("greedy_max_sweeps", [](C& c) -> std::size_t& { return c.greedy_max_sweeps; }));
    return k;
  }();
  return keys;
}

inline const ConfigKey& find_key(const std::string& name) {
  for (const auto& k : config_keys()) {
    if (k.name == name) return k;
  }
  throw ConfigError("unknown key '" + name + "'");
}

}  // namespace detail

inline bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
  for (const auto& k : detail::config_keys()) {
    if (k.get(a) != k.get(b)) return false;
  }
  return true;
}

inline void ExperimentConfig::validate() const {
  const auto& c = env.channel;
  auto positive = [](const char* key, std::size_t v) {
    if (v == 0) throw ConfigError(std::string(key) + ": must be positive");
  };
  positive("tx_antennas", c.tx_antennas);
  positive("rx_antennas", c.rx_antennas);
  positive("users", c.users);
  positive("streams_per_user", env.streams);
  positive("paths", c.paths);
  positive("tx_codebook_size", env.tx_codebook);
  positive("rx_codebook_size", env.rx_codebook);
  positive("codebook_phases", env.phases);
  positive("slots", slots);
  positive("ma_window", ma_window);
  positive("greedy_max_sweeps", greedy_max_sweeps);
  if (c.tx_antennas < c.users * env.streams) {
    throw ConfigError("tx_antennas: " + std::to_string(c.tx_antennas) + " < users * streams_per_user = " +
                      std::to_string(c.users * env.streams));
  }
  if (env.streams > c.rx_antennas) {
    throw ConfigError("streams_per_user: exceeds rx_antennas");
  }
  if (!(angular_spread_deg >= 0.0)) throw ConfigError("angular_spread_deg: must be >= 0");
  if (!(c.distance_m > 0.0)) throw ConfigError("distance_m: must be positive");
  if (!(c.ref_distance_m > 0.0)) throw ConfigError("ref_distance_m: must be positive");
  if (!(c.shadowing_std_db >= 0.0)) throw ConfigError("shadowing_std_db: must be >= 0");
  if (!(doppler_hz >= 0.0)) throw ConfigError("doppler_hz: must be >= 0");
  if (!(slot_duration_s > 0.0)) throw ConfigError("slot_duration_s: must be positive");
  if (correlation_override && !(std::fabs(*correlation_override) <= 1.0)) {
    throw ConfigError("correlation_override: must lie in [-1, 1]");
  }
  if (!(env.penalty_weight >= 0.0)) throw ConfigError("penalty_weight: must be >= 0");
  dqn.validate();
  if (policies.empty()) throw ConfigError("policies: at least one policy required");
  std::set<std::string> seen;
  for (const auto& p : policies) {
    bool known = false;
    for (const auto& k : known_policies()) known = known || k == p;
    if (!known) throw ConfigError("policies: unknown policy '" + p + "'");
    if (!seen.insert(p).second) throw ConfigError("policies: '" + p + "' listed twice");
    if (p == "greedy" && env.tx_codebook * env.rx_codebook > kGreedyMaxActions) {
      throw ConfigError("policies: greedy needs tx_codebook_size * rx_codebook_size <= " +
                        std::to_string(kGreedyMaxActions));
    }
  }
  if (seeds.empty()) throw ConfigError("seeds: at least one seed required");
  for (std::size_t r : reschedule_slots) {
    if (r == 0 || r >= slots) throw ConfigError("reschedule_slots: " + std::to_string(r) + " outside (0, slots)");
  }
}

// Full-size defaults: 32x4 antennas, four users.
inline ExperimentConfig full_profile() { return {}; }

// Small profile for tests and quick runs.
inline ExperimentConfig desk_profile() {
  ExperimentConfig c;
  c.env.channel.tx_antennas = 8;
  c.env.channel.rx_antennas = 2;
  c.env.channel.users = 2;
  c.env.streams = 1;
  c.env.tx_codebook = 8;
  c.env.rx_codebook = 2;
  c.dqn.hidden1 = 64;
  c.dqn.hidden2 = 64;
  c.dqn.schedules.lr0 = 1e-3;
  c.dqn.schedules.eps_decay = 3e-4;
  c.slots = 20000;
  return c;
}

// Sets one key from its text form (as in a config file).
inline void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  detail::find_key(key).set(cfg, value);
}

inline std::string get_config_value(const ExperimentConfig& cfg, const std::string& key) {
  return detail::find_key(key).get(cfg);
}

inline ExperimentConfig parse_config(std::istream& is, ExperimentConfig base = {}) {
  std::set<std::string> seen;
  std::string line;
  for (std::size_t lineno = 1; std::getline(is, line); ++lineno) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string body = detail::trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = detail::trim(std::string_view(body).substr(0, eq));
    const std::string value = detail::trim(std::string_view(body).substr(eq + 1));
    if (!seen.insert(key).second) {
      throw ConfigError("line " + std::to_string(lineno) + ": key '" + key + "' given twice");
    }
    try {
      set_config_value(base, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  base.validate();
  return base;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file " + path);
  return parse_config(is);
}

inline void write_config(const ExperimentConfig& cfg, std::ostream& os) {
  for (const auto& k : detail::config_keys()) os << k.name << " = " << k.get(cfg) << '\n';
}

inline void save_config(const ExperimentConfig& cfg, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw Error("cannot write config file " + path);
  write_config(cfg, os);
  if (!os) throw Error("write failed for " + path);
}

}  // namespace beamdrl
