// Copyright 2026 The jrc_track Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "jrc/scenario_config.hpp"

/**
 * @file config_file.hpp
 * Flat `key = value` scenario files. `#` starts a comment, blank lines are
 * ignored, missing keys keep their defaults and unknown keys are errors.
 *
 *     n_tx = 128
 *     positions = 100,20; 90,20
 */

namespace jrc
{

class ConfigError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

namespace detail
{

inline std::string_view trim(std::string_view s)
{
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) {
    return {};
  }
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

inline double parse_double(std::string_view key, std::string_view text)
{
  const auto t = trim(text);
  double out = 0.0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), out);
  if (res.ec != std::errc{} || res.ptr != t.data() + t.size() || t.empty()) {
    throw ConfigError(std::string(key) + ": expected a number, got '" + std::string(t) + "'");
  }
  return out;
}

inline long long parse_int(std::string_view key, std::string_view text)
{
  const auto t = trim(text);
  long long out = 0;
  const auto res = std::from_chars(t.data(), t.data() + t.size(), out);
  if (res.ec != std::errc{} || res.ptr != t.data() + t.size() || t.empty()) {
    throw ConfigError(std::string(key) + ": expected an integer, got '" + std::string(t) + "'");
  }
  return out;
}

inline int parse_count(std::string_view key, std::string_view text, long long min_value)
{
  const long long v = parse_int(key, text);
  if (v < min_value || v > 100000000) {
    throw ConfigError(std::string(key) + ": must be >= " + std::to_string(min_value));
  }
  return static_cast<int>(v);
}

inline bool parse_bool(std::string_view key, std::string_view text)
{
  const auto t = trim(text);
  if (t == "true" || t == "1") {
    return true;
  }
  if (t == "false" || t == "0") {
    return false;
  }
  throw ConfigError(std::string(key) + ": expected true or false, got '" + std::string(t) + "'");
}

inline double parse_nonneg(std::string_view key, std::string_view text)
{
  const double v = parse_double(key, text);
  if (!(v >= 0.0) || !std::isfinite(v)) {
    throw ConfigError(std::string(key) + ": must be a finite value >= 0");
  }
  return v;
}

inline double parse_positive(std::string_view key, std::string_view text)
{
  const double v = parse_double(key, text);
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw ConfigError(std::string(key) + ": must be a finite value > 0");
  }
  return v;
}

inline std::vector<std::array<double, 2>> parse_positions(std::string_view key, std::string_view text)
{
  std::vector<std::array<double, 2>> out;
  std::string_view rest = text;
  while (!rest.empty()) {
    const auto semi = rest.find(';');
    const auto item = trim(rest.substr(0, semi));
    rest = semi == std::string_view::npos ? std::string_view{} : rest.substr(semi + 1);
    if (item.empty()) {
      continue;
    }
    const auto comma = item.find(',');
    if (comma == std::string_view::npos) {
      throw ConfigError(std::string(key) + ": expected 'x,y' pairs separated by ';'");
    }
    out.push_back({parse_double(key, item.substr(0, comma)),
        parse_double(key, item.substr(comma + 1))});
  }
  if (out.empty()) {
    throw ConfigError(std::string(key) + ": at least one position is required");
  }
  return out;
}

}  // namespace detail

/// Parses scenario text. Errors name the offending key or line.
inline ScenarioConfig parse_config(std::string_view text)
{
  using namespace detail;
  ScenarioConfig cfg;
  bool n_rx_set = false;
  int vehicles = -1;

  using Setter = std::function<void(std::string_view, std::string_view)>;
  const std::map<std::string, Setter, std::less<>> setters{
    {"positions", [&](auto k, auto v) {cfg.positions = parse_positions(k, v);}},
    {"vehicles", [&](auto k, auto v) {vehicles = parse_count(k, v, 1);}},
    {"speed_min", [&](auto k, auto v) {cfg.speed_min = parse_double(k, v);}},
    {"speed_max", [&](auto k, auto v) {cfg.speed_max = parse_double(k, v);}},
    {"carrier_hz", [&](auto k, auto v) {cfg.array.carrier_hz = parse_positive(k, v);}},
    {"wave_speed", [&](auto k, auto v) {cfg.array.wave_speed = parse_positive(k, v);}},
    {"slot_s", [&](auto k, auto v) {cfg.slot_s = parse_positive(k, v);}},
    {"steps", [&](auto k, auto v) {cfg.steps = parse_count(k, v, 1);}},
    {"n_tx", [&](auto k, auto v) {cfg.array.n_tx = parse_count(k, v, 1);}},
    {"n_rx", [&](auto k, auto v) {
        cfg.array.n_rx = parse_count(k, v, 1);
        n_rx_set = true;
      }},
    {"m_vehicle", [&](auto k, auto v) {cfg.array.m_vehicle = parse_count(k, v, 1);}},
    {"xi_re", [&](auto k, auto v) {cfg.xi.real(parse_double(k, v));}},
    {"xi_im", [&](auto k, auto v) {cfg.xi.imag(parse_double(k, v));}},
    {"sigma_tau", [&](auto k, auto v) {cfg.noise.sigma_tau = parse_nonneg(k, v);}},
    {"sigma_gamma", [&](auto k, auto v) {cfg.noise.sigma_gamma = parse_nonneg(k, v);}},
    {"sigma_y2", [&](auto k, auto v) {cfg.noise.sigma_y2 = parse_nonneg(k, v);}},
    {"n0", [&](auto k, auto v) {cfg.noise.n0 = parse_positive(k, v);}},
    {"mf_gain", [&](auto k, auto v) {cfg.noise.mf_gain = parse_positive(k, v);}},
    {"sigma_theta_deg", [&](auto k, auto v) {
        cfg.process.sigma_theta = deg_to_rad(parse_nonneg(k, v));
      }},
    {"sigma_d", [&](auto k, auto v) {cfg.process.sigma_d = parse_nonneg(k, v);}},
    {"sigma_v", [&](auto k, auto v) {cfg.process.sigma_v = parse_nonneg(k, v);}},
    {"sigma_beta", [&](auto k, auto v) {cfg.process.sigma_beta = parse_nonneg(k, v);}},
    {"feedback_inflation", [&](auto k, auto v) {cfg.feedback_inflation = parse_double(k, v);}},
    {"feedback_drop_radar", [&](auto k, auto v) {cfg.feedback_drop_radar = parse_bool(k, v);}},
    {"trials", [&](auto k, auto v) {cfg.trials = parse_count(k, v, 1);}},
    {"seed", [&](auto k, auto v) {
        const long long s = parse_int(k, v);
        if (s < 0) {
          throw ConfigError(std::string(k) + ": must be >= 0");
        }
        cfg.seed = static_cast<std::uint64_t>(s);
      }},
    {"nominal_snr_db", [&](auto k, auto v) {cfg.nominal_snr_db = parse_double(k, v);}},
    {"loopy_iters", [&](auto k, auto v) {cfg.loopy_iters = parse_count(k, v, 1);}},
    {"prior_inflation", [&](auto k, auto v) {cfg.prior_inflation = parse_nonneg(k, v);}},
    {"tx_power", [&](auto k, auto v) {cfg.tx_power = parse_positive(k, v);}},
  };

  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    view = trim(view.substr(0, view.find('#')));
    if (view.empty()) {
      continue;
    }
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const auto key = trim(view.substr(0, eq));
    const auto value = trim(view.substr(eq + 1));
    const auto it = setters.find(key);
    if (it == setters.end()) {
      throw ConfigError(std::string(key) + ": unknown key (line " + std::to_string(line_no) + ")");
    }
    if (value.empty()) {
      throw ConfigError(std::string(key) + ": missing value");
    }
    it->second(key, value);
  }

  if (!n_rx_set) {
    cfg.array.n_rx = cfg.array.n_tx;
  }
  if (vehicles > 0) {
    if (vehicles > cfg.vehicles()) {
      throw ConfigError("vehicles: only " + std::to_string(cfg.vehicles()) +
        " positions are configured");
    }
    cfg.positions.resize(static_cast<std::size_t>(vehicles));
  }
  try {
    cfg.validate();
  } catch (const std::invalid_argument & e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

inline ScenarioConfig load_config(const std::string & path)
{
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config file '" + path + "'");
  }
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace jrc
