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
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "jrc/gaussian.hpp"
#include "jrc/signal_model.hpp"

namespace jrc
{

inline constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

/// Standard deviations of the state-transition noise (beta: total complex).
struct ProcessNoise
{
  double sigma_theta = deg_to_rad(0.02);
  double sigma_d = 0.2;
  double sigma_v = 0.5;
  double sigma_beta = 1.0;

  void validate() const
  {
    if (!(sigma_theta >= 0.0) || !(sigma_d >= 0.0) || !(sigma_v >= 0.0) ||
      !(sigma_beta >= 0.0))
    {
      throw std::invalid_argument("ProcessNoise: standard deviations must be >= 0");
    }
  }
};

/// Everything needed to reproduce one Monte Carlo experiment.
struct ScenarioConfig
{
  std::vector<std::array<double, 2>> positions{{100.0, 20.0}, {90.0, 20.0}, {80.0, 20.0},
    {70.0, 20.0}};
  double speed_min = 10.0;
  double speed_max = 20.0;
  ArrayConfig array{};
  NoiseConfig noise{};
  ProcessNoise process{};
  double slot_s = 0.02;
  int steps = 20;
  cplx xi{10.0, 10.0};
  double tx_power = 1.0;
  double feedback_inflation = 64.0;
  bool feedback_drop_radar = false;
  int trials = 1000;
  std::uint64_t seed = 1;
  double nominal_snr_db = 10.0;
  int loopy_iters = 5;
  double prior_inflation = 10.0;

  int vehicles() const { return static_cast<int>(positions.size()); }

  void validate() const
  {
    if (positions.empty()) {
      throw std::invalid_argument("vehicles: at least one vehicle is required");
    }
    if (!(speed_min <= speed_max)) {
      throw std::invalid_argument("speed_min: must not exceed speed_max");
    }
    if (!(slot_s > 0.0)) {
      throw std::invalid_argument("slot_s: must be > 0");
    }
    if (steps < 1) {
      throw std::invalid_argument("steps: must be >= 1");
    }
    if (trials < 1) {
      throw std::invalid_argument("trials: must be >= 1");
    }
    if (loopy_iters < 1) {
      throw std::invalid_argument("loopy_iters: must be >= 1");
    }
    if (!(feedback_inflation >= 1.0)) {
      throw std::invalid_argument("feedback_inflation: must be >= 1");
    }
    if (!(prior_inflation >= 0.0)) {
      throw std::invalid_argument("prior_inflation: must be >= 0");
    }
    if (!(tx_power > 0.0)) {
      throw std::invalid_argument("tx_power: must be > 0");
    }
    array.validate();
    noise.validate();
    process.validate();
  }
};

}  // namespace jrc
