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

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "jrc/gaussian.hpp"
#include "jrc/scenario_config.hpp"
#include "jrc/signal_model.hpp"

/**
 * @file kinematics.hpp
 * Ground-truth vehicle motion and the linearized evolution model.
 *
 * Geometry: RSU at the origin, array axis along +x (the road direction),
 * vehicles on y = 20 m driving towards -x. theta is measured from the array
 * axis, so cos(theta) = x / d.
 */

namespace jrc
{

struct VehicleTruth
{
  double x = 0.0;
  double y = 0.0;
  double v = 0.0;       ///< speed along -x
  double d = 0.0;
  double theta = 0.0;
  cplx beta{0.0, 0.0};
  bool end_of_track = false;

  static VehicleTruth from_cartesian(double x, double y, double v, cplx beta)
  {
    VehicleTruth s;
    s.x = x;
    s.y = y;
    s.v = v;
    s.d = std::hypot(x, y);
    s.theta = std::atan2(y, x);
    s.beta = beta;
    s.end_of_track = !(x > 0.0);
    return s;
  }
};

/// K vehicles at the configured positions, speeds ~ U[speed_min, speed_max], beta = xi / 2d.
template<typename Rng>
std::vector<VehicleTruth> init_scenario(const ScenarioConfig & cfg, Rng & rng)
{
  std::uniform_real_distribution<double> speed(cfg.speed_min, cfg.speed_max);
  std::vector<VehicleTruth> out;
  out.reserve(cfg.positions.size());
  for (const auto & p : cfg.positions) {
    const double v = speed(rng);
    const double d = std::hypot(p[0], p[1]);
    out.push_back(VehicleTruth::from_cartesian(p[0], p[1], v, cfg.xi / (2.0 * d)));
  }
  return out;
}

/**
 * One slot of exact Cartesian motion followed by additive polar-state noise.
 * beta follows the exact range ratio (so beta = xi / 2d when noise is off)
 * before its complex process noise is added.
 */
template<typename Rng>
VehicleTruth step_truth(const VehicleTruth & s, double slot, const ProcessNoise & noise, Rng & rng)
{
  if (!(slot > 0.0)) {
    throw std::invalid_argument("step_truth: slot duration must be > 0");
  }
  std::normal_distribution<double> n(0.0, 1.0);
  const double z_theta = n(rng);
  const double z_d = n(rng);
  const double z_v = n(rng);
  const cplx z_beta = complex_normal(rng, 1.0);

  const double x = s.x - s.v * slot;
  const double d_exact = std::hypot(x, s.y);
  const double theta = std::atan2(s.y, x) + noise.sigma_theta * z_theta;
  const double d = d_exact + noise.sigma_d * z_d;

  VehicleTruth out;
  out.d = d;
  out.theta = theta;
  out.x = d * std::cos(theta);
  out.y = d * std::sin(theta);
  out.v = s.v + noise.sigma_v * z_v;
  out.beta = s.beta * (s.d / d_exact) + noise.sigma_beta * z_beta;
  out.end_of_track = s.end_of_track || !(out.x > 0.0) || !(theta > 0.0 && theta < kPi);
  return out;
}

/// Means propagated through the linearized state-evolution model.
struct LinearizedPrediction
{
  double theta = 0.0;
  double d = 0.0;
  double v = 0.0;
  cplx beta{0.0, 0.0};
  double rho = 1.0;   ///< beta growth factor 1 + vT cos(theta) / d
};

inline LinearizedPrediction evolve_linearized(
  double theta, double d, double v, cplx beta, double slot)
{
  if (!(d > 0.0)) {
    throw std::invalid_argument("evolve_linearized: range estimate must be > 0");
  }
  const double step = v * slot;
  LinearizedPrediction p;
  p.theta = theta + step * std::sin(theta) / d;
  p.d = d - step * std::cos(theta);
  p.v = v;
  p.rho = 1.0 + step * std::cos(theta) / d;
  p.beta = beta * p.rho;
  return p;
}

/// One slot of radar observables for one vehicle.
struct Measurement
{
  double tau = 0.0;
  double gamma = 0.0;
  EchoSample echo;
  double beam_angle = 0.0;   ///< predicted angle used to steer the transmit beam
};

/// Standardized noise for one vehicle and slot, reused across tracking schemes.
struct MeasurementNoiseDraw
{
  double z_tau = 0.0;
  double z_gamma = 0.0;
  std::vector<cplx> z_y;   ///< unit-variance circular complex normals
};

template<typename Rng>
MeasurementNoiseDraw draw_measurement_noise(int n_rx, Rng & rng)
{
  std::normal_distribution<double> n(0.0, 1.0);
  MeasurementNoiseDraw draw;
  draw.z_tau = n(rng);
  draw.z_gamma = n(rng);
  draw.z_y.resize(static_cast<std::size_t>(n_rx));
  for (auto & z : draw.z_y) {
    z = complex_normal(rng, 1.0);
  }
  return draw;
}

/**
 * Builds the observables for beam @p beam_angle from a shared noise draw.
 * @p echo_noise_scale multiplies the echo noise variance.
 */
inline Measurement compose_measurement(
  const VehicleTruth & s, double beam_angle, const ArrayConfig & arr, const NoiseConfig & noise,
  double power, const MeasurementNoiseDraw & draw, double echo_noise_scale = 1.0)
{
  Measurement m;
  m.beam_angle = beam_angle;
  m.tau = delay_model(s.d, arr) + noise.sigma_tau * draw.z_tau;
  m.gamma = doppler_model(s.v, s.theta, arr) + noise.sigma_gamma * draw.z_gamma;
  m.echo = echo_model(s.beta, s.theta, beam_angle, power, arr);
  const double sd = std::sqrt(noise.echo_noise_var() * echo_noise_scale);
  for (std::size_t l = 0; l < m.echo.y.size(); ++l) {
    m.echo.y[l] += sd * draw.z_y.at(l);
  }
  return m;
}

template<typename Rng>
Measurement generate_measurements(
  const VehicleTruth & s, double theta_pred, const ScenarioConfig & cfg, Rng & rng)
{
  const auto draw = draw_measurement_noise(cfg.array.n_rx, rng);
  return compose_measurement(s, theta_pred, cfg.array, cfg.noise, cfg.tx_power, draw);
}

}  // namespace jrc
