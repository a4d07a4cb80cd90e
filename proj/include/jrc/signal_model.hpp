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
#include <complex>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "jrc/gaussian.hpp"

/**
 * @file signal_model.hpp
 * Forward models of the road-side unit: ULA steering, radar delay/Doppler
 * observables, per-antenna echo samples after matched filtering, and the
 * downlink SNR / achievable rate.
 */

namespace jrc
{

struct ArrayConfig
{
  int n_tx = 64;            ///< RSU transmit antennas
  int n_rx = 64;            ///< RSU receive antennas
  int m_vehicle = 16;       ///< antennas per vehicle
  double carrier_hz = 30e9;
  double wave_speed = 3e8;

  void validate() const
  {
    if (n_tx < 1 || n_rx < 1 || m_vehicle < 1) {
      throw std::invalid_argument("ArrayConfig: antenna counts must be >= 1");
    }
    if (!(carrier_hz > 0.0) || !(wave_speed > 0.0)) {
      throw std::invalid_argument("ArrayConfig: carrier_hz and wave_speed must be > 0");
    }
  }

  /// Multi-antenna gain of the radar echo, sqrt(N_t N_r).
  double echo_gain() const { return std::sqrt(static_cast<double>(n_tx) * n_rx); }
  /// RSU-to-vehicle array gain, sqrt(N_t M).
  double link_gain() const { return std::sqrt(static_cast<double>(n_tx) * m_vehicle); }
  /// Doppler per unit radial speed, 2 f_c / c.
  double doppler_scale() const { return 2.0 * carrier_hz / wave_speed; }
};

/**
 * Measurement and link noise. sigma_y2 is the total complex variance of the
 * raw echo; the matched filter divides it by mf_gain. Zero standard
 * deviations are allowed and give noise-free observables.
 */
struct NoiseConfig
{
  double sigma_tau = 0.67e-6;    ///< s
  double sigma_gamma = 2e3;      ///< Hz
  double sigma_y2 = 1.0;
  double n0 = 1.0;
  double mf_gain = 64.0;

  void validate() const
  {
    if (!(sigma_tau >= 0.0) || !(sigma_gamma >= 0.0) || !(sigma_y2 >= 0.0)) {
      throw std::invalid_argument("NoiseConfig: noise levels must be >= 0");
    }
    if (!(n0 > 0.0) || !(mf_gain > 0.0)) {
      throw std::invalid_argument("NoiseConfig: n0 and mf_gain must be > 0");
    }
  }

  /// Per-antenna complex noise variance after matched filtering.
  double echo_noise_var() const { return sigma_y2 / mf_gain; }
};

struct EchoSample
{
  std::vector<cplx> y;
};

namespace detail
{
inline void require_finite_angle(double theta, const char * what)
{
  if (!std::isfinite(theta)) {
    throw std::invalid_argument(std::string(what) + ": angle must be finite");
  }
}
}  // namespace detail

/// ULA steering vector, element i (0-based) = exp(-j pi i cos(theta)).
inline std::vector<cplx> steering_vector(double theta, int n)
{
  detail::require_finite_angle(theta, "steering_vector");
  if (n < 1) {
    throw std::invalid_argument("steering_vector: n must be >= 1");
  }
  const double c = std::cos(theta);
  std::vector<cplx> a(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    a[static_cast<std::size_t>(i)] = std::polar(1.0, -kPi * i * c);
  }
  return a;
}

/// a^H(theta) a(theta_beam) for an n-element ULA.
inline cplx array_response(double theta, double theta_beam, int n)
{
  const double dc = std::cos(theta) - std::cos(theta_beam);
  cplx sum{0.0, 0.0};
  for (int i = 0; i < n; ++i) {
    sum += std::polar(1.0, kPi * i * dc);
  }
  return sum;
}

inline double delay_model(double d, const ArrayConfig & arr)
{
  return 2.0 * d / arr.wave_speed;
}

inline double doppler_model(double v, double theta, const ArrayConfig & arr)
{
  return v * std::cos(theta) * arr.doppler_scale();
}

/// Noise-free per-antenna echo: sqrt(NtNr) beta sqrt(e) b(theta) a^H(theta) a(theta_beam).
inline EchoSample echo_model(
  cplx beta, double theta, double theta_beam, double power, const ArrayConfig & arr)
{
  detail::require_finite_angle(theta, "echo_model");
  detail::require_finite_angle(theta_beam, "echo_model");
  const cplx common = arr.echo_gain() * beta * std::sqrt(power) *
    array_response(theta, theta_beam, arr.n_tx);
  EchoSample out;
  out.y = steering_vector(theta, arr.n_rx);
  for (auto & v : out.y) {
    v *= common;
  }
  return out;
}

/// Circularly-symmetric complex normal draw with total variance @p var.
template<typename Rng>
cplx complex_normal(Rng & rng, double var)
{
  std::normal_distribution<double> n(0.0, 1.0);
  const double s = std::sqrt(var / 2.0);
  const double re = n(rng);
  const double im = n(rng);
  return {s * re, s * im};
}

template<typename Rng>
double delay_measurement(double d, const ArrayConfig & arr, const NoiseConfig & noise, Rng & rng)
{
  if (!(d >= 0.0)) {
    throw std::invalid_argument("delay_measurement: range must be >= 0");
  }
  std::normal_distribution<double> n(0.0, 1.0);
  return delay_model(d, arr) + noise.sigma_tau * n(rng);
}

template<typename Rng>
double doppler_measurement(
  double v, double theta, const ArrayConfig & arr, const NoiseConfig & noise, Rng & rng)
{
  detail::require_finite_angle(theta, "doppler_measurement");
  std::normal_distribution<double> n(0.0, 1.0);
  return doppler_model(v, theta, arr) + noise.sigma_gamma * n(rng);
}

template<typename Rng>
EchoSample echo_observation(
  cplx beta, double theta, double theta_beam, double power, const ArrayConfig & arr,
  const NoiseConfig & noise, Rng & rng)
{
  EchoSample out = echo_model(beta, theta, theta_beam, power, arr);
  const double var = noise.echo_noise_var();
  for (auto & v : out.y) {
    v += complex_normal(rng, var);
  }
  return out;
}

/**
 * Downlink SNR with unit-norm beamformers: RSU transmit beam
 * sqrt(e) a(theta_pred_rsu)/sqrt(N_t), vehicle receive beam
 * u(theta_pred_vehicle)/sqrt(M). @p alpha is the pathloss coefficient.
 */
inline double received_snr(
  double theta, double theta_pred_rsu, double theta_pred_vehicle, cplx alpha, double power,
  const ArrayConfig & arr, const NoiseConfig & noise)
{
  const cplx tx = array_response(theta, theta_pred_rsu, arr.n_tx) /
    std::sqrt(static_cast<double>(arr.n_tx));
  const cplx rx = std::conj(array_response(theta, theta_pred_vehicle, arr.m_vehicle)) /
    std::sqrt(static_cast<double>(arr.m_vehicle));
  const cplx g = arr.link_gain() * alpha * rx * tx * std::sqrt(power);
  return std::norm(g) / noise.n0;
}

/// |alpha| such that perfectly aligned beams give @p nominal_snr_db.
inline double pathloss_for_nominal_snr(
  double nominal_snr_db, double power, const ArrayConfig & arr, const NoiseConfig & noise)
{
  const double snr = std::pow(10.0, nominal_snr_db / 10.0);
  const double aligned = std::norm(arr.link_gain() * std::sqrt(
      static_cast<double>(arr.n_tx) * arr.m_vehicle * power));
  return std::sqrt(snr * noise.n0 / aligned);
}

inline double rate_bps_hz(double snr)
{
  return std::log2(1.0 + snr);
}

/// Sum over vehicles of log2(1 + SNR_k).
inline double sum_rate(std::span<const double> snrs)
{
  return std::accumulate(
    snrs.begin(), snrs.end(), 0.0,
    [](double acc, double s) {
      if (!(s >= 0.0)) {
        throw std::invalid_argument("sum_rate: SNR must be >= 0");
      }
      return acc + rate_bps_hz(s);
    });
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double x) { return 10.0 * std::log10(x); }

}  // namespace jrc
