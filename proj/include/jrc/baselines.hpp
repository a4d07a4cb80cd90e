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
#include <stdexcept>

#include <Eigen/Dense>

#include "jrc/fg_tracker.hpp"
#include "jrc/gaussian.hpp"
#include "jrc/kinematics.hpp"
#include "jrc/scenario_config.hpp"
#include "jrc/signal_model.hpp"

/**
 * @file baselines.hpp
 * Comparison trackers: an extended Kalman filter on the same transition and
 * measurement models, and the feedback-based scheme, which is the message
 * passing tracker run on an echo with inflated noise.
 */

namespace jrc
{

using Vector5d = Eigen::Matrix<double, 5, 1>;
using Matrix5d = Eigen::Matrix<double, 5, 5>;

/// EKF state (theta, d, v, Re beta, Im beta) and its covariance.
struct EkfState
{
  Vector5d x = Vector5d::Zero();
  Matrix5d P = Matrix5d::Zero();

  static EkfState from_belief(const BeliefSet & b)
  {
    EkfState s;
    s.x << b.theta.mean, b.d.mean, b.v.mean, b.beta.mean.real(), b.beta.mean.imag();
    s.P.diagonal() << b.theta.var, b.d.var, b.v.var, b.beta.var / 2.0, b.beta.var / 2.0;
    return s;
  }

  double theta() const { return x(0); }
  double d() const { return x(1); }
  double v() const { return x(2); }
  cplx beta() const { return {x(3), x(4)}; }
};

inline Vector5d ekf_transition(const Vector5d & x, double slot)
{
  const auto p = evolve_linearized(x(0), x(1), x(2), cplx{x(3), x(4)}, slot);
  Vector5d out;
  out << p.theta, p.d, p.v, p.beta.real(), p.beta.imag();
  return out;
}

/// Jacobian of ekf_transition.
inline Matrix5d ekf_transition_jacobian(const Vector5d & x, double slot)
{
  const double th = x(0);
  const double d = x(1);
  const double v = x(2);
  const double s = std::sin(th);
  const double c = std::cos(th);
  const double vt = v * slot;
  const double rho = 1.0 + vt * c / d;

  Matrix5d F = Matrix5d::Zero();
  F(0, 0) = 1.0 + vt * c / d;
  F(0, 1) = -vt * s / (d * d);
  F(0, 2) = slot * s / d;
  F(1, 0) = vt * s;
  F(1, 1) = 1.0;
  F(1, 2) = -slot * c;
  F(2, 2) = 1.0;
  const double drho_dth = -vt * s / d;
  const double drho_dd = -vt * c / (d * d);
  const double drho_dv = slot * c / d;
  for (int k = 0; k < 2; ++k) {
    const double b = x(3 + k);
    F(3 + k, 0) = b * drho_dth;
    F(3 + k, 1) = b * drho_dd;
    F(3 + k, 2) = b * drho_dv;
    F(3 + k, 3 + k) = rho;
  }
  return F;
}

inline EkfState ekf_predict(const EkfState & s, double slot, const ProcessNoise & noise)
{
  const Matrix5d F = ekf_transition_jacobian(s.x, slot);
  Matrix5d Q = Matrix5d::Zero();
  const double vb = noise.sigma_beta * noise.sigma_beta / 2.0;
  Q.diagonal() << noise.sigma_theta * noise.sigma_theta, noise.sigma_d * noise.sigma_d,
    noise.sigma_v * noise.sigma_v, vb, vb;
  EkfState out;
  out.x = ekf_transition(s.x, slot);
  out.P = F * s.P * F.transpose() + Q;
  out.P = (0.5 * (out.P + out.P.transpose())).eval();
  return out;
}

/// Stacked real measurement [tau; gamma; Re y; Im y] predicted from the state.
inline Eigen::VectorXd ekf_measurement(
  const Vector5d & x, double beam_angle, const ArrayConfig & arr, double power)
{
  const int nr = arr.n_rx;
  Eigen::VectorXd h(2 + 2 * nr);
  h(0) = delay_model(x(1), arr);
  h(1) = doppler_model(x(2), x(0), arr);
  const auto y = echo_model(cplx{x(3), x(4)}, x(0), beam_angle, power, arr).y;
  for (int l = 0; l < nr; ++l) {
    h(2 + l) = y[static_cast<std::size_t>(l)].real();
    h(2 + nr + l) = y[static_cast<std::size_t>(l)].imag();
  }
  return h;
}

/// Analytic Jacobian of ekf_measurement.
inline Eigen::MatrixXd ekf_measurement_jacobian(
  const Vector5d & x, double beam_angle, const ArrayConfig & arr, double power)
{
  const int nr = arr.n_rx;
  const int nt = arr.n_tx;
  const double th = x(0);
  const double s = std::sin(th);
  const double c = std::cos(th);
  const cplx beta{x(3), x(4)};
  const double dc = c - std::cos(beam_angle);
  const double coef = arr.echo_gain() * std::sqrt(power);

  // A = sum_i exp(j pi i dc), dA/dtheta = sum_i j pi i (-sin) exp(j pi i dc)
  cplx A{0.0, 0.0};
  cplx dA{0.0, 0.0};
  for (int i = 0; i < nt; ++i) {
    const cplx e = std::polar(1.0, kPi * i * dc);
    A += e;
    dA += cplx{0.0, -kPi * i * s} * e;
  }

  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(2 + 2 * nr, 5);
  H(0, 1) = 2.0 / arr.wave_speed;
  H(1, 0) = -x(2) * s * arr.doppler_scale();
  H(1, 2) = c * arr.doppler_scale();
  for (int l = 0; l < nr; ++l) {
    const cplx b = std::polar(1.0, -kPi * l * c);
    const cplx db = cplx{0.0, kPi * l * s} * b;
    const cplx d_theta = coef * beta * (db * A + b * dA);
    const cplx d_re = coef * b * A;
    const cplx d_im = cplx{0.0, 1.0} * d_re;
    H(2 + l, 0) = d_theta.real();
    H(2 + nr + l, 0) = d_theta.imag();
    H(2 + l, 3) = d_re.real();
    H(2 + nr + l, 3) = d_re.imag();
    H(2 + l, 4) = d_im.real();
    H(2 + nr + l, 4) = d_im.imag();
  }
  return H;
}

/**
 * EKF measurement update with a Joseph-form covariance.
 *
 * The measurement noise is diagonal, so the gain is formed in information
 * form, K = P (I + M P)^-1 H^T R^-1 with M = H^T R^-1 H, which only inverts a
 * 5x5 matrix. Infinite variances drop their rows; zero variances get a 1e-9
 * ridge and are counted in @p diag.
 */
inline EkfState ekf_update(
  const EkfState & s, const Measurement & meas, const ArrayConfig & arr,
  const NoiseConfig & noise, double power, Diagnostics * diag = nullptr, bool use_radar = true)
{
  constexpr double kRidge = 1e-9;
  const int nr = arr.n_rx;
  const int m = 2 + 2 * nr;

  Eigen::VectorXd r_var(m);
  r_var(0) = use_radar ? noise.sigma_tau * noise.sigma_tau : kInf;
  r_var(1) = use_radar ? noise.sigma_gamma * noise.sigma_gamma : kInf;
  r_var.tail(2 * nr).setConstant(noise.echo_noise_var() / 2.0);

  bool ridged = false;
  Eigen::VectorXd r_inv(m);
  for (int k = 0; k < m; ++k) {
    if (!(r_var(k) > 0.0)) {
      r_var(k) = kRidge;
      ridged = true;
    }
    r_inv(k) = std::isfinite(r_var(k)) ? 1.0 / r_var(k) : 0.0;
  }
  if (ridged && diag != nullptr) {
    ++diag->ridge;
  }

  Eigen::VectorXd z(m);
  z(0) = meas.tau;
  z(1) = meas.gamma;
  for (int l = 0; l < nr; ++l) {
    z(2 + l) = meas.echo.y[static_cast<std::size_t>(l)].real();
    z(2 + nr + l) = meas.echo.y[static_cast<std::size_t>(l)].imag();
  }

  const Eigen::MatrixXd H = ekf_measurement_jacobian(s.x, meas.beam_angle, arr, power);
  const Eigen::VectorXd innov = z - ekf_measurement(s.x, meas.beam_angle, arr, power);
  const Eigen::MatrixXd HtRinv = H.transpose() * r_inv.asDiagonal();
  const Matrix5d M = HtRinv * H;
  const Matrix5d IMP = Matrix5d::Identity() + M * s.P;
  const Eigen::MatrixXd K = s.P * IMP.partialPivLu().solve(HtRinv);

  EkfState out;
  out.x = s.x + K * innov;
  const Matrix5d IKH = Matrix5d::Identity() - K * H;
  Matrix5d KRK = Matrix5d::Zero();
  for (int k = 0; k < m; ++k) {
    if (std::isfinite(r_var(k))) {
      KRK.noalias() += r_var(k) * K.col(k) * K.col(k).transpose();
    }
  }
  out.P = IKH * s.P * IKH.transpose() + KRK;
  out.P = (0.5 * (out.P + out.P.transpose())).eval();
  return out;
}

/// Scenario for the feedback-based scheme: echo noise variance times @p inflation.
inline ScenarioConfig feedback_config(const ScenarioConfig & base, double inflation)
{
  if (!(inflation >= 1.0)) {
    throw std::invalid_argument("feedback_config: inflation must be >= 1");
  }
  ScenarioConfig out = base;
  out.noise.sigma_y2 *= inflation;
  return out;
}

}  // namespace jrc
