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

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

#include "jrc/gaussian.hpp"
#include "jrc/kinematics.hpp"
#include "jrc/scenario_config.hpp"
#include "jrc/signal_model.hpp"

/**
 * @file fg_tracker.hpp
 * Gaussian message-passing tracker for one vehicle.
 *
 * Per slot the tracker forms prediction messages from the previous beliefs,
 * fuses the delay message into the range belief, then runs a few loopy sweeps
 * over the reflection coefficient beta and the auxiliary phasors
 * eps[q] = exp(-j pi q cos(theta)) that carry the echo's angle information.
 * The Doppler observable closes the loop through mean-field messages on the
 * speed and on cos(theta).
 *
 * Echo indexing: with 0-based antennas, y[l] = sqrt(NtNr) beta sqrt(e)
 * sum_i a_i(beam) eps[l - i], so q runs over [1 - N_t, N_r - 1].
 */

namespace jrc
{

struct BeliefSet
{
  Gaussian theta;
  Gaussian d;
  Gaussian v;
  ComplexGaussian beta;
  double theta_pred_rsu = 0.0;   ///< predicted angle for the next slot's beam
};

enum class SweepOrder
{
  BetaFirst,
  EpsilonFirst,
};

struct TrackerConfig
{
  ArrayConfig array{};
  NoiseConfig noise{};
  ProcessNoise process{};
  double slot_s = 0.02;
  double tx_power = 1.0;
  int loopy_iters = 5;
  SweepOrder order = SweepOrder::BetaFirst;
  /// Expand the inverse-trig series about the current angle estimate instead of 0.
  bool anchored = true;
  /// When false the delay and Doppler observables are ignored.
  bool use_radar = true;
  /**
   * Fuse the phasor messages jointly with the unknown phase of the common
   * echo gain (a straight-line fit of phase against q). When false every
   * phasor message is mapped to theta and multiplied in on its own.
   */
  bool marginalize_gain_phase = true;

  static TrackerConfig from_scenario(const ScenarioConfig & cfg)
  {
    TrackerConfig t;
    t.array = cfg.array;
    t.noise = cfg.noise;
    t.process = cfg.process;
    t.slot_s = cfg.slot_s;
    t.tx_power = cfg.tx_power;
    t.loopy_iters = cfg.loopy_iters;
    return t;
  }

  void validate() const
  {
    if (loopy_iters < 1) {
      throw std::invalid_argument("TrackerConfig: loopy_iters must be >= 1");
    }
    array.validate();
    noise.validate();
    process.validate();
  }
};

/// Complex Gaussian beliefs over eps[q] for q in [q_min, q_max].
struct EpsilonField
{
  int q_min = 0;
  std::vector<ComplexGaussian> values;

  static EpsilonField for_array(const ArrayConfig & arr)
  {
    EpsilonField f;
    f.q_min = 1 - arr.n_tx;
    f.values.assign(static_cast<std::size_t>(arr.n_tx + arr.n_rx - 1),
      ComplexGaussian::uninformative());
    return f;
  }

  int q_max() const { return q_min + static_cast<int>(values.size()) - 1; }
  ComplexGaussian & at(int q) { return values.at(static_cast<std::size_t>(q - q_min)); }
  const ComplexGaussian & at(int q) const
  {
    return values.at(static_cast<std::size_t>(q - q_min));
  }
};

/// Prediction messages into slot n plus the beam angle they imply.
struct PredictedMessages
{
  Gaussian theta;
  Gaussian d;
  Gaussian v;
  ComplexGaussian beta;
  double theta_pred = 0.0;
  double rho = 1.0;
};

inline PredictedMessages predict(const BeliefSet & prev, double slot, const ProcessNoise & noise)
{
  if (!(prev.d.mean > 0.0)) {
    throw std::invalid_argument("predict: range estimate must be > 0");
  }
  const auto lin = evolve_linearized(
    prev.theta.mean, prev.d.mean, prev.v.mean, prev.beta.mean, slot);
  PredictedMessages p;
  p.theta = {lin.theta, noise.sigma_theta * noise.sigma_theta + prev.theta.var};
  p.d = {lin.d, noise.sigma_d * noise.sigma_d + prev.d.var};
  p.v = {prev.v.mean, noise.sigma_v * noise.sigma_v + prev.v.var};
  p.rho = lin.rho;
  p.beta = {lin.beta, noise.sigma_beta * noise.sigma_beta + lin.rho * lin.rho * prev.beta.var};
  p.theta_pred = lin.theta;
  return p;
}

/// Delay likelihood as a message on the range: N(c tau / 2, sigma_tau^2 c^2 / 4).
inline Gaussian range_message(double tau, const ArrayConfig & arr, const NoiseConfig & noise)
{
  const double c = arr.wave_speed;
  return {c * tau / 2.0, noise.sigma_tau * noise.sigma_tau * c * c / 4.0};
}

inline Gaussian update_range(
  const Gaussian & pred_d, double tau, const ArrayConfig & arr, const NoiseConfig & noise)
{
  return product(pred_d, range_message(tau, arr, noise));
}

/// Mean-field Doppler message on the speed given a message on cos(theta).
inline Gaussian speed_message(
  double gamma, const Gaussian & cos_theta, const ArrayConfig & arr, const NoiseConfig & noise)
{
  const double c1 = arr.doppler_scale();
  const double second = cos_theta.var + cos_theta.mean * cos_theta.mean;
  if (!(second > 0.0)) {
    return Gaussian::uninformative();
  }
  return {gamma * cos_theta.mean / (c1 * second),
    noise.sigma_gamma * noise.sigma_gamma / (c1 * c1 * second)};
}

inline Gaussian update_speed(
  const Gaussian & pred_v, double gamma, const Gaussian & cos_theta, const ArrayConfig & arr,
  const NoiseConfig & noise)
{
  return product(pred_v, speed_message(gamma, cos_theta, arr, noise));
}

/// Mean-field Doppler message on cos(theta) given the speed belief.
inline Gaussian doppler_cos_message(
  double gamma, const Gaussian & v, const ArrayConfig & arr, const NoiseConfig & noise)
{
  const double c1 = arr.doppler_scale();
  const double second = v.var + v.mean * v.mean;
  if (!(second > 0.0)) {
    return Gaussian::uninformative();
  }
  return {gamma * v.mean / (c1 * second),
    noise.sigma_gamma * noise.sigma_gamma / (c1 * c1 * second)};
}

/**
 * Maps a message on cos(theta) to a message on theta through the cubic
 * arccos series, expanded about @p anchor (a cosine) when given. The squared
 * series truncation at the mean is added to the variance.
 */
inline Gaussian cos_to_angle_message(
  const Gaussian & cos_msg, std::optional<double> anchor, Diagnostics * diag = nullptr)
{
  if (!cos_msg.informative()) {
    return Gaussian::uninformative();
  }
  const double center = anchor.value_or(0.0);
  Gaussian out = arccos_taylor(cos_msg, center, diag);
  const double trunc = inverse_trig_truncation(cos_msg.mean, center);
  out.var += trunc * trunc;
  return out;
}

inline Gaussian doppler_angle_message(
  double gamma, const Gaussian & v, const ArrayConfig & arr, const NoiseConfig & noise,
  std::optional<double> anchor = std::nullopt, Diagnostics * diag = nullptr)
{
  return cos_to_angle_message(doppler_cos_message(gamma, v, arr, noise), anchor, diag);
}

/**
 * Mean-field echo messages on beta, one per receive antenna, fused with the
 * prediction by precision addition. Antenna l sees beta through
 * X_l = sqrt(NtNr e) sum_i a_i(beam) eps[l - i]; its message has mean
 * y_l conj(E X_l) / E|X_l|^2 and variance (sigma_y^2 / G) / E|X_l|^2.
 */
inline ComplexGaussian update_beta(
  const EchoSample & echo, const EpsilonField & eps, const ComplexGaussian & pred_beta,
  double beam_angle, const ArrayConfig & arr, const NoiseConfig & noise, double power)
{
  const auto a = steering_vector(beam_angle, arr.n_tx);
  const double coef2 = arr.echo_gain() * arr.echo_gain() * power;
  const double coef = std::sqrt(coef2);
  const double noise_var = noise.echo_noise_var();

  std::vector<ComplexGaussian> msgs;
  msgs.reserve(echo.y.size() + 1);
  msgs.push_back(pred_beta);
  for (int l = 0; l < arr.n_rx; ++l) {
    cplx mean_sum{0.0, 0.0};
    double var_sum = 0.0;
    for (int i = 0; i < arr.n_tx; ++i) {
      const auto & e = eps.at(l - i);
      mean_sum += a[static_cast<std::size_t>(i)] * e.mean;
      var_sum += e.var;
    }
    const cplx ex = coef * mean_sum;
    const double ex2 = std::norm(ex) + coef2 * var_sum;
    if (!(ex2 > 0.0) || !std::isfinite(ex2)) {
      continue;
    }
    msgs.push_back({echo.y[static_cast<std::size_t>(l)] * std::conj(ex) / ex2, noise_var / ex2});
  }
  return fuse(std::span<const ComplexGaussian>(msgs));
}

struct EpsilonUpdate
{
  EpsilonField observation;   ///< echo-side messages (uninformative where absent)
  EpsilonField belief;        ///< observation x phasor-prior messages
};

/**
 * Echo-side and prior-side messages on the auxiliary phasors.
 *
 * The echo factorizes as y[l] = h eps[l] with the common gain
 * h = sqrt(NtNr e) beta A, A = sum_i a_i(beam) eps[-i], so antenna l yields
 * a mean-field message on eps[l]: mean y_l conj(E h) / E|h|^2, variance
 * (sigma_y^2 / G) / E|h|^2, with E|h|^2 taken over beta and the eps[-i]
 * beliefs in @p eps_in. The prior-side message on every eps[q] is
 * complex_exp_moments of the cos(theta) message.
 */
inline EpsilonUpdate update_epsilon(
  const EchoSample & echo, const ComplexGaussian & beta, const EpsilonField & eps_in,
  const Gaussian & cos_theta, double beam_angle, const ArrayConfig & arr,
  const NoiseConfig & noise, double power)
{
  const auto a = steering_vector(beam_angle, arr.n_tx);
  cplx a_mean{0.0, 0.0};
  double a_var = 0.0;
  for (int i = 0; i < arr.n_tx; ++i) {
    const auto & e = eps_in.at(-i);
    a_mean += a[static_cast<std::size_t>(i)] * e.mean;
    a_var += e.var;
  }
  const double coef = arr.echo_gain() * std::sqrt(power);
  const cplx h_mean = coef * beta.mean * a_mean;
  const double h2 = coef * coef * beta.second_moment() * (std::norm(a_mean) + a_var);
  const double noise_var = noise.echo_noise_var();

  EpsilonUpdate out;
  out.observation = EpsilonField::for_array(arr);
  out.belief = EpsilonField::for_array(arr);
  const bool usable = h2 > 0.0 && std::isfinite(h2);
  for (int q = out.belief.q_min; q <= out.belief.q_max(); ++q) {
    const auto prior = complex_exp_moments(cos_theta, q);
    if (usable && q >= 0) {
      const cplx y = echo.y[static_cast<std::size_t>(q)];
      const ComplexGaussian obs{y * std::conj(h_mean) / h2, noise_var / h2};
      out.observation.at(q) = obs;
      out.belief.at(q) = product(prior, obs);
    } else {
      out.belief.at(q) = prior;
    }
  }
  return out;
}

/// Prior-side phasor beliefs implied by a message on theta.
inline EpsilonField epsilon_prior(const Gaussian & theta, const ArrayConfig & arr)
{
  EpsilonField f = EpsilonField::for_array(arr);
  const Gaussian c = cos_moments(theta);
  for (int q = f.q_min; q <= f.q_max(); ++q) {
    f.at(q) = complex_exp_moments(c, q);
  }
  return f;
}

/// Angle messages recovered from the echo-side phasor messages.
inline std::vector<Gaussian> phasor_angle_messages(
  const EpsilonField & observation, std::optional<double> anchor, Diagnostics * diag = nullptr)
{
  std::vector<Gaussian> out;
  for (int q = observation.q_min; q <= observation.q_max(); ++q) {
    const auto & m = observation.at(q);
    if (q == 0 || !m.informative() || !(std::abs(m.mean) > 0.0)) {
      continue;
    }
    const Gaussian cos_msg = exp_to_angle_message(m, q, anchor, diag);
    const Gaussian theta_msg = cos_to_angle_message(cos_msg, anchor, diag);
    if (theta_msg.informative()) {
      out.push_back(theta_msg);
    }
  }
  return out;
}

/**
 * One message on cos(theta) from all echo-side phasor messages.
 *
 * Every observation message on eps[q] is a noisy exp(-j(pi q x + phi)),
 * x = cos(theta), where phi is the phase error of the common gain h. Each
 * q != 0 is turned into a phase pi q x + phi by exp_to_angle_message; q = 0
 * contributes phi alone. A weighted straight-line fit over q then gives x with
 * phi integrated out, variance 1 / (pi^2 sum_q w_q (q - q_bar)^2).
 */
inline Gaussian phasor_cos_message(
  const EpsilonField & observation, std::optional<double> anchor, Diagnostics * diag = nullptr)
{
  struct Point
  {
    double q;
    double phase;
    double var;
  };
  std::vector<Point> pts;
  for (int q = observation.q_min; q <= observation.q_max(); ++q) {
    const auto & m = observation.at(q);
    if (!m.informative() || !(std::abs(m.mean) > 0.0)) {
      continue;
    }
    if (q == 0) {
      pts.push_back({0.0, -std::arg(m.mean), m.var / (2.0 * std::norm(m.mean))});
      continue;
    }
    const Gaussian x = exp_to_angle_message(m, q, anchor, diag);
    if (!x.informative()) {
      continue;
    }
    const double w = kPi * q;
    pts.push_back({static_cast<double>(q), w * x.mean, w * w * x.var});
  }

  const bool exact = std::any_of(pts.begin(), pts.end(), [](const Point & p) {return p.var == 0.0;});
  double sw = 0.0;
  double sq = 0.0;
  double sp = 0.0;
  for (const auto & p : pts) {
    const double w = exact ? (p.var == 0.0 ? 1.0 : 0.0) : 1.0 / p.var;
    sw += w;
    sq += w * p.q;
    sp += w * p.phase;
  }
  if (!(sw > 0.0)) {
    return Gaussian::uninformative();
  }
  const double q_bar = sq / sw;
  const double p_bar = sp / sw;
  double sqq = 0.0;
  double sqp = 0.0;
  for (const auto & p : pts) {
    const double w = exact ? (p.var == 0.0 ? 1.0 : 0.0) : 1.0 / p.var;
    sqq += w * (p.q - q_bar) * (p.q - q_bar);
    sqp += w * (p.q - q_bar) * (p.phase - p_bar);
  }
  if (!(sqq > 0.0)) {
    return Gaussian::uninformative();
  }
  return {sqp / (kPi * sqq), exact ? 0.0 : 1.0 / (kPi * kPi * sqq)};
}

/// Belief of theta: prediction x Doppler message x phasor messages.
inline Gaussian angle_belief(
  const Gaussian & pred_theta, const Gaussian & doppler_msg,
  std::span<const Gaussian> phasor_msgs)
{
  std::vector<Gaussian> all;
  all.reserve(phasor_msgs.size() + 2);
  all.push_back(pred_theta);
  all.push_back(doppler_msg);
  all.insert(all.end(), phasor_msgs.begin(), phasor_msgs.end());
  return fuse(std::span<const Gaussian>(all));
}

inline double clamp_angle(double theta)
{
  constexpr double kMargin = 1e-9;
  return std::clamp(theta, kMargin, kPi - kMargin);
}

/// One slot of the message schedule. @p meas.beam_angle must be the beam the echo was taken with.
inline BeliefSet track_step(
  const BeliefSet & prev, const Measurement & meas, const TrackerConfig & cfg,
  Diagnostics * diag = nullptr)
{
  const auto pred = predict(prev, cfg.slot_s, cfg.process);
  const auto & arr = cfg.array;
  const auto & noise = cfg.noise;

  BeliefSet out;
  out.d = cfg.use_radar ? update_range(pred.d, meas.tau, arr, noise) : pred.d;

  auto anchor_of = [&](const Gaussian & theta) -> std::optional<double> {
      if (!cfg.anchored) {
        return std::nullopt;
      }
      return std::cos(theta.mean);
    };

  Gaussian theta = pred.theta;
  ComplexGaussian beta = pred.beta;
  EpsilonField eps = epsilon_prior(pred.theta, arr);
  EpsilonField observation = EpsilonField::for_array(arr);
  std::vector<Gaussian> phasor_msgs;

  for (int it = 0; it < cfg.loopy_iters; ++it) {
    const auto anchor = anchor_of(theta);
    const Gaussian cos_theta = cos_moments(theta);
    if (cfg.order == SweepOrder::BetaFirst) {
      beta = update_beta(meas.echo, eps, pred.beta, meas.beam_angle, arr, noise, cfg.tx_power);
    }
    auto upd = update_epsilon(
      meas.echo, beta, eps, cos_theta, meas.beam_angle, arr, noise, cfg.tx_power);
    eps = std::move(upd.belief);
    observation = std::move(upd.observation);
    if (cfg.order == SweepOrder::EpsilonFirst) {
      beta = update_beta(meas.echo, eps, pred.beta, meas.beam_angle, arr, noise, cfg.tx_power);
    }
    if (cfg.marginalize_gain_phase) {
      phasor_msgs.assign(1, cos_to_angle_message(phasor_cos_message(observation, anchor, diag),
        anchor, diag));
    } else {
      phasor_msgs = phasor_angle_messages(observation, anchor, diag);
    }
    theta = angle_belief(pred.theta, Gaussian::uninformative(), phasor_msgs);
    theta.mean = clamp_angle(theta.mean);
  }

  Gaussian doppler_msg = Gaussian::uninformative();
  if (cfg.use_radar) {
    out.v = update_speed(pred.v, meas.gamma, cos_moments(theta), arr, noise);
    doppler_msg = doppler_angle_message(meas.gamma, out.v, arr, noise, anchor_of(theta), diag);
  } else {
    out.v = pred.v;
  }
  out.theta = angle_belief(pred.theta, doppler_msg, phasor_msgs);
  out.theta.mean = clamp_angle(out.theta.mean);
  out.beta = beta;
  out.theta_pred_rsu = clamp_angle(
    evolve_linearized(out.theta.mean, out.d.mean, out.v.mean, out.beta.mean, cfg.slot_s).theta);
  return out;
}

/**
 * Initial beliefs: the true state perturbed by one draw of the process noise,
 * with variance prior_inflation times the process-noise variance.
 */
template<typename Rng>
BeliefSet initial_belief(const VehicleTruth & truth, const ScenarioConfig & cfg, Rng & rng)
{
  std::normal_distribution<double> n(0.0, 1.0);
  const auto & pn = cfg.process;
  const double k = cfg.prior_inflation;
  BeliefSet b;
  b.theta = {truth.theta + pn.sigma_theta * n(rng), k * pn.sigma_theta * pn.sigma_theta};
  b.d = {truth.d + pn.sigma_d * n(rng), k * pn.sigma_d * pn.sigma_d};
  b.v = {truth.v + pn.sigma_v * n(rng), k * pn.sigma_v * pn.sigma_v};
  b.beta = {truth.beta + pn.sigma_beta * complex_normal(rng, 1.0),
    k * pn.sigma_beta * pn.sigma_beta};
  b.theta_pred_rsu = clamp_angle(
    evolve_linearized(b.theta.mean, b.d.mean, b.v.mean, b.beta.mean, cfg.slot_s).theta);
  return b;
}

}  // namespace jrc
