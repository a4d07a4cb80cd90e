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
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <random>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "json.hpp"

#include "jrc/baselines.hpp"
#include "jrc/fg_tracker.hpp"
#include "jrc/kinematics.hpp"
#include "jrc/scenario_config.hpp"
#include "jrc/signal_model.hpp"

/**
 * @file bench.hpp
 * Monte Carlo driver: per-trial simulation of all vehicles under the three
 * tracking schemes, aggregation into angle-error and rate samples, and the
 * CSV / JSON outputs.
 */

namespace jrc
{

enum class Scheme
{
  Proposed = 0,
  Ekf = 1,
  Feedback = 2,
};

inline constexpr std::array<Scheme, 3> kSchemes{Scheme::Proposed, Scheme::Ekf, Scheme::Feedback};

inline const char * scheme_name(Scheme s)
{
  switch (s) {
    case Scheme::Proposed: return "proposed";
    case Scheme::Ekf: return "ekf";
    case Scheme::Feedback: return "feedback";
  }
  return "unknown";
}

inline Scheme scheme_from_name(const std::string & name)
{
  for (const auto s : kSchemes) {
    if (name == scheme_name(s)) {
      return s;
    }
  }
  throw std::invalid_argument("unknown scheme '" + name + "'");
}

/// One (step, vehicle, scheme) entry. Angles in radians.
struct TrackRow
{
  int step = 0;
  int vehicle = 0;
  Scheme scheme = Scheme::Proposed;
  double theta_true = 0.0;
  double theta_est = 0.0;
  double d_true = 0.0;
  double d_est = 0.0;
  double v_true = 0.0;
  double v_est = 0.0;
  double rate = 0.0;   ///< bps/Hz of the beam used in this step

  double angle_error() const { return std::abs(theta_est - theta_true); }

  bool operator==(const TrackRow &) const = default;
};

/// All rows of one trial, ordered by step, then vehicle, then scheme.
struct TrialRecord
{
  int trial = 0;
  std::vector<TrackRow> rows;
  std::array<Diagnostics, 3> diag{};

  bool operator==(const TrialRecord & o) const { return trial == o.trial && rows == o.rows; }
};

/// Trial-specific generator derived from the master seed and trial index.
inline std::mt19937_64 trial_rng(std::uint64_t seed, int trial)
{
  std::seed_seq seq{
    static_cast<std::uint32_t>(seed & 0xffffffffu), static_cast<std::uint32_t>(seed >> 32),
    static_cast<std::uint32_t>(trial)};
  return std::mt19937_64(seq);
}

namespace detail
{

/// Keeps an EKF estimate inside the domain of the transition model.
inline void sanitize_ekf(EkfState & s, Diagnostics & diag)
{
  constexpr double kMinRange = 1.0;
  bool touched = false;
  if (!s.x.allFinite() || !s.P.allFinite()) {
    throw std::runtime_error("ekf: state became non-finite");
  }
  if (s.x(1) < kMinRange) {
    s.x(1) = kMinRange;
    touched = true;
  }
  const double th = clamp_angle(s.x(0));
  if (th != s.x(0)) {
    s.x(0) = th;
    touched = true;
  }
  if (touched) {
    ++diag.clamps;
  }
}

}  // namespace detail

/**
 * Simulates one trial. Every scheme sees the same truth and the same
 * standardized noise draws; each steers its own beam from its own prediction,
 * and the feedback scheme scales the echo noise by the configured inflation.
 */
inline TrialRecord run_trial(const ScenarioConfig & cfg, int trial_index)
{
  cfg.validate();
  auto rng = trial_rng(cfg.seed, trial_index);

  const TrackerConfig proposed_cfg = TrackerConfig::from_scenario(cfg);
  TrackerConfig feedback_cfg = TrackerConfig::from_scenario(
    feedback_config(cfg, cfg.feedback_inflation));
  feedback_cfg.use_radar = !cfg.feedback_drop_radar;

  const double alpha = pathloss_for_nominal_snr(cfg.nominal_snr_db, cfg.tx_power, cfg.array,
      cfg.noise);
  const auto & arr = cfg.array;
  const int k_count = cfg.vehicles();

  auto truth = init_scenario(cfg, rng);
  std::vector<BeliefSet> proposed;
  std::vector<BeliefSet> feedback;
  std::vector<EkfState> ekf;
  for (const auto & t : truth) {
    const auto b = initial_belief(t, cfg, rng);
    proposed.push_back(b);
    feedback.push_back(b);
    ekf.push_back(EkfState::from_belief(b));
  }

  TrialRecord rec;
  rec.trial = trial_index;
  rec.rows.reserve(static_cast<std::size_t>(cfg.steps * k_count * 3));
  auto & diag_p = rec.diag[0];
  auto & diag_e = rec.diag[1];
  auto & diag_f = rec.diag[2];

  for (int n = 1; n <= cfg.steps; ++n) {
    for (int k = 0; k < k_count; ++k) {
      const auto ku = static_cast<std::size_t>(k);
      const bool was_ended = truth[ku].end_of_track;
      truth[ku] = step_truth(truth[ku], cfg.slot_s, cfg.process, rng);
      if (truth[ku].end_of_track && !was_ended) {
        ++diag_p.end_of_track;
      }
      const auto draw = draw_measurement_noise(arr.n_rx, rng);
      const auto & s = truth[ku];

      auto rate_for = [&](double beam) {
          return rate_bps_hz(received_snr(s.theta, beam, beam, alpha, cfg.tx_power, arr,
            cfg.noise));
        };

      const double beam_p = proposed[ku].theta_pred_rsu;
      const auto meas_p = compose_measurement(s, beam_p, arr, cfg.noise, cfg.tx_power, draw);
      proposed[ku] = track_step(proposed[ku], meas_p, proposed_cfg, &diag_p);

      EkfState pred = ekf_predict(ekf[ku], cfg.slot_s, cfg.process);
      detail::sanitize_ekf(pred, diag_e);
      const double beam_e = pred.x(0);
      const auto meas_e = compose_measurement(s, beam_e, arr, cfg.noise, cfg.tx_power, draw);
      ekf[ku] = ekf_update(pred, meas_e, arr, cfg.noise, cfg.tx_power, &diag_e);
      detail::sanitize_ekf(ekf[ku], diag_e);

      const double beam_f = feedback[ku].theta_pred_rsu;
      const auto meas_f = compose_measurement(
        s, beam_f, arr, feedback_cfg.noise, cfg.tx_power, draw);
      feedback[ku] = track_step(feedback[ku], meas_f, feedback_cfg, &diag_f);

      const auto & bp = proposed[ku];
      const auto & be = ekf[ku];
      const auto & bf = feedback[ku];
      rec.rows.push_back({n, k, Scheme::Proposed, s.theta, bp.theta.mean, s.d, bp.d.mean, s.v,
          bp.v.mean, rate_for(beam_p)});
      rec.rows.push_back({n, k, Scheme::Ekf, s.theta, be.theta(), s.d, be.d(), s.v, be.v(),
          rate_for(beam_e)});
      rec.rows.push_back({n, k, Scheme::Feedback, s.theta, bf.theta.mean, s.d, bf.d.mean, s.v,
          bf.v.mean, rate_for(beam_f)});
    }
  }
  return rec;
}

/// Trials of one configuration, indexed by trial number.
struct BenchRun
{
  ScenarioConfig cfg;
  std::vector<TrialRecord> trials;

  int antennas() const { return cfg.array.n_tx; }

  Diagnostics diagnostics(Scheme s) const
  {
    Diagnostics d;
    for (const auto & t : trials) {
      d += t.diag[static_cast<std::size_t>(s)];
    }
    return d;
  }
};

/// Runs cfg.trials trials on @p threads workers (0 = hardware concurrency).
inline BenchRun run_monte_carlo(const ScenarioConfig & cfg, unsigned threads = 0)
{
  cfg.validate();
  BenchRun run;
  run.cfg = cfg;
  run.trials.resize(static_cast<std::size_t>(cfg.trials));
  if (threads == 0) {
    threads = std::max(1u, std::thread::hardware_concurrency());
  }
  threads = std::min<unsigned>(threads, static_cast<unsigned>(cfg.trials));

  std::atomic<int> next{0};
  std::mutex err_mutex;
  std::exception_ptr error;
  auto worker = [&]() {
      for (;;) {
        const int t = next.fetch_add(1);
        if (t >= cfg.trials) {
          return;
        }
        try {
          run.trials[static_cast<std::size_t>(t)] = run_trial(cfg, t);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mutex);
          if (!error) {
            error = std::current_exception();
          }
          next.store(cfg.trials);
          return;
        }
      }
    };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < threads; ++i) {
      pool.emplace_back(worker);
    }
    for (auto & th : pool) {
      th.join();
    }
  }
  if (error) {
    std::rethrow_exception(error);
  }
  return run;
}

/// Empirical CDF: one (value, P[X <= value]) pair per distinct sample value.
inline std::vector<std::pair<double, double>> compute_cdf(std::vector<double> samples)
{
  for (const double s : samples) {
    if (std::isnan(s)) {
      throw std::invalid_argument("compute_cdf: NaN sample");
    }
  }
  std::sort(samples.begin(), samples.end());
  std::vector<std::pair<double, double>> out;
  const double n = static_cast<double>(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (i + 1 < samples.size() && samples[i + 1] == samples[i]) {
      continue;
    }
    out.emplace_back(samples[i], static_cast<double>(i + 1) / n);
  }
  return out;
}

/// Smallest sample x with empirical CDF(x) >= p.
inline double empirical_quantile(std::vector<double> samples, double p)
{
  if (samples.empty()) {
    throw std::invalid_argument("empirical_quantile: no samples");
  }
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  auto idx = static_cast<std::size_t>(std::ceil(p * n - 1e-12));
  idx = std::clamp<std::size_t>(idx, 1, samples.size());
  return samples[idx - 1];
}

/// Final-step absolute angle errors in degrees for one scheme.
inline std::vector<double> final_angle_errors_deg(std::span<const TrackRow> rows, Scheme s)
{
  int last = 0;
  for (const auto & r : rows) {
    last = std::max(last, r.step);
  }
  std::vector<double> out;
  for (const auto & r : rows) {
    if (r.scheme == s && r.step == last) {
      out.push_back(rad_to_deg(r.angle_error()));
    }
  }
  return out;
}

inline std::vector<TrackRow> all_rows(const BenchRun & run)
{
  std::vector<TrackRow> out;
  for (const auto & t : run.trials) {
    out.insert(out.end(), t.rows.begin(), t.rows.end());
  }
  return out;
}

inline std::vector<double> final_angle_errors_deg(const BenchRun & run, Scheme s)
{
  std::vector<double> out;
  for (const auto & t : run.trials) {
    const auto e = final_angle_errors_deg(std::span<const TrackRow>(t.rows), s);
    out.insert(out.end(), e.begin(), e.end());
  }
  return out;
}

/// Per-vehicle rates of every (trial, step, vehicle) for one scheme.
inline std::vector<double> rates(const BenchRun & run, Scheme s)
{
  std::vector<double> out;
  for (const auto & t : run.trials) {
    for (const auto & r : t.rows) {
      if (r.scheme == s) {
        out.push_back(r.rate);
      }
    }
  }
  return out;
}

/// Sum over vehicles of the rate of every (trial, step) for one scheme.
inline std::vector<double> sum_rates(const BenchRun & run, Scheme s)
{
  std::vector<double> out;
  for (const auto & t : run.trials) {
    int step = -1;
    for (const auto & r : t.rows) {
      if (r.scheme != s) {
        continue;
      }
      if (r.step != step) {
        out.push_back(0.0);
        step = r.step;
      }
      out.back() += r.rate;
    }
  }
  return out;
}

inline double mean_of(std::span<const double> xs)
{
  if (xs.empty()) {
    return 0.0;
  }
  double acc = 0.0;
  for (const double x : xs) {
    acc += x;
  }
  return acc / static_cast<double>(xs.size());
}

inline double rms_of(std::span<const double> xs)
{
  if (xs.empty()) {
    return 0.0;
  }
  double acc = 0.0;
  for (const double x : xs) {
    acc += x * x;
  }
  return std::sqrt(acc / static_cast<double>(xs.size()));
}

/// Rate of perfectly aligned beams at the configured nominal SNR.
inline double aligned_rate(const ScenarioConfig & cfg)
{
  return rate_bps_hz(db_to_linear(cfg.nominal_snr_db));
}

inline std::string format_number(double x)
{
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

/// Creates @p dir if needed and checks that files can be written there.
inline void ensure_writable_dir(const std::filesystem::path & dir)
{
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw std::runtime_error("cannot create output directory '" + dir.string() + "': " +
      ec.message());
  }
  const auto probe = dir / ".jrc_write_probe";
  {
    std::ofstream out(probe);
    if (!out || !(out << "ok") || !out.flush()) {
      throw std::runtime_error("output directory '" + dir.string() + "' is not writable");
    }
  }
  std::filesystem::remove(probe, ec);
}

inline constexpr const char * kAngleCdfHeader = "scheme,antennas,error_deg,cdf";
inline constexpr const char * kRateCdfHeader = "scheme,antennas,rate_bps_hz,cdf";
inline constexpr const char * kSumRateCdfHeader = "scheme,antennas,sum_rate_bps_hz,cdf";
inline constexpr const char * kTracksHeader =
  "trial,step,vehicle,scheme,theta_true_deg,theta_est_deg,d_true,d_est,v_true,v_est,rate";

inline void write_cdf_rows(
  std::ostream & out, Scheme s, int antennas, const std::vector<double> & samples)
{
  for (const auto & [x, p] : compute_cdf(samples)) {
    out << scheme_name(s) << ',' << antennas << ',' << format_number(x) << ',' <<
      format_number(p) << '\n';
  }
}

inline void write_tracks(std::ostream & out, const BenchRun & run)
{
  out << kTracksHeader << '\n';
  for (const auto & t : run.trials) {
    for (const auto & r : t.rows) {
      out << t.trial << ',' << r.step << ',' << r.vehicle << ',' << scheme_name(r.scheme) << ',' <<
        format_number(rad_to_deg(r.theta_true)) << ',' <<
        format_number(rad_to_deg(r.theta_est)) << ',' << format_number(r.d_true) << ',' <<
        format_number(r.d_est) << ',' << format_number(r.v_true) << ',' <<
        format_number(r.v_est) << ',' << format_number(r.rate) << '\n';
    }
  }
}

/// A tracks.csv row as read back from disk (angles in degrees).
struct TrackCsvRow
{
  int trial = 0;
  TrackRow row;
};

inline std::vector<TrackCsvRow> read_tracks_csv(std::istream & in)
{
  std::string line;
  if (!std::getline(in, line) || line != kTracksHeader) {
    throw std::runtime_error("tracks.csv: unexpected header");
  }
  std::vector<TrackCsvRow> out;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) {
      continue;
    }
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      f.push_back(cell);
    }
    if (f.size() != 11) {
      throw std::runtime_error("tracks.csv: line " + std::to_string(line_no) +
        " has " + std::to_string(f.size()) + " fields, expected 11");
    }
    try {
      TrackCsvRow r;
      r.trial = std::stoi(f[0]);
      r.row.step = std::stoi(f[1]);
      r.row.vehicle = std::stoi(f[2]);
      r.row.scheme = scheme_from_name(f[3]);
      r.row.theta_true = deg_to_rad(std::stod(f[4]));
      r.row.theta_est = deg_to_rad(std::stod(f[5]));
      r.row.d_true = std::stod(f[6]);
      r.row.d_est = std::stod(f[7]);
      r.row.v_true = std::stod(f[8]);
      r.row.v_est = std::stod(f[9]);
      r.row.rate = std::stod(f[10]);
      out.push_back(r);
    } catch (const std::exception & e) {
      throw std::runtime_error("tracks.csv: line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

/// Final-step errors in degrees, computed from the stored degree columns.
inline std::vector<double> final_angle_errors_deg(std::span<const TrackCsvRow> rows, Scheme s)
{
  int last = 0;
  for (const auto & r : rows) {
    last = std::max(last, r.row.step);
  }
  std::vector<double> out;
  for (const auto & r : rows) {
    if (r.row.scheme == s && r.row.step == last) {
      out.push_back(std::abs(rad_to_deg(r.row.theta_est) - rad_to_deg(r.row.theta_true)));
    }
  }
  return out;
}

inline nlohmann::ordered_json config_json(const ScenarioConfig & cfg)
{
  nlohmann::ordered_json j;
  auto pos = nlohmann::ordered_json::array();
  for (const auto & p : cfg.positions) {
    pos.push_back({p[0], p[1]});
  }
  j["positions"] = pos;
  j["speed_min"] = cfg.speed_min;
  j["speed_max"] = cfg.speed_max;
  j["carrier_hz"] = cfg.array.carrier_hz;
  j["wave_speed"] = cfg.array.wave_speed;
  j["slot_s"] = cfg.slot_s;
  j["steps"] = cfg.steps;
  j["n_tx"] = cfg.array.n_tx;
  j["n_rx"] = cfg.array.n_rx;
  j["m_vehicle"] = cfg.array.m_vehicle;
  j["xi_re"] = cfg.xi.real();
  j["xi_im"] = cfg.xi.imag();
  j["sigma_tau"] = cfg.noise.sigma_tau;
  j["sigma_gamma"] = cfg.noise.sigma_gamma;
  j["sigma_y2"] = cfg.noise.sigma_y2;
  j["n0"] = cfg.noise.n0;
  j["mf_gain"] = cfg.noise.mf_gain;
  j["sigma_theta_deg"] = rad_to_deg(cfg.process.sigma_theta);
  j["sigma_d"] = cfg.process.sigma_d;
  j["sigma_v"] = cfg.process.sigma_v;
  j["sigma_beta"] = cfg.process.sigma_beta;
  j["feedback_inflation"] = cfg.feedback_inflation;
  j["feedback_drop_radar"] = cfg.feedback_drop_radar;
  j["trials"] = cfg.trials;
  j["seed"] = cfg.seed;
  j["nominal_snr_db"] = cfg.nominal_snr_db;
  j["loopy_iters"] = cfg.loopy_iters;
  j["prior_inflation"] = cfg.prior_inflation;
  j["tx_power"] = cfg.tx_power;
  return j;
}

inline nlohmann::ordered_json run_summary(const BenchRun & run)
{
  nlohmann::ordered_json j;
  j["antennas"] = run.antennas();
  j["aligned_rate_bps_hz"] = aligned_rate(run.cfg);
  const double rate_floor = 0.95 * aligned_rate(run.cfg);
  for (const auto s : kSchemes) {
    const auto err = final_angle_errors_deg(run, s);
    const auto r = rates(run, s);
    const auto sr = sum_rates(run, s);
    std::vector<double> all_err;
    for (const auto & t : run.trials) {
      for (const auto & row : t.rows) {
        if (row.scheme == s) {
          all_err.push_back(rad_to_deg(row.angle_error()));
        }
      }
    }
    const auto near = std::count_if(r.begin(), r.end(), [&](double x) {return x >= rate_floor;});
    const auto d = run.diagnostics(s);
    nlohmann::ordered_json e;
    e["final_angle_rmse_deg"] = rms_of(err);
    e["angle_rmse_deg"] = rms_of(all_err);
    e["final_angle_error_q20_deg"] = empirical_quantile(err, 0.2);
    e["final_angle_error_q50_deg"] = empirical_quantile(err, 0.5);
    e["final_angle_error_q80_deg"] = empirical_quantile(err, 0.8);
    e["mean_rate_bps_hz"] = mean_of(r);
    e["mean_sum_rate_bps_hz"] = mean_of(sr);
    e["fraction_rate_ge_95pct_aligned"] =
      r.empty() ? 0.0 : static_cast<double>(near) / static_cast<double>(r.size());
    e["diagnostics"] = {{"clamps", d.clamps}, {"discarded", d.discarded}, {"ridge", d.ridge},
      {"end_of_track", d.end_of_track}};
    j["schemes"][scheme_name(s)] = e;
  }
  return j;
}

/**
 * Writes angle_cdf.csv, rate_cdf.csv, sum_rate_cdf.csv, tracks.csv and
 * summary.json. With several runs (antenna counts) the CDF files hold all of
 * them; tracks.csv holds the first run and later runs go to tracks_<N>.csv.
 */
inline void emit_outputs(std::span<const BenchRun> runs, const std::filesystem::path & dir)
{
  if (runs.empty()) {
    throw std::invalid_argument("emit_outputs: no runs");
  }
  ensure_writable_dir(dir);
  auto open = [&](const std::string & name) {
      std::ofstream out(dir / name, std::ios::binary);
      if (!out) {
        throw std::runtime_error("cannot write '" + (dir / name).string() + "'");
      }
      return out;
    };

  {
    auto out = open("angle_cdf.csv");
    out << kAngleCdfHeader << '\n';
    for (const auto & run : runs) {
      for (const auto s : kSchemes) {
        write_cdf_rows(out, s, run.antennas(), final_angle_errors_deg(run, s));
      }
    }
  }
  {
    auto out = open("rate_cdf.csv");
    out << kRateCdfHeader << '\n';
    for (const auto & run : runs) {
      for (const auto s : kSchemes) {
        write_cdf_rows(out, s, run.antennas(), rates(run, s));
      }
    }
  }
  {
    auto out = open("sum_rate_cdf.csv");
    out << kSumRateCdfHeader << '\n';
    for (const auto & run : runs) {
      for (const auto s : kSchemes) {
        write_cdf_rows(out, s, run.antennas(), sum_rates(run, s));
      }
    }
  }
  for (std::size_t i = 0; i < runs.size(); ++i) {
    const std::string name = i == 0 ? "tracks.csv" :
      "tracks_" + std::to_string(runs[i].antennas()) + ".csv";
    auto out = open(name);
    write_tracks(out, runs[i]);
  }
  {
    nlohmann::ordered_json j;
    j["config"] = config_json(runs.front().cfg);
    auto arr = nlohmann::ordered_json::array();
    for (const auto & run : runs) {
      arr.push_back(run_summary(run));
    }
    j["runs"] = arr;
    auto out = open("summary.json");
    out << j.dump(2) << '\n';
  }
}

}  // namespace jrc
