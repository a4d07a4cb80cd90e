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

// Acceptance run: prints one PASS/FAIL line per criterion and exits nonzero
// if any criterion fails. Monte Carlo outputs land in ./acceptance_results.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "jrc/jrc.hpp"

namespace fs = std::filesystem;
using jrc::Scheme;

namespace
{

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int g_failures = 0;

void report(int id, bool pass, const std::string & name, const std::string & detail)
{
  std::printf("criterion %d %s: %s (%s)\n", id, pass ? "PASS" : "FAIL", name.c_str(),
    detail.c_str());
  std::fflush(stdout);
  if (!pass) {
    ++g_failures;
  }
}

std::string fmt(const char * f, double a)
{
  char buf[160];
  std::snprintf(buf, sizeof(buf), f, a);
  return buf;
}

double sig(double x, int n)
{
  const double p = std::pow(10.0, n - 1 - static_cast<int>(std::floor(std::log10(std::abs(x)))));
  return std::round(x * p) / p;
}

// 1. Both kinematic relations hold on noise-free trajectories.
void kinematic_exactness()
{
  const auto t0 = Clock::now();
  jrc::ScenarioConfig cfg;
  const jrc::ProcessNoise quiet{0.0, 0.0, 0.0, 0.0};
  std::mt19937_64 rng(11);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    for (auto s : jrc::init_scenario(cfg, rng)) {
      for (int n = 0; n < cfg.steps; ++n) {
        const auto next = jrc::step_truth(s, cfg.slot_s, quiet, rng);
        const double vt = s.v * cfg.slot_s;
        const double rhs_sin = vt * std::sin(s.theta);
        const double lhs_sin = next.d * std::sin(next.theta - s.theta);
        const double rhs_cos = s.d * s.d + vt * vt - 2.0 * s.d * vt * std::cos(s.theta);
        const double lhs_cos = next.d * next.d;
        worst = std::max(worst, std::abs(lhs_sin - rhs_sin) / std::abs(rhs_sin));
        worst = std::max(worst, std::abs(lhs_cos - rhs_cos) / std::abs(rhs_cos));
        s = next;
      }
    }
  }
  const double secs = seconds_since(t0);
  report(1, worst < 1e-9 && secs < 1.0, "kinematic exactness",
    fmt("max relative error %.3g", worst) + fmt(", %.3f s", secs));
}

struct SampleStats
{
  double mean = 0.0;
  double mean_se = 0.0;
  double var = 0.0;
  double var_se = 0.0;
};

SampleStats stats(const std::vector<double> & xs)
{
  const double n = static_cast<double>(xs.size());
  double m = 0.0;
  for (const double x : xs) {
    m += x;
  }
  m /= n;
  double m2 = 0.0;
  double m4 = 0.0;
  for (const double x : xs) {
    const double d = (x - m) * (x - m);
    m2 += d;
    m4 += d * d;
  }
  m4 /= n;
  const double var = m2 / (n - 1.0);
  return {m, std::sqrt(var / n), var, std::sqrt(std::max(0.0, m4 - var * var) / n)};
}

bool within(double est, double truth, double se, double & worst_z)
{
  const double gap = std::abs(est - truth);
  if (se == 0.0) {
    return gap < 1e-12;
  }
  worst_z = std::max(worst_z, gap / se);
  return gap <= 3.0 * se;
}

// 2. Closed-form moment transforms agree with Monte Carlo.
void moment_oracles()
{
  const auto t0 = Clock::now();
  const int n = 1000000;
  bool ok = true;
  double worst_z = 0.0;
  std::uint64_t seed = 200;
  std::vector<double> c(n);
  std::vector<double> re(n);
  std::vector<double> im(n);
  std::vector<double> dev(n);
  for (const double m : {0.0, 0.5, 1.0, jrc::kPi / 2.0}) {
    for (const double lambda : {1e-4, 1e-2, 0.1}) {
      std::mt19937_64 rng(++seed);
      std::normal_distribution<double> x(m, std::sqrt(lambda));
      for (int i = 0; i < n; ++i) {
        const double v = x(rng);
        c[i] = std::cos(v);
        re[i] = std::cos(jrc::kPi * v);
        im[i] = -std::sin(jrc::kPi * v);
      }
      const auto cm = jrc::cos_moments(jrc::Gaussian{m, lambda});
      const auto cs = stats(c);
      ok &= within(cs.mean, cm.mean, cs.mean_se, worst_z);
      ok &= within(cs.var, cm.var, cs.var_se, worst_z);

      const auto em = jrc::complex_exp_moments(jrc::Gaussian{m, lambda}, 1);
      const auto rs = stats(re);
      const auto is = stats(im);
      ok &= within(rs.mean, em.mean.real(), rs.mean_se, worst_z);
      ok &= within(is.mean, em.mean.imag(), is.mean_se, worst_z);
      for (int i = 0; i < n; ++i) {
        dev[i] = std::norm(jrc::cplx{re[i], im[i]} - jrc::cplx{rs.mean, is.mean});
      }
      const auto ds = stats(dev);
      ok &= within(ds.mean * n / (n - 1.0), em.var, ds.mean_se, worst_z);
    }
  }
  const double secs = seconds_since(t0);
  report(2, ok && secs < 30.0, "moment-transform oracles",
    fmt("worst deviation %.2f standard errors", worst_z) + fmt(", %.1f s", secs));
}

// 3. Hand-derived message values.
void message_spot_checks()
{
  const jrc::ArrayConfig arr;
  const jrc::NoiseConfig noise;
  const auto range = jrc::update_range({100.0, 1.04}, 6.8e-7, arr, noise);
  const auto speed = jrc::speed_message(2941.7, {0.98058, 1e-4}, arr, noise);
  const bool ok = sig(range.mean, 4) == sig(100.0002, 4) &&
    sig(speed.mean, 4) == sig(14.998, 4) && sig(speed.var, 4) == sig(103.98, 4);
  char buf[200];
  std::snprintf(buf, sizeof(buf), "range mean %.7f, speed mean %.5f, speed var %.5f",
    range.mean, speed.mean, speed.var);
  report(3, ok, "message-formula spot checks", buf);
}

// 4. All schemes stay on the truth without noise.
void noise_free_convergence()
{
  const auto t0 = Clock::now();
  jrc::ScenarioConfig cfg;
  cfg.noise.sigma_tau = 0.0;
  cfg.noise.sigma_gamma = 0.0;
  cfg.noise.sigma_y2 = 0.0;
  cfg.process = {0.0, 0.0, 0.0, 0.0};
  double e_theta = 0.0;
  double e_d = 0.0;
  double e_v = 0.0;
  for (int trial = 0; trial < 3; ++trial) {
    for (const auto & r : jrc::run_trial(cfg, trial).rows) {
      e_theta = std::max(e_theta, r.angle_error());
      e_d = std::max(e_d, std::abs(r.d_est - r.d_true));
      e_v = std::max(e_v, std::abs(r.v_est - r.v_true));
    }
  }
  char buf[200];
  std::snprintf(buf, sizeof(buf), "max errors theta %.3g rad, d %.3g m, v %.3g m/s, %.1f s",
    e_theta, e_d, e_v, seconds_since(t0));
  report(4, e_theta < 1e-3 && e_d < 1e-2 && e_v < 1e-2, "noise-free convergence", buf);
}

struct Quantiles
{
  double q20;
  double q50;
  double q80;
};

Quantiles final_quantiles(const jrc::BenchRun & run, Scheme s)
{
  const auto e = jrc::final_angle_errors_deg(run, s);
  return {jrc::empirical_quantile(e, 0.2), jrc::empirical_quantile(e, 0.5),
    jrc::empirical_quantile(e, 0.8)};
}

std::string describe(const char * name, const Quantiles & q)
{
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%s q20/q50/q80 %.3g/%.3g/%.3g deg", name, q.q20, q.q50, q.q80);
  return buf;
}

// 5. Final-step angle-error ordering at 64 antennas.
void angle_ordering(const jrc::BenchRun & run)
{
  const auto p = final_quantiles(run, Scheme::Proposed);
  const auto e = final_quantiles(run, Scheme::Ekf);
  const auto f = final_quantiles(run, Scheme::Feedback);
  const bool pe = p.q20 < e.q20 && p.q50 < e.q50 && p.q80 < e.q80;
  const bool ef = e.q20 < f.q20 && e.q50 < f.q50 && e.q80 < f.q80;
  std::string detail = describe("proposed", p) + "; " + describe("ekf", e) + "; " +
    describe("feedback", f);
  detail += std::string("; proposed<ekf ") + (pe ? "yes" : "no") + ", ekf<feedback " +
    (ef ? "yes" : "no");
  report(5, pe && ef, "angle-error ordering at 64 antennas", detail);
}

// 6. Antenna scaling.
void antenna_scaling(const jrc::BenchRun & r64, const jrc::BenchRun & r128)
{
  const auto f64 = final_quantiles(r64, Scheme::Feedback);
  const auto f128 = final_quantiles(r128, Scheme::Feedback);
  const auto p64 = final_quantiles(r64, Scheme::Proposed);
  const auto p128 = final_quantiles(r128, Scheme::Proposed);
  const bool feedback_no_gain = f128.q20 >= f64.q20 && f128.q50 > f64.q50 && f128.q80 >= f64.q80;
  const bool proposed_ok = p128.q50 <= p64.q50;
  report(6, feedback_no_gain && proposed_ok, "antenna scaling 64 to 128",
    describe("feedback64", f64) + "; " + describe("feedback128", f128) + "; " +
    fmt("proposed median 64: %.3g deg", p64.q50) + fmt(", 128: %.3g deg", p128.q50));
}

// 7. Rates.
void rate_ordering(const jrc::BenchRun & r64, const jrc::BenchRun & r128)
{
  bool ok = true;
  std::string detail;
  for (const auto * run : {&r64, &r128}) {
    const double mp = jrc::mean_of(jrc::rates(*run, Scheme::Proposed));
    const double mf = jrc::mean_of(jrc::rates(*run, Scheme::Feedback));
    const double me = jrc::mean_of(jrc::rates(*run, Scheme::Ekf));
    const auto sums = jrc::sum_rates(*run, Scheme::Proposed);
    const double floor = 0.95 * run->cfg.vehicles() * jrc::aligned_rate(run->cfg);
    double hit = 0.0;
    for (const double s : sums) {
      hit += s >= floor ? 1.0 : 0.0;
    }
    const double frac = hit / static_cast<double>(sums.size());
    ok &= mp > mf && frac >= 0.8;
    char buf[260];
    std::snprintf(buf, sizeof(buf),
      "N=%d mean rate proposed %.9f ekf %.9f feedback %.9f bps/Hz (aligned %.6f), "
      ">=95%% aligned in %.4f of pairs; ", run->antennas(), mp, me, mf,
      jrc::aligned_rate(run->cfg), frac);
    detail += buf;
  }
  detail.resize(detail.size() - 2);
  report(7, ok, "rate ordering", detail);
}

// 8. EKF Jacobians and covariance health.
void ekf_cross_validation()
{
  std::mt19937_64 rng(81);
  std::uniform_real_distribution<double> th(0.15, 1.4);
  std::uniform_real_distribution<double> d(30.0, 110.0);
  std::uniform_real_distribution<double> v(10.0, 20.0);
  std::uniform_real_distribution<double> b(-0.1, 0.1);
  jrc::ArrayConfig arr;
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    jrc::Vector5d x;
    x << th(rng), d(rng), v(rng), b(rng), b(rng);
    const double beam = x(0) + 0.005;
    const jrc::Matrix5d F = jrc::ekf_transition_jacobian(x, 0.02);
    const Eigen::MatrixXd H = jrc::ekf_measurement_jacobian(x, beam, arr, 1.0);
    for (int j = 0; j < 5; ++j) {
      const double h = 1e-6 * std::max(1.0, std::abs(x(j)));
      jrc::Vector5d xp = x;
      jrc::Vector5d xm = x;
      xp(j) += h;
      xm(j) -= h;
      const jrc::Vector5d fd_f =
        (jrc::ekf_transition(xp, 0.02) - jrc::ekf_transition(xm, 0.02)) / (2.0 * h);
      const Eigen::VectorXd fd_h = (jrc::ekf_measurement(xp, beam, arr, 1.0) -
        jrc::ekf_measurement(xm, beam, arr, 1.0)) / (2.0 * h);
      for (int i = 0; i < 5; ++i) {
        worst = std::max(worst,
            std::abs(F(i, j) - fd_f(i)) / std::max(1.0, std::abs(fd_f(i))));
      }
      const double scale = std::max(1e-12, fd_h.cwiseAbs().maxCoeff());
      worst = std::max(worst, (H.col(j) - fd_h).cwiseAbs().maxCoeff() / scale);
    }
  }

  jrc::ScenarioConfig cfg;
  std::normal_distribution<double> n01(0.0, 1.0);
  double min_eig = std::numeric_limits<double>::infinity();
  bool symmetric = true;
  auto s = jrc::init_scenario(cfg, rng)[0];
  auto ekf = jrc::EkfState::from_belief(jrc::initial_belief(s, cfg, rng));
  jrc::Diagnostics diag;
  for (int k = 0; k < 100; ++k) {
    s = jrc::step_truth(s, cfg.slot_s, cfg.process, rng);
    auto pred = jrc::ekf_predict(ekf, cfg.slot_s, cfg.process);
    const double beam = jrc::clamp_angle(pred.x(0) + 0.002 * n01(rng));
    const auto m = jrc::generate_measurements(s, beam, cfg, rng);
    ekf = jrc::ekf_update(pred, m, cfg.array, cfg.noise, cfg.tx_power, &diag);
    jrc::detail::sanitize_ekf(ekf, diag);
    symmetric &= ekf.P == ekf.P.transpose();
    const Eigen::SelfAdjointEigenSolver<jrc::Matrix5d> es(ekf.P);
    min_eig = std::min(min_eig, es.eigenvalues().minCoeff() / es.eigenvalues().maxCoeff());
  }
  char buf[200];
  std::snprintf(buf, sizeof(buf),
    "worst Jacobian relative gap %.3g; min eigenvalue ratio %.3g over 100 updates%s", worst,
    min_eig, symmetric ? "" : ", asymmetric covariance");
  report(8, worst < 1e-5 && min_eig >= -1e-12 && symmetric, "EKF cross-validation", buf);
}

std::string slurp(const fs::path & p)
{
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// 9. Same config and seed, same bytes.
void determinism(const std::vector<jrc::BenchRun> & runs, const fs::path & first_dir)
{
  const auto again_dir = fs::path("acceptance_results_repeat");
  std::vector<jrc::BenchRun> again;
  for (const auto & r : runs) {
    again.push_back(jrc::run_monte_carlo(r.cfg));
  }
  jrc::emit_outputs(again, again_dir);
  bool same = true;
  int files = 0;
  for (const auto & entry : fs::directory_iterator(first_dir)) {
    const auto name = entry.path().filename();
    same &= fs::exists(again_dir / name) && slurp(entry.path()) == slurp(again_dir / name);
    ++files;
  }
  report(9, same && files >= 5, "determinism",
    std::to_string(files) + " files compared byte for byte");
}

}  // namespace

int main()
{
  try {
    kinematic_exactness();
    moment_oracles();
    message_spot_checks();
    noise_free_convergence();

    jrc::ScenarioConfig cfg;
    cfg.trials = 1000;
    auto cfg128 = cfg;
    cfg128.array.n_tx = 128;
    cfg128.array.n_rx = 128;
    auto t0 = Clock::now();
    std::vector<jrc::BenchRun> runs;
    runs.push_back(jrc::run_monte_carlo(cfg));
    std::printf("64-antenna run: %d trials in %.1f s\n", cfg.trials, seconds_since(t0));
    t0 = Clock::now();
    runs.push_back(jrc::run_monte_carlo(cfg128));
    std::printf("128-antenna run: %d trials in %.1f s\n", cfg128.trials, seconds_since(t0));
    const fs::path out_dir("acceptance_results");
    jrc::emit_outputs(runs, out_dir);

    angle_ordering(runs[0]);
    antenna_scaling(runs[0], runs[1]);
    rate_ordering(runs[0], runs[1]);
    ekf_cross_validation();
    determinism(runs, out_dir);
  } catch (const std::exception & e) {
    std::printf("acceptance aborted: %s\n", e.what());
    return 2;
  }
  std::printf("%d of 9 criteria failed\n", g_failures);
  return g_failures == 0 ? 0 : 1;
}
