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
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

/**
 * @file gaussian.hpp
 * Parametric Gaussian messages and the nonlinear moment transforms used by
 * the message-passing tracker.
 *
 * Variance conventions: a variance of 0 is a point mass, +inf is a message
 * that carries no information. Complex Gaussians are circularly symmetric and
 * carry their total variance (half on each real component).
 */

namespace jrc
{

using cplx = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Inverse-trig inputs are clamped into (-1 + kClampMargin, 1 - kClampMargin).
inline constexpr double kClampMargin = 1e-9;

/// Counters for numerical events that are tolerated but worth reporting.
struct Diagnostics
{
  std::uint64_t clamps = 0;         ///< inverse-trig argument clamped into (-1, 1)
  std::uint64_t discarded = 0;      ///< angle messages dropped as off-branch
  std::uint64_t ridge = 0;          ///< EKF innovation covariance regularized
  std::uint64_t end_of_track = 0;   ///< vehicles that crossed the array boundary

  Diagnostics & operator+=(const Diagnostics & o)
  {
    clamps += o.clamps;
    discarded += o.discarded;
    ridge += o.ridge;
    end_of_track += o.end_of_track;
    return *this;
  }
};

struct Gaussian
{
  double mean = 0.0;
  double var = 0.0;

  static Gaussian uninformative() { return {0.0, kInf}; }
  bool informative() const { return std::isfinite(var); }
  double precision() const { return var == 0.0 ? kInf : 1.0 / var; }
};

struct ComplexGaussian
{
  cplx mean{0.0, 0.0};
  double var = 0.0;

  static ComplexGaussian uninformative() { return {{0.0, 0.0}, kInf}; }
  bool informative() const { return std::isfinite(var); }
  /// E[|x|^2]
  double second_moment() const { return std::norm(mean) + var; }
};

namespace detail
{
// Precision-weighted fusion shared by the real and complex variants. Point
// masses dominate; several point masses are averaged.
template<typename T, typename Msg>
Msg fuse_impl(std::span<const Msg> msgs)
{
  std::size_t n_point = 0;
  T point_sum{};
  double precision = 0.0;
  T weighted{};
  for (const auto & m : msgs) {
    if (!(m.var >= 0.0)) {
      throw std::invalid_argument("fuse: negative or NaN variance");
    }
    if (m.var == 0.0) {
      ++n_point;
      point_sum += m.mean;
    } else if (std::isfinite(m.var)) {
      precision += 1.0 / m.var;
      weighted += m.mean / m.var;
    }
  }
  if (n_point > 0) {
    return Msg{point_sum / static_cast<double>(n_point), 0.0};
  }
  if (precision == 0.0) {
    throw std::invalid_argument("fuse: no informative message");
  }
  return Msg{weighted / precision, 1.0 / precision};
}
}  // namespace detail

/// Product of Gaussian densities (normalized). Throws if none is informative.
inline Gaussian fuse(std::span<const Gaussian> msgs)
{
  return detail::fuse_impl<double, Gaussian>(msgs);
}

inline ComplexGaussian fuse(std::span<const ComplexGaussian> msgs)
{
  return detail::fuse_impl<cplx, ComplexGaussian>(msgs);
}

inline Gaussian product(const Gaussian & a, const Gaussian & b)
{
  const Gaussian msgs[] = {a, b};
  return fuse(std::span<const Gaussian>(msgs));
}

inline ComplexGaussian product(const ComplexGaussian & a, const ComplexGaussian & b)
{
  const ComplexGaussian msgs[] = {a, b};
  return fuse(std::span<const ComplexGaussian>(msgs));
}

/// Raw moments E[X^k], k = 0..order, of X ~ N(mean, var).
inline std::vector<double> gaussian_raw_moments(const Gaussian & g, std::size_t order)
{
  std::vector<double> m(order + 1, 0.0);
  m[0] = 1.0;
  if (order >= 1) {
    m[1] = g.mean;
  }
  for (std::size_t k = 2; k <= order; ++k) {
    m[k] = g.mean * m[k - 1] + static_cast<double>(k - 1) * g.var * m[k - 2];
  }
  return m;
}

/**
 * Exact E[p(X)] and E[p(X)^2] for a polynomial p with ascending coefficients
 * and X ~ N(mean, var).
 */
inline std::pair<double, double> poly_gauss_moments(
  std::span<const double> coeffs, const Gaussian & g)
{
  if (coeffs.empty()) {
    return {0.0, 0.0};
  }
  const std::size_t deg = coeffs.size() - 1;
  std::vector<double> sq(2 * deg + 1, 0.0);
  for (std::size_t i = 0; i <= deg; ++i) {
    for (std::size_t j = 0; j <= deg; ++j) {
      sq[i + j] += coeffs[i] * coeffs[j];
    }
  }
  const auto raw = gaussian_raw_moments(g, 2 * deg);
  double first = 0.0;
  for (std::size_t k = 0; k <= deg; ++k) {
    first += coeffs[k] * raw[k];
  }
  double second = 0.0;
  for (std::size_t k = 0; k <= 2 * deg; ++k) {
    second += sq[k] * raw[k];
  }
  return {first, second};
}

/// Distribution of cos(X) for X ~ N(m, lambda), from the characteristic function.
inline Gaussian cos_moments(const Gaussian & g)
{
  const double mean = std::cos(g.mean) * std::exp(-g.var / 2.0);
  const double second = 0.5 * (1.0 + std::cos(2.0 * g.mean) * std::exp(-2.0 * g.var));
  return {mean, std::max(0.0, second - mean * mean)};
}

namespace detail
{
inline double clamp_unit(double x, Diagnostics * diag)
{
  const double lim = 1.0 - kClampMargin;
  if (x > lim || x < -lim) {
    if (diag != nullptr && std::abs(x) >= 1.0) {
      ++diag->clamps;
    }
    return std::clamp(x, -lim, lim);
  }
  return x;
}

// Third-order Taylor coefficients of asin about x0, in powers of (x - x0).
inline std::array<double, 4> asin_series(double x0)
{
  const double s = 1.0 - x0 * x0;
  const double r = std::sqrt(s);
  return {
    std::asin(x0),
    1.0 / r,
    x0 / (s * r) / 2.0,
    (1.0 + 2.0 * x0 * x0) / (s * s * r) / 6.0,
  };
}

inline double eval_series(const std::array<double, 4> & c, double u)
{
  return c[0] + u * (c[1] + u * (c[2] + u * c[3]));
}

// Moments of the cubic series evaluated at X - x0.
inline Gaussian series_moments(const std::array<double, 4> & c, const Gaussian & g, double x0)
{
  const auto [mean, second] = poly_gauss_moments(c, Gaussian{g.mean - x0, g.var});
  return {mean, std::max(0.0, second - mean * mean)};
}
}  // namespace detail

/**
 * Gaussian message on arcsin(X) from the cubic Taylor polynomial of arcsin
 * about @p center. With center 0 this is x + x^3/6, so the mean becomes
 * m + (m^3 + 3 m lambda) / 6. Means outside (-1, 1) are clamped and counted.
 */
inline Gaussian arcsin_taylor(const Gaussian & g, double center = 0.0, Diagnostics * diag = nullptr)
{
  const double m = detail::clamp_unit(g.mean, diag);
  const double x0 = detail::clamp_unit(center, nullptr);
  return detail::series_moments(detail::asin_series(x0), Gaussian{m, g.var}, x0);
}

/// arccos counterpart of arcsin_taylor; center 0 gives pi/2 - x - x^3/6.
inline Gaussian arccos_taylor(const Gaussian & g, double center = 0.0, Diagnostics * diag = nullptr)
{
  const auto s = arcsin_taylor(g, center, diag);
  return {kPi / 2.0 - s.mean, s.var};
}

/// |arcsin(m) - p(m)| for the cubic series p about @p center. Same for arccos.
inline double inverse_trig_truncation(double mean, double center = 0.0)
{
  const double m = detail::clamp_unit(mean, nullptr);
  const double x0 = detail::clamp_unit(center, nullptr);
  return std::abs(std::asin(m) - detail::eval_series(detail::asin_series(x0), m - x0));
}

/**
 * Moments of eps = exp(-j pi q X) for X ~ N(m, lambda):
 * mean exp(-(pi q)^2 lambda / 2) exp(-j pi q m), variance 1 - exp(-(pi q)^2 lambda).
 */
inline ComplexGaussian complex_exp_moments(const Gaussian & g, int q)
{
  const double w = kPi * static_cast<double>(q);
  const double damp = std::exp(-w * w * g.var / 2.0);
  return {std::polar(damp, -w * g.mean), 1.0 - damp * damp};
}

/**
 * Maps a message on eps = exp(-j pi q x) back to a Gaussian on x.
 *
 * The unit phasor of the message mean is split into its real part (through
 * arccos_taylor) and negated imaginary part (through arcsin_taylor); both
 * estimate the phase pi q x and are fused before rescaling by 1/(pi q). Each
 * route's variance includes the squared series truncation at its mean.
 *
 * Without @p anchor the phase must lie in [0, pi/2], where both inverse
 * functions are on their principal branch. With an anchor x0 the phasor is
 * first rotated so that x = x0 lands at pi/4 and the series are expanded
 * about cos(pi/4) and sin(pi/4). Off-branch or phase-ambiguous messages
 * come back uninformative and are counted as discarded.
 */
inline Gaussian exp_to_angle_message(
  const ComplexGaussian & msg, int q, std::optional<double> anchor = std::nullopt,
  Diagnostics * diag = nullptr)
{
  if (q == 0) {
    throw std::invalid_argument("exp_to_angle_message: q must be nonzero");
  }
  const double mag = std::abs(msg.mean);
  if (!(mag > 0.0)) {
    throw std::invalid_argument("exp_to_angle_message: message mean has zero modulus");
  }
  if (!msg.informative()) {
    return Gaussian::uninformative();
  }
  const double scale = kPi * static_cast<double>(q);
  const double offset = anchor ? scale * *anchor - kPi / 4.0 : 0.0;
  const cplx unit = msg.mean / mag * std::polar(1.0, offset);
  const double comp_var = msg.var / (2.0 * mag * mag);

  auto discard = [&]() {
      if (diag != nullptr) {
        ++diag->discarded;
      }
      return Gaussian::uninformative();
    };
  const double phase = std::atan2(-unit.imag(), unit.real());
  constexpr double kBranchSlack = 1e-9;
  if (phase < -kBranchSlack || phase > kPi / 2.0 + kBranchSlack) {
    return discard();
  }
  // Noise spread comparable to the branch width makes the phase ambiguous.
  if (std::sqrt(2.0 * comp_var) > kPi / 4.0) {
    return discard();
  }

  const double c_re = anchor ? std::cos(kPi / 4.0) : 0.0;
  const double c_im = anchor ? std::sin(kPi / 4.0) : 0.0;
  const Gaussian re{unit.real(), comp_var};
  const Gaussian im{-unit.imag(), comp_var};

  Gaussian via_acos = arccos_taylor(re, c_re, diag);
  const double t_acos = inverse_trig_truncation(re.mean, c_re);
  via_acos.var += t_acos * t_acos;

  Gaussian via_asin = arcsin_taylor(im, c_im, diag);
  const double t_asin = inverse_trig_truncation(im.mean, c_im);
  via_asin.var += t_asin * t_asin;

  const Gaussian phase_msg = product(via_acos, via_asin);
  return {(phase_msg.mean + offset) / scale, phase_msg.var / (scale * scale)};
}

}  // namespace jrc
