// Copyright 2026 The disc Authors
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

#include "disc/polya_gamma.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "disc/mcmc.hpp"

namespace disc {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kTruncation = 0.64;  // body/tail split of the Jacobi density

// Piecewise series coefficients a_n(x) of the Jacobi(1, z) density.
double series_coef(int n, double x) {
  const double h = n + 0.5;
  if (x <= kTruncation)
    return kPi * h * std::pow(2.0 / (kPi * x), 1.5) *
           std::exp(-2.0 * h * h / x);
  return kPi * h * std::exp(-0.5 * h * h * kPi * kPi * x);
}

// CDF of InverseGaussian(mu, lambda = 1) at x; mu = +inf gives the Levy law.
double inverse_gaussian_cdf(double x, double mu) {
  const double rx = 1.0 / std::sqrt(x);
  if (std::isinf(mu)) return 2.0 * norm_cdf(-rx);
  const double z = 1.0 / mu;
  return norm_cdf(rx * (x * z - 1.0)) +
         std::exp(2.0 * z) * norm_cdf(-rx * (x * z + 1.0));
}

// InverseGaussian(mu = 1/z, lambda = 1) truncated to (0, t]; z may be zero.
double truncated_inverse_gaussian(double z, Rng& rng) {
  const double t = kTruncation;
  const double mu = (z > 0.0) ? 1.0 / z : std::numeric_limits<double>::infinity();
  if (mu > t) {
    // Sample the Levy body by rejection, then tilt by exp(-z^2 x / 2).
    for (;;) {
      double e1, e2;
      do {
        e1 = rng.exponential();
        e2 = rng.exponential();
      } while (e1 * e1 > 2.0 * e2 / t);
      const double x = t / ((1.0 + t * e1) * (1.0 + t * e1));
      if (std::log(rng.uniform_pos()) <= -0.5 * z * z * x) return x;
    }
  }
  for (;;) {
    const double n = rng.normal();
    const double y = n * n;
    double x = mu + 0.5 * mu * mu * y -
               0.5 * mu * std::sqrt(4.0 * mu * y + mu * mu * y * y);
    if (rng.uniform() > mu / (mu + x)) x = mu * mu / x;
    if (x <= t) return x;
  }
}

}  // namespace

double pg_mean(double b, double c) {
  const double z = std::abs(c);
  if (z < 1e-4) return 0.25 * b * (1.0 - z * z / 12.0);
  return b / (2.0 * z) * std::tanh(0.5 * z);
}

double pg_variance(double b, double c) {
  const double z = std::abs(c);
  if (z < 1e-3) return b * (1.0 / 24.0 - z * z / 120.0);
  const double sech = 1.0 / std::cosh(0.5 * z);
  return b * (std::sinh(z) - z) * sech * sech / (4.0 * z * z * z);
}

double sample_pg1(double c, Rng& rng) {
  const double z = 0.5 * std::abs(c);
  const double t = kTruncation;
  const double k = kPi * kPi / 8.0 + 0.5 * z * z;
  const double p = kPi / (2.0 * k) * std::exp(-k * t);
  const double q = 2.0 * std::exp(-z) *
                   inverse_gaussian_cdf(t, z > 0.0
                                               ? 1.0 / z
                                               : std::numeric_limits<double>::infinity());
  for (;;) {
    double x;
    if (rng.uniform() * (p + q) <= p) {
      x = t + rng.exponential() / k;
    } else {
      x = truncated_inverse_gaussian(z, rng);
    }
    // Alternating-series accept/reject on the Jacobi density.
    double s = series_coef(0, x);
    const double y = rng.uniform() * s;
    int n = 0;
    for (;;) {
      ++n;
      if (n % 2 == 1) {
        s -= series_coef(n, x);
        if (y <= s) return 0.25 * x;
      } else {
        s += series_coef(n, x);
        if (y > s) break;  // reject this proposal, draw again
      }
    }
  }
}

double sample_pg(int b, double c, Rng& rng) {
  if (b < 0) throw std::invalid_argument("PG shape must be nonnegative");
  double total = 0.0;
  for (int i = 0; i < b; ++i) total += sample_pg1(c, rng);
  return total;
}

double sample_pg_approx(int b, double c, Rng& rng, int m) {
  if (b <= 0) return 0.0;
  if (m > b) m = b;
  const double lambda = sample_pg(m, c, rng);
  const double scale = std::sqrt(static_cast<double>(b) / m);
  const double draw =
      scale * (lambda - pg_mean(m, c)) + pg_mean(b, c);
  return std::max(draw, 1e-12);
}

}  // namespace disc
