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

#include "disc/mcmc.hpp"

#include <boost/math/distributions/normal.hpp>
#include <cmath>
#include <limits>
#include <tuple>

namespace disc {

AdaptState adapt_scale(AdaptState adapt, bool accepted) {
  if (adapt.frozen) return adapt;
  adapt.window_count += 1;
  adapt.window_accepts += accepted ? 1 : 0;
  if (adapt.window_count >= adapt.window) {
    const double rate =
        static_cast<double>(adapt.window_accepts) / adapt.window_count;
    adapt.completed_windows += 1;
    const double c =
        adapt.c0 * std::pow(static_cast<double>(adapt.completed_windows),
                            -adapt.gamma);
    adapt.log_step += c * (rate - adapt.target);
    adapt.window_count = 0;
    adapt.window_accepts = 0;
  }
  return adapt;
}

namespace {

// log N(y | mean, sigma2 I) up to the additive constant shared by the
// forward and reverse proposal terms.
double log_gaussian_kernel(const VectorXd& y, const VectorXd& mean,
                           double sigma2) {
  return -(y - mean).squaredNorm() / (2.0 * sigma2);
}

}  // namespace

StepResult mala_step(const VectorXd& x, const BlockTarget& target,
                     double sigma2, Rng& rng) {
  StepResult result;
  result.value = x;

  const auto [fx, gx] = target.eval(x);
  if (!std::isfinite(fx) || !gx.allFinite()) {
    result.bad_gradient = true;
    return result;
  }

  const double sigma = std::sqrt(sigma2);
  const VectorXd forward_mean = x + 0.5 * sigma2 * gx;
  VectorXd proposal = forward_mean;
  for (int i = 0; i < proposal.size(); ++i) proposal[i] += sigma * rng.normal();

  const auto [fy, gy] = target.eval(proposal);
  if (!std::isfinite(fy) || !gy.allFinite()) {
    result.bad_gradient = true;
    return result;
  }

  const VectorXd reverse_mean = proposal + 0.5 * sigma2 * gy;
  result.log_accept_prob = fy - fx +
                           log_gaussian_kernel(x, reverse_mean, sigma2) -
                           log_gaussian_kernel(proposal, forward_mean, sigma2);
  if (std::log(rng.uniform_pos()) < result.log_accept_prob) {
    result.accepted = true;
    result.value = proposal;
  }
  return result;
}

LeapfrogResult leapfrog(const VectorXd& q0, const VectorXd& p0,
                        const BlockTarget& target, double eps, int steps) {
  LeapfrogResult result;
  result.q = q0;
  result.p = p0;
  auto [f, grad] = target.eval(q0);
  result.log_density = f;
  if (!grad.allFinite()) return result;
  for (int step = 0; step < steps; ++step) {
    result.p += 0.5 * eps * grad;
    result.q += eps * result.p;
    std::tie(result.log_density, grad) = target.eval(result.q);
    if (!grad.allFinite()) return result;
    result.p += 0.5 * eps * grad;
  }
  result.ok = true;
  return result;
}

StepResult hmc_step(const VectorXd& x, const BlockTarget& target,
                    double sigma2, int leapfrog_steps, Rng& rng) {
  StepResult result;
  result.value = x;

  auto [fx, grad0] = target.eval(x);
  if (!std::isfinite(fx) || !grad0.allFinite()) {
    result.bad_gradient = true;
    return result;
  }

  const double eps = std::sqrt(sigma2);
  VectorXd momentum(x.size());
  for (int i = 0; i < momentum.size(); ++i) momentum[i] = rng.normal();
  const double h0 = -fx + 0.5 * momentum.squaredNorm();

  const LeapfrogResult traj = leapfrog(x, momentum, target, eps, leapfrog_steps);
  const bool bad = !traj.ok;
  const VectorXd& q = traj.q;

  double h1 = std::numeric_limits<double>::infinity();
  if (!bad && std::isfinite(traj.log_density))
    h1 = -traj.log_density + 0.5 * traj.p.squaredNorm();

  const double dh = h1 - h0;
  if (!std::isfinite(dh) || std::abs(dh) > kDivergenceThreshold) {
    result.divergent = !bad;
    result.bad_gradient = bad;
    result.log_accept_prob = -std::numeric_limits<double>::infinity();
    return result;
  }
  result.log_accept_prob = -dh;
  if (std::log(rng.uniform_pos()) < result.log_accept_prob) {
    result.accepted = true;
    result.value = q;
  }
  return result;
}

double norm_cdf(double x) { return 0.5 * std::erfc(-x * 0.7071067811865475244); }

double norm_quantile(double p) {
  static const boost::math::normal_distribution<double> dist(0.0, 1.0);
  return boost::math::quantile(dist, p);
}

double truncated_normal(double mean, double sd, double lo, double hi,
                        Rng& rng) {
  double a = (lo - mean) / sd;
  double b = (hi - mean) / sd;
  if (!(a < b)) return std::numeric_limits<double>::quiet_NaN();
  // Work on the side where the standardized bounds are <= 0 so the CDF
  // values stay well away from 1.
  bool flipped = false;
  if (a > 0.0) {
    std::swap(a, b);
    a = -a;
    b = -b;
    flipped = true;
  }
  const double pa = std::isinf(a) ? 0.0 : norm_cdf(a);
  const double pb = std::isinf(b) ? 1.0 : norm_cdf(b);
  const double mass = pb - pa;
  if (!(mass > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  const double u = pa + mass * rng.uniform_pos();
  double z = norm_quantile(std::min(u, 1.0 - 1e-17));
  if (flipped) z = -z;
  return mean + sd * z;
}

}  // namespace disc
