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

#ifndef DISC_MCMC_HPP
#define DISC_MCMC_HPP

#include <functional>

#include "disc/model.hpp"
#include "disc/rng.hpp"

namespace disc {

/// Unnormalised log target restricted to one update block. Density and
/// gradient share their dominant subexpressions (per-snippet responsibility
/// weights), so the interface returns both from a single evaluation.
struct BlockTarget {
  std::function<std::pair<double, VectorXd>(const VectorXd&)> eval;
};

inline constexpr double kMalaOptimalAcceptance = 0.574;
inline constexpr double kHmcOptimalAcceptance = 0.651;
inline constexpr double kDivergenceThreshold = 1000.0;

/// Log-adaptive proposal scale. The tuned quantity is log sigma^2; after each
/// window of `window` proposals the scale moves by c0 * n^-gamma times the
/// windowed acceptance excess, which vanishes as the window index n grows.
/// Adaptation freezes (permanently) when freeze() is called at burn-in end.
struct AdaptState {
  double log_step = 0.0;  // log sigma^2
  double target = kMalaOptimalAcceptance;
  int window = 50;
  double c0 = 1.0;
  double gamma = 0.8;

  int window_count = 0;
  int window_accepts = 0;
  long completed_windows = 0;
  bool frozen = false;

  double step_size() const { return std::exp(log_step); }      // sigma^2
  double sigma() const { return std::exp(0.5 * log_step); }

  void freeze() { frozen = true; }
};

/// Records one accept/reject outcome and applies the window update when the
/// window fills. Pure: returns the successor state.
AdaptState adapt_scale(AdaptState adapt, bool accepted);

struct StepResult {
  VectorXd value;
  bool accepted = false;
  bool divergent = false;
  bool bad_gradient = false;
  double log_accept_prob = 0.0;
};

/// One Metropolis-adjusted Langevin update: proposal
/// N(x + (sigma^2/2) grad log pi(x), sigma^2 I) with the asymmetric
/// Hastings correction. Non-finite gradients or densities reject with the
/// bad_gradient flag set.
StepResult mala_step(const VectorXd& x, const BlockTarget& target,
                     double sigma2, Rng& rng);

/// L unit-mass leapfrog steps of size eps from (q0, p0).
struct LeapfrogResult {
  VectorXd q;
  VectorXd p;
  double log_density = 0.0;  // at the final point
  bool ok = false;           // gradients stayed finite
};
LeapfrogResult leapfrog(const VectorXd& q0, const VectorXd& p0,
                        const BlockTarget& target, double eps, int steps);

/// One HMC update with `leapfrog_steps` unit-mass leapfrog steps of size
/// sigma = sqrt(sigma2); accepts with min(1, exp(-dH)). A single leapfrog
/// step reproduces the MALA proposal exactly. |dH| beyond the divergence
/// threshold rejects and flags divergent.
StepResult hmc_step(const VectorXd& x, const BlockTarget& target,
                    double sigma2, int leapfrog_steps, Rng& rng);

double norm_cdf(double x);
double norm_quantile(double p);

/// Inverse-CDF draw from N(mean, sd^2) truncated to (lo, hi). Tails are
/// guarded by working on the side where the CDF retains precision; returns
/// NaN when the interval mass underflows entirely (degenerate bounds).
double truncated_normal(double mean, double sd, double lo, double hi,
                        Rng& rng);

}  // namespace disc

#endif  // DISC_MCMC_HPP
