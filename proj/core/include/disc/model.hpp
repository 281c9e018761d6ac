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

#ifndef DISC_MODEL_HPP
#define DISC_MODEL_HPP

#include <Eigen/Core>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>

#include "disc/rng.hpp"

namespace disc {

using Eigen::MatrixXd;
using Eigen::VectorXd;

class model_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Family { DiSC, GASC };

std::string to_string(Family family);
Family family_from_string(const std::string& name);

/// DiSC puts stationary AR(1) priors on the time series and splits the word
/// parameter into additive sense and time effects.
struct DiscHyperparams {
  double kappa_phi = 0.25;    // prevalence innovation variance
  double kappa_theta = 0.25;  // word-time innovation variance
  double kappa_chi = 1.25;    // word-sense effect variance
  double alpha_phi = 0.9;     // prevalence AR(1) coefficient, |alpha| < 1
  double alpha_theta = 0.9;   // word-time AR(1) coefficient, |alpha| < 1
};

/// GASC (SCAN when G=1) keeps a full word parameter array with random-walk
/// priors; kappa_phi is a chain state with an InvGamma(a, b) hyperprior, not
/// a fixed value.
struct GascHyperparams {
  double kappa_psi = 0.1;  // word random-walk variance (doubled in increments)
  double a = 7.0;          // InvGamma shape for kappa_phi
  double b = 3.0;          // InvGamma rate for kappa_phi
};

struct ModelSpec {
  Family family = Family::DiSC;
  int K = 2;  // senses
  int V = 1;  // vocabulary size
  int T = 1;  // time periods
  int G = 1;  // genres
  std::variant<DiscHyperparams, GascHyperparams> hyper = DiscHyperparams{};

  const DiscHyperparams& disc() const;
  const GascHyperparams& gasc() const;
  bool is_disc() const { return family == Family::DiSC; }

  /// Throws model_error on any violated invariant (dimension bounds, variance
  /// positivity, |alpha| < 1, family/hyperparameter mismatch).
  void validate() const;
};

/// Real-valued latent arrays. Column layouts are chosen so that every softmax
/// column is contiguous:
///   phi:   K x (G*T), column (g, t) at index g + G*t
///   theta: V x T                      (DiSC only)
///   chi:   V x K                      (DiSC only)
///   psi:   V x (K*T), column (k, t) at index k + K*t   (GASC only)
/// DiSC never stores psi; psi^{k,t} = chi^k + theta^t is assembled on demand,
/// which keeps the additive decomposition true by construction.
struct LatentState {
  Family family = Family::DiSC;
  MatrixXd phi;
  MatrixXd theta;
  MatrixXd chi;
  MatrixXd psi;
  double kappa_phi = 0.0;  // GASC chain state; fixed hyperparameter for DiSC

  static LatentState zeros(const ModelSpec& spec);

  int K() const { return static_cast<int>(phi.rows()); }

  /// Word parameter column for (k, t); materialises chi + theta under DiSC.
  VectorXd psi_col(int k, int t) const;

  void check_dims(const ModelSpec& spec) const;
};

/// Probability-scale arrays phi~ (K x G*T) and psi~ (V x K*T), plus their
/// logs, which is what the likelihood code actually consumes.
struct ProbabilityArrays {
  int K = 0, V = 0, T = 0, G = 0;
  MatrixXd phi_tilde;
  MatrixXd psi_tilde;
  MatrixXd log_phi_tilde;
  MatrixXd log_psi_tilde;

  Eigen::Ref<const VectorXd> phi_col(int g, int t) const {
    return phi_tilde.col(g + G * t);
  }
  Eigen::Ref<const VectorXd> psi_col(int k, int t) const {
    return psi_tilde.col(k + K * t);
  }
  Eigen::Ref<const VectorXd> log_phi_col(int g, int t) const {
    return log_phi_tilde.col(g + G * t);
  }
  Eigen::Ref<const VectorXd> log_psi_col(int k, int t) const {
    return log_psi_tilde.col(k + K * t);
  }
};

/// Overflow-safe log(sum(exp(x))).
double log_sum_exp(std::span<const double> x);
double log_sum_exp(const Eigen::Ref<const VectorXd>& x);

/// Softmax of one column; max-subtraction keeps exp() in range. Throws
/// model_error on non-finite input.
VectorXd softmax_columns(const Eigen::Ref<const VectorXd>& x);

/// In-place variants used by the hot paths: write softmax and log-softmax of
/// `x` into `p` and `logp`.
void softmax_into(const Eigen::Ref<const VectorXd>& x, Eigen::Ref<VectorXd> p,
                  Eigen::Ref<VectorXd> logp);

ProbabilityArrays derive_probability_arrays(const LatentState& state,
                                            const ModelSpec& spec);

/// Gaussian conditional N(mean, var) for one scalar time-series entry given
/// the rest of its chain; componentwise for vector-valued series.
struct ConditionalMoments {
  VectorXd mean;
  double variance = 0.0;
};

/// Full conditional of series[t] | series[-t] for an AR(1) chain with
/// stationary start (coefficient alpha, innovation variance kappa):
///   t = 1:        N(alpha * x_2,                    kappa)
///   1 < t < T:    N(alpha/(1+alpha^2) (x_{t-1}+x_{t+1}), kappa/(1+alpha^2))
///   t = T:        N(alpha * x_{T-1},                kappa)
/// The GASC random walk is the alpha = 1, kappa -> 2*kappa case. A chain of
/// length one returns the stationary law (DiSC) or an improper flat
/// conditional with infinite variance (GASC). `series` is indexed 1..T via
/// columns of a V' x T matrix.
ConditionalMoments ar1_conditional(const Eigen::Ref<const MatrixXd>& series,
                                   int t, double alpha, double kappa,
                                   bool stationary_start);

/// Dispatch of ar1_conditional for a named block of the model. `t` is
/// 1-based. For chi the conditional is the unconditional N(0, kappa_chi).
ConditionalMoments conditional_prior_moments_phi(const LatentState& state,
                                                 const ModelSpec& spec, int g,
                                                 int t);
ConditionalMoments conditional_prior_moments_theta(const LatentState& state,
                                                   const ModelSpec& spec,
                                                   int t);
ConditionalMoments conditional_prior_moments_psi(const LatentState& state,
                                                 const ModelSpec& spec, int k,
                                                 int t);

double log_normal_pdf(double x, double mean, double var);

/// Log prior density of the full latent state, split by array. GASC improper
/// start terms contribute zero; the GASC total additionally includes the
/// InvGamma(a, b) density of the kappa_phi chain state.
double log_prior_phi(const LatentState& state, const ModelSpec& spec);
double log_prior_theta(const LatentState& state, const ModelSpec& spec);
double log_prior_chi(const LatentState& state, const ModelSpec& spec);
double log_prior_psi(const LatentState& state, const ModelSpec& spec);
double log_prior_kappa_phi(const LatentState& state, const ModelSpec& spec);
double log_prior(const LatentState& state, const ModelSpec& spec);

double log_inv_gamma_pdf(double x, double shape, double rate);

/// Hyperparameter elicitation from an "extreme but possible" probability
/// ratio. Exact solutions plus the reporting convention (nearest multiple of
/// 0.25, which reproduces the standard round-number settings).
struct Elicited {
  double exact = 0.0;
  double rounded = 0.0;
};

/// Solves 3 * sqrt(2 kappa / (1 - alpha^2)) = log(ratio) for kappa.
Elicited elicit_kappa_phi(double ratio_threshold, double alpha_phi);

/// Solves 3 * sqrt(2 kappa_chi + 2 kappa_theta / (1 - alpha^2)) = log(ratio)
/// under the equal-attribution constraint kappa_chi = kappa_theta/(1-alpha^2).
/// Returns (kappa_chi, kappa_theta).
std::pair<Elicited, Elicited> elicit_kappa_chi_theta(double ratio_threshold,
                                                     double alpha_theta);

}  // namespace disc

#endif  // DISC_MODEL_HPP
