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

#include "disc/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace disc {

namespace {
constexpr double kLog2Pi = 1.8378770664093454835606594728112;
}

std::string to_string(Family family) {
  return family == Family::DiSC ? "disc" : "gasc";
}

Family family_from_string(const std::string& name) {
  std::string s;
  for (char c : name) s.push_back(static_cast<char>(std::tolower(c)));
  if (s == "disc") return Family::DiSC;
  if (s == "gasc" || s == "scan") return Family::GASC;
  throw model_error("unknown model family: " + name);
}

const DiscHyperparams& ModelSpec::disc() const {
  if (!std::holds_alternative<DiscHyperparams>(hyper))
    throw model_error("DiSC hyperparameters requested from a GASC spec");
  return std::get<DiscHyperparams>(hyper);
}

const GascHyperparams& ModelSpec::gasc() const {
  if (!std::holds_alternative<GascHyperparams>(hyper))
    throw model_error("GASC hyperparameters requested from a DiSC spec");
  return std::get<GascHyperparams>(hyper);
}

void ModelSpec::validate() const {
  if (K < 2) throw model_error("K must be >= 2");
  if (V < 1) throw model_error("V must be >= 1");
  if (T < 1) throw model_error("T must be >= 1");
  if (G < 1) throw model_error("G must be >= 1");
  if (family == Family::DiSC) {
    const auto& h = disc();  // throws if the GASC alternative is held
    if (h.kappa_phi <= 0 || h.kappa_theta <= 0 || h.kappa_chi <= 0)
      throw model_error("DiSC variances must be positive");
    if (std::abs(h.alpha_phi) >= 1 || std::abs(h.alpha_theta) >= 1)
      throw model_error("AR(1) coefficients must satisfy |alpha| < 1");
  } else {
    const auto& h = gasc();
    if (h.kappa_psi <= 0) throw model_error("kappa_psi must be positive");
    if (h.a <= 0 || h.b <= 0)
      throw model_error("InvGamma shape and rate must be positive");
  }
}

LatentState LatentState::zeros(const ModelSpec& spec) {
  LatentState s;
  s.family = spec.family;
  s.phi = MatrixXd::Zero(spec.K, spec.G * spec.T);
  if (spec.is_disc()) {
    s.theta = MatrixXd::Zero(spec.V, spec.T);
    s.chi = MatrixXd::Zero(spec.V, spec.K);
    s.kappa_phi = spec.disc().kappa_phi;
  } else {
    s.psi = MatrixXd::Zero(spec.V, spec.K * spec.T);
    s.kappa_phi = spec.gasc().b / (spec.gasc().a + 1.0);  // prior mode
  }
  return s;
}

VectorXd LatentState::psi_col(int k, int t) const {
  if (family == Family::DiSC) return chi.col(k) + theta.col(t);
  return psi.col(k + K() * t);
}

void LatentState::check_dims(const ModelSpec& spec) const {
  if (family != spec.family) throw model_error("state/spec family mismatch");
  if (phi.rows() != spec.K || phi.cols() != spec.G * spec.T)
    throw model_error("phi dimensions do not match spec");
  if (spec.is_disc()) {
    if (theta.rows() != spec.V || theta.cols() != spec.T)
      throw model_error("theta dimensions do not match spec");
    if (chi.rows() != spec.V || chi.cols() != spec.K)
      throw model_error("chi dimensions do not match spec");
  } else {
    if (psi.rows() != spec.V || psi.cols() != spec.K * spec.T)
      throw model_error("psi dimensions do not match spec");
    if (!(kappa_phi > 0)) throw model_error("GASC kappa_phi must be positive");
  }
  if (!phi.allFinite() || (spec.is_disc() && (!theta.allFinite() || !chi.allFinite())) ||
      (!spec.is_disc() && !psi.allFinite()))
    throw model_error("latent state contains non-finite entries");
}

double log_sum_exp(std::span<const double> x) {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : x) m = std::max(m, v);
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double v : x) s += std::exp(v - m);
  return m + std::log(s);
}

double log_sum_exp(const Eigen::Ref<const VectorXd>& x) {
  return log_sum_exp(std::span<const double>(x.data(), x.size()));
}

VectorXd softmax_columns(const Eigen::Ref<const VectorXd>& x) {
  if (!x.allFinite()) throw model_error("softmax input must be finite");
  const double m = x.maxCoeff();
  VectorXd p = (x.array() - m).exp();
  p /= p.sum();
  return p;
}

void softmax_into(const Eigen::Ref<const VectorXd>& x, Eigen::Ref<VectorXd> p,
                  Eigen::Ref<VectorXd> logp) {
  const double m = x.maxCoeff();
  p = (x.array() - m).exp();
  const double s = p.sum();
  p /= s;
  logp = x.array() - (m + std::log(s));
}

ProbabilityArrays derive_probability_arrays(const LatentState& state,
                                            const ModelSpec& spec) {
  state.check_dims(spec);
  ProbabilityArrays out;
  out.K = spec.K;
  out.V = spec.V;
  out.T = spec.T;
  out.G = spec.G;
  out.phi_tilde.resize(spec.K, spec.G * spec.T);
  out.log_phi_tilde.resize(spec.K, spec.G * spec.T);
  out.psi_tilde.resize(spec.V, spec.K * spec.T);
  out.log_psi_tilde.resize(spec.V, spec.K * spec.T);
  for (int t = 0; t < spec.T; ++t) {
    for (int g = 0; g < spec.G; ++g) {
      const int c = g + spec.G * t;
      softmax_into(state.phi.col(c), out.phi_tilde.col(c),
                   out.log_phi_tilde.col(c));
    }
    for (int k = 0; k < spec.K; ++k) {
      const int c = k + spec.K * t;
      const VectorXd col = state.psi_col(k, t);
      softmax_into(col, out.psi_tilde.col(c), out.log_psi_tilde.col(c));
    }
  }
  return out;
}

ConditionalMoments ar1_conditional(const Eigen::Ref<const MatrixXd>& series,
                                   int t, double alpha, double kappa,
                                   bool stationary_start) {
  const int T = static_cast<int>(series.cols());
  if (t < 1 || t > T) throw model_error("time index out of range");
  ConditionalMoments m;
  if (T == 1) {
    if (stationary_start) {
      m.mean = VectorXd::Zero(series.rows());
      m.variance = kappa / (1.0 - alpha * alpha);
    } else {
      m.mean = VectorXd::Zero(series.rows());
      m.variance = std::numeric_limits<double>::infinity();
    }
    return m;
  }
  if (t == 1) {
    m.mean = alpha * series.col(1);
    m.variance = kappa;
  } else if (t == T) {
    m.mean = alpha * series.col(T - 2);
    m.variance = kappa;
  } else {
    const double w = alpha / (1.0 + alpha * alpha);
    m.mean = w * (series.col(t - 2) + series.col(t));
    m.variance = kappa / (1.0 + alpha * alpha);
  }
  return m;
}

namespace {

// Views phi as a per-genre K x T series.
MatrixXd phi_series(const LatentState& state, const ModelSpec& spec, int g) {
  MatrixXd s(spec.K, spec.T);
  for (int t = 0; t < spec.T; ++t) s.col(t) = state.phi.col(g + spec.G * t);
  return s;
}

MatrixXd psi_series(const LatentState& state, const ModelSpec& spec, int k) {
  MatrixXd s(spec.V, spec.T);
  for (int t = 0; t < spec.T; ++t) s.col(t) = state.psi.col(k + spec.K * t);
  return s;
}

}  // namespace

ConditionalMoments conditional_prior_moments_phi(const LatentState& state,
                                                 const ModelSpec& spec, int g,
                                                 int t) {
  const MatrixXd series = phi_series(state, spec, g);
  if (spec.is_disc()) {
    const auto& h = spec.disc();
    return ar1_conditional(series, t, h.alpha_phi, h.kappa_phi, true);
  }
  return ar1_conditional(series, t, 1.0, 2.0 * state.kappa_phi, false);
}

ConditionalMoments conditional_prior_moments_theta(const LatentState& state,
                                                   const ModelSpec& spec,
                                                   int t) {
  const auto& h = spec.disc();
  return ar1_conditional(state.theta, t, h.alpha_theta, h.kappa_theta, true);
}

ConditionalMoments conditional_prior_moments_psi(const LatentState& state,
                                                 const ModelSpec& spec, int k,
                                                 int t) {
  const auto& h = spec.gasc();
  const MatrixXd series = psi_series(state, spec, k);
  return ar1_conditional(series, t, 1.0, 2.0 * h.kappa_psi, false);
}

double log_normal_pdf(double x, double mean, double var) {
  const double d = x - mean;
  return -0.5 * (kLog2Pi + std::log(var) + d * d / var);
}

double log_inv_gamma_pdf(double x, double shape, double rate) {
  if (x <= 0) return -std::numeric_limits<double>::infinity();
  return shape * std::log(rate) - std::lgamma(shape) -
         (shape + 1.0) * std::log(x) - rate / x;
}

namespace {

// Sum of Gaussian increment densities for a V' x T chain: stationary start
// (DiSC) or zero contribution at t=1 (GASC random walk).
double ar1_chain_log_density(const Eigen::Ref<const MatrixXd>& series,
                             double alpha, double kappa,
                             bool stationary_start) {
  const int T = static_cast<int>(series.cols());
  const int n = static_cast<int>(series.rows());
  double total = 0.0;
  if (stationary_start) {
    const double v0 = kappa / (1.0 - alpha * alpha);
    for (int i = 0; i < n; ++i) total += log_normal_pdf(series(i, 0), 0.0, v0);
  }
  for (int t = 1; t < T; ++t)
    for (int i = 0; i < n; ++i)
      total += log_normal_pdf(series(i, t), alpha * series(i, t - 1), kappa);
  return total;
}

}  // namespace

double log_prior_phi(const LatentState& state, const ModelSpec& spec) {
  double total = 0.0;
  for (int g = 0; g < spec.G; ++g) {
    const MatrixXd series = phi_series(state, spec, g);
    if (spec.is_disc()) {
      const auto& h = spec.disc();
      total += ar1_chain_log_density(series, h.alpha_phi, h.kappa_phi, true);
    } else {
      total +=
          ar1_chain_log_density(series, 1.0, 2.0 * state.kappa_phi, false);
    }
  }
  return total;
}

double log_prior_theta(const LatentState& state, const ModelSpec& spec) {
  const auto& h = spec.disc();
  return ar1_chain_log_density(state.theta, h.alpha_theta, h.kappa_theta,
                               true);
}

double log_prior_chi(const LatentState& state, const ModelSpec& spec) {
  const auto& h = spec.disc();
  double total = 0.0;
  for (int k = 0; k < spec.K; ++k)
    for (int v = 0; v < spec.V; ++v)
      total += log_normal_pdf(state.chi(v, k), 0.0, h.kappa_chi);
  return total;
}

double log_prior_psi(const LatentState& state, const ModelSpec& spec) {
  const auto& h = spec.gasc();
  double total = 0.0;
  for (int k = 0; k < spec.K; ++k) {
    const MatrixXd series = psi_series(state, spec, k);
    total += ar1_chain_log_density(series, 1.0, 2.0 * h.kappa_psi, false);
  }
  return total;
}

double log_prior_kappa_phi(const LatentState& state, const ModelSpec& spec) {
  const auto& h = spec.gasc();
  return log_inv_gamma_pdf(state.kappa_phi, h.a, h.b);
}

double log_prior(const LatentState& state, const ModelSpec& spec) {
  state.check_dims(spec);
  if (spec.is_disc())
    return log_prior_phi(state, spec) + log_prior_theta(state, spec) +
           log_prior_chi(state, spec);
  return log_prior_phi(state, spec) + log_prior_psi(state, spec) +
         log_prior_kappa_phi(state, spec);
}

namespace {

double round_to_quarter(double x) { return std::round(x * 4.0) / 4.0; }

}  // namespace

Elicited elicit_kappa_phi(double ratio_threshold, double alpha_phi) {
  if (ratio_threshold <= 1.0)
    throw model_error("ratio threshold must exceed 1");
  if (std::abs(alpha_phi) >= 1.0)
    throw model_error("|alpha| must be < 1 for a stationary prior");
  const double s = std::log(ratio_threshold) / 3.0;
  Elicited e;
  e.exact = s * s * (1.0 - alpha_phi * alpha_phi) / 2.0;
  e.rounded = round_to_quarter(e.exact);
  return e;
}

std::pair<Elicited, Elicited> elicit_kappa_chi_theta(double ratio_threshold,
                                                     double alpha_theta) {
  if (ratio_threshold <= 1.0)
    throw model_error("ratio threshold must exceed 1");
  if (std::abs(alpha_theta) >= 1.0)
    throw model_error("|alpha| must be < 1 for a stationary prior");
  const double s = std::log(ratio_threshold) / 3.0;
  // With kappa_chi = kappa_theta / (1 - alpha^2) the constraint becomes
  // 4 * kappa_chi = s^2.
  Elicited chi;
  chi.exact = s * s / 4.0;
  chi.rounded = round_to_quarter(chi.exact);
  Elicited theta;
  theta.exact = chi.exact * (1.0 - alpha_theta * alpha_theta);
  theta.rounded = round_to_quarter(theta.exact);
  return {chi, theta};
}

}  // namespace disc
