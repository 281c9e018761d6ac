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

#include <doctest.h>

#include <cmath>

#include "disc/model.hpp"
#include "oracles.hpp"

using namespace disc;

namespace {

ModelSpec small_disc_spec() {
  ModelSpec spec;
  spec.family = Family::DiSC;
  spec.K = 2;
  spec.V = 3;
  spec.T = 3;
  spec.G = 1;
  spec.hyper = DiscHyperparams{};
  return spec;
}

ModelSpec small_gasc_spec() {
  ModelSpec spec;
  spec.family = Family::GASC;
  spec.K = 2;
  spec.V = 3;
  spec.T = 3;
  spec.G = 2;
  spec.hyper = GascHyperparams{};
  return spec;
}

}  // namespace

TEST_CASE("softmax basics") {
  VectorXd x(2);
  x << 0.0, 0.0;
  VectorXd p = softmax_columns(x);
  CHECK(p[0] == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(p[1] == doctest::Approx(0.5).epsilon(1e-14));

  VectorXd c = VectorXd::Constant(3, -7.3);
  p = softmax_columns(c);
  for (int i = 0; i < 3; ++i)
    CHECK(p[i] == doctest::Approx(1.0 / 3).epsilon(1e-14));

  VectorXd two(2);
  two << std::log(2.0), 0.0;
  p = softmax_columns(two);
  CHECK(p[0] == doctest::Approx(2.0 / 3).epsilon(1e-14));
  CHECK(p[1] == doctest::Approx(1.0 / 3).epsilon(1e-14));
}

TEST_CASE("softmax shift invariance and normalization") {
  Rng rng(41);
  for (int trial = 0; trial < 50; ++trial) {
    VectorXd x(5);
    for (int i = 0; i < 5; ++i) x[i] = 10.0 * rng.normal();
    const VectorXd p = softmax_columns(x);
    CHECK(p.sum() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(p.minCoeff() > 0.0);
    const VectorXd q = softmax_columns(x.array() + 123.456);
    CHECK((p - q).cwiseAbs().maxCoeff() < 1e-12);
  }
  // Overflow safety: large magnitudes must not produce NaN.
  VectorXd big(3);
  big << 900.0, -900.0, 0.0;
  const VectorXd p = softmax_columns(big);
  CHECK(p.allFinite());
  CHECK(p.sum() == doctest::Approx(1.0));
}

TEST_CASE("softmax rejects non-finite input") {
  VectorXd x(2);
  x << 1.0, std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(softmax_columns(x), model_error);
}

TEST_CASE("derive_probability_arrays zero state is uniform") {
  ModelSpec spec = small_disc_spec();
  spec.K = 3;
  const LatentState state = LatentState::zeros(spec);
  const ProbabilityArrays probs = derive_probability_arrays(state, spec);
  for (int t = 0; t < spec.T; ++t)
    for (int k = 0; k < 3; ++k)
      CHECK(probs.phi_col(0, t)[k] == doctest::Approx(1.0 / 3).epsilon(1e-14));
}

TEST_CASE("derive_probability_arrays DiSC with zero chi has no sense effect") {
  ModelSpec spec = small_disc_spec();
  LatentState state = oracles::random_state(spec, 1.0, 5);
  state.chi.setZero();
  const ProbabilityArrays probs = derive_probability_arrays(state, spec);
  for (int t = 0; t < spec.T; ++t)
    CHECK((probs.psi_col(0, t) - probs.psi_col(1, t)).cwiseAbs().maxCoeff() <
          1e-14);
}

TEST_CASE("derive_probability_arrays columns sum to one") {
  const ModelSpec spec = small_gasc_spec();
  const LatentState state = oracles::random_state(spec, 0.8, 7);
  const ProbabilityArrays probs = derive_probability_arrays(state, spec);
  for (int t = 0; t < spec.T; ++t) {
    for (int g = 0; g < spec.G; ++g)
      CHECK(probs.phi_col(g, t).sum() == doctest::Approx(1.0).epsilon(1e-12));
    for (int k = 0; k < spec.K; ++k)
      CHECK(probs.psi_col(k, t).sum() == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("derive_probability_arrays rejects dimension mismatch") {
  const ModelSpec spec = small_disc_spec();
  LatentState state = LatentState::zeros(spec);
  state.theta.resize(spec.V, spec.T + 1);
  CHECK_THROWS_AS(derive_probability_arrays(state, spec), model_error);
}

TEST_CASE("spec validation enforces invariants") {
  ModelSpec spec = small_disc_spec();
  spec.K = 1;
  CHECK_THROWS_AS(spec.validate(), model_error);
  spec = small_disc_spec();
  std::get<DiscHyperparams>(spec.hyper).alpha_phi = 1.0;
  CHECK_THROWS_AS(spec.validate(), model_error);
  spec = small_disc_spec();
  std::get<DiscHyperparams>(spec.hyper).kappa_theta = -0.1;
  CHECK_THROWS_AS(spec.validate(), model_error);
  spec = small_gasc_spec();
  std::get<GascHyperparams>(spec.hyper).a = 0.0;
  CHECK_THROWS_AS(spec.validate(), model_error);
  // Accessing the wrong family's hyperparameters throws.
  spec = small_disc_spec();
  CHECK_THROWS_AS(spec.gasc(), model_error);
}

TEST_CASE("DiSC stationary start log prior matches the AR(1) marginal") {
  ModelSpec spec;
  spec.family = Family::DiSC;
  spec.K = 2;
  spec.V = 1;
  spec.T = 1;
  spec.G = 1;
  spec.hyper = DiscHyperparams{0.25, 0.25, 1.25, 0.9, 0.9};
  const LatentState state = LatentState::zeros(spec);
  const double expected_phi =
      2.0 * log_normal_pdf(0.0, 0.0, 0.25 / (1.0 - 0.81));
  CHECK(log_prior_phi(state, spec) ==
        doctest::Approx(expected_phi).epsilon(1e-12));
}

TEST_CASE("GASC log prior depends only on increments") {
  const ModelSpec spec = small_gasc_spec();
  LatentState a = oracles::random_state(spec, 1.0, 11);
  a.kappa_phi = 0.4;
  LatentState b = a;
  // Shift genre 1's whole trajectory by a constant.
  for (int t = 0; t < spec.T; ++t)
    b.phi.col(1 + spec.G * t).array() += 3.21;
  CHECK(log_prior_phi(a, spec) ==
        doctest::Approx(log_prior_phi(b, spec)).epsilon(1e-12));
  CHECK(log_prior(a, spec) == doctest::Approx(log_prior(b, spec)).epsilon(1e-12));

  // T = 2: only the increment matters.
  ModelSpec spec2 = spec;
  spec2.T = 2;
  LatentState s1 = LatentState::zeros(spec2);
  LatentState s2 = LatentState::zeros(spec2);
  s1.kappa_phi = s2.kappa_phi = 0.5;
  s1.phi.col(0).setConstant(0.0);
  s1.phi.col(0 + spec2.G * 1).setConstant(1.5);
  s2.phi.col(0).setConstant(-10.0);
  s2.phi.col(0 + spec2.G * 1).setConstant(-8.5);
  CHECK(log_prior_phi(s1, spec2) ==
        doctest::Approx(log_prior_phi(s2, spec2)).epsilon(1e-12));
}

TEST_CASE("DiSC log prior is not shift invariant") {
  const ModelSpec spec = small_disc_spec();
  LatentState a = oracles::random_state(spec, 1.0, 13);
  LatentState b = a;
  for (int t = 0; t < spec.T; ++t) b.phi.col(t).array() += 2.0;
  CHECK(log_prior_phi(a, spec) != doctest::Approx(log_prior_phi(b, spec)));
}

TEST_CASE("conditional prior moments: three AR(1) cases") {
  MatrixXd series(1, 4);
  series << 0.3, -0.2, 0.7, 0.1;
  const double alpha = 0.9;
  const double kappa = 0.25;

  auto m1 = ar1_conditional(series, 1, alpha, kappa, true);
  CHECK(m1.mean[0] == doctest::Approx(alpha * -0.2).epsilon(1e-14));
  CHECK(m1.variance == doctest::Approx(kappa).epsilon(1e-14));

  auto m2 = ar1_conditional(series, 2, alpha, kappa, true);
  CHECK(m2.mean[0] ==
        doctest::Approx(alpha / (1 + alpha * alpha) * (0.3 + 0.7)).epsilon(1e-14));
  CHECK(m2.variance ==
        doctest::Approx(kappa / (1 + alpha * alpha)).epsilon(1e-14));

  auto m4 = ar1_conditional(series, 4, alpha, kappa, true);
  CHECK(m4.mean[0] == doctest::Approx(alpha * 0.7).epsilon(1e-14));
  CHECK(m4.variance == doctest::Approx(kappa).epsilon(1e-14));

  CHECK_THROWS_AS(ar1_conditional(series, 0, alpha, kappa, true), model_error);
  CHECK_THROWS_AS(ar1_conditional(series, 5, alpha, kappa, true), model_error);
}

TEST_CASE("conditional prior moments: GASC substitutes alpha=1, kappa->2kappa") {
  const ModelSpec spec = small_gasc_spec();
  LatentState state = oracles::random_state(spec, 1.0, 17);
  state.kappa_phi = 0.3;
  const auto m = conditional_prior_moments_phi(state, spec, 0, 2);
  const VectorXd prev = state.phi.col(0 + spec.G * 0);
  const VectorXd next = state.phi.col(0 + spec.G * 2);
  CHECK((m.mean - 0.5 * (prev + next)).cwiseAbs().maxCoeff() < 1e-14);
  // 2*kappa / (1 + 1) = kappa.
  CHECK(m.variance == doctest::Approx(state.kappa_phi).epsilon(1e-14));
}

TEST_CASE("forward factorization matches the full conditional (quadrature)") {
  // Scalar AR(1) chain of length 3, tracked through log_prior: normalise the
  // joint over a grid of the middle value and compare with the closed form.
  ModelSpec spec;
  spec.family = Family::DiSC;
  spec.K = 2;
  spec.V = 1;
  spec.T = 3;
  spec.G = 1;
  const double kappa = 0.25, alpha = 0.9;
  spec.hyper = DiscHyperparams{kappa, 0.25, 1.25, alpha, 0.9};

  LatentState state = LatentState::zeros(spec);
  state.phi(0, 0) = 0.4;
  state.phi(0, 2) = -0.3;

  const auto moments = conditional_prior_moments_phi(state, spec, 0, 2);
  const double mu = moments.mean[0];
  const double var = moments.variance;

  const int n = 4001;
  const double lo = mu - 8.0 * std::sqrt(var);
  const double hi = mu + 8.0 * std::sqrt(var);
  const double dx = (hi - lo) / (n - 1);
  std::vector<double> joint(n);
  double max_log = -1e300;
  for (int i = 0; i < n; ++i) {
    state.phi(0, 1) = lo + i * dx;
    joint[i] = log_prior_phi(state, spec);
    max_log = std::max(max_log, joint[i]);
  }
  double norm = 0.0;
  for (double v : joint) norm += std::exp(v - max_log) * dx;
  for (int i = 0; i < n; ++i) {
    const double density = std::exp(joint[i] - max_log) / norm;
    const double expected = std::exp(log_normal_pdf(lo + i * dx, mu, var));
    CHECK(density == doctest::Approx(expected).epsilon(1e-6));
  }
}

TEST_CASE("GASC T=1 conditional is improper flat") {
  ModelSpec spec = small_gasc_spec();
  spec.T = 1;
  LatentState state = LatentState::zeros(spec);
  state.kappa_phi = 0.3;
  const auto m = conditional_prior_moments_phi(state, spec, 0, 1);
  CHECK(std::isinf(m.variance));
}

TEST_CASE("GASC log prior includes the kappa hyperprior") {
  const ModelSpec spec = small_gasc_spec();
  LatentState state = oracles::random_state(spec, 0.5, 19);
  state.kappa_phi = 0.4;
  const auto& h = spec.gasc();
  const double expected = log_inv_gamma_pdf(0.4, h.a, h.b);
  CHECK(log_prior_kappa_phi(state, spec) ==
        doctest::Approx(expected).epsilon(1e-12));
  CHECK(log_prior(state, spec) ==
        doctest::Approx(log_prior_phi(state, spec) + log_prior_psi(state, spec) +
                        expected)
            .epsilon(1e-12));
}

TEST_CASE("elicitation reproduces the standard settings") {
  auto phi100 = elicit_kappa_phi(100.0, 0.9);
  CHECK(phi100.rounded == doctest::Approx(0.25).epsilon(1e-14));
  CHECK(phi100.exact == doctest::Approx(0.2238579).epsilon(1e-5));

  auto phi1e6 = elicit_kappa_phi(1e6, 0.9);
  CHECK(phi1e6.exact == doctest::Approx(2.0).epsilon(0.01));
  CHECK(phi1e6.rounded == doctest::Approx(2.0).epsilon(1e-14));

  // Inverts exactly: ratio chosen so kappa = 1.
  const double ratio = std::exp(3.0 * std::sqrt(2.0 / (1.0 - 0.81)));
  CHECK(elicit_kappa_phi(ratio, 0.9).exact == doctest::Approx(1.0).epsilon(1e-12));

  auto [chi, theta] = elicit_kappa_chi_theta(1000.0, 0.9);
  CHECK(chi.rounded == doctest::Approx(1.25).epsilon(1e-14));
  CHECK(theta.rounded == doctest::Approx(0.25).epsilon(1e-14));
  // Equal-attribution identity before rounding.
  CHECK(chi.exact == doctest::Approx(theta.exact / (1.0 - 0.81)).epsilon(1e-12));

  auto [chi0, theta0] = elicit_kappa_chi_theta(1000.0, 0.0);
  const double expected = std::pow(std::log(1000.0) / 3.0, 2) / 4.0;
  CHECK(chi0.exact == doctest::Approx(expected).epsilon(1e-12));
  CHECK(theta0.exact == doctest::Approx(expected).epsilon(1e-12));

  CHECK_THROWS_AS(elicit_kappa_phi(1.0, 0.9), model_error);
  CHECK_THROWS_AS(elicit_kappa_phi(100.0, 1.0), model_error);
  CHECK_THROWS_AS(elicit_kappa_chi_theta(0.5, 0.9), model_error);
}

TEST_CASE("DiSC psi is assembled from chi + theta on demand") {
  const ModelSpec spec = small_disc_spec();
  const LatentState state = oracles::random_state(spec, 1.0, 23);
  for (int k = 0; k < spec.K; ++k)
    for (int t = 0; t < spec.T; ++t) {
      const VectorXd expected = state.chi.col(k) + state.theta.col(t);
      CHECK((state.psi_col(k, t) - expected).cwiseAbs().maxCoeff() == 0.0);
    }
}
