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

#include <algorithm>
#include <random>

#include "disc/likelihood.hpp"
#include "oracles.hpp"

using namespace disc;

namespace {

struct Setup {
  ModelSpec spec;
  SnippetCorpus corpus;
  LatentState state;
  ProbabilityArrays probs;
  CorpusIndex index;
};

Setup make_setup(Family family, int D, int V, int K, int T, int G,
                 std::uint64_t seed, double scale = 0.8) {
  Setup s;
  s.spec.family = family;
  s.spec.K = K;
  s.spec.V = V;
  s.spec.T = T;
  s.spec.G = G;
  if (family == Family::GASC) s.spec.hyper = GascHyperparams{};
  s.corpus = oracles::random_corpus(D, V, T, G, 0, 8, seed);
  s.state = oracles::random_state(s.spec, scale, seed + 1);
  s.probs = derive_probability_arrays(s.state, s.spec);
  s.index = CorpusIndex(s.corpus, G, T);
  return s;
}

}  // namespace

TEST_CASE("snippet likelihood: empty product and single word") {
  Setup s = make_setup(Family::DiSC, 1, 4, 2, 1, 1, 3);
  Snippet empty;
  empty.id = "e";
  CHECK(snippet_log_likelihood_given_sense(empty, 0, s.probs) == 0.0);

  // V = 4 all-zero word parameters give psi~ = 1/4 exactly.
  s.state.theta.setZero();
  s.state.chi.setZero();
  s.probs = derive_probability_arrays(s.state, s.spec);
  Snippet one;
  one.id = "o";
  one.words = {2};
  CHECK(snippet_log_likelihood_given_sense(one, 1, s.probs) ==
        doctest::Approx(std::log(0.25)).epsilon(1e-14));
}

TEST_CASE("snippet likelihood matches a linear-space oracle on short snippets") {
  const Setup s = make_setup(Family::DiSC, 20, 12, 3, 2, 2, 5);
  for (const Snippet& snippet : s.corpus.snippets) {
    if (snippet.length() > 5) continue;
    for (int k = 0; k < s.spec.K; ++k) {
      const double expected =
          oracles::linear_space_snippet_likelihood(snippet, k, s.probs);
      CHECK(snippet_log_likelihood_given_sense(snippet, k, s.probs) ==
            doctest::Approx(expected).epsilon(1e-10));
    }
  }
}

TEST_CASE("marginal likelihood collapses when senses are identical") {
  Setup s = make_setup(Family::DiSC, 1, 6, 2, 1, 1, 7);
  s.state.chi.setZero();  // identical word distributions across senses
  s.state.phi.setZero();  // phi~ = (1/2, 1/2)
  s.probs = derive_probability_arrays(s.state, s.spec);
  const Snippet& d = s.corpus.snippets[0];
  double expected = 0.0;
  for (int w : d.words) expected += s.probs.log_psi_col(0, d.time)[w];
  CHECK(log_marginal_likelihood(s.corpus, s.probs) ==
        doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("marginal likelihood equals exhaustive enumeration") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const int K = seed % 2 == 0 ? 3 : 2;
    const int D = K == 3 ? 6 : 8;
    const Setup s = make_setup(Family::DiSC, D, 10, K, 2, 2, seed * 13);
    const double direct = log_marginal_likelihood(s.corpus, s.probs);
    const double enumerated = oracles::enumerate_log_marginal(s.corpus, s.probs);
    CHECK(direct == doctest::Approx(enumerated).epsilon(1e-12));
    CHECK(std::abs(direct - enumerated) < 1e-10);
  }
}

TEST_CASE("marginal likelihood is additive over snippets") {
  Setup s = make_setup(Family::DiSC, 9, 10, 2, 2, 1, 11);
  SnippetCorpus head = s.corpus;
  head.snippets.pop_back();
  SnippetCorpus tail = s.corpus;
  tail.snippets = {s.corpus.snippets.back()};
  CHECK(log_marginal_likelihood(s.corpus, s.probs) ==
        doctest::Approx(log_marginal_likelihood(head, s.probs) +
                        log_marginal_likelihood(tail, s.probs))
            .epsilon(1e-12));
}

TEST_CASE("marginal likelihood is permutation invariant") {
  Setup s = make_setup(Family::GASC, 15, 12, 3, 2, 2, 13);
  const double base = log_marginal_likelihood(s.corpus, s.probs);
  SnippetCorpus shuffled = s.corpus;
  std::mt19937 gen(99);
  std::shuffle(shuffled.snippets.begin(), shuffled.snippets.end(), gen);
  for (Snippet& sn : shuffled.snippets)
    std::shuffle(sn.words.begin(), sn.words.end(), gen);
  CHECK(log_marginal_likelihood(shuffled, s.probs) ==
        doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("sense posterior: empty snippet returns the prevalence column") {
  const Setup s = make_setup(Family::DiSC, 1, 5, 3, 2, 2, 17);
  Snippet empty;
  empty.id = "e";
  empty.time = 1;
  empty.genre = 0;
  const VectorXd post = sense_posterior(empty, s.probs);
  CHECK((post - s.probs.phi_col(0, 1)).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("sense posterior: identical senses return the prevalence column") {
  Setup s = make_setup(Family::DiSC, 1, 5, 3, 1, 1, 19);
  s.state.chi.setZero();
  s.probs = derive_probability_arrays(s.state, s.spec);
  Snippet d = s.corpus.snippets[0];
  const VectorXd post = sense_posterior(d, s.probs);
  CHECK((post - s.probs.phi_col(d.genre, d.time)).cwiseAbs().maxCoeff() <
        1e-12);
}

TEST_CASE("sense posterior matches hand arithmetic on a 3-word snippet") {
  const Setup s = make_setup(Family::DiSC, 1, 6, 2, 1, 1, 23);
  Snippet d;
  d.id = "x";
  d.words = {1, 4, 4};
  VectorXd weights(2);
  for (int k = 0; k < 2; ++k) {
    double w = s.probs.phi_col(0, 0)[k];
    for (int word : d.words) w *= s.probs.psi_col(k, 0)[word];
    weights[k] = w;
  }
  weights /= weights.sum();
  const VectorXd post = sense_posterior(d, s.probs);
  CHECK(post[0] == doctest::Approx(weights[0]).epsilon(1e-12));
  CHECK(post.sum() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("sense posterior is invariant to softmax shifts") {
  Setup s = make_setup(Family::GASC, 1, 8, 3, 1, 1, 29);
  const Snippet& d = s.corpus.snippets[0];
  const VectorXd base = sense_posterior(d, s.probs);
  LatentState shifted = s.state;
  shifted.phi.col(d.genre).array() += 5.5;
  shifted.psi.col(1).array() += -2.5;  // sense 1 at t=0
  const ProbabilityArrays probs2 = derive_probability_arrays(shifted, s.spec);
  CHECK((sense_posterior(d, probs2) - base).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("count tables") {
  SnippetCorpus corpus;
  corpus.V = 5;
  corpus.T = 2;
  corpus.G = 2;
  CHECK(count_tables(corpus, 3, {}).n_z.sum() == 0);

  Snippet s;
  s.id = "a";
  s.time = 1;
  s.genre = 0;
  s.words = {0, 3, 3};
  corpus.snippets.push_back(s);
  const CountTables tables = count_tables(corpus, 3, {1});
  CHECK(tables.snippets_at(1, 0, 1) == 1);
  CHECK(tables.n_z.sum() == 1);
  CHECK(tables.words_at(0, 1, 1) == 1);
  CHECK(tables.words_at(3, 1, 1) == 2);
  CHECK(tables.n_wz.sum() == 3);

  CHECK_THROWS_AS(count_tables(corpus, 3, {}), model_error);
  CHECK_THROWS_AS(count_tables(corpus, 3, {5}), model_error);
}

TEST_CASE("count tables reconcile with corpus totals") {
  const SnippetCorpus corpus = oracles::random_corpus(40, 9, 3, 2, 0, 7, 31);
  Rng rng(7);
  std::vector<int> z(corpus.size());
  for (int& k : z) k = static_cast<int>(rng.uniform() * 3);
  const CountTables tables = count_tables(corpus, 3, z);
  CHECK(tables.n_z.sum() == corpus.size());
  CHECK(tables.n_wz.sum() == corpus.total_tokens());
  for (int t = 0; t < corpus.T; ++t)
    for (int g = 0; g < corpus.G; ++g) {
      int expected = 0;
      for (const Snippet& s : corpus.snippets)
        expected += (s.time == t && s.genre == g) ? 1 : 0;
      int got = 0;
      for (int k = 0; k < 3; ++k) got += tables.snippets_at(k, g, t);
      CHECK(got == expected);
    }
}

TEST_CASE("gradients match finite differences (DiSC)") {
  const Setup s = make_setup(Family::DiSC, 25, 12, 3, 3, 2, 37);
  const ModelSpec spec = s.spec;
  const SnippetCorpus& corpus = s.corpus;
  const CorpusIndex& index = s.index;

  for (int t = 0; t < spec.T; ++t)
    for (int g = 0; g < spec.G; ++g) {
      const VectorXd grad = grad_phi_loglik(corpus, index, s.probs, g, t);
      CHECK(std::abs(grad.sum()) < 1e-9);  // responsibilities sum to counts
      LatentState state = s.state;
      auto f = [&](const VectorXd& x) {
        LatentState moved = state;
        moved.phi.col(g + spec.G * t) = x;
        return log_marginal_likelihood(corpus,
                                       derive_probability_arrays(moved, spec));
      };
      const VectorXd fd = oracles::finite_difference_gradient(
          f, state.phi.col(g + spec.G * t));
      CHECK(oracles::relative_error(grad, fd) < 1e-6);
    }

  for (int t = 0; t < spec.T; ++t) {
    const VectorXd grad = grad_theta_loglik(corpus, index, s.probs, t);
    LatentState state = s.state;
    auto f = [&](const VectorXd& x) {
      LatentState moved = state;
      moved.theta.col(t) = x;
      return log_marginal_likelihood(corpus,
                                     derive_probability_arrays(moved, spec));
    };
    const VectorXd fd =
        oracles::finite_difference_gradient(f, state.theta.col(t));
    CHECK(oracles::relative_error(grad, fd) < 1e-6);

    // Compositional identity: grad_theta = sum_k grad_psi.
    VectorXd summed = VectorXd::Zero(spec.V);
    for (int k = 0; k < spec.K; ++k)
      summed += grad_psi_loglik(corpus, index, s.probs, k, t);
    CHECK((grad - summed).cwiseAbs().maxCoeff() < 1e-9);
  }

  for (int k = 0; k < spec.K; ++k) {
    const VectorXd grad = grad_chi_loglik(corpus, index, s.probs, k);
    LatentState state = s.state;
    auto f = [&](const VectorXd& x) {
      LatentState moved = state;
      moved.chi.col(k) = x;
      return log_marginal_likelihood(corpus,
                                     derive_probability_arrays(moved, spec));
    };
    const VectorXd fd = oracles::finite_difference_gradient(f, state.chi.col(k));
    CHECK(oracles::relative_error(grad, fd) < 1e-6);
  }
}

TEST_CASE("gradients match finite differences (GASC psi)") {
  const Setup s = make_setup(Family::GASC, 25, 10, 3, 3, 2, 41);
  for (int t = 0; t < s.spec.T; ++t)
    for (int k = 0; k < s.spec.K; ++k) {
      const VectorXd grad = grad_psi_loglik(s.corpus, s.index, s.probs, k, t);
      CHECK(std::abs(grad.sum()) < 1e-9);
      auto f = [&](const VectorXd& x) {
        LatentState moved = s.state;
        moved.psi.col(k + s.spec.K * t) = x;
        return log_marginal_likelihood(
            s.corpus, derive_probability_arrays(moved, s.spec));
      };
      const VectorXd fd = oracles::finite_difference_gradient(
          f, s.state.psi.col(k + s.spec.K * t));
      CHECK(oracles::relative_error(grad, fd) < 1e-6);
    }
}

TEST_CASE("gradients on empty slices are zero") {
  Setup s = make_setup(Family::DiSC, 4, 6, 2, 3, 2, 43);
  // Rebuild with every snippet at time 0 so slices at t=2 are empty.
  for (Snippet& sn : s.corpus.snippets) sn.time = 0;
  s.index = CorpusIndex(s.corpus, s.spec.G, s.spec.T);
  CHECK(grad_phi_loglik(s.corpus, s.index, s.probs, 0, 2).cwiseAbs().maxCoeff() ==
        0.0);
  CHECK(grad_theta_loglik(s.corpus, s.index, s.probs, 2).cwiseAbs().maxCoeff() ==
        0.0);
  SnippetCorpus empty;
  empty.V = s.corpus.V;
  empty.T = s.corpus.T;
  empty.G = s.corpus.G;
  const CorpusIndex empty_index(empty, empty.G, empty.T);
  CHECK(grad_chi_loglik(empty, empty_index, s.probs, 1).cwiseAbs().maxCoeff() ==
        0.0);
}

TEST_CASE("grad_chi at T=1 equals grad_psi at the single period") {
  const Setup s = make_setup(Family::DiSC, 18, 9, 2, 1, 1, 47);
  for (int k = 0; k < s.spec.K; ++k) {
    const VectorXd chi_grad = grad_chi_loglik(s.corpus, s.index, s.probs, k);
    const VectorXd psi_grad = grad_psi_loglik(s.corpus, s.index, s.probs, k, 0);
    CHECK((chi_grad - psi_grad).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("log joint posterior: count form, product form, and enumeration") {
  const Setup s = make_setup(Family::DiSC, 6, 8, 2, 2, 1, 53);
  Rng rng(5);
  std::vector<int> z(s.corpus.size());
  for (int& k : z) k = static_cast<int>(rng.uniform() * 2);

  // Count form against the snippet-wise product form.
  double product_form = log_prior(s.state, s.spec);
  for (int d = 0; d < s.corpus.size(); ++d) {
    const Snippet& sn = s.corpus.snippets[d];
    product_form += s.probs.log_phi_col(sn.genre, sn.time)[z[d]];
    product_form += snippet_log_likelihood_given_sense(sn, z[d], s.probs);
  }
  CHECK(log_joint_posterior(s.corpus, s.state, z, s.spec) ==
        doctest::Approx(product_form).epsilon(1e-12));

  // Summing the joint over all assignments recovers prior + marginal.
  std::vector<int> assignment(s.corpus.size(), 0);
  std::vector<double> terms;
  for (;;) {
    terms.push_back(log_joint_posterior(s.corpus, s.state, assignment, s.spec));
    int d = 0;
    while (d < s.corpus.size() && ++assignment[d] == s.spec.K)
      assignment[d++] = 0;
    if (d == s.corpus.size()) break;
  }
  const double total =
      log_sum_exp(std::span<const double>(terms.data(), terms.size()));
  const double expected =
      log_prior(s.state, s.spec) + log_marginal_likelihood(s.corpus, s.probs);
  CHECK(total == doctest::Approx(expected).epsilon(1e-10));

  // Missing labels are rejected.
  std::vector<int> short_z(s.corpus.size() - 1, 0);
  CHECK_THROWS_AS(log_joint_posterior(s.corpus, s.state, short_z, s.spec),
                  model_error);
}
