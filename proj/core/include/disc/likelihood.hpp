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

#ifndef DISC_LIKELIHOOD_HPP
#define DISC_LIKELIHOOD_HPP

#include <vector>

#include "disc/corpus.hpp"
#include "disc/model.hpp"

namespace disc {

// All snippet likelihoods are additive in log space; word probabilities are
// never multiplied in linear space.

/// sum_i log psi~[w_i, k, tau_d]; 0 for an empty snippet.
double snippet_log_likelihood_given_sense(const Snippet& snippet, int k,
                                          const ProbabilityArrays& probs);

/// Posterior over senses for one snippet given the current probability
/// arrays; reduces to the prevalence column when the snippet is empty.
VectorXd sense_posterior(const Snippet& snippet, const ProbabilityArrays& probs);

/// Marginal log likelihood of the corpus with sense labels summed out:
/// sum_d log sum_k phi~[k,g_d,t_d] exp(a_dk).
double log_marginal_likelihood(const SnippetCorpus& corpus,
                               const ProbabilityArrays& probs);

/// Unnormalised log joint of (state, z): prior plus the count-form
/// sum of N^z log phi~ and N^{W,z} log psi~ terms.
double log_joint_posterior(const SnippetCorpus& corpus,
                           const LatentState& state,
                           const std::vector<int>& assignment,
                           const ModelSpec& spec);

/// Per-slice scratch holding, for each snippet of the slice, the per-sense
/// word log likelihoods a_dk and the responsibilities r_dk (the sense
/// posterior weights). Responsibilities are the shared subexpression of all
/// four likelihood gradients, so they are computed once per state and reused.
class SliceWorkspace {
 public:
  /// `snippets` are indices into the corpus; all must share one time period
  /// unless the slice is the whole corpus (chi updates).
  SliceWorkspace(const SnippetCorpus& corpus, const CorpusIndex& index,
                 std::vector<int> snippets);

  int size() const { return static_cast<int>(snippets_.size()); }
  const std::vector<int>& snippets() const { return snippets_; }

  /// Recomputes a_dk for every snippet and sense from the given arrays.
  void refresh_word_loglik(const ProbabilityArrays& probs);

  /// Recomputes a_dk for sense k only (psi-column moves under GASC).
  void refresh_word_loglik_for_sense(const ProbabilityArrays& probs, int k);

  /// Log likelihood of the slice under prevalence columns taken from probs,
  /// with responsibilities refreshed as a side effect.
  double log_likelihood(const ProbabilityArrays& probs);

  /// d log p / d phi^{g,t}_j = sum_d r_dj - phi~_j * n, restricted to the
  /// snippets of the slice (callers pass a slice holding exactly D(g,t)).
  VectorXd grad_phi(const ProbabilityArrays& probs, int g, int t) const;

  /// d log p / d psi^{k,t}_j = sum_d r_dk (c_d(j) - L_d psi~_j^{k,t}).
  VectorXd grad_psi(const ProbabilityArrays& probs, int k, int t) const;

  /// d log p / d theta^t_j = sum_d (c_d(j) - L_d sum_k r_dk psi~_j^{k,t}).
  VectorXd grad_theta(const ProbabilityArrays& probs, int t) const;

  /// d log p / d chi^k_j accumulated over all time periods in the slice.
  VectorXd grad_chi(const SnippetCorpus& corpus,
                    const ProbabilityArrays& probs, int k) const;

  const MatrixXd& responsibilities() const { return r_; }
  const MatrixXd& word_loglik() const { return a_; }

 private:
  const SnippetCorpus* corpus_;
  const CorpusIndex* index_;
  std::vector<int> snippets_;
  MatrixXd a_;  // K x n word log likelihoods
  MatrixXd r_;  // K x n responsibilities (valid after log_likelihood)
};

// Standalone gradient entry points matching the slice definitions above;
// thin wrappers over SliceWorkspace for tests and one-shot callers.
VectorXd grad_phi_loglik(const SnippetCorpus& corpus, const CorpusIndex& index,
                         const ProbabilityArrays& probs, int g, int t);
VectorXd grad_psi_loglik(const SnippetCorpus& corpus, const CorpusIndex& index,
                         const ProbabilityArrays& probs, int k, int t);
VectorXd grad_theta_loglik(const SnippetCorpus& corpus,
                           const CorpusIndex& index,
                           const ProbabilityArrays& probs, int t);
VectorXd grad_chi_loglik(const SnippetCorpus& corpus, const CorpusIndex& index,
                         const ProbabilityArrays& probs, int k);

}  // namespace disc

#endif  // DISC_LIKELIHOOD_HPP
