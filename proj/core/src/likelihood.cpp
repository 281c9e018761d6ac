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

#include "disc/likelihood.hpp"

#include <cmath>
#include <numeric>

namespace disc {

double snippet_log_likelihood_given_sense(const Snippet& snippet, int k,
                                          const ProbabilityArrays& probs) {
  const auto logpsi = probs.log_psi_col(k, snippet.time);
  double total = 0.0;
  for (int w : snippet.words) total += logpsi[w];
  return total;
}

VectorXd sense_posterior(const Snippet& snippet,
                         const ProbabilityArrays& probs) {
  const int K = probs.K;
  VectorXd logw = probs.log_phi_col(snippet.genre, snippet.time);
  for (int k = 0; k < K; ++k)
    logw[k] += snippet_log_likelihood_given_sense(snippet, k, probs);
  const double lse = log_sum_exp(logw);
  return (logw.array() - lse).exp();
}

double log_marginal_likelihood(const SnippetCorpus& corpus,
                               const ProbabilityArrays& probs) {
  const int K = probs.K;
  double total = 0.0;
  VectorXd logw(K);
  for (const Snippet& s : corpus.snippets) {
    logw = probs.log_phi_col(s.genre, s.time);
    for (int k = 0; k < K; ++k)
      logw[k] += snippet_log_likelihood_given_sense(s, k, probs);
    total += log_sum_exp(logw);
  }
  return total;
}

double log_joint_posterior(const SnippetCorpus& corpus,
                           const LatentState& state,
                           const std::vector<int>& assignment,
                           const ModelSpec& spec) {
  const CountTables tables = count_tables(corpus, spec.K, assignment);
  const ProbabilityArrays probs = derive_probability_arrays(state, spec);
  double total = log_prior(state, spec);
  for (int t = 0; t < spec.T; ++t) {
    for (int g = 0; g < spec.G; ++g)
      for (int k = 0; k < spec.K; ++k) {
        const int n = tables.snippets_at(k, g, t);
        if (n > 0) total += n * probs.log_phi_col(g, t)[k];
      }
    for (int k = 0; k < spec.K; ++k) {
      const auto logpsi = probs.log_psi_col(k, t);
      for (int v = 0; v < spec.V; ++v) {
        const int n = tables.words_at(v, k, t);
        if (n > 0) total += n * logpsi[v];
      }
    }
  }
  return total;
}

SliceWorkspace::SliceWorkspace(const SnippetCorpus& corpus,
                               const CorpusIndex& index,
                               std::vector<int> snippets)
    : corpus_(&corpus), index_(&index), snippets_(std::move(snippets)) {}

void SliceWorkspace::refresh_word_loglik(const ProbabilityArrays& probs) {
  const int K = probs.K;
  const int n = size();
  a_.resize(K, n);
  for (int i = 0; i < n; ++i) {
    const int d = snippets_[i];
    const Snippet& s = corpus_->snippets[d];
    const auto& bag = index_->bag(d);
    for (int k = 0; k < K; ++k) {
      const auto logpsi = probs.log_psi_col(k, s.time);
      double acc = 0.0;
      for (const auto& wc : bag) acc += wc.count * logpsi[wc.word];
      a_(k, i) = acc;
    }
  }
}

void SliceWorkspace::refresh_word_loglik_for_sense(
    const ProbabilityArrays& probs, int k) {
  const int n = size();
  if (a_.cols() != n) {
    refresh_word_loglik(probs);
    return;
  }
  for (int i = 0; i < n; ++i) {
    const int d = snippets_[i];
    const Snippet& s = corpus_->snippets[d];
    const auto logpsi = probs.log_psi_col(k, s.time);
    double acc = 0.0;
    for (const auto& wc : index_->bag(d)) acc += wc.count * logpsi[wc.word];
    a_(k, i) = acc;
  }
}

double SliceWorkspace::log_likelihood(const ProbabilityArrays& probs) {
  const int K = probs.K;
  const int n = size();
  r_.resize(K, n);
  double total = 0.0;
  VectorXd logw(K);
  for (int i = 0; i < n; ++i) {
    const Snippet& s = corpus_->snippets[snippets_[i]];
    logw = probs.log_phi_col(s.genre, s.time) + a_.col(i);
    const double lse = log_sum_exp(logw);
    total += lse;
    r_.col(i) = (logw.array() - lse).exp();
  }
  return total;
}

VectorXd SliceWorkspace::grad_phi(const ProbabilityArrays& probs, int g,
                                  int t) const {
  VectorXd grad = r_.rowwise().sum();
  grad -= static_cast<double>(size()) * probs.phi_col(g, t);
  return grad;
}

VectorXd SliceWorkspace::grad_psi(const ProbabilityArrays& probs, int k,
                                  int t) const {
  const int V = probs.V;
  VectorXd grad = VectorXd::Zero(V);
  double weighted_length = 0.0;
  for (int i = 0; i < size(); ++i) {
    const int d = snippets_[i];
    const double rk = r_(k, i);
    if (rk == 0.0) continue;
    for (const auto& wc : index_->bag(d)) grad[wc.word] += rk * wc.count;
    weighted_length += rk * index_->snippet_length(d);
  }
  grad -= weighted_length * probs.psi_col(k, t);
  return grad;
}

VectorXd SliceWorkspace::grad_theta(const ProbabilityArrays& probs,
                                    int t) const {
  const int V = probs.V;
  const int K = probs.K;
  VectorXd grad = VectorXd::Zero(V);
  VectorXd weighted_length = VectorXd::Zero(K);
  for (int i = 0; i < size(); ++i) {
    const int d = snippets_[i];
    for (const auto& wc : index_->bag(d)) grad[wc.word] += wc.count;
    weighted_length += index_->snippet_length(d) * r_.col(i);
  }
  for (int k = 0; k < K; ++k)
    grad -= weighted_length[k] * probs.psi_col(k, t);
  return grad;
}

VectorXd SliceWorkspace::grad_chi(const SnippetCorpus& corpus,
                                  const ProbabilityArrays& probs,
                                  int k) const {
  const int V = probs.V;
  VectorXd grad = VectorXd::Zero(V);
  VectorXd weighted_length = VectorXd::Zero(probs.T);
  for (int i = 0; i < size(); ++i) {
    const int d = snippets_[i];
    const Snippet& s = corpus.snippets[d];
    const double rk = r_(k, i);
    if (rk == 0.0) continue;
    for (const auto& wc : index_->bag(d)) grad[wc.word] += rk * wc.count;
    weighted_length[s.time] += rk * index_->snippet_length(d);
  }
  for (int t = 0; t < probs.T; ++t)
    if (weighted_length[t] != 0.0)
      grad -= weighted_length[t] * probs.psi_col(k, t);
  return grad;
}

namespace {

SliceWorkspace make_ready(const SnippetCorpus& corpus,
                          const CorpusIndex& index,
                          const ProbabilityArrays& probs,
                          std::vector<int> snippets) {
  SliceWorkspace ws(corpus, index, std::move(snippets));
  ws.refresh_word_loglik(probs);
  ws.log_likelihood(probs);
  return ws;
}

std::vector<int> all_snippets(const SnippetCorpus& corpus) {
  std::vector<int> ids(corpus.size());
  std::iota(ids.begin(), ids.end(), 0);
  return ids;
}

}  // namespace

VectorXd grad_phi_loglik(const SnippetCorpus& corpus, const CorpusIndex& index,
                         const ProbabilityArrays& probs, int g, int t) {
  auto ws = make_ready(corpus, index, probs, index.cell(g, t));
  return ws.grad_phi(probs, g, t);
}

VectorXd grad_psi_loglik(const SnippetCorpus& corpus, const CorpusIndex& index,
                         const ProbabilityArrays& probs, int k, int t) {
  auto ws = make_ready(corpus, index, probs, index.period(t));
  return ws.grad_psi(probs, k, t);
}

VectorXd grad_theta_loglik(const SnippetCorpus& corpus,
                           const CorpusIndex& index,
                           const ProbabilityArrays& probs, int t) {
  auto ws = make_ready(corpus, index, probs, index.period(t));
  return ws.grad_theta(probs, t);
}

VectorXd grad_chi_loglik(const SnippetCorpus& corpus, const CorpusIndex& index,
                         const ProbabilityArrays& probs, int k) {
  auto ws = make_ready(corpus, index, probs, all_snippets(corpus));
  return ws.grad_chi(corpus, probs, k);
}

}  // namespace disc
