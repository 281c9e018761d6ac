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

#include "disc/simulate.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/distributions/fisher_f.hpp>
#include <cmath>
#include <numeric>

namespace disc {

void SimConfig::validate() const {
  spec.validate();
  if (window_length < 1) throw model_error("window length must be >= 1");
  if (q_stopword < 0 || q_uninformative < 0 ||
      q_stopword + q_uninformative >= 1.0)
    throw model_error("q_SW + q_U must be < 1 with nonnegative parts");
  if (snippets_per_period < 0)
    throw model_error("snippets_per_period must be nonnegative");
  if (genre_mix.size() != 0) {
    if (genre_mix.size() != spec.G)
      throw model_error("genre mix length must equal G");
    if (genre_mix.minCoeff() < 0 ||
        std::abs(genre_mix.sum() - 1.0) > 1e-9)
      throw model_error("genre mix must be a probability vector");
  }
  if (!(improper_start_sd > 0))
    throw model_error("improper_start_sd must be positive");
}

LatentState simulate_prior(const ModelSpec& spec, Rng& rng,
                           double improper_start_sd) {
  spec.validate();
  LatentState state = LatentState::zeros(spec);
  auto fill_chain = [&](Eigen::Ref<MatrixXd> series, double start_sd,
                        double alpha, double kappa) {
    const double inc_sd = std::sqrt(kappa);
    for (int i = 0; i < series.rows(); ++i)
      series(i, 0) = start_sd * rng.normal();
    for (int t = 1; t < series.cols(); ++t)
      for (int i = 0; i < series.rows(); ++i)
        series(i, t) = alpha * series(i, t - 1) + inc_sd * rng.normal();
  };
  if (spec.is_disc()) {
    const auto& h = spec.disc();
    MatrixXd series(spec.K, spec.T);
    for (int g = 0; g < spec.G; ++g) {
      fill_chain(series,
                 std::sqrt(h.kappa_phi / (1 - h.alpha_phi * h.alpha_phi)),
                 h.alpha_phi, h.kappa_phi);
      for (int t = 0; t < spec.T; ++t)
        state.phi.col(g + spec.G * t) = series.col(t);
    }
    fill_chain(state.theta,
               std::sqrt(h.kappa_theta / (1 - h.alpha_theta * h.alpha_theta)),
               h.alpha_theta, h.kappa_theta);
    const double chi_sd = std::sqrt(h.kappa_chi);
    for (int k = 0; k < spec.K; ++k)
      for (int v = 0; v < spec.V; ++v) state.chi(v, k) = chi_sd * rng.normal();
  } else {
    const auto& h = spec.gasc();
    state.kappa_phi = rng.inverse_gamma(h.a, h.b);
    MatrixXd series(spec.K, spec.T);
    for (int g = 0; g < spec.G; ++g) {
      fill_chain(series, improper_start_sd, 1.0, 2.0 * state.kappa_phi);
      for (int t = 0; t < spec.T; ++t)
        state.phi.col(g + spec.G * t) = series.col(t);
    }
    MatrixXd wseries(spec.V, spec.T);
    for (int k = 0; k < spec.K; ++k) {
      fill_chain(wseries, improper_start_sd, 1.0, 2.0 * h.kappa_psi);
      for (int t = 0; t < spec.T; ++t)
        state.psi.col(k + spec.K * t) = wseries.col(t);
    }
  }
  return state;
}

SimOutput simulate_observations(const LatentState& state, const SimConfig& sim,
                                Rng& rng) {
  sim.validate();
  const ModelSpec& spec = sim.spec;
  state.check_dims(spec);
  SimOutput out;
  out.true_state = state;
  out.true_probs = derive_probability_arrays(state, spec);
  out.corpus.V = spec.V;
  out.corpus.T = spec.T;
  out.corpus.G = spec.G;
  out.corpus.vocab.resize(spec.V);
  for (int v = 0; v < spec.V; ++v)
    out.corpus.vocab[v] = "w" + std::to_string(v + 1);
  out.corpus.time_labels.resize(spec.T);
  for (int t = 0; t < spec.T; ++t)
    out.corpus.time_labels[t] = std::to_string(t + 1);
  out.corpus.genre_labels.resize(spec.G);
  for (int g = 0; g < spec.G; ++g)
    out.corpus.genre_labels[g] = "g" + std::to_string(g + 1);

  VectorXd mix = sim.genre_mix;
  if (mix.size() == 0) mix = VectorXd::Constant(spec.G, 1.0 / spec.G);
  const double keep_prob = 1.0 - sim.q_stopword - sim.q_uninformative;

  int counter = 0;
  for (int t = 0; t < spec.T; ++t) {
    for (int j = 0; j < sim.snippets_per_period; ++j) {
      Snippet s;
      s.id = "s" + std::to_string(++counter);
      s.time = t;
      s.genre = rng.categorical(mix, spec.G);
      const int length = rng.binomial(sim.window_length, keep_prob);
      const auto phi_col = out.true_probs.phi_col(s.genre, t);
      const int z = rng.categorical(phi_col, spec.K);
      const auto psi_col = out.true_probs.psi_col(z, t);
      s.words.reserve(length);
      for (int w = 0; w < length; ++w)
        s.words.push_back(rng.categorical(psi_col, spec.V));
      out.truth.labels[s.id] = z;
      out.truth_by_index.push_back(z);
      out.corpus.snippets.push_back(std::move(s));
    }
  }
  return out;
}

SimOutput simulate(const SimConfig& sim) {
  Rng rng(sim.seed);
  const LatentState state =
      simulate_prior(sim.spec, rng, sim.improper_start_sd);
  return simulate_observations(state, sim, rng);
}

namespace {

SnippetCorpus apply_keep_set(const SnippetCorpus& corpus,
                             const std::vector<char>& keep) {
  std::vector<int> remap(corpus.V, -1);
  int next = 0;
  for (int v = 0; v < corpus.V; ++v)
    if (keep[v]) remap[v] = next++;
  if (next == 0)
    throw model_error("registration filter removed the whole vocabulary");
  SnippetCorpus filtered;
  filtered.V = next;
  filtered.T = corpus.T;
  filtered.G = corpus.G;
  filtered.time_labels = corpus.time_labels;
  filtered.genre_labels = corpus.genre_labels;
  if (!corpus.vocab.empty()) {
    filtered.vocab.resize(next);
    for (int v = 0; v < corpus.V; ++v)
      if (remap[v] >= 0) filtered.vocab[remap[v]] = corpus.vocab[v];
  }
  int tokens = 0;
  for (const Snippet& s : corpus.snippets) {
    Snippet copy;
    copy.id = s.id;
    copy.time = s.time;
    copy.genre = s.genre;
    for (int w : s.words)
      if (remap[w] >= 0) copy.words.push_back(remap[w]);
    tokens += copy.length();
    filtered.snippets.push_back(std::move(copy));
  }
  if (tokens == 0)
    throw model_error("registration filter left an empty corpus");
  return filtered;
}

}  // namespace

SnippetCorpus registration_filter(const SnippetCorpus& corpus, FilterMode mode,
                                  double share) {
  corpus.validate();
  std::vector<long> freq(corpus.V, 0);
  long total = 0;
  for (const Snippet& s : corpus.snippets)
    for (int w : s.words) {
      freq[w] += 1;
      total += 1;
    }
  std::vector<char> keep(corpus.V, 0);
  if (mode == FilterMode::HapaxRemoval) {
    for (int v = 0; v < corpus.V; ++v) keep[v] = freq[v] != 1;
  } else {
    if (!(share > 0.0 && share <= 1.0))
      throw model_error("top-share must lie in (0, 1]");
    std::vector<int> order(corpus.V);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      if (freq[a] != freq[b]) return freq[a] > freq[b];
      return a < b;
    });
    long covered = 0;
    const double target = share * static_cast<double>(total);
    for (int v : order) {
      if (static_cast<double>(covered) >= target) break;
      keep[v] = 1;
      covered += freq[v];
    }
  }
  return apply_keep_set(corpus, keep);
}

InteractionResult interaction_level(const SnippetCorpus& corpus,
                                    const GroundTruth& truth, int K,
                                    double level) {
  InteractionResult result;
  result.tested = corpus.V;
  if (K < 2 || corpus.T < 2) return result;  // no interaction terms to test

  std::vector<int> labels(corpus.size());
  for (int d = 0; d < corpus.size(); ++d) {
    const Snippet& s = corpus.snippets[d];
    if (!truth.has(s.id))
      throw model_error("interaction_level: truth must cover the corpus");
    labels[d] = truth.label(s.id);
  }
  const CountTables tables = count_tables(corpus, K, labels);

  // Rows are the (k, t) blocks with tokens; responses are the empirical
  // word probabilities within each block.
  struct Row {
    int k, t;
    double scale;  // 1 / column token total
  };
  std::vector<Row> rows;
  for (int t = 0; t < corpus.T; ++t)
    for (int k = 0; k < K; ++k) {
      const long column_total = tables.n_wz.col(k + K * t).sum();
      if (column_total > 0) rows.push_back({k, t, 1.0 / column_total});
    }
  const int n = static_cast<int>(rows.size());
  const int p_full = 2 * K;      // intercept, time, sense dummies, interactions
  const int p_null = K + 1;
  const int df_num = K - 1;
  const int df_den = n - p_full;
  if (df_den < 1) {
    result.insufficient = corpus.V;
    return result;
  }

  MatrixXd x_full = MatrixXd::Zero(n, p_full);
  MatrixXd x_null = MatrixXd::Zero(n, p_null);
  for (int i = 0; i < n; ++i) {
    const double time = corpus.T > 1
                            ? 2.0 * rows[i].t / (corpus.T - 1.0) - 1.0
                            : 0.0;
    x_full(i, 0) = 1.0;
    x_full(i, 1) = time;
    x_null(i, 0) = 1.0;
    x_null(i, 1) = time;
    for (int l = 1; l < K; ++l) {
      const double dummy = rows[i].k == l ? 1.0 : 0.0;
      x_full(i, 1 + l) = dummy;
      x_full(i, K + l) = time * dummy;
      x_null(i, 1 + l) = dummy;
    }
  }
  const auto qr_full = x_full.colPivHouseholderQr();
  const auto qr_null = x_null.colPivHouseholderQr();

  const boost::math::fisher_f_distribution<double> fdist(df_num, df_den);
  const double critical = boost::math::quantile(fdist, 1.0 - level);

  VectorXd y(n);
  for (int v = 0; v < corpus.V; ++v) {
    bool any = false;
    for (int i = 0; i < n; ++i) {
      y[i] = tables.words_at(v, rows[i].k, rows[i].t) * rows[i].scale;
      any = any || y[i] > 0.0;
    }
    if (!any) {
      ++result.insufficient;  // never observed: F-test undefined
      continue;
    }
    const double rss_full = (y - x_full * qr_full.solve(y)).squaredNorm();
    const double rss_null = (y - x_null * qr_null.solve(y)).squaredNorm();
    if (rss_full <= 0.0) {
      if (rss_null > 1e-14) ++result.significant;
      continue;
    }
    const double f =
        ((rss_null - rss_full) / df_num) / (rss_full / df_den);
    if (f > critical) ++result.significant;
  }
  result.lambda =
      static_cast<double>(result.significant) / std::max(result.tested, 1);
  return result;
}

SimOutput make_explicit_interaction_dataset(InteractionDesign design,
                                            std::uint64_t seed,
                                            int snippets_per_period) {
  ModelSpec spec;
  spec.family = Family::GASC;
  spec.K = 3;
  spec.V = 100;
  spec.T = 9;
  spec.G = 1;
  spec.hyper = GascHyperparams{};

  int designated = 60;
  double swing = 1.5;  // log peak-to-trough ratio of a designated trajectory
  switch (design) {
    case InteractionDesign::Ex1: designated = 60; swing = 1.5; break;
    case InteractionDesign::Ex2: designated = 60; swing = 3.0; break;
    case InteractionDesign::Ex3: designated = 100; swing = 3.5; break;
  }

  // Trajectories are built as probability weights, linear in t, with rising
  // and falling roles paired within each sense. The pairing keeps each
  // column's total weight constant over time, so words without a designated
  // trajectory keep exactly constant context probabilities.
  const double p_hi = 2.0 / spec.V;  // peak mass of a designated word
  const double p_lo = p_hi * std::exp(-swing);
  const double p_mid = 0.5 * (p_hi + p_lo);

  MatrixXd weights =
      MatrixXd::Constant(spec.V, spec.K * spec.T, 1.0 / spec.V);
  for (int v = 0; v < designated; ++v) {
    const int rising = v % spec.K;
    for (int k = 0; k < spec.K; ++k) {
      for (int t = 0; t < spec.T; ++t) {
        const double frac = t / (spec.T - 1.0);
        double w;
        if (k == rising) {
          w = p_lo + (p_hi - p_lo) * frac;
        } else if ((v / spec.K) % 2 == 0) {
          w = p_hi - (p_hi - p_lo) * frac;  // opposite direction
        } else {
          w = p_mid;
        }
        weights(v, k + spec.K * t) = w;
      }
    }
  }
  if (designated < spec.V) {
    // Give the remaining words the leftover mass, evenly.
    for (int k = 0; k < spec.K; ++k) {
      const double used = weights.col(k).head(designated).sum();
      const double rest = std::max(1.0 - used, 0.1) / (spec.V - designated);
      for (int t = 0; t < spec.T; ++t)
        for (int v = designated; v < spec.V; ++v)
          weights(v, k + spec.K * t) = rest;
    }
  }

  LatentState state = LatentState::zeros(spec);
  state.psi = weights.array().log();
  state.kappa_phi = 0.25;

  SimConfig sim;
  sim.spec = spec;
  sim.window_length = 10;
  sim.q_stopword = 0.0;
  sim.q_uninformative = 0.0;
  sim.snippets_per_period = snippets_per_period;
  sim.seed = seed;
  Rng rng(seed);
  return simulate_observations(state, sim, rng);
}

}  // namespace disc
