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
#include <cmath>

#include "disc/evaluate.hpp"
#include "disc/simulate.hpp"
#include "oracles.hpp"

using namespace disc;

TEST_CASE("Brier score baselines") {
  // Uniform predictor: 0.5 for K=2, 2/3 for K=3.
  {
    MatrixXd uniform = MatrixXd::Constant(2, 10, 0.5);
    std::vector<int> labels(10, 0);
    CHECK(brier_score(uniform, labels) == doctest::Approx(0.5).epsilon(1e-14));
  }
  {
    MatrixXd uniform = MatrixXd::Constant(3, 9, 1.0 / 3);
    std::vector<int> labels(9);
    for (int i = 0; i < 9; ++i) labels[i] = i % 3;
    CHECK(brier_score(uniform, labels) ==
          doctest::Approx(2.0 / 3).epsilon(1e-14));
  }
  // Perfect one-hot predictions score zero.
  {
    MatrixXd perfect = MatrixXd::Zero(3, 6);
    std::vector<int> labels(6);
    for (int i = 0; i < 6; ++i) {
      labels[i] = (i * 2) % 3;
      perfect(labels[i], i) = 1.0;
    }
    CHECK(brier_score(perfect, labels) == 0.0);
  }
  // Label coverage is enforced.
  MatrixXd p = MatrixXd::Constant(2, 3, 0.5);
  CHECK_THROWS_AS(brier_score(p, std::vector<int>{0, 1}), model_error);
  CHECK_THROWS_AS(brier_score(p, std::vector<int>{0, 1, 5}), model_error);
}

TEST_CASE("Brier score is minimised by the empirical class frequencies") {
  Rng rng(3);
  std::vector<int> labels(200);
  VectorXd freq = VectorXd::Zero(3);
  for (int& l : labels) {
    const double u = rng.uniform();
    l = u < 0.5 ? 0 : (u < 0.8 ? 1 : 2);
    freq[l] += 1.0;
  }
  freq /= 200.0;
  auto constant_score = [&](const VectorXd& q) {
    MatrixXd pred(3, 200);
    for (int d = 0; d < 200; ++d) pred.col(d) = q;
    return brier_score(pred, labels);
  };
  const double at_freq = constant_score(freq);
  for (int trial = 0; trial < 30; ++trial) {
    VectorXd q(3);
    for (int k = 0; k < 3; ++k) q[k] = rng.uniform();
    q /= q.sum();
    CHECK(constant_score(q) >= at_freq - 1e-12);
  }
}

TEST_CASE("align_senses recovers permutations") {
  MatrixXd dists(4, 3);
  dists << 0.7, 0.1, 0.2, 0.1, 0.6, 0.2, 0.1, 0.2, 0.5, 0.1, 0.1, 0.1;
  // Model senses are the truth in order (2, 0, 1).
  MatrixXd model(4, 3);
  model.col(0) = dists.col(2);
  model.col(1) = dists.col(0);
  model.col(2) = dists.col(1);
  const SenseAlignment alignment = align_senses(model, dists);
  CHECK(alignment.model_to_true == std::vector<int>{2, 0, 1});
  CHECK(alignment.total_divergence == doctest::Approx(0.0).epsilon(1e-12));

  // Swapped two-sense case.
  MatrixXd two_true(3, 2), two_model(3, 2);
  two_true << 0.8, 0.1, 0.1, 0.8, 0.1, 0.1;
  two_model.col(0) = two_true.col(1);
  two_model.col(1) = two_true.col(0);
  const SenseAlignment swapped = align_senses(two_model, two_true);
  CHECK(swapped.model_to_true == std::vector<int>{1, 0});
}

TEST_CASE("align_senses: planted noisy assignment and surplus senses") {
  Rng rng(7);
  const int V = 30, K = 4;
  MatrixXd truth(V, K);
  for (int k = 0; k < K; ++k) {
    VectorXd col(V);
    for (int v = 0; v < V; ++v) col[v] = 0.01 + (v % K == k ? 1.0 : 0.0);
    truth.col(k) = col / col.sum();
  }
  // Model = permuted truth + small noise, plus one extra noise sense.
  const std::vector<int> perm{3, 1, 0, 2};
  MatrixXd model(V, K + 1);
  for (int m = 0; m < K; ++m) {
    VectorXd col = truth.col(perm[m]);
    for (int v = 0; v < V; ++v) col[v] += 0.002 * rng.uniform();
    model.col(m) = col / col.sum();
  }
  VectorXd noise = VectorXd::Constant(V, 1.0 / V);
  model.col(K) = noise;
  const SenseAlignment alignment = align_senses(model, truth);
  for (int m = 0; m < K; ++m) CHECK(alignment.model_to_true[m] == perm[m]);
  CHECK(alignment.model_to_true[K] == -1);  // surplus sense left unmatched

  // Alignment cost is invariant under permuting the model input order.
  MatrixXd reordered(V, K + 1);
  reordered.col(0) = model.col(K);
  for (int m = 0; m < K; ++m) reordered.col(m + 1) = model.col(m);
  const SenseAlignment realigned = align_senses(reordered, truth);
  CHECK(realigned.total_divergence ==
        doctest::Approx(alignment.total_divergence).epsilon(1e-12));

  // More annotated senses than model senses cannot be injected.
  CHECK_THROWS_AS(align_senses(truth.leftCols(2), truth), model_error);
}

TEST_CASE("confusion statistics") {
  // Perfect labels.
  std::vector<int> truth{0, 0, 1, 1, 1};
  ConfusionStats perfect = confusion_stats(truth, truth, 0);
  CHECK(perfect.sensitivity == 1.0);
  CHECK(perfect.specificity == 1.0);
  CHECK(perfect.accuracy == 1.0);

  // Everything predicted positive.
  std::vector<int> all_pos(5, 0);
  ConfusionStats degenerate = confusion_stats(all_pos, truth, 0);
  CHECK(degenerate.sensitivity == 1.0);
  CHECK(degenerate.specificity == 0.0);

  // Hand-built 2x2: TP=3, FN=1, FP=2, TN=4.
  std::vector<int> t2{0, 0, 0, 0, 1, 1, 1, 1, 1, 1};
  std::vector<int> p2{0, 0, 0, 1, 0, 0, 1, 1, 1, 1};
  ConfusionStats stats = confusion_stats(p2, t2, 0);
  CHECK(stats.sensitivity == doctest::Approx(0.75));
  CHECK(stats.specificity == doctest::Approx(2.0 / 3));
  CHECK(stats.accuracy == doctest::Approx(0.7));
}

TEST_CASE("HPD intervals") {
  // Uniform grid on [0, 1]: width is about the mass.
  std::vector<double> grid(1001);
  for (int i = 0; i <= 1000; ++i) grid[i] = i / 1000.0;
  const HpdInterval uniform = hpd_interval(grid, 0.95);
  CHECK(uniform.upper - uniform.lower ==
        doctest::Approx(0.95).epsilon(0.005));

  // Standard normal draws: endpoints near +-1.96.
  Rng rng(5);
  std::vector<double> normals(100000);
  for (double& x : normals) x = rng.normal();
  const HpdInterval normal = hpd_interval(normals, 0.95);
  CHECK(std::abs(normal.lower + 1.96) < 0.03);
  CHECK(std::abs(normal.upper - 1.96) < 0.03);

  // Point mass collapses to zero width.
  std::vector<double> point(200, 3.25);
  const HpdInterval degenerate = hpd_interval(point, 0.95);
  CHECK(degenerate.lower == 3.25);
  CHECK(degenerate.upper == 3.25);

  // Mass property: the fraction inside is at least mass - 1/n.
  std::vector<double> skewed(5000);
  for (double& x : skewed) x = rng.exponential();
  const HpdInterval hpd = hpd_interval(skewed, 0.9);
  int inside = 0;
  for (double x : skewed)
    inside += (x >= hpd.lower && x <= hpd.upper) ? 1 : 0;
  CHECK(static_cast<double>(inside) / skewed.size() >=
        0.9 - 1.0 / skewed.size());

  std::vector<double> few(50, 1.0);
  CHECK_THROWS_AS(hpd_interval(few, 0.95), model_error);
}

TEST_CASE("empirical prevalence") {
  SnippetCorpus corpus;
  corpus.V = 2;
  corpus.T = 2;
  corpus.G = 1;
  corpus.snippets = {Snippet{"a", 0, 0, {0}}, Snippet{"b", 1, 0, {1}}};
  GroundTruth truth;
  truth.labels["a"] = 1;
  const MatrixXd prev = empirical_prevalence(truth, corpus, 3);
  CHECK(prev(0, 0) == 0.0);
  CHECK(prev(1, 0) == 1.0);
  CHECK(prev(2, 0) == 0.0);
  // Unlabelled block is absent, not 0/0.
  CHECK(std::isnan(prev(0, 1)));

  // Documented block counts: 193 vs 89 snippets gives (0.684, 0.316).
  SnippetCorpus bank;
  bank.V = 1;
  bank.T = 1;
  bank.G = 1;
  GroundTruth bank_truth;
  for (int i = 0; i < 282; ++i) {
    Snippet s;
    s.id = "s" + std::to_string(i);
    bank.snippets.push_back(s);
    bank_truth.labels[bank.snippets.back().id] = i < 193 ? 0 : 1;
  }
  const MatrixXd bank_prev = empirical_prevalence(bank_truth, bank, 2);
  CHECK(bank_prev(0, 0) == doctest::Approx(0.684).epsilon(0.001));
  CHECK(bank_prev(1, 0) == doctest::Approx(0.316).epsilon(0.001));
}

TEST_CASE("ESS estimator") {
  Rng rng(11);
  // White noise: ESS within 10% of n.
  const int n = 20000;
  std::vector<double> white(n);
  for (double& x : white) x = rng.normal();
  const EssResult iid = ess(white);
  CHECK_FALSE(iid.degenerate);
  CHECK(std::abs(iid.ess - n) / n < 0.10);

  // AR(1) with rho = 0.9: ESS near n (1-rho)/(1+rho).
  std::vector<double> ar(n);
  double x = 0.0;
  for (double& v : ar) {
    x = 0.9 * x + rng.normal();
    v = x;
  }
  const EssResult correlated = ess(ar);
  const double expected = n * (1.0 - 0.9) / (1.0 + 0.9);
  CHECK(std::abs(correlated.ess - expected) / expected < 0.25);

  // Constant trace is degenerate.
  std::vector<double> constant(500, 1.0);
  CHECK(ess(constant).degenerate);

  // Affine invariance.
  std::vector<double> scaled(n);
  for (int i = 0; i < n; ++i) scaled[i] = -3.0 * ar[i] + 11.0;
  CHECK(ess(scaled).ess == doctest::Approx(correlated.ess).epsilon(1e-9));

  std::vector<double> short_trace(50, 0.0);
  CHECK_THROWS_AS(ess(short_trace), model_error);
}

TEST_CASE("top words ordering and tie-breaking") {
  MatrixXd mean_psi(3, 2);  // V=3, K=2, T=1
  mean_psi.col(0) << 0.5, 0.3, 0.2;
  mean_psi.col(1) << 0.25, 0.5, 0.25;
  CHECK(top_words(mean_psi, 2, 1, 0, 3) == std::vector<int>{0, 1, 2});
  // Ties break by ascending word id.
  CHECK(top_words(mean_psi, 2, 1, 1, 3) == std::vector<int>{1, 0, 2});
  // Per-time at T=1 equals time-averaged.
  CHECK(top_words(mean_psi, 2, 1, 0, 3, 0) == top_words(mean_psi, 2, 1, 0, 3));
}

TEST_CASE("word sense profile") {
  SnippetCorpus corpus;
  corpus.V = 3;
  corpus.T = 1;
  corpus.G = 1;
  GroundTruth truth;
  auto add = [&](const std::string& id, int sense,
                 const std::vector<int>& words) {
    Snippet s;
    s.id = id;
    s.words = words;
    corpus.snippets.push_back(s);
    truth.labels[id] = sense;
  };
  // Word 0 only under sense 0.
  add("a", 0, {0, 0, 1});
  add("b", 1, {1, 2});
  add("c", 2, {2, 1});
  const VectorXd only = word_sense_profile(truth, corpus, 3, 0);
  CHECK(only[0] == doctest::Approx(1.0));
  CHECK(only[1] == 0.0);

  // Symmetric occurrences with equal sense totals give 0.5 / 0.5.
  SnippetCorpus sym;
  sym.V = 2;
  sym.T = 1;
  sym.G = 1;
  GroundTruth sym_truth;
  Snippet s1{"x", 0, 0, {0, 1}};
  Snippet s2{"y", 0, 0, {0, 1}};
  sym.snippets = {s1, s2};
  sym_truth.labels["x"] = 0;
  sym_truth.labels["y"] = 1;
  const VectorXd half = word_sense_profile(sym_truth, sym, 2, 0);
  CHECK(half[0] == doctest::Approx(0.5));
  CHECK(half[1] == doctest::Approx(0.5));

  // Hand-built 3-sense table: counts 2/4, 1/2, 0/2 -> rates (.5, .5, 0).
  SnippetCorpus hand;
  hand.V = 2;
  hand.T = 1;
  hand.G = 1;
  GroundTruth hand_truth;
  auto addh = [&](const std::string& id, int sense,
                  const std::vector<int>& words) {
    Snippet s;
    s.id = id;
    s.words = words;
    hand.snippets.push_back(s);
    hand_truth.labels[id] = sense;
  };
  addh("h1", 0, {0, 0, 1, 1});
  addh("h2", 1, {0, 1});
  addh("h3", 2, {1, 1});
  const VectorXd profile = word_sense_profile(hand_truth, hand, 3, 0);
  CHECK(profile[0] == doctest::Approx(0.5));
  CHECK(profile[1] == doctest::Approx(0.5));
  CHECK(profile[2] == 0.0);

  CHECK_THROWS_AS(word_sense_profile(hand_truth, hand, 3, 1 + 1), model_error);
}

TEST_CASE("posterior sense probabilities and summaries from a chain") {
  SimConfig sim;
  sim.spec.family = Family::DiSC;
  sim.spec.K = 2;
  sim.spec.V = 8;
  sim.spec.T = 2;
  sim.spec.G = 1;
  sim.window_length = 6;
  sim.snippets_per_period = 20;
  sim.seed = 3;
  const SimOutput data = simulate(sim);
  ChainConfig config;
  config.sampler = SamplerKind::MALA;
  config.iterations = 600;
  config.burn_in = 300;
  config.seed = 13;
  const ChainOutput out = run_chain(data.corpus, sim.spec, config);

  const MatrixXd pred = posterior_sense_probabilities(data.corpus, out);
  CHECK(pred.cols() == data.corpus.size());
  for (int d = 0; d < pred.cols(); ++d)
    CHECK(pred.col(d).sum() == doctest::Approx(1.0).epsilon(1e-9));

  // TraceExtractor agrees with direct per-draw computation.
  const TraceExtractor traces(out);
  const auto trace = traces.phi_tilde(0, 0, 1);
  const LatentState state5 = out.state_at(5);
  const ProbabilityArrays probs5 =
      derive_probability_arrays(state5, sim.spec);
  CHECK(trace[5] == doctest::Approx(probs5.phi_col(0, 1)[0]).epsilon(1e-12));
  const auto psi_trace = traces.psi_tilde(3, 1, 0);
  CHECK(psi_trace[5] ==
        doctest::Approx(probs5.psi_col(1, 0)[3]).epsilon(1e-12));

  // Summaries line up with the stored posterior-mean caches.
  const auto phi_summaries = summarize_phi_tilde(out);
  CHECK(phi_summaries[0].mean ==
        doctest::Approx(out.mean_phi_tilde(0, 0)).epsilon(1e-9));
  const auto psi_summaries = summarize_psi_tilde(out);
  CHECK(psi_summaries[3 + 8 * 1].mean ==
        doctest::Approx(out.mean_psi_tilde(3, 1)).epsilon(1e-9));
}

TEST_CASE("ess_benchmark normalises by post-burn-in wall time") {
  SimConfig sim;
  sim.spec.family = Family::DiSC;
  sim.spec.K = 2;
  sim.spec.V = 6;
  sim.spec.T = 2;
  sim.spec.G = 1;
  sim.snippets_per_period = 15;
  sim.seed = 5;
  const SimOutput data = simulate(sim);
  ChainConfig config;
  config.sampler = SamplerKind::MALA;
  config.iterations = 700;
  config.burn_in = 200;
  config.seed = 3;
  ChainOutput out = run_chain(data.corpus, sim.spec, config);

  out.wall_seconds_sampling = 3600.0;  // pin the clock for the test
  const EssBenchmark one_hour = ess_benchmark(out, EssSelection::PhiAll);
  CHECK(one_hour.n_traces == 4);  // K*G*T

  out.wall_seconds_sampling = 7200.0;
  const EssBenchmark two_hours = ess_benchmark(out, EssSelection::PhiAll);
  CHECK(two_hours.median_per_hour ==
        doctest::Approx(0.5 * one_hour.median_per_hour).epsilon(1e-9));

  // At one hour, the benchmark value equals the raw ESS of the trace.
  const TraceExtractor traces(out);
  std::vector<double> values;
  for (int t = 0; t < 2; ++t)
    for (int k = 0; k < 2; ++k)
      values.push_back(ess(traces.phi_tilde(k, 0, t)).ess);
  std::sort(values.begin(), values.end());
  const double median = 0.5 * (values[1] + values[2]);
  CHECK(one_hour.median_per_hour == doctest::Approx(median).epsilon(1e-9));

  const EssBenchmark psi = ess_benchmark(out, EssSelection::PsiTopWords, 3);
  CHECK(psi.n_traces == 3 * 2 * 2);  // top_n * K * T
}
