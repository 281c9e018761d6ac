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

#include "disc/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>

#include "disc/likelihood.hpp"

namespace disc {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

MatrixXd posterior_sense_probabilities(const SnippetCorpus& corpus,
                                       const ChainOutput& output) {
  if (output.sample_count == 0)
    throw model_error("chain output holds no stored draws");
  const ModelSpec& spec = output.spec;
  MatrixXd acc = MatrixXd::Zero(spec.K, corpus.size());
  for (long i = 0; i < output.sample_count; ++i) {
    const LatentState state = output.state_at(i);
    const ProbabilityArrays probs = derive_probability_arrays(state, spec);
    for (int d = 0; d < corpus.size(); ++d)
      acc.col(d) += sense_posterior(corpus.snippets[d], probs);
  }
  return acc / static_cast<double>(output.sample_count);
}

double brier_score(const MatrixXd& predictions,
                   const std::vector<int>& labels) {
  const int K = static_cast<int>(predictions.rows());
  const int D = static_cast<int>(predictions.cols());
  if (static_cast<int>(labels.size()) != D)
    throw model_error("brier_score: labels do not cover the predictions");
  double total = 0.0;
  for (int d = 0; d < D; ++d) {
    if (labels[d] < 0 || labels[d] >= K)
      throw model_error("brier_score: label out of range");
    for (int k = 0; k < K; ++k) {
      const double diff = predictions(k, d) - (labels[d] == k ? 1.0 : 0.0);
      total += diff * diff;
    }
  }
  return total / D;
}

namespace {

// O(n^3) Hungarian assignment on a square cost matrix (row potentials /
// shortest augmenting paths); small n only.
std::vector<int> hungarian(const MatrixXd& cost) {
  const int n = static_cast<int>(cost.rows());
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, std::numeric_limits<double>::infinity());
    std::vector<char> used(n + 1, false);
    do {
      used[j0] = true;
      const int i0 = p[j0];
      int j1 = 0;
      double delta = std::numeric_limits<double>::infinity();
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= n; ++j)
    if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

double total_variation(const Eigen::Ref<const VectorXd>& p,
                       const Eigen::Ref<const VectorXd>& q) {
  return 0.5 * (p - q).cwiseAbs().sum();
}

}  // namespace

SenseAlignment align_senses(const MatrixXd& model_dists,
                            const MatrixXd& true_dists) {
  const int k_model = static_cast<int>(model_dists.cols());
  const int k_true = static_cast<int>(true_dists.cols());
  if (model_dists.rows() != true_dists.rows())
    throw model_error("align_senses: vocabulary sizes differ");
  if (k_true > k_model)
    throw model_error(
        "align_senses: more annotated senses than model senses");
  // Square the problem with zero-cost dummy columns; model senses assigned
  // to a dummy stay unmatched.
  MatrixXd cost = MatrixXd::Zero(k_model, k_model);
  for (int m = 0; m < k_model; ++m)
    for (int s = 0; s < k_true; ++s)
      cost(m, s) = total_variation(model_dists.col(m), true_dists.col(s));
  const std::vector<int> assignment = hungarian(cost);
  SenseAlignment alignment;
  alignment.model_to_true.assign(k_model, -1);
  alignment.divergence.assign(k_model, kNaN);
  for (int m = 0; m < k_model; ++m) {
    if (assignment[m] < k_true) {
      alignment.model_to_true[m] = assignment[m];
      alignment.divergence[m] = cost(m, assignment[m]);
      alignment.total_divergence += cost(m, assignment[m]);
    }
  }
  return alignment;
}

ConfusionStats confusion_stats(const std::vector<int>& predicted,
                               const std::vector<int>& truth, int positive) {
  if (predicted.size() != truth.size())
    throw model_error("confusion_stats: label vectors differ in length");
  long tp = 0, tn = 0, fp = 0, fn = 0;
  for (size_t i = 0; i < predicted.size(); ++i) {
    const bool pred_pos = predicted[i] == positive;
    const bool true_pos = truth[i] == positive;
    if (pred_pos && true_pos) ++tp;
    else if (pred_pos && !true_pos) ++fp;
    else if (!pred_pos && true_pos) ++fn;
    else ++tn;
  }
  ConfusionStats stats;
  stats.sensitivity = tp + fn > 0 ? static_cast<double>(tp) / (tp + fn) : kNaN;
  stats.specificity = tn + fp > 0 ? static_cast<double>(tn) / (tn + fp) : kNaN;
  stats.accuracy = static_cast<double>(tp + tn) / predicted.size();
  return stats;
}

HpdInterval hpd_interval(std::vector<double> samples, double mass) {
  const int n = static_cast<int>(samples.size());
  if (n < 100) throw model_error("hpd_interval needs at least 100 samples");
  if (!(mass > 0.0 && mass < 1.0))
    throw model_error("hpd_interval mass must lie in (0, 1)");
  std::sort(samples.begin(), samples.end());
  int m = static_cast<int>(std::ceil(mass * n));
  m = std::min(std::max(m, 1), n);
  int best = 0;
  double best_width = std::numeric_limits<double>::infinity();
  for (int i = 0; i + m - 1 < n; ++i) {
    const double width = samples[i + m - 1] - samples[i];
    if (width < best_width) {
      best_width = width;
      best = i;
    }
  }
  return {samples[best], samples[best + m - 1], mass};
}

MatrixXd empirical_prevalence(const GroundTruth& truth,
                              const SnippetCorpus& corpus, int K) {
  MatrixXd counts = MatrixXd::Zero(K, corpus.G * corpus.T);
  for (const Snippet& s : corpus.snippets) {
    if (!truth.has(s.id)) continue;
    const int k = truth.label(s.id);
    if (k < 0 || k >= K) throw model_error("truth label out of range");
    counts(k, s.genre + corpus.G * s.time) += 1.0;
  }
  for (int c = 0; c < counts.cols(); ++c) {
    const double total = counts.col(c).sum();
    if (total > 0.0)
      counts.col(c) /= total;
    else
      counts.col(c).setConstant(kNaN);
  }
  return counts;
}

namespace {

// Iterative radix-2 complex FFT, enough for autocovariance of chain traces.
void fft(std::vector<std::complex<double>>& a, bool invert) {
  const size_t n = a.size();
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    const double ang = 2.0 * M_PI / len * (invert ? -1 : 1);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0);
      for (size_t j = 0; j < len / 2; ++j) {
        const std::complex<double> u = a[i + j];
        const std::complex<double> v = a[i + j + len / 2] * w;
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
  if (invert)
    for (auto& x : a) x /= static_cast<double>(n);
}

// Biased autocovariances gamma_0..gamma_{n-1} via FFT.
std::vector<double> autocovariance(const std::vector<double>& trace) {
  const size_t n = trace.size();
  const double mean =
      std::accumulate(trace.begin(), trace.end(), 0.0) / static_cast<double>(n);
  size_t m = 1;
  while (m < 2 * n) m <<= 1;
  std::vector<std::complex<double>> buf(m, 0.0);
  for (size_t i = 0; i < n; ++i) buf[i] = trace[i] - mean;
  fft(buf, false);
  for (auto& x : buf) x = x * std::conj(x);
  fft(buf, true);
  std::vector<double> gamma(n);
  for (size_t k = 0; k < n; ++k) gamma[k] = buf[k].real() / static_cast<double>(n);
  return gamma;
}

}  // namespace

EssResult ess(const std::vector<double>& trace) {
  const size_t n = trace.size();
  if (n < 100) throw model_error("ess needs a trace of length >= 100");
  const std::vector<double> gamma = autocovariance(trace);
  if (!(gamma[0] > 0.0)) return {0.0, true};
  // Geyer initial positive sequence: sum consecutive lag pairs while their
  // autocorrelation sum stays positive.
  double rho_sum = 0.0;
  for (size_t k = 1; k + 1 < n; k += 2) {
    const double pair = (gamma[k] + gamma[k + 1]) / gamma[0];
    if (pair <= 0.0) break;
    rho_sum += pair;
  }
  const double denom = 1.0 + 2.0 * rho_sum;
  return {static_cast<double>(n) / denom, false};
}

double mcse(const std::vector<double>& trace) {
  const EssResult result = ess(trace);
  if (result.degenerate || result.ess <= 0.0)
    return std::numeric_limits<double>::infinity();
  const double m = mean_of(trace);
  double var = 0.0;
  for (double x : trace) var += (x - m) * (x - m);
  var /= static_cast<double>(trace.size() - 1);
  return std::sqrt(var / result.ess);
}

double mean_of(const std::vector<double>& trace) {
  return std::accumulate(trace.begin(), trace.end(), 0.0) /
         static_cast<double>(trace.size());
}

TraceExtractor::TraceExtractor(const ChainOutput& output) : output_(&output) {
  const ModelSpec& spec = output.spec;
  psi_offset_ = static_cast<long>(spec.K) * spec.G * spec.T;
  if (!spec.is_disc()) {
    psi_lse_.resize(static_cast<size_t>(spec.K) * spec.T);
    psi_lse_ready_.assign(psi_lse_.size(), 0);
  }
}

std::vector<double> TraceExtractor::phi_tilde(int k, int g, int t) const {
  const ModelSpec& spec = output_->spec;
  const long base = static_cast<long>(spec.K) * (g + spec.G * t);
  std::vector<double> trace(output_->sample_count);
  VectorXd col(spec.K);
  for (long i = 0; i < output_->sample_count; ++i) {
    const double* draw = output_->draw(i);
    for (int j = 0; j < spec.K; ++j) col[j] = draw[base + j];
    trace[i] = std::exp(col[k] - log_sum_exp(col));
  }
  return trace;
}

const std::vector<double>& TraceExtractor::psi_column_lse(int k, int t) const {
  const ModelSpec& spec = output_->spec;
  const size_t idx = k + static_cast<size_t>(spec.K) * t;
  if (!psi_lse_ready_[idx]) {
    std::vector<double>& lse = psi_lse_[idx];
    lse.resize(output_->sample_count);
    const long base = psi_offset_ + static_cast<long>(spec.V) * (k + spec.K * t);
    for (long i = 0; i < output_->sample_count; ++i) {
      const double* draw = output_->draw(i) + base;
      lse[i] = log_sum_exp(std::span<const double>(draw, spec.V));
    }
    psi_lse_ready_[idx] = 1;
  }
  return psi_lse_[idx];
}

std::vector<double> TraceExtractor::psi_tilde(int v, int k, int t) const {
  const ModelSpec& spec = output_->spec;
  std::vector<double> trace(output_->sample_count);
  if (spec.is_disc()) {
    // psi = chi + theta assembled per draw.
    const long theta_base = psi_offset_ + static_cast<long>(spec.V) * t;
    const long chi_base =
        psi_offset_ + static_cast<long>(spec.V) * spec.T +
        static_cast<long>(spec.V) * k;
    VectorXd col(spec.V);
    for (long i = 0; i < output_->sample_count; ++i) {
      const double* draw = output_->draw(i);
      for (int j = 0; j < spec.V; ++j)
        col[j] = draw[theta_base + j] + draw[chi_base + j];
      trace[i] = std::exp(col[v] - log_sum_exp(col));
    }
    return trace;
  }
  const std::vector<double>& lse = psi_column_lse(k, t);
  const long base =
      psi_offset_ + static_cast<long>(spec.V) * (k + spec.K * t) + v;
  for (long i = 0; i < output_->sample_count; ++i)
    trace[i] = std::exp(output_->draw(i)[base] - lse[i]);
  return trace;
}

namespace {

double quantile_sorted(const std::vector<double>& sorted, double q) {
  const double pos = q * (sorted.size() - 1);
  const size_t lo = static_cast<size_t>(std::floor(pos));
  const size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - lo;
  return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}

}  // namespace

EssBenchmark ess_benchmark(const ChainOutput& output, EssSelection selection,
                           int top_n) {
  if (output.wall_seconds_sampling <= 0.0)
    throw model_error("ess_benchmark requires wall-clock metadata");
  const ModelSpec& spec = output.spec;
  const TraceExtractor traces(output);
  const double hours = output.wall_seconds_sampling / 3600.0;
  std::vector<double> per_hour;
  if (selection == EssSelection::PhiAll) {
    for (int t = 0; t < spec.T; ++t)
      for (int g = 0; g < spec.G; ++g)
        for (int k = 0; k < spec.K; ++k) {
          const EssResult r = ess(traces.phi_tilde(k, g, t));
          if (!r.degenerate) per_hour.push_back(r.ess / hours);
        }
  } else {
    for (int k = 0; k < spec.K; ++k) {
      const std::vector<int> words =
          top_words(output.mean_psi_tilde, spec.K, spec.T, k, top_n);
      for (int v : words)
        for (int t = 0; t < spec.T; ++t) {
          const EssResult r = ess(traces.psi_tilde(v, k, t));
          if (!r.degenerate) per_hour.push_back(r.ess / hours);
        }
    }
  }
  EssBenchmark bench;
  bench.n_traces = static_cast<int>(per_hour.size());
  if (per_hour.empty()) return bench;
  std::sort(per_hour.begin(), per_hour.end());
  bench.median_per_hour = quantile_sorted(per_hour, 0.5);
  bench.iqr_lower = quantile_sorted(per_hour, 0.25);
  bench.iqr_upper = quantile_sorted(per_hour, 0.75);
  return bench;
}

std::vector<int> top_words(const MatrixXd& mean_psi_tilde, int K, int T, int k,
                           int n, int t) {
  const int V = static_cast<int>(mean_psi_tilde.rows());
  VectorXd score = VectorXd::Zero(V);
  if (t < 0) {
    for (int tt = 0; tt < T; ++tt) score += mean_psi_tilde.col(k + K * tt);
    score /= static_cast<double>(T);
  } else {
    score = mean_psi_tilde.col(k + K * t);
  }
  std::vector<int> order(V);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (score[a] != score[b]) return score[a] > score[b];
    return a < b;
  });
  order.resize(std::min(n, V));
  return order;
}

VectorXd word_sense_profile(const GroundTruth& truth,
                            const SnippetCorpus& corpus, int K, int v) {
  if (v < 0 || v >= corpus.V)
    throw model_error("word_sense_profile: word id out of range");
  const MatrixXd dists = empirical_word_distributions(truth, corpus, K);
  VectorXd rates = dists.row(v).transpose();
  const double total = rates.sum();
  if (!(total > 0.0))
    throw model_error("word_sense_profile: word never occurs in labelled data");
  return rates / total;
}

MatrixXd empirical_word_distributions(const GroundTruth& truth,
                                      const SnippetCorpus& corpus, int K) {
  MatrixXd counts = MatrixXd::Zero(corpus.V, K);
  for (const Snippet& s : corpus.snippets) {
    if (!truth.has(s.id)) continue;
    const int k = truth.label(s.id);
    for (int w : s.words) counts(w, k) += 1.0;
  }
  for (int k = 0; k < K; ++k) {
    const double total = counts.col(k).sum();
    if (total > 0.0) counts.col(k) /= total;
  }
  return counts;
}

std::vector<ChainGap> compare_chains_phi(const ChainOutput& a,
                                         const ChainOutput& b) {
  const ModelSpec& spec = a.spec;
  if (b.spec.K != spec.K || b.spec.G != spec.G || b.spec.T != spec.T)
    throw model_error("compare_chains_phi: chain dimensions differ");
  const TraceExtractor ta(a);
  const TraceExtractor tb(b);
  std::vector<ChainGap> gaps;
  for (int t = 0; t < spec.T; ++t)
    for (int g = 0; g < spec.G; ++g)
      for (int k = 0; k < spec.K; ++k) {
        const std::vector<double> xa = ta.phi_tilde(k, g, t);
        const std::vector<double> xb = tb.phi_tilde(k, g, t);
        ChainGap gap;
        gap.k = k;
        gap.g = g;
        gap.t = t;
        gap.mean_a = mean_of(xa);
        gap.mean_b = mean_of(xb);
        gap.combined_mcse = std::hypot(mcse(xa), mcse(xb));
        gap.gap_in_mcse = std::abs(gap.mean_a - gap.mean_b) /
                          std::max(gap.combined_mcse, 1e-12);
        gaps.push_back(gap);
      }
  return gaps;
}

namespace {

ParamSummary summarize_trace(std::vector<double> trace, double mass) {
  ParamSummary s;
  s.mean = mean_of(trace);
  double var = 0.0;
  for (double x : trace) var += (x - s.mean) * (x - s.mean);
  var /= std::max<size_t>(trace.size() - 1, 1);
  s.sd = std::sqrt(var);
  const HpdInterval hpd = hpd_interval(std::move(trace), mass);
  s.hpd_lower = hpd.lower;
  s.hpd_upper = hpd.upper;
  return s;
}

}  // namespace

std::vector<ParamSummary> summarize_phi_tilde(const ChainOutput& output,
                                              double mass) {
  const ModelSpec& spec = output.spec;
  const TraceExtractor traces(output);
  std::vector<ParamSummary> out;
  out.reserve(static_cast<size_t>(spec.K) * spec.G * spec.T);
  for (int t = 0; t < spec.T; ++t)
    for (int g = 0; g < spec.G; ++g)
      for (int k = 0; k < spec.K; ++k)
        out.push_back(summarize_trace(traces.phi_tilde(k, g, t), mass));
  return out;
}

std::vector<ParamSummary> summarize_psi_tilde(const ChainOutput& output,
                                              double mass) {
  const ModelSpec& spec = output.spec;
  const TraceExtractor traces(output);
  std::vector<ParamSummary> out;
  out.reserve(static_cast<size_t>(spec.V) * spec.K * spec.T);
  for (int t = 0; t < spec.T; ++t)
    for (int k = 0; k < spec.K; ++k)
      for (int v = 0; v < spec.V; ++v)
        out.push_back(summarize_trace(traces.psi_tilde(v, k, t), mass));
  return out;
}

}  // namespace disc
