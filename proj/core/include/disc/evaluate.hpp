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

#ifndef DISC_EVALUATE_HPP
#define DISC_EVALUATE_HPP

#include <vector>

#include "disc/corpus.hpp"
#include "disc/model.hpp"
#include "disc/samplers.hpp"

namespace disc {

/// p_hat(z_d = k): Monte Carlo average of the per-snippet sense posterior
/// over the stored post-burn-in draws (not a plug-in at the posterior mean).
/// Returns K x D.
MatrixXd posterior_sense_probabilities(const SnippetCorpus& corpus,
                                       const ChainOutput& output);

/// Mean over snippets of the squared-error sum against one-hot labels;
/// ranges over [0, 2]. `labels.size()` must match `predictions.cols()`.
double brier_score(const MatrixXd& predictions, const std::vector<int>& labels);

struct SenseAlignment {
  std::vector<int> model_to_true;    // -1 for unmatched surplus model senses
  std::vector<double> divergence;     // TV distance per matched model sense
  double total_divergence = 0.0;
};

/// Matches model senses to annotated senses by minimising the total
/// total-variation distance between the distribution columns (Hungarian
/// assignment). Requires K_model >= K_true; surplus model senses stay
/// unmatched.
SenseAlignment align_senses(const MatrixXd& model_dists,
                            const MatrixXd& true_dists);

struct ConfusionStats {
  double sensitivity = 0.0;
  double specificity = 0.0;
  double accuracy = 0.0;
};

/// One-vs-rest rates for `positive`, from hard labels.
ConfusionStats confusion_stats(const std::vector<int>& predicted,
                               const std::vector<int>& truth, int positive);

struct HpdInterval {
  double lower = 0.0;
  double upper = 0.0;
  double mass = 0.95;
};

/// Shortest interval containing ceil(mass * n) of the sorted samples.
HpdInterval hpd_interval(std::vector<double> samples, double mass = 0.95);

/// K x (G*T) empirical prevalences n_z / column totals from labelled
/// snippets; columns with no labelled snippets are NaN (absent), not 0/0.
MatrixXd empirical_prevalence(const GroundTruth& truth,
                              const SnippetCorpus& corpus, int K);

struct EssResult {
  double ess = 0.0;
  bool degenerate = false;  // constant trace
};

/// n / (1 + 2 sum rho_k) with the autocorrelation sum truncated at the first
/// non-positive pair of consecutive lags (initial positive sequence).
EssResult ess(const std::vector<double>& trace);

/// sd(trace) / sqrt(ess); infinity when the ESS is degenerate.
double mcse(const std::vector<double>& trace);

double mean_of(const std::vector<double>& trace);

/// Probability-scale traces recovered from a chain's stored draws; psi
/// column normalisers are cached per (k, t) on first use.
class TraceExtractor {
 public:
  explicit TraceExtractor(const ChainOutput& output);
  std::vector<double> phi_tilde(int k, int g, int t) const;
  std::vector<double> psi_tilde(int v, int k, int t) const;

 private:
  const ChainOutput* output_;
  mutable std::vector<std::vector<double>> psi_lse_;  // per psi column
  mutable std::vector<char> psi_lse_ready_;
  long psi_offset_ = 0;
  const std::vector<double>& psi_column_lse(int k, int t) const;
};

enum class EssSelection { PhiAll, PsiTopWords };

struct EssBenchmark {
  double median_per_hour = 0.0;
  double iqr_lower = 0.0;
  double iqr_upper = 0.0;
  int n_traces = 0;
};

/// Median and interquartile range of ESS per post-burn-in hour over either
/// all phi~ parameters or the psi~ parameters of the `top_n` a-posteriori
/// most probable words per sense (time-averaged ranking).
EssBenchmark ess_benchmark(const ChainOutput& output, EssSelection selection,
                           int top_n = 20);

/// Word ids ranked by posterior-mean probability under sense k, either
/// time-averaged (t = -1) or at a fixed period; ties break by ascending id.
std::vector<int> top_words(const MatrixXd& mean_psi_tilde, int K, int T, int k,
                           int n, int t = -1);

/// Empirical sense profile of word v from labelled data: the per-sense
/// occurrence rates n_{v,k}/n_{.,k} normalised over senses.
VectorXd word_sense_profile(const GroundTruth& truth,
                            const SnippetCorpus& corpus, int K, int v);

/// Per-sense empirical word distributions n_{v,k,.}/n_{.,k,.} from labelled
/// snippets (V x K); the alignment reference.
MatrixXd empirical_word_distributions(const GroundTruth& truth,
                                      const SnippetCorpus& corpus, int K);

struct ChainGap {
  int k = 0, g = 0, t = 0;
  double mean_a = 0.0, mean_b = 0.0;
  double combined_mcse = 0.0;
  double gap_in_mcse = 0.0;  // |mean_a - mean_b| / combined_mcse
};

/// Per-phi~-parameter mean gaps between two chains in combined-MCSE units.
std::vector<ChainGap> compare_chains_phi(const ChainOutput& a,
                                         const ChainOutput& b);

struct ParamSummary {
  double mean = 0.0;
  double sd = 0.0;
  double hpd_lower = 0.0;
  double hpd_upper = 0.0;
};

/// Posterior summaries on the probability scale, indexed k + K*(g + G*t).
std::vector<ParamSummary> summarize_phi_tilde(const ChainOutput& output,
                                              double mass = 0.95);
/// Indexed v + V*(k + K*t).
std::vector<ParamSummary> summarize_psi_tilde(const ChainOutput& output,
                                              double mass = 0.95);

}  // namespace disc

#endif  // DISC_EVALUATE_HPP
