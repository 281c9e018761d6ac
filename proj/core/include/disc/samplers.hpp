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

#ifndef DISC_SAMPLERS_HPP
#define DISC_SAMPLERS_HPP

#include <optional>
#include <string>
#include <vector>

#include "disc/corpus.hpp"
#include "disc/likelihood.hpp"
#include "disc/mcmc.hpp"
#include "disc/model.hpp"

namespace disc {

enum class SamplerKind {
  AuxUniform,
  PolyaGamma,
  PolyaGammaApprox,
  MALA,
  HMC,
  MixedMalaHmc,
};

std::string to_string(SamplerKind kind);
SamplerKind sampler_from_string(const std::string& name);

/// True for the samplers that fix z each sweep and update columns from their
/// conditional priors (AuxUniform / PolyaGamma / PolyaGammaApprox). These
/// target the GASC/SCAN parameterisation only; the additive DiSC word
/// parameter is not logistic-normal, so only the gradient samplers apply.
bool is_joint_sampler(SamplerKind kind);

struct ChainConfig {
  SamplerKind sampler = SamplerKind::MixedMalaHmc;
  long iterations = 10000;  // total sweeps, each updating every block
  long burn_in = 5000;
  long thin = 1;
  int leapfrog_steps = 5;  // fixed-L HMC
  // Mixed mode draws L = 1 or the long branch with equal probability; the
  // long branch is 2 leapfrog steps for prevalence blocks and 5 for word
  // blocks. Each branch keeps its own adaptation state.
  int mixed_long_steps_phi = 2;
  int mixed_long_steps_word = 5;
  double mixed_long_prob = 0.5;
  long kappa_update_period = 50;  // GASC kappa_phi refresh cadence
  double initial_step_size = 0.05;  // sigma^2 before adaptation
  std::uint64_t seed = 1;

  void validate() const;

  /// 10k/5k sweeps for DiSC, 20k/10k for GASC.
  static ChainConfig defaults_for(Family family);
};

struct BlockStats {
  std::string name;
  long proposals = 0;
  long accepts = 0;
  long divergences = 0;
  long bad_gradients = 0;
  double final_step_size = 0.0;  // sigma^2 after freezing
  std::vector<double> step_size_history;  // one entry per adaptation window

  double acceptance_rate() const {
    return proposals > 0 ? static_cast<double>(accepts) / proposals : 0.0;
  }
};

/// Thinned post-burn-in draws plus bookkeeping. Draw i occupies
/// samples[i*param_count .. (i+1)*param_count) with layout
///   DiSC: phi (k fastest, then g, then t), theta (v, t), chi (v, k)
///   GASC: phi, psi (v fastest, then k, then t), kappa_phi
struct ChainOutput {
  ModelSpec spec;
  ChainConfig config;
  long param_count = 0;
  long sample_count = 0;
  std::vector<double> samples;
  MatrixXd mean_phi_tilde;  // K x (G*T) posterior means on probability scale
  MatrixXd mean_psi_tilde;  // V x (K*T)
  std::vector<BlockStats> block_stats;
  long degeneracy_events = 0;
  double wall_seconds_total = 0.0;
  double wall_seconds_sampling = 0.0;  // post burn-in

  LatentState state_at(long i) const;
  const double* draw(long i) const { return samples.data() + i * param_count; }
};

long flattened_param_count(const ModelSpec& spec);
void flatten_state(const LatentState& state, const ModelSpec& spec,
                   double* out);
LatentState unflatten_state(const ModelSpec& spec, const double* data);

/// Draws every z_d independently from its sense posterior.
std::vector<int> gibbs_z(const SnippetCorpus& corpus,
                         const ProbabilityArrays& probs, Rng& rng);

/// Per-component counts backing one softmax column update: snippets per
/// sense for a phi column, token occurrences per word for a psi column.
struct ColumnCounts {
  Eigen::VectorXi component;
  int total = 0;
};

/// Auxiliary-uniform Gibbs update of one column given fixed z. Componentwise:
/// the extreme auxiliary order statistics come from two Beta draws, and the
/// component is redrawn from its conditional prior truncated to the implied
/// interval. Returns the number of numerically empty intervals (those
/// components keep their value).
long aux_uniform_update(Eigen::Ref<VectorXd> column, const ColumnCounts& counts,
                        const ConditionalMoments& prior, Rng& rng);

/// Polya-Gamma Gibbs update of one column given fixed z: omega ~ PG(N, eta)
/// with eta the component's log odds, then a Gaussian draw with precision
/// sigma^-2 + omega. `approximate` replaces the O(N) exact draw with the
/// moment-matched single-unit draw. Components with zero total count fall
/// back to the conditional prior.
void polya_gamma_update(Eigen::Ref<VectorXd> column, const ColumnCounts& counts,
                        const ConditionalMoments& prior, bool approximate,
                        Rng& rng);

/// Conjugate InvGamma full conditional of the GASC kappa_phi given the phi
/// increments: increments are N(0, 2 kappa) per component, so the posterior
/// is InvGamma(a + K G (T-1)/2, b + sum(increment^2)/4). T = 1 reduces to a
/// prior draw.
double sample_kappa_phi_gasc(const LatentState& state, const ModelSpec& spec,
                             Rng& rng);

/// Prior draw used to initialise chains. GASC improper t=1 components are
/// started N(0, 1); kappa_phi starts at a prior draw.
LatentState draw_initial_state(const ModelSpec& spec, Rng& rng);

/// Count-logit warm start from labelled data.
LatentState warm_start_from_labels(const SnippetCorpus& corpus,
                                   const std::vector<int>& assignment,
                                   const ModelSpec& spec);

/// Runs one chain: marginal samplers sweep phi / theta / chi (DiSC) or
/// phi / psi (GASC) blocks with z summed out; joint samplers interleave a
/// gibbs_z pass with per-column conditional updates. GASC chains refresh
/// kappa_phi every kappa_update_period sweeps. Throws model_error if the
/// posterior is not finite at the initial state.
ChainOutput run_chain(const SnippetCorpus& corpus, const ModelSpec& spec,
                      const ChainConfig& config,
                      const std::optional<LatentState>& init = std::nullopt);

}  // namespace disc

#endif  // DISC_SAMPLERS_HPP
