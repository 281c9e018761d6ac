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

#ifndef DISC_SIMULATE_HPP
#define DISC_SIMULATE_HPP

#include <cstdint>

#include "disc/corpus.hpp"
#include "disc/model.hpp"
#include "disc/rng.hpp"

namespace disc {

struct SimConfig {
  ModelSpec spec;
  int window_length = 14;  // L: context positions around the target word
  double q_stopword = 0.3;
  double q_uninformative = 0.2;
  int snippets_per_period = 100;
  VectorXd genre_mix;  // probability over genres; uniform when empty
  // Surrogate scale for the GASC improper start; the improper t=1 law cannot
  // be simulated, so t=1 components draw from N(0, sd^2).
  double improper_start_sd = 10.0;
  std::uint64_t seed = 1;

  void validate() const;  // q_SW + q_U < 1, L >= 1, mix sums to 1
};

struct SimOutput {
  SnippetCorpus corpus;
  GroundTruth truth;
  std::vector<int> truth_by_index;  // o_d aligned with corpus.snippets
  LatentState true_state;
  ProbabilityArrays true_probs;
};

/// Forward draw of the latent arrays: stationary AR(1) chains for DiSC;
/// random-walk chains with the N(0, sd^2) start and InvGamma kappa_phi draw
/// for GASC.
LatentState simulate_prior(const ModelSpec& spec, Rng& rng,
                           double improper_start_sd = 10.0);

/// Observation model: per snippet, L_d ~ Bin(L, 1 - q_SW - q_U), a sense
/// from the prevalence column, then L_d context words i.i.d. from the sense's
/// word distribution. Word positions are never materialised.
SimOutput simulate_observations(const LatentState& state, const SimConfig& sim,
                                Rng& rng);

/// simulate_prior + simulate_observations with the config's seed.
SimOutput simulate(const SimConfig& sim);

enum class FilterMode { HapaxRemoval, FrequencyTopShare };

/// Vocabulary registration. Hapax mode drops words that occur exactly once
/// corpus-wide; top-share mode keeps the smallest prefix of frequency-ranked
/// words covering at least `share` of the token mass. Both compact word ids
/// and rebuild the vocab table. Throws if nothing survives.
SnippetCorpus registration_filter(const SnippetCorpus& corpus, FilterMode mode,
                                  double share = 0.7);

struct InteractionResult {
  double lambda = 0.0;   // fraction of words with a significant interaction
  int significant = 0;
  int tested = 0;        // vocabulary size
  int insufficient = 0;  // words whose F-test was undefined (count as null)
};

/// Sense-time interaction measure: per word, regress the empirical
/// probabilities n_wz / column totals on centred continuous time, sense
/// dummies and their interaction, and F-test the interaction terms at
/// `level`. Lambda is the significant fraction of the vocabulary. K = 1 has
/// no interaction terms and returns 0 by convention.
InteractionResult interaction_level(const SnippetCorpus& corpus,
                                    const GroundTruth& truth, int K,
                                    double level = 0.05);

enum class InteractionDesign { Ex1, Ex2, Ex3 };

/// Hand-designed corpora with explicit sense-time interaction on a 100-word
/// vocabulary (K = 3, T = 9): designated words get log-linear monotone
/// trajectories that rise in one sense while falling or staying flat in the
/// others, peaking near mass 2/V. Ex1/Ex2 designate 60 words with increasing
/// magnitude; Ex3 designates all 100.
SimOutput make_explicit_interaction_dataset(InteractionDesign design,
                                            std::uint64_t seed,
                                            int snippets_per_period = 200);

}  // namespace disc

#endif  // DISC_SIMULATE_HPP
