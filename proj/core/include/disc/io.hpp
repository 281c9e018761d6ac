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

#ifndef DISC_IO_HPP
#define DISC_IO_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "disc/corpus.hpp"
#include "disc/samplers.hpp"
#include "disc/simulate.hpp"

namespace disc {

class io_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Flat key-value configuration ("key = value", '#' comments).
// ---------------------------------------------------------------------------

using ConfigMap = std::map<std::string, std::string>;

ConfigMap read_config(const std::string& path);

/// Builds a ModelSpec from the keys family, K, V, T, G and the family's
/// hyperparameters (kappa_phi, kappa_theta, kappa_chi, alpha_phi,
/// alpha_theta | kappa_psi, a, b). Missing hyperparameters keep their
/// documented defaults.
ModelSpec model_spec_from_config(const ConfigMap& config);

/// Simulation settings: L, q_sw, q_u, d_per_t, genre_mix (comma-separated),
/// improper_start_sd, seed, on top of the model keys.
SimConfig sim_config_from_config(const ConfigMap& config);

/// Chain settings: sampler, iterations, burn_in, thin, leapfrog_steps,
/// kappa_update_period, initial_step_size, seed. Defaults follow the family.
ChainConfig chain_config_from_config(const ConfigMap& config, Family family);

// ---------------------------------------------------------------------------
// Snippet corpus files. One record per line: id, time label, genre label,
// then whitespace-separated tokens. Lines starting with '#' are comments.
// ---------------------------------------------------------------------------

struct LoadOptions {
  std::vector<std::string> time_labels;   // explicit period order
  std::vector<double> time_bin_edges;     // numeric binning (ascending)
  std::vector<std::string> genre_labels;  // explicit genre order
  bool tokens_are_ids = false;            // tokens are 1-based word ids
  bool drop_unknown_tokens = false;       // with a frozen vocabulary
  int max_snippets_per_cell = 0;          // 0 = unlimited; keeps file order
};

struct LoadReport {
  int snippets = 0;
  int empty_snippets = 0;
  int dropped_tokens = 0;
  int dropped_snippets = 0;
  std::vector<std::string> messages;
};

/// Loads and validates a snippet file. Tokens are interned against the vocab
/// file when given (unknown tokens fail unless drop_unknown_tokens), or a
/// vocabulary is built in order of first appearance. Time labels map to
/// contiguous periods via explicit labels, numeric bin edges, or contiguous
/// integer labels; anything else fails.
SnippetCorpus load_corpus(const std::string& snippet_path,
                          const std::string& vocab_path = "",
                          const LoadOptions& options = {},
                          LoadReport* report = nullptr);

void write_snippet_file(const std::string& path, const SnippetCorpus& corpus);
void write_vocab_file(const std::string& path, const SnippetCorpus& corpus);

GroundTruth read_truth(const std::string& path);
void write_truth(const std::string& path, const SnippetCorpus& corpus,
                 const std::vector<int>& labels_by_index);

/// Per-snippet probability vectors: id then K probabilities per line.
void write_predictions(const std::string& path, const SnippetCorpus& corpus,
                       const MatrixXd& predictions);
std::pair<std::vector<std::string>, MatrixXd> read_predictions(
    const std::string& path);

// ---------------------------------------------------------------------------
// Binary sample store: fixed header (magic, version, spec, chain config,
// wall-clock metadata, posterior-mean caches) followed by the row-major
// thinned draws.
// ---------------------------------------------------------------------------

void write_store(const std::string& path, const ChainOutput& output);
ChainOutput read_store(const std::string& path);

/// Structured run summary (JSON): spec and config echo, acceptance and
/// degeneracy bookkeeping, posterior mean/sd/HPD per probability-scale
/// parameter. Wall-clock timing is deliberately excluded so reruns with the
/// same seed produce byte-identical files.
void write_summary(const std::string& path, const ChainOutput& output);

/// Plot-ready prevalence table: one row per (k, g, t) with the empirical
/// prevalence (NA without truth), posterior mean and HPD bounds.
void write_prevalence_table(const std::string& path, const ChainOutput& output,
                            const SnippetCorpus& corpus,
                            const MatrixXd* empirical);

/// Fit-run manifest: inputs, output directory, spec/config echo, version.
void write_manifest(const std::string& path, const std::string& command,
                    const std::map<std::string, std::string>& inputs,
                    const ModelSpec& spec,
                    const std::optional<ChainConfig>& config,
                    const std::string& out_dir);

}  // namespace disc

#endif  // DISC_IO_HPP
