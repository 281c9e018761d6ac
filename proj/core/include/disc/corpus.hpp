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

#ifndef DISC_CORPUS_HPP
#define DISC_CORPUS_HPP

#include <Eigen/Core>
#include <string>
#include <unordered_map>
#include <vector>

namespace disc {

/// One usage of the target word: a bag of context-word ids with a time and a
/// genre label. Indices are 0-based internally; file formats are 1-based.
struct Snippet {
  std::string id;
  int time = 0;   // in [0, T)
  int genre = 0;  // in [0, G)
  std::vector<int> words;  // context-word ids in [0, V), repeats allowed

  int length() const { return static_cast<int>(words.size()); }
};

struct SnippetCorpus {
  std::vector<Snippet> snippets;
  int V = 0;
  int T = 0;
  int G = 0;
  std::vector<std::string> vocab;        // id -> surface form (may be empty)
  std::vector<std::string> time_labels;  // index -> label (may be empty)
  std::vector<std::string> genre_labels;

  int size() const { return static_cast<int>(snippets.size()); }

  /// Throws model_error if any snippet index is out of range or ids repeat.
  void validate() const;

  int total_tokens() const;
};

/// Expert sense labels o_d, possibly covering only part of the corpus.
struct GroundTruth {
  std::unordered_map<std::string, int> labels;  // snippet id -> sense in [0,K)

  bool has(const std::string& id) const { return labels.count(id) > 0; }
  int label(const std::string& id) const { return labels.at(id); }
  int size() const { return static_cast<int>(labels.size()); }
};

/// Sufficient statistics of a full sense assignment z:
///   n_z:  K x (G*T)  snippets per (sense, genre, time)
///   n_wz: V x (K*T)  context-word occurrences per (word, sense, time)
struct CountTables {
  int K = 0, V = 0, T = 0, G = 0;
  Eigen::MatrixXi n_z;
  Eigen::MatrixXi n_wz;

  int& snippets_at(int k, int g, int t) { return n_z(k, g + G * t); }
  int snippets_at(int k, int g, int t) const { return n_z(k, g + G * t); }
  int& words_at(int v, int k, int t) { return n_wz(v, k + K * t); }
  int words_at(int v, int k, int t) const { return n_wz(v, k + K * t); }
};

CountTables count_tables(const SnippetCorpus& corpus, int K,
                         const std::vector<int>& assignment);

/// Precomputed access paths used by every sampler sweep: snippet indices per
/// (genre, time) cell and per time period, plus per-snippet (word, count)
/// pairs so repeated words cost one lookup.
class CorpusIndex {
 public:
  CorpusIndex() = default;
  CorpusIndex(const SnippetCorpus& corpus, int G, int T);

  const std::vector<int>& cell(int g, int t) const {
    return by_cell_[g + G_ * t];
  }
  const std::vector<int>& period(int t) const { return by_period_[t]; }

  struct WordCount {
    int word;
    int count;
  };
  const std::vector<WordCount>& bag(int d) const { return bags_[d]; }
  int snippet_length(int d) const { return lengths_[d]; }

 private:
  int G_ = 0;
  std::vector<std::vector<int>> by_cell_;
  std::vector<std::vector<int>> by_period_;
  std::vector<std::vector<WordCount>> bags_;
  std::vector<int> lengths_;
};

}  // namespace disc

#endif  // DISC_CORPUS_HPP
