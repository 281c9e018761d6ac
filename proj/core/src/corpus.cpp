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

#include "disc/corpus.hpp"

#include <algorithm>
#include <unordered_set>

#include "disc/model.hpp"

namespace disc {

void SnippetCorpus::validate() const {
  std::unordered_set<std::string> seen;
  for (const Snippet& s : snippets) {
    if (!seen.insert(s.id).second)
      throw model_error("duplicate snippet id: " + s.id);
    if (s.time < 0 || s.time >= T)
      throw model_error("snippet " + s.id + ": time index out of range");
    if (s.genre < 0 || s.genre >= G)
      throw model_error("snippet " + s.id + ": genre index out of range");
    for (int w : s.words)
      if (w < 0 || w >= V)
        throw model_error("snippet " + s.id + ": word id out of range");
  }
}

int SnippetCorpus::total_tokens() const {
  int n = 0;
  for (const Snippet& s : snippets) n += s.length();
  return n;
}

CountTables count_tables(const SnippetCorpus& corpus, int K,
                         const std::vector<int>& assignment) {
  if (assignment.size() != corpus.snippets.size())
    throw model_error("count_tables: assignment does not cover the corpus");
  CountTables tables;
  tables.K = K;
  tables.V = corpus.V;
  tables.T = corpus.T;
  tables.G = corpus.G;
  tables.n_z = Eigen::MatrixXi::Zero(K, corpus.G * corpus.T);
  tables.n_wz = Eigen::MatrixXi::Zero(corpus.V, K * corpus.T);
  for (int d = 0; d < corpus.size(); ++d) {
    const Snippet& s = corpus.snippets[d];
    const int k = assignment[d];
    if (k < 0 || k >= K)
      throw model_error("count_tables: sense label out of range");
    tables.snippets_at(k, s.genre, s.time) += 1;
    for (int w : s.words) tables.words_at(w, k, s.time) += 1;
  }
  return tables;
}

CorpusIndex::CorpusIndex(const SnippetCorpus& corpus, int G, int T) : G_(G) {
  by_cell_.resize(static_cast<size_t>(G) * T);
  by_period_.resize(T);
  bags_.resize(corpus.size());
  lengths_.resize(corpus.size());
  for (int d = 0; d < corpus.size(); ++d) {
    const Snippet& s = corpus.snippets[d];
    by_cell_[s.genre + G * s.time].push_back(d);
    by_period_[s.time].push_back(d);
    lengths_[d] = s.length();
    std::vector<int> sorted = s.words;
    std::sort(sorted.begin(), sorted.end());
    auto& bag = bags_[d];
    for (size_t i = 0; i < sorted.size();) {
      size_t j = i;
      while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
      bag.push_back({sorted[i], static_cast<int>(j - i)});
      i = j;
    }
  }
}

}  // namespace disc
