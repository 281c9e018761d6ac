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

#include "disc/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <unordered_map>

#include "disc/evaluate.hpp"

namespace disc {

namespace {

using nlohmann::json;

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> parts;
  std::stringstream stream(s);
  std::string part;
  while (std::getline(stream, part, ',')) {
    part = trim(part);
    if (!part.empty()) parts.push_back(part);
  }
  return parts;
}

double to_double(const std::string& s, const std::string& key) {
  try {
    size_t pos = 0;
    const double value = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return value;
  } catch (const std::exception&) {
    throw io_error("config key '" + key + "': not a number: " + s);
  }
}

long to_long(const std::string& s, const std::string& key) {
  try {
    size_t pos = 0;
    const long value = std::stol(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return value;
  } catch (const std::exception&) {
    throw io_error("config key '" + key + "': not an integer: " + s);
  }
}

template <typename T>
void maybe_set(const ConfigMap& config, const std::string& key, T& out) {
  const auto it = config.find(key);
  if (it == config.end()) return;
  if constexpr (std::is_same_v<T, double>)
    out = to_double(it->second, key);
  else if constexpr (std::is_same_v<T, int>)
    out = static_cast<int>(to_long(it->second, key));
  else if constexpr (std::is_same_v<T, long>)
    out = to_long(it->second, key);
  else if constexpr (std::is_same_v<T, std::uint64_t>)
    out = static_cast<std::uint64_t>(to_long(it->second, key));
  else
    out = it->second;
}

}  // namespace

ConfigMap read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open config file: " + path);
  ConfigMap config;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    std::string key, value;
    if (eq != std::string::npos) {
      key = trim(line.substr(0, eq));
      value = trim(line.substr(eq + 1));
    } else {
      const auto space = line.find_first_of(" \t");
      if (space == std::string::npos)
        throw io_error(path + ":" + std::to_string(lineno) +
                       ": expected 'key = value'");
      key = trim(line.substr(0, space));
      value = trim(line.substr(space + 1));
    }
    if (key.empty() || value.empty())
      throw io_error(path + ":" + std::to_string(lineno) +
                     ": expected 'key = value'");
    config[key] = value;
  }
  return config;
}

ModelSpec model_spec_from_config(const ConfigMap& config) {
  ModelSpec spec;
  const auto fam = config.find("family");
  if (fam == config.end()) throw io_error("config is missing 'family'");
  spec.family = family_from_string(fam->second);
  maybe_set(config, "K", spec.K);
  maybe_set(config, "V", spec.V);
  maybe_set(config, "T", spec.T);
  maybe_set(config, "G", spec.G);
  if (spec.family == Family::DiSC) {
    DiscHyperparams h;
    maybe_set(config, "kappa_phi", h.kappa_phi);
    maybe_set(config, "kappa_theta", h.kappa_theta);
    maybe_set(config, "kappa_chi", h.kappa_chi);
    maybe_set(config, "alpha_phi", h.alpha_phi);
    maybe_set(config, "alpha_theta", h.alpha_theta);
    for (const char* key : {"kappa_psi", "a", "b"})
      if (config.count(key))
        throw io_error(std::string("config key '") + key +
                       "' is not valid for the DiSC family");
    spec.hyper = h;
  } else {
    GascHyperparams h;
    maybe_set(config, "kappa_psi", h.kappa_psi);
    maybe_set(config, "a", h.a);
    maybe_set(config, "b", h.b);
    for (const char* key :
         {"kappa_phi", "kappa_theta", "kappa_chi", "alpha_phi", "alpha_theta"})
      if (config.count(key))
        throw io_error(std::string("config key '") + key +
                       "' is not valid for the GASC family");
    spec.hyper = h;
  }
  spec.validate();
  return spec;
}

SimConfig sim_config_from_config(const ConfigMap& config) {
  SimConfig sim;
  sim.spec = model_spec_from_config(config);
  maybe_set(config, "L", sim.window_length);
  maybe_set(config, "q_sw", sim.q_stopword);
  maybe_set(config, "q_u", sim.q_uninformative);
  maybe_set(config, "d_per_t", sim.snippets_per_period);
  maybe_set(config, "improper_start_sd", sim.improper_start_sd);
  maybe_set(config, "seed", sim.seed);
  const auto mix = config.find("genre_mix");
  if (mix != config.end()) {
    const auto parts = split_csv(mix->second);
    sim.genre_mix.resize(static_cast<int>(parts.size()));
    for (size_t i = 0; i < parts.size(); ++i)
      sim.genre_mix[static_cast<int>(i)] = to_double(parts[i], "genre_mix");
  }
  sim.validate();
  return sim;
}

ChainConfig chain_config_from_config(const ConfigMap& config, Family family) {
  ChainConfig chain = ChainConfig::defaults_for(family);
  const auto sampler = config.find("sampler");
  if (sampler != config.end())
    chain.sampler = sampler_from_string(sampler->second);
  maybe_set(config, "iterations", chain.iterations);
  maybe_set(config, "burn_in", chain.burn_in);
  maybe_set(config, "thin", chain.thin);
  maybe_set(config, "leapfrog_steps", chain.leapfrog_steps);
  maybe_set(config, "kappa_update_period", chain.kappa_update_period);
  maybe_set(config, "initial_step_size", chain.initial_step_size);
  maybe_set(config, "mixed_long_prob", chain.mixed_long_prob);
  maybe_set(config, "mixed_long_steps_phi", chain.mixed_long_steps_phi);
  maybe_set(config, "mixed_long_steps_word", chain.mixed_long_steps_word);
  maybe_set(config, "seed", chain.seed);
  chain.validate();
  return chain;
}

namespace {

struct RawSnippet {
  std::string id;
  std::string time_label;
  std::string genre_label;
  std::vector<std::string> tokens;
};

std::vector<RawSnippet> read_raw_snippets(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open snippet file: " + path);
  std::vector<RawSnippet> raw;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string trimmed = trim(line);
    if (trimmed.empty() || trimmed[0] == '#') continue;
    std::istringstream stream(trimmed);
    RawSnippet s;
    if (!(stream >> s.id >> s.time_label >> s.genre_label))
      throw io_error(path + ":" + std::to_string(lineno) +
                     ": expected 'id time genre tokens...'");
    std::string token;
    while (stream >> token) s.tokens.push_back(token);
    raw.push_back(std::move(s));
  }
  return raw;
}

// Contiguous integer labels map directly; otherwise the caller must supply
// the period order.
std::vector<std::string> infer_time_order(const std::vector<RawSnippet>& raw,
                                          const std::string& path) {
  std::vector<long> values;
  for (const auto& s : raw) {
    try {
      size_t pos = 0;
      const long v = std::stol(s.time_label, &pos);
      if (pos != s.time_label.size()) throw std::invalid_argument(s.time_label);
      values.push_back(v);
    } catch (const std::exception&) {
      throw io_error(path + ": time label '" + s.time_label +
                     "' is not an integer; pass explicit time labels or bins");
    }
  }
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  if (values.empty()) throw io_error(path + ": no snippets");
  if (values.back() - values.front() + 1 != static_cast<long>(values.size()))
    throw io_error(path + ": time labels are not contiguous integers");
  std::vector<std::string> order;
  for (long v : values) order.push_back(std::to_string(v));
  return order;
}

}  // namespace

SnippetCorpus load_corpus(const std::string& snippet_path,
                          const std::string& vocab_path,
                          const LoadOptions& options, LoadReport* report) {
  const std::vector<RawSnippet> raw = read_raw_snippets(snippet_path);
  LoadReport local;
  LoadReport& rep = report ? *report : local;

  SnippetCorpus corpus;

  // Vocabulary: frozen from file, declared by ids, or interned on the fly.
  std::unordered_map<std::string, int> vocab_index;
  bool frozen = false;
  if (!vocab_path.empty()) {
    std::ifstream in(vocab_path);
    if (!in) throw io_error("cannot open vocab file: " + vocab_path);
    std::string line;
    while (std::getline(in, line)) {
      const std::string word = trim(line);
      if (word.empty() || word[0] == '#') continue;
      if (!vocab_index.emplace(word, static_cast<int>(corpus.vocab.size()))
               .second)
        throw io_error("duplicate vocab entry: " + word);
      corpus.vocab.push_back(word);
    }
    frozen = true;
  }

  // Time mapping.
  std::vector<std::string> time_order = options.time_labels;
  const bool binned = !options.time_bin_edges.empty();
  if (binned) {
    const auto& edges = options.time_bin_edges;
    if (edges.size() < 2 || !std::is_sorted(edges.begin(), edges.end()))
      throw io_error("time bin edges must be ascending with >= 2 entries");
    time_order.clear();
    for (size_t i = 0; i + 1 < edges.size(); ++i) {
      std::ostringstream label;
      label << edges[i];
      time_order.push_back(label.str());
    }
  } else if (time_order.empty()) {
    time_order = infer_time_order(raw, snippet_path);
  }
  std::unordered_map<std::string, int> time_index;
  for (size_t i = 0; i < time_order.size(); ++i)
    time_index[time_order[i]] = static_cast<int>(i);

  // Genre mapping.
  std::vector<std::string> genre_order = options.genre_labels;
  if (genre_order.empty()) {
    for (const auto& s : raw) genre_order.push_back(s.genre_label);
    std::sort(genre_order.begin(), genre_order.end());
    genre_order.erase(std::unique(genre_order.begin(), genre_order.end()),
                      genre_order.end());
  }
  std::unordered_map<std::string, int> genre_index;
  for (size_t i = 0; i < genre_order.size(); ++i)
    genre_index[genre_order[i]] = static_cast<int>(i);

  corpus.T = static_cast<int>(time_order.size());
  corpus.G = static_cast<int>(genre_order.size());
  corpus.time_labels = time_order;
  corpus.genre_labels = genre_order;

  std::vector<int> cell_counts(static_cast<size_t>(corpus.G) * corpus.T, 0);

  for (const auto& s : raw) {
    Snippet snippet;
    snippet.id = s.id;
    if (binned) {
      const double value = to_double(s.time_label, "time label");
      const auto& edges = options.time_bin_edges;
      if (value < edges.front() || value >= edges.back())
        throw io_error("snippet " + s.id + ": time value outside the bins");
      snippet.time = static_cast<int>(
          std::upper_bound(edges.begin(), edges.end(), value) -
          edges.begin() - 1);
    } else {
      const auto it = time_index.find(s.time_label);
      if (it == time_index.end())
        throw io_error("snippet " + s.id + ": unknown time label '" +
                       s.time_label + "'");
      snippet.time = it->second;
    }
    const auto git = genre_index.find(s.genre_label);
    if (git == genre_index.end())
      throw io_error("snippet " + s.id + ": unknown genre label '" +
                     s.genre_label + "'");
    snippet.genre = git->second;

    for (const auto& token : s.tokens) {
      if (options.tokens_are_ids) {
        const long id = to_long(token, "token id") - 1;
        snippet.words.push_back(static_cast<int>(id));
        continue;
      }
      auto it = vocab_index.find(token);
      if (it == vocab_index.end()) {
        if (frozen) {
          if (options.drop_unknown_tokens) {
            rep.dropped_tokens += 1;
            continue;
          }
          throw io_error("snippet " + s.id + ": unknown token '" + token +
                         "' with a frozen vocabulary");
        }
        it = vocab_index.emplace(token, static_cast<int>(corpus.vocab.size()))
                 .first;
        corpus.vocab.push_back(token);
      }
      snippet.words.push_back(it->second);
    }

    const int cell = snippet.genre + corpus.G * snippet.time;
    if (options.max_snippets_per_cell > 0 &&
        cell_counts[cell] >= options.max_snippets_per_cell) {
      rep.dropped_snippets += 1;
      continue;
    }
    cell_counts[cell] += 1;
    if (snippet.words.empty()) rep.empty_snippets += 1;
    corpus.snippets.push_back(std::move(snippet));
  }

  corpus.V = options.tokens_are_ids && corpus.vocab.empty()
                 ? [&] {
                     int v = 0;
                     for (const auto& s : corpus.snippets)
                       for (int w : s.words) v = std::max(v, w + 1);
                     return v;
                   }()
                 : static_cast<int>(corpus.vocab.size());
  rep.snippets = corpus.size();
  corpus.validate();
  return corpus;
}

void write_snippet_file(const std::string& path, const SnippetCorpus& corpus) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write snippet file: " + path);
  out << "# disc snippet-file v1\n";
  for (const Snippet& s : corpus.snippets) {
    const std::string time_label = corpus.time_labels.empty()
                                       ? std::to_string(s.time + 1)
                                       : corpus.time_labels[s.time];
    const std::string genre_label = corpus.genre_labels.empty()
                                        ? "g" + std::to_string(s.genre + 1)
                                        : corpus.genre_labels[s.genre];
    out << s.id << '\t' << time_label << '\t' << genre_label << '\t';
    for (size_t i = 0; i < s.words.size(); ++i) {
      if (i) out << ' ';
      if (corpus.vocab.empty())
        out << (s.words[i] + 1);
      else
        out << corpus.vocab[s.words[i]];
    }
    out << '\n';
  }
}

void write_vocab_file(const std::string& path, const SnippetCorpus& corpus) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write vocab file: " + path);
  out << "# disc vocab v1\n";
  for (const auto& word : corpus.vocab) out << word << '\n';
}

GroundTruth read_truth(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open truth file: " + path);
  GroundTruth truth;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string trimmed = trim(line);
    if (trimmed.empty() || trimmed[0] == '#') continue;
    std::istringstream stream(trimmed);
    std::string id;
    int sense = 0;
    if (!(stream >> id >> sense))
      throw io_error(path + ":" + std::to_string(lineno) +
                     ": expected 'id sense'");
    if (!truth.labels.emplace(id, sense - 1).second)
      throw io_error(path + ": duplicate truth id " + id);
  }
  return truth;
}

void write_truth(const std::string& path, const SnippetCorpus& corpus,
                 const std::vector<int>& labels_by_index) {
  if (labels_by_index.size() != corpus.snippets.size())
    throw io_error("write_truth: labels do not cover the corpus");
  std::ofstream out(path);
  if (!out) throw io_error("cannot write truth file: " + path);
  out << "# disc truth v1\n";
  for (size_t d = 0; d < corpus.snippets.size(); ++d)
    out << corpus.snippets[d].id << ' ' << (labels_by_index[d] + 1) << '\n';
}

void write_predictions(const std::string& path, const SnippetCorpus& corpus,
                       const MatrixXd& predictions) {
  if (predictions.cols() != corpus.size())
    throw io_error("write_predictions: prediction count mismatch");
  std::ofstream out(path);
  if (!out) throw io_error("cannot write predictions file: " + path);
  out << "# disc predictions v1\n";
  char buf[64];
  for (int d = 0; d < corpus.size(); ++d) {
    out << corpus.snippets[d].id;
    for (int k = 0; k < predictions.rows(); ++k) {
      std::snprintf(buf, sizeof(buf), " %.9g", predictions(k, d));
      out << buf;
    }
    out << '\n';
  }
}

std::pair<std::vector<std::string>, MatrixXd> read_predictions(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open predictions file: " + path);
  std::vector<std::string> ids;
  std::vector<std::vector<double>> rows;
  std::string line;
  size_t width = 0;
  while (std::getline(in, line)) {
    const std::string trimmed = trim(line);
    if (trimmed.empty() || trimmed[0] == '#') continue;
    std::istringstream stream(trimmed);
    std::string id;
    stream >> id;
    std::vector<double> probs;
    double p = 0.0;
    while (stream >> p) probs.push_back(p);
    if (probs.empty()) throw io_error(path + ": no probabilities for " + id);
    if (width == 0) width = probs.size();
    if (probs.size() != width)
      throw io_error(path + ": ragged prediction rows");
    ids.push_back(id);
    rows.push_back(std::move(probs));
  }
  MatrixXd predictions(width, rows.size());
  for (size_t d = 0; d < rows.size(); ++d)
    for (size_t k = 0; k < width; ++k)
      predictions(static_cast<int>(k), static_cast<int>(d)) = rows[d][k];
  return {ids, predictions};
}

// ---------------------------------------------------------------------------
// Binary store
// ---------------------------------------------------------------------------

namespace {

constexpr char kStoreMagic[8] = {'D', 'S', 'C', 'S', 'T', 'O', 'R', '1'};

template <typename T>
void put(std::ofstream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::ifstream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw io_error("truncated sample store");
  return value;
}

}  // namespace

void write_store(const std::string& path, const ChainOutput& output) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot write sample store: " + path);
  out.write(kStoreMagic, sizeof(kStoreMagic));
  put<std::uint32_t>(out, 1);
  const ModelSpec& spec = output.spec;
  put<std::uint8_t>(out, spec.is_disc() ? 0 : 1);
  put<std::uint8_t>(out, static_cast<std::uint8_t>(output.config.sampler));
  put<std::uint16_t>(out, 0);
  put<std::int32_t>(out, spec.K);
  put<std::int32_t>(out, spec.V);
  put<std::int32_t>(out, spec.T);
  put<std::int32_t>(out, spec.G);
  double hyper[5] = {0, 0, 0, 0, 0};
  if (spec.is_disc()) {
    const auto& h = spec.disc();
    hyper[0] = h.kappa_phi;
    hyper[1] = h.kappa_theta;
    hyper[2] = h.kappa_chi;
    hyper[3] = h.alpha_phi;
    hyper[4] = h.alpha_theta;
  } else {
    const auto& h = spec.gasc();
    hyper[0] = h.kappa_psi;
    hyper[1] = h.a;
    hyper[2] = h.b;
  }
  for (double v : hyper) put<double>(out, v);
  put<std::int64_t>(out, output.config.iterations);
  put<std::int64_t>(out, output.config.burn_in);
  put<std::int64_t>(out, output.config.thin);
  put<std::int32_t>(out, output.config.leapfrog_steps);
  put<std::int32_t>(out, 0);
  put<std::uint64_t>(out, output.config.seed);
  put<double>(out, output.wall_seconds_total);
  put<double>(out, output.wall_seconds_sampling);
  put<std::int64_t>(out, output.param_count);
  put<std::int64_t>(out, output.sample_count);
  const auto write_matrix = [&](const MatrixXd& m) {
    out.write(reinterpret_cast<const char*>(m.data()),
              static_cast<std::streamsize>(sizeof(double) * m.size()));
  };
  write_matrix(output.mean_phi_tilde);
  write_matrix(output.mean_psi_tilde);
  out.write(reinterpret_cast<const char*>(output.samples.data()),
            static_cast<std::streamsize>(sizeof(double) *
                                         output.samples.size()));
  if (!out) throw io_error("failed writing sample store: " + path);
}

ChainOutput read_store(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open sample store: " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kStoreMagic, sizeof(magic)) != 0)
    throw io_error("not a disc sample store: " + path);
  const auto version = get<std::uint32_t>(in);
  if (version != 1) throw io_error("unsupported store version");
  ChainOutput output;
  ModelSpec spec;
  const auto family = get<std::uint8_t>(in);
  spec.family = family == 0 ? Family::DiSC : Family::GASC;
  output.config.sampler = static_cast<SamplerKind>(get<std::uint8_t>(in));
  get<std::uint16_t>(in);
  spec.K = get<std::int32_t>(in);
  spec.V = get<std::int32_t>(in);
  spec.T = get<std::int32_t>(in);
  spec.G = get<std::int32_t>(in);
  double hyper[5];
  for (double& v : hyper) v = get<double>(in);
  if (spec.family == Family::DiSC)
    spec.hyper = DiscHyperparams{hyper[0], hyper[1], hyper[2], hyper[3],
                                 hyper[4]};
  else
    spec.hyper = GascHyperparams{hyper[0], hyper[1], hyper[2]};
  output.config.iterations = get<std::int64_t>(in);
  output.config.burn_in = get<std::int64_t>(in);
  output.config.thin = get<std::int64_t>(in);
  output.config.leapfrog_steps = get<std::int32_t>(in);
  get<std::int32_t>(in);
  output.config.seed = get<std::uint64_t>(in);
  output.wall_seconds_total = get<double>(in);
  output.wall_seconds_sampling = get<double>(in);
  output.param_count = get<std::int64_t>(in);
  output.sample_count = get<std::int64_t>(in);
  output.spec = spec;
  output.mean_phi_tilde.resize(spec.K, spec.G * spec.T);
  output.mean_psi_tilde.resize(spec.V, spec.K * spec.T);
  in.read(reinterpret_cast<char*>(output.mean_phi_tilde.data()),
          static_cast<std::streamsize>(sizeof(double) *
                                       output.mean_phi_tilde.size()));
  in.read(reinterpret_cast<char*>(output.mean_psi_tilde.data()),
          static_cast<std::streamsize>(sizeof(double) *
                                       output.mean_psi_tilde.size()));
  output.samples.resize(static_cast<size_t>(output.param_count) *
                        output.sample_count);
  in.read(reinterpret_cast<char*>(output.samples.data()),
          static_cast<std::streamsize>(sizeof(double) *
                                       output.samples.size()));
  if (!in) throw io_error("truncated sample store: " + path);
  return output;
}

// ---------------------------------------------------------------------------
// Summaries and tables
// ---------------------------------------------------------------------------

void write_summary(const std::string& path, const ChainOutput& output) {
  const ModelSpec& spec = output.spec;
  json j;
  j["format"] = "disc-summary";
  j["version"] = 1;
  j["family"] = to_string(spec.family);
  j["K"] = spec.K;
  j["V"] = spec.V;
  j["T"] = spec.T;
  j["G"] = spec.G;
  j["sampler"] = to_string(output.config.sampler);
  j["iterations"] = output.config.iterations;
  j["burn_in"] = output.config.burn_in;
  j["thin"] = output.config.thin;
  j["seed"] = output.config.seed;
  j["sample_count"] = output.sample_count;
  j["degeneracy_events"] = output.degeneracy_events;

  json acceptance = json::array();
  for (const BlockStats& stats : output.block_stats) {
    acceptance.push_back({{"block", stats.name},
                          {"proposals", stats.proposals},
                          {"accepts", stats.accepts},
                          {"rate", stats.acceptance_rate()},
                          {"divergences", stats.divergences},
                          {"bad_gradients", stats.bad_gradients},
                          {"final_step_size", stats.final_step_size}});
  }
  j["acceptance"] = acceptance;

  const auto phi = summarize_phi_tilde(output);
  json phi_json = json::array();
  for (int t = 0; t < spec.T; ++t)
    for (int g = 0; g < spec.G; ++g)
      for (int k = 0; k < spec.K; ++k) {
        const auto& s = phi[k + spec.K * (g + spec.G * t)];
        phi_json.push_back({{"k", k + 1},
                            {"g", g + 1},
                            {"t", t + 1},
                            {"mean", s.mean},
                            {"sd", s.sd},
                            {"hpd_lower", s.hpd_lower},
                            {"hpd_upper", s.hpd_upper}});
      }
  j["phi_tilde"] = phi_json;

  const auto psi = summarize_psi_tilde(output);
  json psi_json = json::array();
  for (int t = 0; t < spec.T; ++t)
    for (int k = 0; k < spec.K; ++k)
      for (int v = 0; v < spec.V; ++v) {
        const auto& s = psi[v + spec.V * (k + spec.K * t)];
        psi_json.push_back({{"v", v + 1},
                            {"k", k + 1},
                            {"t", t + 1},
                            {"mean", s.mean},
                            {"sd", s.sd},
                            {"hpd_lower", s.hpd_lower},
                            {"hpd_upper", s.hpd_upper}});
      }
  j["psi_tilde"] = psi_json;

  if (!spec.is_disc()) {
    // kappa_phi trace is the last flattened coordinate.
    std::vector<double> kappa(output.sample_count);
    for (long i = 0; i < output.sample_count; ++i)
      kappa[i] = output.draw(i)[output.param_count - 1];
    j["kappa_phi"] = {{"mean", mean_of(kappa)}};
  }

  std::ofstream out(path);
  if (!out) throw io_error("cannot write summary: " + path);
  out << j.dump(1) << '\n';
}

void write_prevalence_table(const std::string& path, const ChainOutput& output,
                            const SnippetCorpus& corpus,
                            const MatrixXd* empirical) {
  const ModelSpec& spec = output.spec;
  const auto phi = summarize_phi_tilde(output);
  std::ofstream out(path);
  if (!out) throw io_error("cannot write prevalence table: " + path);
  out << "# disc prevalence-table v1\n";
  out << "k\tg\tt\ttime_label\tgenre_label\tempirical\tpost_mean\thpd_lower"
         "\thpd_upper\n";
  char buf[160];
  for (int t = 0; t < spec.T; ++t)
    for (int g = 0; g < spec.G; ++g)
      for (int k = 0; k < spec.K; ++k) {
        const auto& s = phi[k + spec.K * (g + spec.G * t)];
        const std::string time_label = corpus.time_labels.empty()
                                           ? std::to_string(t + 1)
                                           : corpus.time_labels[t];
        const std::string genre_label = corpus.genre_labels.empty()
                                            ? "g" + std::to_string(g + 1)
                                            : corpus.genre_labels[g];
        std::string emp = "NA";
        if (empirical != nullptr) {
          const double e = (*empirical)(k, g + spec.G * t);
          if (std::isfinite(e)) {
            std::snprintf(buf, sizeof(buf), "%.9g", e);
            emp = buf;
          }
        }
        std::snprintf(buf, sizeof(buf), "%.9g\t%.9g\t%.9g", s.mean,
                      s.hpd_lower, s.hpd_upper);
        out << (k + 1) << '\t' << (g + 1) << '\t' << (t + 1) << '\t'
            << time_label << '\t' << genre_label << '\t' << emp << '\t' << buf
            << '\n';
      }
}

void write_manifest(const std::string& path, const std::string& command,
                    const std::map<std::string, std::string>& inputs,
                    const ModelSpec& spec,
                    const std::optional<ChainConfig>& config,
                    const std::string& out_dir) {
  json j;
  j["format"] = "disc-manifest";
  j["version"] = 1;
  j["command"] = command;
  j["inputs"] = inputs;
  j["out_dir"] = out_dir;
  j["spec"] = {{"family", to_string(spec.family)},
               {"K", spec.K},
               {"V", spec.V},
               {"T", spec.T},
               {"G", spec.G}};
  if (spec.is_disc()) {
    const auto& h = spec.disc();
    j["spec"]["kappa_phi"] = h.kappa_phi;
    j["spec"]["kappa_theta"] = h.kappa_theta;
    j["spec"]["kappa_chi"] = h.kappa_chi;
    j["spec"]["alpha_phi"] = h.alpha_phi;
    j["spec"]["alpha_theta"] = h.alpha_theta;
  } else {
    const auto& h = spec.gasc();
    j["spec"]["kappa_psi"] = h.kappa_psi;
    j["spec"]["a"] = h.a;
    j["spec"]["b"] = h.b;
  }
  if (config) {
    j["chain"] = {{"sampler", to_string(config->sampler)},
                  {"iterations", config->iterations},
                  {"burn_in", config->burn_in},
                  {"thin", config->thin},
                  {"leapfrog_steps", config->leapfrog_steps},
                  {"seed", config->seed}};
  }
  std::ofstream out(path);
  if (!out) throw io_error("cannot write manifest: " + path);
  out << j.dump(1) << '\n';
}

}  // namespace disc
