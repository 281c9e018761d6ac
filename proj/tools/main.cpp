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

// Command-line front end: fit, simulate, evaluate, diagnose, elicit.
// Exit codes: 0 success, 1 numerical or validation failure, 2 usage error.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <json.hpp>
#include <optional>

#include "disc/evaluate.hpp"
#include "disc/io.hpp"
#include "disc/likelihood.hpp"
#include "disc/samplers.hpp"
#include "disc/simulate.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct FitArgs {
  std::string config_path;
  std::string snippets;
  std::string vocab;
  std::string truth;
  std::string out_dir = "disc-out";
  std::string sampler;
  std::string init = "prior";  // prior | warm
  long iterations = -1;
  long burn_in = -1;
  long thin = -1;
  int chains = 1;
  long seed = -1;
  std::vector<std::string> time_labels;
  std::vector<std::string> genre_labels;
  int max_per_cell = 0;
};

disc::SnippetCorpus load_fit_corpus(const FitArgs& args,
                                    disc::LoadReport* report) {
  disc::LoadOptions options;
  options.time_labels = args.time_labels;
  options.genre_labels = args.genre_labels;
  options.max_snippets_per_cell = args.max_per_cell;
  return disc::load_corpus(args.snippets, args.vocab, options, report);
}

int run_fit(const FitArgs& args) {
  const disc::ConfigMap config = disc::read_config(args.config_path);
  disc::ModelSpec spec = disc::model_spec_from_config(config);
  disc::ChainConfig chain =
      disc::chain_config_from_config(config, spec.family);
  if (!args.sampler.empty())
    chain.sampler = disc::sampler_from_string(args.sampler);
  if (args.iterations > 0) chain.iterations = args.iterations;
  if (args.burn_in >= 0) chain.burn_in = args.burn_in;
  if (args.thin > 0) chain.thin = args.thin;
  if (args.seed >= 0) chain.seed = static_cast<std::uint64_t>(args.seed);
  chain.validate();

  disc::LoadReport report;
  disc::SnippetCorpus corpus = load_fit_corpus(args, &report);
  if (corpus.V != spec.V) {
    std::cerr << "note: corpus vocabulary size " << corpus.V
              << " replaces configured V=" << spec.V << "\n";
    spec.V = corpus.V;
  }
  if (corpus.T != spec.T || corpus.G != spec.G)
    throw disc::model_error("corpus has T=" + std::to_string(corpus.T) +
                            ", G=" + std::to_string(corpus.G) +
                            " but the config declares T=" +
                            std::to_string(spec.T) + ", G=" +
                            std::to_string(spec.G));
  spec.validate();

  std::optional<disc::GroundTruth> truth;
  if (!args.truth.empty()) truth = disc::read_truth(args.truth);

  std::optional<disc::LatentState> warm_init;
  if (args.init == "warm") {
    if (!truth)
      throw disc::model_error("--init warm requires --truth labels");
    std::vector<int> labels(corpus.size());
    for (int d = 0; d < corpus.size(); ++d) {
      const auto& id = corpus.snippets[d].id;
      if (!truth->has(id))
        throw disc::model_error("warm start: missing label for " + id);
      labels[d] = truth->label(id);
    }
    warm_init = disc::warm_start_from_labels(corpus, labels, spec);
  } else if (args.init != "prior") {
    throw CLI::ValidationError("--init must be 'prior' or 'warm'");
  }

  fs::create_directories(args.out_dir);
  disc::write_manifest((fs::path(args.out_dir) / "manifest.json").string(),
                       "fit",
                       {{"config", args.config_path},
                        {"snippets", args.snippets},
                        {"vocab", args.vocab},
                        {"truth", args.truth}},
                       spec, chain, args.out_dir);

  std::optional<disc::MatrixXd> empirical;
  if (truth)
    empirical = disc::empirical_prevalence(*truth, corpus, spec.K);

  for (int c = 0; c < args.chains; ++c) {
    disc::ChainConfig chain_c = chain;
    chain_c.seed = args.chains == 1
                       ? chain.seed
                       : disc::Rng::derive_seed(chain.seed, c);
    const disc::ChainOutput output =
        disc::run_chain(corpus, spec, chain_c, warm_init);
    const std::string stem = "chain" + std::to_string(c + 1);
    const fs::path dir(args.out_dir);
    disc::write_store((dir / (stem + ".bin")).string(), output);
    disc::write_summary((dir / (stem + ".json")).string(), output);
    disc::write_prevalence_table((dir / (stem + "_prevalence.tsv")).string(),
                                 output, corpus,
                                 empirical ? &*empirical : nullptr);
    std::cout << stem << ": " << output.sample_count << " draws in "
              << output.wall_seconds_total << "s\n";
  }
  return 0;
}

int run_simulate(const std::string& config_path, const std::string& out_dir,
                 long seed, const std::string& design) {
  fs::create_directories(out_dir);
  disc::SimOutput sim;
  disc::ModelSpec spec;
  if (!design.empty()) {
    disc::InteractionDesign d;
    if (design == "ex1") d = disc::InteractionDesign::Ex1;
    else if (design == "ex2") d = disc::InteractionDesign::Ex2;
    else if (design == "ex3") d = disc::InteractionDesign::Ex3;
    else throw CLI::ValidationError("--design must be ex1, ex2 or ex3");
    long use_seed = seed >= 0 ? seed : 1;
    sim = disc::make_explicit_interaction_dataset(
        d, static_cast<std::uint64_t>(use_seed));
    spec = disc::ModelSpec{disc::Family::GASC, 3, 100, 9, 1,
                           disc::GascHyperparams{}};
  } else {
    if (config_path.empty())
      throw CLI::ValidationError("simulate needs --config or --design");
    disc::SimConfig config =
        disc::sim_config_from_config(disc::read_config(config_path));
    if (seed >= 0) config.seed = static_cast<std::uint64_t>(seed);
    sim = disc::simulate(config);
    spec = config.spec;
  }
  const fs::path dir(out_dir);
  disc::write_snippet_file((dir / "snippets.tsv").string(), sim.corpus);
  disc::write_vocab_file((dir / "vocab.txt").string(), sim.corpus);
  disc::write_truth((dir / "truth.tsv").string(), sim.corpus,
                    sim.truth_by_index);
  // True parameters ride in a one-draw sample store.
  disc::ChainOutput params;
  params.spec = spec;
  params.param_count = disc::flattened_param_count(spec);
  params.sample_count = 1;
  params.samples.resize(params.param_count);
  disc::flatten_state(sim.true_state, spec, params.samples.data());
  params.mean_phi_tilde = sim.true_probs.phi_tilde;
  params.mean_psi_tilde = sim.true_probs.psi_tilde;
  disc::write_store((dir / "params.bin").string(), params);
  disc::write_manifest((dir / "manifest.json").string(), "simulate",
                       {{"config", config_path}, {"design", design}}, spec,
                       std::nullopt, out_dir);
  std::cout << "wrote " << sim.corpus.size() << " snippets, V="
            << sim.corpus.V << "\n";
  return 0;
}

int run_evaluate(const std::string& snippets, const std::string& vocab,
                 const std::string& truth_path, const std::string& store_path,
                 const std::string& predictions_path,
                 const std::string& out_dir) {
  disc::LoadOptions options;
  const disc::SnippetCorpus corpus = disc::load_corpus(snippets, vocab, options);
  const disc::GroundTruth truth = disc::read_truth(truth_path);
  fs::create_directories(out_dir);
  const fs::path dir(out_dir);

  json report;
  report["format"] = "disc-evaluation";
  report["version"] = 1;

  disc::MatrixXd predictions;  // K_true-aligned per-snippet probabilities
  int k_true = 0;
  for (const auto& [id, label] : truth.labels)
    k_true = std::max(k_true, label + 1);

  if (!store_path.empty()) {
    const disc::ChainOutput output = disc::read_store(store_path);
    const disc::MatrixXd raw =
        disc::posterior_sense_probabilities(corpus, output);
    // Align model senses with annotated senses via time-averaged word
    // distributions, then renormalise over the matched senses.
    disc::MatrixXd model_dists(output.spec.V, output.spec.K);
    for (int k = 0; k < output.spec.K; ++k) {
      disc::VectorXd avg = disc::VectorXd::Zero(output.spec.V);
      for (int t = 0; t < output.spec.T; ++t)
        avg += output.mean_psi_tilde.col(k + output.spec.K * t);
      model_dists.col(k) = avg / output.spec.T;
    }
    const disc::MatrixXd true_dists =
        disc::empirical_word_distributions(truth, corpus, k_true);
    const disc::SenseAlignment alignment =
        disc::align_senses(model_dists, true_dists);
    report["alignment"] = {{"model_to_true", alignment.model_to_true},
                           {"total_divergence", alignment.total_divergence}};
    predictions = disc::MatrixXd::Zero(k_true, corpus.size());
    for (int m = 0; m < output.spec.K; ++m) {
      const int s = alignment.model_to_true[m];
      if (s >= 0) predictions.row(s) += raw.row(m);
    }
    for (int d = 0; d < corpus.size(); ++d) {
      const double total = predictions.col(d).sum();
      if (total > 0) predictions.col(d) /= total;
    }
    disc::write_predictions((dir / "predictions.tsv").string(), corpus,
                            predictions);
    // Figure-style prevalence table with the empirical bars.
    const disc::MatrixXd empirical =
        disc::empirical_prevalence(truth, corpus, k_true);
    disc::write_prevalence_table((dir / "prevalence.tsv").string(), output,
                                 corpus, &empirical);
    // Top words per sense, time-averaged.
    std::ofstream top((dir / "top_words.txt").string());
    for (int k = 0; k < output.spec.K; ++k) {
      top << "sense " << (k + 1) << ":";
      for (int v : disc::top_words(output.mean_psi_tilde, output.spec.K,
                                   output.spec.T, k, 10))
        top << ' ' << (corpus.vocab.empty() ? std::to_string(v + 1)
                                            : corpus.vocab[v]);
      top << '\n';
    }
  } else if (!predictions_path.empty()) {
    auto [ids, preds] = disc::read_predictions(predictions_path);
    std::unordered_map<std::string, int> index;
    for (int d = 0; d < corpus.size(); ++d) index[corpus.snippets[d].id] = d;
    predictions =
        disc::MatrixXd::Constant(preds.rows(), corpus.size(), 0.0);
    for (size_t i = 0; i < ids.size(); ++i) {
      const auto it = index.find(ids[i]);
      if (it == index.end())
        throw disc::io_error("prediction for unknown snippet " + ids[i]);
      predictions.col(it->second) = preds.col(i);
    }
    k_true = std::max(k_true, static_cast<int>(predictions.rows()));
  } else {
    throw CLI::ValidationError("evaluate needs --store or --predictions");
  }

  // Score only snippets with labels.
  std::vector<int> labelled;
  for (int d = 0; d < corpus.size(); ++d)
    if (truth.has(corpus.snippets[d].id)) labelled.push_back(d);
  disc::MatrixXd scored(predictions.rows(),
                        static_cast<int>(labelled.size()));
  std::vector<int> labels(labelled.size());
  for (size_t i = 0; i < labelled.size(); ++i) {
    scored.col(static_cast<int>(i)) = predictions.col(labelled[i]);
    labels[i] = truth.label(corpus.snippets[labelled[i]].id);
  }
  const double brier = disc::brier_score(scored, labels);
  report["brier_score"] = brier;
  report["scored_snippets"] = labelled.size();

  std::vector<int> hard(labels.size());
  for (size_t i = 0; i < labels.size(); ++i) {
    int best = 0;
    scored.col(static_cast<int>(i)).maxCoeff(&best);
    hard[i] = best;
  }
  json confusion = json::array();
  for (int k = 0; k < k_true; ++k) {
    const disc::ConfusionStats stats = disc::confusion_stats(hard, labels, k);
    confusion.push_back({{"sense", k + 1},
                         {"sensitivity", stats.sensitivity},
                         {"specificity", stats.specificity},
                         {"accuracy", stats.accuracy}});
  }
  report["confusion"] = confusion;

  std::ofstream out((dir / "report.json").string());
  out << report.dump(1) << '\n';
  std::printf("brier %.4f over %zu labelled snippets\n", brier,
              labelled.size());
  return 0;
}

int run_diagnose(const std::vector<std::string>& stores,
                 const std::string& out_path, double threshold) {
  if (stores.size() < 2)
    throw CLI::ValidationError("diagnose needs at least two --store files");
  std::vector<disc::ChainOutput> outputs;
  for (const auto& path : stores) outputs.push_back(disc::read_store(path));

  json report;
  report["format"] = "disc-diagnose";
  report["version"] = 1;
  json pairs = json::array();
  double worst = 0.0;
  for (size_t i = 0; i < outputs.size(); ++i)
    for (size_t j = i + 1; j < outputs.size(); ++j) {
      const auto gaps = disc::compare_chains_phi(outputs[i], outputs[j]);
      double max_gap = 0.0;
      int above = 0;
      json entries = json::array();
      for (const auto& gap : gaps) {
        max_gap = std::max(max_gap, gap.gap_in_mcse);
        if (gap.gap_in_mcse > threshold) ++above;
        entries.push_back({{"k", gap.k + 1},
                           {"g", gap.g + 1},
                           {"t", gap.t + 1},
                           {"mean_a", gap.mean_a},
                           {"mean_b", gap.mean_b},
                           {"combined_mcse", gap.combined_mcse},
                           {"gap_in_mcse", gap.gap_in_mcse}});
      }
      worst = std::max(worst, max_gap);
      pairs.push_back({{"chain_a", stores[i]},
                       {"chain_b", stores[j]},
                       {"max_gap_in_mcse", max_gap},
                       {"params_above_threshold", above},
                       {"params", entries}});
      std::printf("%s vs %s: max gap %.2f MCSE units, %d above %.1f\n",
                  stores[i].c_str(), stores[j].c_str(), max_gap, above,
                  threshold);
    }
  report["pairs"] = pairs;
  report["threshold"] = threshold;
  report["agree"] = worst <= threshold;

  json ess = json::array();
  for (size_t i = 0; i < outputs.size(); ++i) {
    const auto phi =
        disc::ess_benchmark(outputs[i], disc::EssSelection::PhiAll);
    const auto psi =
        disc::ess_benchmark(outputs[i], disc::EssSelection::PsiTopWords);
    ess.push_back({{"store", stores[i]},
                   {"phi_median_ess_per_hour", phi.median_per_hour},
                   {"phi_iqr", {phi.iqr_lower, phi.iqr_upper}},
                   {"psi_median_ess_per_hour", psi.median_per_hour},
                   {"psi_iqr", {psi.iqr_lower, psi.iqr_upper}}});
    std::printf("%s: phi ESS/hr median %.1f, psi ESS/hr median %.1f\n",
                stores[i].c_str(), phi.median_per_hour, psi.median_per_hour);
  }
  report["ess"] = ess;

  if (!out_path.empty()) {
    std::ofstream out(out_path);
    out << report.dump(1) << '\n';
  }
  std::printf("chains %s\n", worst <= threshold ? "agree" : "DISAGREE");
  return 0;
}

int run_elicit(double ratio, double alpha, const std::string& target) {
  if (target == "phi") {
    const disc::Elicited e = disc::elicit_kappa_phi(ratio, alpha);
    std::printf("kappa_phi %g (exact %.6f)\n", e.rounded, e.exact);
  } else if (target == "words") {
    const auto [chi, theta] = disc::elicit_kappa_chi_theta(ratio, alpha);
    std::printf("kappa_chi %g (exact %.6f)\n", chi.rounded, chi.exact);
    std::printf("kappa_theta %g (exact %.6f)\n", theta.rounded, theta.exact);
  } else {
    throw CLI::ValidationError("--target must be 'phi' or 'words'");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Diachronic sense-change models: fit, simulate, evaluate"};
  app.require_subcommand(1);

  FitArgs fit_args;
  auto* fit = app.add_subcommand("fit", "Fit a model to a snippet corpus");
  fit->add_option("--config", fit_args.config_path, "model + chain config")
      ->required();
  fit->add_option("--snippets", fit_args.snippets, "snippet file")->required();
  fit->add_option("--vocab", fit_args.vocab, "frozen vocabulary file");
  fit->add_option("--truth", fit_args.truth, "truth sidecar (for warm start "
                                             "and empirical prevalences)");
  fit->add_option("--out", fit_args.out_dir, "output directory");
  fit->add_option("--sampler", fit_args.sampler,
                  "aux-uniform | polya-gamma | polya-gamma-approx | mala | "
                  "hmc | mixed");
  fit->add_option("--iterations", fit_args.iterations, "total sweeps");
  fit->add_option("--burn-in", fit_args.burn_in, "burn-in sweeps");
  fit->add_option("--thin", fit_args.thin, "thinning stride");
  fit->add_option("--chains", fit_args.chains, "number of chains")
      ->check(CLI::PositiveNumber);
  fit->add_option("--seed", fit_args.seed, "master RNG seed");
  fit->add_option("--init", fit_args.init, "prior | warm");
  fit->add_option("--time-labels", fit_args.time_labels,
                  "explicit period order")
      ->delimiter(',');
  fit->add_option("--genre-labels", fit_args.genre_labels,
                  "explicit genre order")
      ->delimiter(',');
  fit->add_option("--max-per-cell", fit_args.max_per_cell,
                  "cap snippets per (genre, time) cell");

  std::string sim_config, sim_out = "disc-sim", sim_design;
  long sim_seed = -1;
  auto* simulate = app.add_subcommand("simulate", "Generate a corpus");
  simulate->add_option("--config", sim_config, "simulation config");
  simulate->add_option("--out", sim_out, "output directory");
  simulate->add_option("--seed", sim_seed, "RNG seed");
  simulate->add_option("--design", sim_design,
                       "explicit-interaction design: ex1 | ex2 | ex3");

  std::string eval_snippets, eval_vocab, eval_truth, eval_store,
      eval_predictions, eval_out = "disc-eval";
  auto* evaluate = app.add_subcommand("evaluate", "Score a fit against truth");
  evaluate->add_option("--snippets", eval_snippets)->required();
  evaluate->add_option("--vocab", eval_vocab);
  evaluate->add_option("--truth", eval_truth)->required();
  evaluate->add_option("--store", eval_store, "fitted sample store");
  evaluate->add_option("--predictions", eval_predictions,
                       "precomputed per-snippet probabilities");
  evaluate->add_option("--out", eval_out);

  std::vector<std::string> diag_stores;
  std::string diag_out;
  double diag_threshold = 3.0;
  auto* diagnose =
      app.add_subcommand("diagnose", "Compare chains and report ESS");
  diagnose->add_option("--store", diag_stores, "sample stores (two or more)")
      ->required();
  diagnose->add_option("--out", diag_out, "report path");
  diagnose->add_option("--threshold", diag_threshold,
                       "agreement threshold in combined-MCSE units");

  double elicit_ratio = 100.0, elicit_alpha = 0.9;
  std::string elicit_target = "phi";
  auto* elicit =
      app.add_subcommand("elicit", "Variance hyperparameters from a "
                                   "probability-ratio threshold");
  elicit->add_option("--ratio", elicit_ratio, "extreme probability ratio")
      ->required();
  elicit->add_option("--alpha", elicit_alpha, "AR(1) coefficient");
  elicit->add_option("--target", elicit_target, "phi | words");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*fit) return run_fit(fit_args);
    if (*simulate) return run_simulate(sim_config, sim_out, sim_seed,
                                       sim_design);
    if (*evaluate)
      return run_evaluate(eval_snippets, eval_vocab, eval_truth, eval_store,
                          eval_predictions, eval_out);
    if (*diagnose) return run_diagnose(diag_stores, diag_out, diag_threshold);
    if (*elicit) return run_elicit(elicit_ratio, elicit_alpha, elicit_target);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
