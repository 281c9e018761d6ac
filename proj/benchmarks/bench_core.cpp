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

#include <benchmark/benchmark.h>

#include "disc/likelihood.hpp"
#include "disc/polya_gamma.hpp"
#include "disc/samplers.hpp"
#include "disc/simulate.hpp"

namespace {

disc::SimOutput make_benchmark_corpus(int snippets_per_period) {
  disc::SimConfig sim;
  sim.spec.family = disc::Family::GASC;
  sim.spec.K = 2;
  sim.spec.V = 400;
  sim.spec.T = 10;
  sim.spec.G = 1;
  sim.spec.hyper = disc::GascHyperparams{};
  sim.improper_start_sd = 2.0;
  sim.snippets_per_period = snippets_per_period;
  sim.seed = 7;
  return disc::simulate(sim);
}

void bm_log_marginal_likelihood(benchmark::State& state) {
  const disc::SimOutput sim =
      make_benchmark_corpus(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        disc::log_marginal_likelihood(sim.corpus, sim.true_probs));
  }
}
BENCHMARK(bm_log_marginal_likelihood)->Arg(50)->Arg(200);

void bm_grad_psi(benchmark::State& state) {
  const disc::SimOutput sim =
      make_benchmark_corpus(static_cast<int>(state.range(0)));
  const disc::CorpusIndex index(sim.corpus, sim.corpus.G, sim.corpus.T);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        disc::grad_psi_loglik(sim.corpus, index, sim.true_probs, 0, 3));
  }
}
BENCHMARK(bm_grad_psi)->Arg(50)->Arg(200);

void bm_sweep(benchmark::State& state) {
  const disc::SimOutput sim = make_benchmark_corpus(100);
  disc::ChainConfig config;
  config.sampler = static_cast<disc::SamplerKind>(state.range(0));
  config.iterations = 20;
  config.burn_in = 10;
  config.seed = 3;
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        disc::run_chain(sim.corpus, sim.true_state.family == disc::Family::GASC
                            ? disc::ModelSpec{disc::Family::GASC, 2, sim.corpus.V,
                                              sim.corpus.T, sim.corpus.G,
                                              disc::GascHyperparams{}}
                            : disc::ModelSpec{},
                        config));
  }
}
BENCHMARK(bm_sweep)
    ->Arg(static_cast<int>(disc::SamplerKind::MixedMalaHmc))
    ->Arg(static_cast<int>(disc::SamplerKind::AuxUniform))
    ->Unit(benchmark::kMillisecond);

void bm_polya_gamma_unit(benchmark::State& state) {
  disc::Rng rng(11);
  const double eta = state.range(0) / 10.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(disc::sample_pg1(eta, rng));
  }
}
BENCHMARK(bm_polya_gamma_unit)->Arg(0)->Arg(10)->Arg(30);

}  // namespace

BENCHMARK_MAIN();
