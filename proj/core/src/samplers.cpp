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

#include "disc/samplers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>

#include "disc/polya_gamma.hpp"

namespace disc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double log_add_exp(double a, double b) {
  const double m = std::max(a, b);
  if (!std::isfinite(m)) return m;
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

// log(e^logS - e^x) for x < logS, clamped so a numerically dominant
// component still leaves a positive remainder.
double log_diff_exp(double logS, double x) {
  double r = std::exp(x - logS);
  if (r > 1.0 - 1e-15) r = 1.0 - 1e-15;
  return logS + std::log1p(-r);
}

}  // namespace

std::string to_string(SamplerKind kind) {
  switch (kind) {
    case SamplerKind::AuxUniform: return "aux-uniform";
    case SamplerKind::PolyaGamma: return "polya-gamma";
    case SamplerKind::PolyaGammaApprox: return "polya-gamma-approx";
    case SamplerKind::MALA: return "mala";
    case SamplerKind::HMC: return "hmc";
    case SamplerKind::MixedMalaHmc: return "mixed";
  }
  return "unknown";
}

SamplerKind sampler_from_string(const std::string& name) {
  if (name == "aux-uniform") return SamplerKind::AuxUniform;
  if (name == "polya-gamma") return SamplerKind::PolyaGamma;
  if (name == "polya-gamma-approx") return SamplerKind::PolyaGammaApprox;
  if (name == "mala") return SamplerKind::MALA;
  if (name == "hmc") return SamplerKind::HMC;
  if (name == "mixed") return SamplerKind::MixedMalaHmc;
  throw model_error("unknown sampler: " + name);
}

bool is_joint_sampler(SamplerKind kind) {
  return kind == SamplerKind::AuxUniform || kind == SamplerKind::PolyaGamma ||
         kind == SamplerKind::PolyaGammaApprox;
}

void ChainConfig::validate() const {
  if (iterations < 1) throw model_error("iterations must be positive");
  if (burn_in < 0 || burn_in >= iterations)
    throw model_error("burn_in must satisfy 0 <= burn_in < iterations");
  if (thin < 1) throw model_error("thin must be >= 1");
  if (leapfrog_steps < 1) throw model_error("leapfrog_steps must be >= 1");
  if (mixed_long_steps_phi < 1 || mixed_long_steps_word < 1)
    throw model_error("mixed long-step counts must be >= 1");
  if (mixed_long_prob < 0.0 || mixed_long_prob > 1.0)
    throw model_error("mixed_long_prob must lie in [0, 1]");
  if (kappa_update_period < 1)
    throw model_error("kappa_update_period must be >= 1");
  if (!(initial_step_size > 0.0))
    throw model_error("initial_step_size must be positive");
}

ChainConfig ChainConfig::defaults_for(Family family) {
  ChainConfig config;
  if (family == Family::GASC) {
    config.iterations = 20000;
    config.burn_in = 10000;
  }
  return config;
}

long flattened_param_count(const ModelSpec& spec) {
  long n = static_cast<long>(spec.K) * spec.G * spec.T;
  if (spec.is_disc())
    n += static_cast<long>(spec.V) * spec.T + static_cast<long>(spec.V) * spec.K;
  else
    n += static_cast<long>(spec.V) * spec.K * spec.T + 1;
  return n;
}

void flatten_state(const LatentState& state, const ModelSpec& spec,
                   double* out) {
  double* p = out;
  std::copy(state.phi.data(), state.phi.data() + state.phi.size(), p);
  p += state.phi.size();
  if (spec.is_disc()) {
    std::copy(state.theta.data(), state.theta.data() + state.theta.size(), p);
    p += state.theta.size();
    std::copy(state.chi.data(), state.chi.data() + state.chi.size(), p);
  } else {
    std::copy(state.psi.data(), state.psi.data() + state.psi.size(), p);
    p += state.psi.size();
    *p = state.kappa_phi;
  }
}

LatentState unflatten_state(const ModelSpec& spec, const double* data) {
  LatentState state = LatentState::zeros(spec);
  const double* p = data;
  std::copy(p, p + state.phi.size(), state.phi.data());
  p += state.phi.size();
  if (spec.is_disc()) {
    std::copy(p, p + state.theta.size(), state.theta.data());
    p += state.theta.size();
    std::copy(p, p + state.chi.size(), state.chi.data());
  } else {
    std::copy(p, p + state.psi.size(), state.psi.data());
    p += state.psi.size();
    state.kappa_phi = *p;
  }
  return state;
}

LatentState ChainOutput::state_at(long i) const {
  return unflatten_state(spec, draw(i));
}

std::vector<int> gibbs_z(const SnippetCorpus& corpus,
                         const ProbabilityArrays& probs, Rng& rng) {
  const int K = probs.K;
  std::vector<int> z(corpus.size());
  VectorXd logw(K);
  VectorXd w(K);
  for (int d = 0; d < corpus.size(); ++d) {
    const Snippet& s = corpus.snippets[d];
    logw = probs.log_phi_col(s.genre, s.time);
    for (int k = 0; k < K; ++k) {
      const auto logpsi = probs.log_psi_col(k, s.time);
      for (int word : s.words) logw[k] += logpsi[word];
    }
    const double lse = log_sum_exp(logw);
    w = (logw.array() - lse).exp();
    z[d] = rng.categorical(w, K);
  }
  return z;
}

long aux_uniform_update(Eigen::Ref<VectorXd> column, const ColumnCounts& counts,
                        const ConditionalMoments& prior, Rng& rng) {
  const int n = static_cast<int>(column.size());
  long degenerate = 0;
  double logS = log_sum_exp(column);
  const double sd = std::sqrt(prior.variance);
  for (int k = 0; k < n; ++k) {
    const double logC = log_diff_exp(logS, column[k]);
    const double ptilde = std::exp(column[k] - logS);
    const int n_k = counts.component[k];
    const int n_rest = counts.total - n_k;
    double lo = -kInf;
    double hi = kInf;
    if (n_k > 0) {
      // max of n_k uniforms on (0, ptilde) via Beta(n_k, 1)
      const double u = ptilde * std::pow(rng.uniform_pos(), 1.0 / n_k);
      lo = logC + std::log(u) - std::log1p(-u);
    }
    if (n_rest > 0) {
      // min of n_rest uniforms on (ptilde, 1) via Beta(1, n_rest)
      const double u =
          ptilde + (1.0 - ptilde) * (1.0 - std::pow(rng.uniform_pos(), 1.0 / n_rest));
      hi = logC + std::log(u) - std::log1p(-u);
    }
    double draw;
    if (std::isfinite(prior.variance)) {
      draw = truncated_normal(prior.mean[k], sd, lo, hi, rng);
    } else if (std::isfinite(lo) && std::isfinite(hi) && lo < hi) {
      draw = rng.uniform(lo, hi);  // improper flat conditional
    } else {
      draw = std::numeric_limits<double>::quiet_NaN();
    }
    if (std::isfinite(draw)) {
      column[k] = draw;
    } else {
      ++degenerate;
    }
    logS = log_add_exp(logC, column[k]);
  }
  return degenerate;
}

void polya_gamma_update(Eigen::Ref<VectorXd> column, const ColumnCounts& counts,
                        const ConditionalMoments& prior, bool approximate,
                        Rng& rng) {
  const int n = static_cast<int>(column.size());
  double logS = log_sum_exp(column);
  const bool proper = std::isfinite(prior.variance);
  const double prior_precision = proper ? 1.0 / prior.variance : 0.0;
  for (int k = 0; k < n; ++k) {
    const double logC = log_diff_exp(logS, column[k]);
    if (counts.total == 0) {
      // Degenerate PG(0, .): no evidence, draw from the conditional prior.
      if (proper)
        column[k] = rng.normal(prior.mean[k], std::sqrt(prior.variance));
      logS = log_add_exp(logC, column[k]);
      continue;
    }
    const double eta = column[k] - logC;
    const double omega = approximate ? sample_pg_approx(counts.total, eta, rng)
                                     : sample_pg(counts.total, eta, rng);
    const double variance = 1.0 / (prior_precision + omega);
    const double mean =
        variance * (prior.mean[k] * prior_precision + counts.component[k] -
                    0.5 * counts.total + omega * logC);
    column[k] = rng.normal(mean, std::sqrt(variance));
    logS = log_add_exp(logC, column[k]);
  }
}

double sample_kappa_phi_gasc(const LatentState& state, const ModelSpec& spec,
                             Rng& rng) {
  const auto& h = spec.gasc();
  const double shape = h.a + 0.5 * spec.K * spec.G * (spec.T - 1);
  double rate = h.b;
  for (int t = 1; t < spec.T; ++t)
    for (int g = 0; g < spec.G; ++g)
      rate += (state.phi.col(g + spec.G * t) - state.phi.col(g + spec.G * (t - 1)))
                  .squaredNorm() /
              4.0;
  return rng.inverse_gamma(shape, rate);
}

LatentState draw_initial_state(const ModelSpec& spec, Rng& rng) {
  LatentState state = LatentState::zeros(spec);
  auto fill_chain = [&](Eigen::Ref<MatrixXd> series, double start_sd,
                        double alpha, double kappa) {
    const double inc_sd = std::sqrt(kappa);
    for (int i = 0; i < series.rows(); ++i)
      series(i, 0) = start_sd * rng.normal();
    for (int t = 1; t < series.cols(); ++t)
      for (int i = 0; i < series.rows(); ++i)
        series(i, t) = alpha * series(i, t - 1) + inc_sd * rng.normal();
  };
  if (spec.is_disc()) {
    const auto& h = spec.disc();
    MatrixXd series(spec.K, spec.T);
    for (int g = 0; g < spec.G; ++g) {
      fill_chain(series, std::sqrt(h.kappa_phi / (1 - h.alpha_phi * h.alpha_phi)),
                 h.alpha_phi, h.kappa_phi);
      for (int t = 0; t < spec.T; ++t)
        state.phi.col(g + spec.G * t) = series.col(t);
    }
    fill_chain(state.theta,
               std::sqrt(h.kappa_theta / (1 - h.alpha_theta * h.alpha_theta)),
               h.alpha_theta, h.kappa_theta);
    const double chi_sd = std::sqrt(h.kappa_chi);
    for (int k = 0; k < spec.K; ++k)
      for (int v = 0; v < spec.V; ++v) state.chi(v, k) = chi_sd * rng.normal();
  } else {
    const auto& h = spec.gasc();
    state.kappa_phi = rng.inverse_gamma(h.a, h.b);
    MatrixXd series(spec.K, spec.T);
    for (int g = 0; g < spec.G; ++g) {
      fill_chain(series, 1.0, 1.0, 2.0 * state.kappa_phi);
      for (int t = 0; t < spec.T; ++t)
        state.phi.col(g + spec.G * t) = series.col(t);
    }
    MatrixXd wseries(spec.V, spec.T);
    for (int k = 0; k < spec.K; ++k) {
      fill_chain(wseries, 1.0, 1.0, 2.0 * h.kappa_psi);
      for (int t = 0; t < spec.T; ++t)
        state.psi.col(k + spec.K * t) = wseries.col(t);
    }
  }
  return state;
}

LatentState warm_start_from_labels(const SnippetCorpus& corpus,
                                   const std::vector<int>& assignment,
                                   const ModelSpec& spec) {
  const CountTables tables = count_tables(corpus, spec.K, assignment);
  LatentState state = LatentState::zeros(spec);
  auto centred_log = [](VectorXd counts) {
    VectorXd logits = (counts.array() + 1.0).log();
    logits.array() -= logits.mean();
    return logits;
  };
  for (int t = 0; t < spec.T; ++t)
    for (int g = 0; g < spec.G; ++g)
      state.phi.col(g + spec.G * t) =
          centred_log(tables.n_z.col(g + spec.G * t).cast<double>());
  if (spec.is_disc()) {
    for (int t = 0; t < spec.T; ++t) {
      VectorXd by_time = VectorXd::Zero(spec.V);
      for (int k = 0; k < spec.K; ++k)
        by_time += tables.n_wz.col(k + spec.K * t).cast<double>();
      state.theta.col(t) = centred_log(by_time);
    }
    for (int k = 0; k < spec.K; ++k) {
      VectorXd by_sense = VectorXd::Zero(spec.V);
      for (int t = 0; t < spec.T; ++t)
        by_sense += tables.n_wz.col(k + spec.K * t).cast<double>();
      state.chi.col(k) = centred_log(by_sense);
    }
  } else {
    for (int t = 0; t < spec.T; ++t)
      for (int k = 0; k < spec.K; ++k)
        state.psi.col(k + spec.K * t) =
            centred_log(tables.n_wz.col(k + spec.K * t).cast<double>());
  }
  return state;
}

namespace {

// One Metropolis kernel branch (fixed leapfrog count) with its own
// adaptation state; mixed mode holds two branches per block.
struct KernelBranch {
  int leapfrog = 1;
  AdaptState adapt;
  BlockStats stats;
};

struct BlockSampler {
  std::string name;
  bool is_phi = false;
  std::vector<KernelBranch> branches;
};

struct PriorPart {
  VectorXd mean;
  double variance = kInf;

  void accumulate(const VectorXd& x, double& f, VectorXd& grad) const {
    if (!std::isfinite(variance)) return;
    const VectorXd diff = x - mean;
    f -= 0.5 * diff.squaredNorm() / variance;
    grad -= diff / variance;
  }
};

class MarginalChain {
 public:
  MarginalChain(const SnippetCorpus& corpus, const ModelSpec& spec,
                const ChainConfig& config, LatentState state, Rng& rng)
      : corpus_(corpus),
        spec_(spec),
        config_(config),
        rng_(rng),
        state_(std::move(state)),
        index_(corpus, spec.G, spec.T),
        probs_(derive_probability_arrays(state_, spec)) {
    for (int t = 0; t < spec_.T; ++t)
      for (int g = 0; g < spec_.G; ++g)
        cells_.emplace_back(corpus_, index_, index_.cell(g, t));
    for (int t = 0; t < spec_.T; ++t) {
      periods_.emplace_back(corpus_, index_, index_.period(t));
      VectorXd counts = VectorXd::Zero(spec_.V);
      for (int d : index_.period(t))
        for (const auto& wc : index_.bag(d))
          counts[wc.word] += wc.count;
      period_counts_.push_back(std::move(counts));
    }
    std::vector<int> all(corpus_.size());
    std::iota(all.begin(), all.end(), 0);
    whole_ = std::make_unique<SliceWorkspace>(corpus_, index_, all);
    build_blocks();
    if (!spec_.is_disc())
      for (auto& ws : periods_) ws.refresh_word_loglik(probs_);
  }

  void sweep() {
    int block_index = 0;
    for (int t = 0; t < spec_.T; ++t)
      for (int g = 0; g < spec_.G; ++g) update_phi_block(block_index++, g, t);
    if (spec_.is_disc()) {
      for (int t = 0; t < spec_.T; ++t) update_theta_block(block_index++, t);
      update_chi_block(block_index++);
    } else {
      for (int t = 0; t < spec_.T; ++t)
        for (int k = 0; k < spec_.K; ++k) update_psi_block(block_index++, k, t);
    }
  }

  void freeze_adaptation() {
    for (auto& block : blocks_)
      for (auto& branch : block.branches) branch.adapt.freeze();
  }

  const LatentState& state() const { return state_; }
  LatentState& state() { return state_; }
  const ProbabilityArrays& probs() const { return probs_; }
  void refresh_probs() { probs_ = derive_probability_arrays(state_, spec_); }

  std::vector<BlockStats> collect_stats() const {
    std::vector<BlockStats> stats;
    for (const auto& block : blocks_)
      for (const auto& branch : block.branches) stats.push_back(branch.stats);
    return stats;
  }

 private:
  void build_blocks() {
    auto add_block = [&](std::string name, bool is_phi, int long_steps) {
      BlockSampler block;
      block.name = std::move(name);
      block.is_phi = is_phi;
      auto add_branch = [&](int L, double target) {
        KernelBranch branch;
        branch.leapfrog = L;
        branch.adapt.target = target;
        branch.adapt.log_step = std::log(config_.initial_step_size);
        branch.stats.name = block.name + (L == 1 ? "" : "#L" + std::to_string(L));
        block.branches.push_back(std::move(branch));
      };
      switch (config_.sampler) {
        case SamplerKind::MALA:
          add_branch(1, kMalaOptimalAcceptance);
          break;
        case SamplerKind::HMC:
          add_branch(config_.leapfrog_steps,
                     config_.leapfrog_steps == 1 ? kMalaOptimalAcceptance
                                                 : kHmcOptimalAcceptance);
          break;
        case SamplerKind::MixedMalaHmc:
          add_branch(1, kMalaOptimalAcceptance);
          if (long_steps > 1) add_branch(long_steps, kHmcOptimalAcceptance);
          break;
        default:
          throw model_error("marginal chain requires a gradient sampler");
      }
      blocks_.push_back(std::move(block));
    };
    for (int t = 0; t < spec_.T; ++t)
      for (int g = 0; g < spec_.G; ++g)
        add_block("phi[" + std::to_string(g) + "," + std::to_string(t) + "]",
                  true, config_.mixed_long_steps_phi);
    if (spec_.is_disc()) {
      for (int t = 0; t < spec_.T; ++t)
        add_block("theta[" + std::to_string(t) + "]", false,
                  config_.mixed_long_steps_word);
      add_block("chi", false, config_.mixed_long_steps_word);
    } else {
      for (int t = 0; t < spec_.T; ++t)
        for (int k = 0; k < spec_.K; ++k)
          add_block("psi[" + std::to_string(k) + "," + std::to_string(t) + "]",
                    false, config_.mixed_long_steps_word);
    }
  }

  KernelBranch& choose_branch(BlockSampler& block) {
    if (block.branches.size() == 1) return block.branches.front();
    return rng_.uniform() < config_.mixed_long_prob ? block.branches[1]
                                                    : block.branches[0];
  }

  // Runs the kernel for `target` on `block`, returns the accepted value (or
  // the unchanged input).
  VectorXd run_kernel(BlockSampler& block, const BlockTarget& target,
                      const VectorXd& current, bool* accepted) {
    KernelBranch& branch = choose_branch(block);
    StepResult result;
    if (config_.sampler == SamplerKind::MALA)
      result = mala_step(current, target, branch.adapt.step_size(), rng_);
    else
      result = hmc_step(current, target, branch.adapt.step_size(),
                        branch.leapfrog, rng_);
    branch.stats.proposals += 1;
    branch.stats.accepts += result.accepted ? 1 : 0;
    branch.stats.divergences += result.divergent ? 1 : 0;
    branch.stats.bad_gradients += result.bad_gradient ? 1 : 0;
    const long before = branch.adapt.completed_windows;
    branch.adapt = adapt_scale(branch.adapt, result.accepted);
    if (branch.adapt.completed_windows != before)
      branch.stats.step_size_history.push_back(branch.adapt.step_size());
    branch.stats.final_step_size = branch.adapt.step_size();
    *accepted = result.accepted;
    return result.value;
  }

  void update_phi_block(int block_index, int g, int t) {
    SliceWorkspace& ws = cells_[g + spec_.G * t];
    ws.refresh_word_loglik(probs_);
    const auto moments = conditional_prior_moments_phi(state_, spec_, g, t + 1);
    PriorPart prior{moments.mean, moments.variance};
    const MatrixXd& a = ws.word_loglik();
    const int n = ws.size();
    const int K = spec_.K;
    BlockTarget target;
    target.eval = [&](const VectorXd& x) {
      double f = 0.0;
      VectorXd grad = VectorXd::Zero(K);
      prior.accumulate(x, f, grad);
      VectorXd p(K), logp(K), logw(K);
      softmax_into(x, p, logp);
      VectorXd resp_sum = VectorXd::Zero(K);
      for (int i = 0; i < n; ++i) {
        logw = logp + a.col(i);
        const double lse = log_sum_exp(logw);
        f += lse;
        resp_sum.array() += (logw.array() - lse).exp();
      }
      grad += resp_sum - static_cast<double>(n) * p;
      return std::make_pair(f, grad);
    };
    bool accepted = false;
    const int col = g + spec_.G * t;
    VectorXd next = run_kernel(blocks_[block_index], target,
                               state_.phi.col(col), &accepted);
    if (accepted) {
      state_.phi.col(col) = next;
      softmax_into(state_.phi.col(col), probs_.phi_tilde.col(col),
                   probs_.log_phi_tilde.col(col));
    }
  }

  void update_theta_block(int block_index, int t) {
    SliceWorkspace& ws = periods_[t];
    const auto moments = conditional_prior_moments_theta(state_, spec_, t + 1);
    PriorPart prior{moments.mean, moments.variance};
    const int K = spec_.K;
    const int V = spec_.V;
    BlockTarget target;
    target.eval = [&](const VectorXd& th) {
      double f = 0.0;
      VectorXd grad = VectorXd::Zero(V);
      prior.accumulate(th, f, grad);
      MatrixXd psit(V, K), logpsit(V, K);
      for (int k = 0; k < K; ++k)
        softmax_into(state_.chi.col(k) + th, psit.col(k), logpsit.col(k));
      VectorXd weighted_length = VectorXd::Zero(K);
      VectorXd logw(K);
      for (int i = 0; i < ws.size(); ++i) {
        const int d = ws.snippets()[i];
        const Snippet& s = corpus_.snippets[d];
        logw = probs_.log_phi_col(s.genre, t);
        for (int k = 0; k < K; ++k) {
          double acc = 0.0;
          for (const auto& wc : index_.bag(d))
            acc += wc.count * logpsit(wc.word, k);
          logw[k] += acc;
        }
        const double lse = log_sum_exp(logw);
        f += lse;
        weighted_length.array() +=
            index_.snippet_length(d) * (logw.array() - lse).exp();
      }
      grad += period_counts_[t];
      for (int k = 0; k < K; ++k) grad -= weighted_length[k] * psit.col(k);
      return std::make_pair(f, grad);
    };
    bool accepted = false;
    VectorXd next = run_kernel(blocks_[block_index], target,
                               state_.theta.col(t), &accepted);
    if (accepted) {
      state_.theta.col(t) = next;
      refresh_psi_probs_at_time(t);
    }
  }

  void update_chi_block(int block_index) {
    SliceWorkspace& ws = *whole_;
    const double kappa_chi = spec_.disc().kappa_chi;
    const int K = spec_.K;
    const int V = spec_.V;
    const int T = spec_.T;
    BlockTarget target;
    target.eval = [&](const VectorXd& x) {
      Eigen::Map<const MatrixXd> chi(x.data(), V, K);
      double f = -0.5 * x.squaredNorm() / kappa_chi;
      VectorXd grad = -x / kappa_chi;
      Eigen::Map<MatrixXd> grad_mat(grad.data(), V, K);
      MatrixXd psit(V, K * T), logpsit(V, K * T);
      for (int t = 0; t < T; ++t)
        for (int k = 0; k < K; ++k) {
          const int c = k + K * t;
          softmax_into(chi.col(k) + state_.theta.col(t), psit.col(c),
                       logpsit.col(c));
        }
      MatrixXd weighted_length = MatrixXd::Zero(K, T);
      VectorXd logw(K), r(K);
      for (int i = 0; i < ws.size(); ++i) {
        const int d = ws.snippets()[i];
        const Snippet& s = corpus_.snippets[d];
        const int t = s.time;
        logw = probs_.log_phi_col(s.genre, t);
        for (int k = 0; k < K; ++k) {
          double acc = 0.0;
          for (const auto& wc : index_.bag(d))
            acc += wc.count * logpsit(wc.word, k + K * t);
          logw[k] += acc;
        }
        const double lse = log_sum_exp(logw);
        f += lse;
        r = (logw.array() - lse).exp();
        for (int k = 0; k < K; ++k) {
          if (r[k] == 0.0) continue;
          for (const auto& wc : index_.bag(d))
            grad_mat(wc.word, k) += r[k] * wc.count;
        }
        weighted_length.col(t) += index_.snippet_length(d) * r;
      }
      for (int t = 0; t < T; ++t)
        for (int k = 0; k < K; ++k)
          grad_mat.col(k) -= weighted_length(k, t) * psit.col(k + K * t);
      return std::make_pair(f, grad);
    };
    Eigen::Map<const VectorXd> current(state_.chi.data(),
                                       state_.chi.size());
    bool accepted = false;
    VectorXd next =
        run_kernel(blocks_[block_index], target, current, &accepted);
    if (accepted) {
      state_.chi = Eigen::Map<const MatrixXd>(next.data(), V, K);
      for (int t = 0; t < T; ++t) refresh_psi_probs_at_time(t);
    }
  }

  void update_psi_block(int block_index, int k, int t) {
    SliceWorkspace& ws = periods_[t];
    const auto moments = conditional_prior_moments_psi(state_, spec_, k, t + 1);
    PriorPart prior{moments.mean, moments.variance};
    const MatrixXd& a = ws.word_loglik();
    const int K = spec_.K;
    const int V = spec_.V;
    BlockTarget target;
    target.eval = [&](const VectorXd& x) {
      double f = 0.0;
      VectorXd grad = VectorXd::Zero(V);
      prior.accumulate(x, f, grad);
      VectorXd psit(V), logpsit(V);
      softmax_into(x, psit, logpsit);
      VectorXd logw(K);
      double weighted_length = 0.0;
      for (int i = 0; i < ws.size(); ++i) {
        const int d = ws.snippets()[i];
        const Snippet& s = corpus_.snippets[d];
        logw = probs_.log_phi_col(s.genre, t) + a.col(i);
        double acc = 0.0;
        for (const auto& wc : index_.bag(d))
          acc += wc.count * logpsit[wc.word];
        logw[k] = probs_.log_phi_col(s.genre, t)[k] + acc;
        const double lse = log_sum_exp(logw);
        f += lse;
        const double rk = std::exp(logw[k] - lse);
        if (rk > 0.0) {
          for (const auto& wc : index_.bag(d))
            grad[wc.word] += rk * wc.count;
          weighted_length += rk * index_.snippet_length(d);
        }
      }
      grad -= weighted_length * psit;
      return std::make_pair(f, grad);
    };
    const int col = k + K * t;
    bool accepted = false;
    VectorXd next =
        run_kernel(blocks_[block_index], target, state_.psi.col(col), &accepted);
    if (accepted) {
      state_.psi.col(col) = next;
      softmax_into(state_.psi.col(col), probs_.psi_tilde.col(col),
                   probs_.log_psi_tilde.col(col));
      ws.refresh_word_loglik_for_sense(probs_, k);
    }
  }

  void refresh_psi_probs_at_time(int t) {
    for (int k = 0; k < spec_.K; ++k) {
      const int c = k + spec_.K * t;
      const VectorXd col = state_.psi_col(k, t);
      softmax_into(col, probs_.psi_tilde.col(c), probs_.log_psi_tilde.col(c));
    }
  }

  const SnippetCorpus& corpus_;
  const ModelSpec& spec_;
  const ChainConfig& config_;
  Rng& rng_;
  LatentState state_;
  CorpusIndex index_;
  ProbabilityArrays probs_;
  std::vector<SliceWorkspace> cells_;
  std::vector<SliceWorkspace> periods_;
  std::vector<VectorXd> period_counts_;
  std::unique_ptr<SliceWorkspace> whole_;
  std::vector<BlockSampler> blocks_;
};

// Joint Gibbs chain for the GASC/SCAN parameterisation: z, then every phi
// and psi column from its conditional given z.
class JointChain {
 public:
  JointChain(const SnippetCorpus& corpus, const ModelSpec& spec,
             const ChainConfig& config, LatentState state, Rng& rng)
      : corpus_(corpus),
        spec_(spec),
        config_(config),
        rng_(rng),
        state_(std::move(state)),
        probs_(derive_probability_arrays(state_, spec)) {}

  void sweep() {
    const std::vector<int> z = gibbs_z(corpus_, probs_, rng_);
    const CountTables tables = count_tables(corpus_, spec_.K, z);
    const bool approximate = config_.sampler == SamplerKind::PolyaGammaApprox;
    const bool aux = config_.sampler == SamplerKind::AuxUniform;
    ColumnCounts cc;
    for (int t = 0; t < spec_.T; ++t) {
      for (int g = 0; g < spec_.G; ++g) {
        const int col = g + spec_.G * t;
        cc.component = tables.n_z.col(col);
        cc.total = cc.component.sum();
        const auto moments =
            conditional_prior_moments_phi(state_, spec_, g, t + 1);
        VectorXd column = state_.phi.col(col);
        if (aux)
          degeneracy_events_ += aux_uniform_update(column, cc, moments, rng_);
        else
          polya_gamma_update(column, cc, moments, approximate, rng_);
        state_.phi.col(col) = column;
        softmax_into(state_.phi.col(col), probs_.phi_tilde.col(col),
                     probs_.log_phi_tilde.col(col));
      }
      for (int k = 0; k < spec_.K; ++k) {
        const int col = k + spec_.K * t;
        cc.component = tables.n_wz.col(col);
        cc.total = cc.component.sum();
        const auto moments =
            conditional_prior_moments_psi(state_, spec_, k, t + 1);
        VectorXd column = state_.psi.col(col);
        if (aux)
          degeneracy_events_ += aux_uniform_update(column, cc, moments, rng_);
        else
          polya_gamma_update(column, cc, moments, approximate, rng_);
        state_.psi.col(col) = column;
        softmax_into(state_.psi.col(col), probs_.psi_tilde.col(col),
                     probs_.log_psi_tilde.col(col));
      }
    }
  }

  const LatentState& state() const { return state_; }
  LatentState& state() { return state_; }
  const ProbabilityArrays& probs() const { return probs_; }
  long degeneracy_events() const { return degeneracy_events_; }

 private:
  const SnippetCorpus& corpus_;
  const ModelSpec& spec_;
  const ChainConfig& config_;
  Rng& rng_;
  LatentState state_;
  ProbabilityArrays probs_;
  long degeneracy_events_ = 0;
};

}  // namespace

ChainOutput run_chain(const SnippetCorpus& corpus, const ModelSpec& spec,
                      const ChainConfig& config,
                      const std::optional<LatentState>& init) {
  spec.validate();
  config.validate();
  if (corpus.V != spec.V || corpus.T != spec.T || corpus.G != spec.G)
    throw model_error("corpus dimensions do not match the model spec");
  if (is_joint_sampler(config.sampler) && spec.is_disc())
    throw model_error(
        "auxiliary-variable samplers require the GASC/SCAN parameterisation; "
        "use mala, hmc or mixed for DiSC");

  Rng rng(config.seed);
  LatentState state = init ? *init : draw_initial_state(spec, rng);
  state.check_dims(spec);

  {
    const ProbabilityArrays probs = derive_probability_arrays(state, spec);
    const double lp =
        log_prior(state, spec) + log_marginal_likelihood(corpus, probs);
    if (!std::isfinite(lp))
      throw model_error("posterior is not finite at the initial state");
  }

  ChainOutput out;
  out.spec = spec;
  out.config = config;
  out.param_count = flattened_param_count(spec);
  const long stored = (config.iterations - config.burn_in) / config.thin;
  out.samples.reserve(static_cast<size_t>(std::max(0L, stored)) *
                      out.param_count);
  MatrixXd sum_phi = MatrixXd::Zero(spec.K, spec.G * spec.T);
  MatrixXd sum_psi = MatrixXd::Zero(spec.V, spec.K * spec.T);

  const auto t_start = std::chrono::steady_clock::now();
  auto t_burn_end = t_start;

  auto store_draw = [&](const LatentState& s, const ProbabilityArrays& probs) {
    const size_t offset = out.samples.size();
    out.samples.resize(offset + out.param_count);
    flatten_state(s, spec, out.samples.data() + offset);
    out.sample_count += 1;
    sum_phi += probs.phi_tilde;
    sum_psi += probs.psi_tilde;
  };

  const bool joint = is_joint_sampler(config.sampler);
  if (joint) {
    JointChain chain(corpus, spec, config, std::move(state), rng);
    for (long n = 1; n <= config.iterations; ++n) {
      chain.sweep();
      if (!spec.is_disc() && n % config.kappa_update_period == 0)
        chain.state().kappa_phi = sample_kappa_phi_gasc(chain.state(), spec, rng);
      if (n == config.burn_in) t_burn_end = std::chrono::steady_clock::now();
      if (n > config.burn_in && (n - config.burn_in) % config.thin == 0)
        store_draw(chain.state(), chain.probs());
    }
    out.degeneracy_events = chain.degeneracy_events();
  } else {
    MarginalChain chain(corpus, spec, config, std::move(state), rng);
    for (long n = 1; n <= config.iterations; ++n) {
      chain.sweep();
      if (!spec.is_disc() && n % config.kappa_update_period == 0)
        chain.state().kappa_phi = sample_kappa_phi_gasc(chain.state(), spec, rng);
      if (n == config.burn_in) {
        chain.freeze_adaptation();
        t_burn_end = std::chrono::steady_clock::now();
      }
      if (n > config.burn_in && (n - config.burn_in) % config.thin == 0)
        store_draw(chain.state(), chain.probs());
    }
    out.block_stats = chain.collect_stats();
  }

  const auto t_end = std::chrono::steady_clock::now();
  if (config.burn_in == 0) t_burn_end = t_start;
  out.wall_seconds_total =
      std::chrono::duration<double>(t_end - t_start).count();
  out.wall_seconds_sampling =
      std::chrono::duration<double>(t_end - t_burn_end).count();

  if (out.sample_count > 0) {
    out.mean_phi_tilde = sum_phi / static_cast<double>(out.sample_count);
    out.mean_psi_tilde = sum_psi / static_cast<double>(out.sample_count);
  }
  return out;
}

}  // namespace disc
