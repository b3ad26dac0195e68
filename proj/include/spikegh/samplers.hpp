#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "spikegh/distributions.hpp"
#include "spikegh/model.hpp"
#include "spikegh/rng.hpp"

namespace spikegh {

enum class MoveKind { kBirth, kDeath, kUpdate };
enum class SamplerKind { kBgh, kBtg };

// Per-site move selection: a birth is proposed whenever the site is
// inactive; active sites split between death and variance update. The
// update proposal mixes the prior branch with a likelihood-matched branch.
struct MoveProbabilities {
  double p01 = 1.0;        // birth given inactive (fixed at 1)
  double p10 = 0.5;        // death given active
  double p11 = 0.5;        // update given active
  double update_mix = 0.5; // probability the update draws from the prior branch
};
void validate(const MoveProbabilities& mp);

struct SamplerConfig {
  int iterations = 1000;
  int burn_in = 0;
  std::uint64_t seed = 1;
  bool sample_bern_prob = true;
  bool sample_amp_var = true;
  bool sample_noise_var = false;  // noise level treated as known by default
  bool sample_scale = false;      // response-width sampling (parametric dictionaries)
  double amp_var_step = 0.2;      // random-walk std on ln amp_var
  double scale_step = 0.05;       // random-walk std on ln ir_scale
  double scale_min = 0.5;
  double scale_max = 10.0;
  double amp_var_min = 1e-6;      // flat-prior box for amp_var
  double amp_var_max = 1e6;
  double noise_prior_shape = 1e-3;  // inverse-gamma prior when noise is sampled
  double noise_prior_rate = 1e-3;
  int thin = 1;                   // amplitude-row recording stride
  bool shuffle_sites = false;     // default is a fixed ascending site scan
  MoveProbabilities moves{};
};
void validate(const SamplerConfig& cfg);

struct MoveCounters {
  long long birth_proposed = 0, birth_accepted = 0;
  long long death_proposed = 0, death_accepted = 0;
  long long update_proposed = 0, update_accepted = 0;
  long long amp_var_proposed = 0, amp_var_accepted = 0;
  long long scale_proposed = 0, scale_accepted = 0;
};

struct ThetaSample {
  double bern_prob;
  double noise_var;
  double amp_var;
  double ir_scale;
};

// Full recorded trajectory of one chain. Support and hyperparameter rows
// are kept for every iteration; amplitude rows are kept every `thin`
// iterations. pm_x averages the amplitudes over post-burn-in iterations.
struct ChainStore {
  SamplerKind kind = SamplerKind::kBgh;
  std::uint64_t seed = 0;
  int site_count = 0;
  int burn_in = 0;
  int thin = 1;
  std::vector<std::vector<std::uint8_t>> q_hist;
  std::vector<Vector> x_hist;
  std::vector<int> x_iters;  // 1-based iteration index of each x_hist row
  std::vector<ThetaSample> theta_hist;
  std::vector<MoveCounters> counter_hist;  // cumulative, one row per iteration
  MoveCounters counters;
  Vector pm_x;
  int pm_count = 0;
  Hyperparams final_hp{};
};

// mixing-variance proposal used by the update move: branch 0 is the prior
// of w under the scaled amplitude model, branch 1 is a likelihood-matched
// tilt of it; both are independence proposals
GigParams update_branch_params(int branch, double sigma_x, const GhParams& nu_N);
std::pair<double, int> propose_update_w(double w_k, double sigma_x,
                                        const GhParams& nu_N, RandomStream& rng,
                                        double prior_branch_prob = 0.5);

// log Metropolis–Hastings–Green ratio for a single-site transition between
// (q, w) and (q_cand, w_cand); the candidate factor is derived from the
// current one incrementally. For an update, `update_branch` names the
// proposal branch that generated the candidate.
double acceptance_log_ratio(const std::vector<std::uint8_t>& q, const Vector& w,
                            const std::vector<std::uint8_t>& q_cand,
                            const Vector& w_cand, MoveKind move,
                            int update_branch, const Observation& obs,
                            const Hyperparams& hp, const GhParams& nu_N,
                            const SamplerConfig& cfg);

// one reversible-jump step on site k (birth / death / variance update with
// amplitudes integrated out); returns the post-step state
LatentState rj_site_step(int k, const LatentState& state, const Observation& obs,
                         const Hyperparams& hp, const GhParams& nu_N,
                         const SamplerConfig& cfg, RandomStream& rng);

// joint Gaussian draw of the active amplitudes through the cached factor;
// the draw is not truncated — nonnegativity comes from the prior shape
void sample_amplitudes(LatentState& state, const Observation& obs,
                       const Hyperparams& hp, const GhParams& nu_N,
                       RandomStream& rng);

// conjugate Beta step for bern_prob, random-walk step on ln amp_var, and,
// when enabled, a conjugate inverse-gamma step for noise_var
Hyperparams sample_hyperparams(const LatentState& state, const Observation& obs,
                               const Hyperparams& hp, const GhParams& nu_N,
                               const SamplerConfig& cfg, RandomStream& rng,
                               MoveCounters& counters);

// random-walk step on ln ir_scale with a flat prior on [scale_min, scale_max];
// on acceptance the dictionary inside obs is rebuilt for the new scale
Hyperparams sample_ir_scale(const LatentState& state, Observation& obs,
                            const Hyperparams& hp, const SamplerConfig& cfg,
                            RandomStream& rng, MoveCounters& counters);

// one full sweep: site scan with amplitudes marginalized, then the joint
// amplitude draw, then hyperparameters, then (optionally) the response
// scale — in that fixed order
void bgh_iteration(LatentState& state, Observation& obs, Hyperparams& hp,
                   const GhParams& nu_N, const SamplerConfig& cfg,
                   RandomStream& rng, MoveCounters& counters);

// single-site baseline: (q_k, x_k) drawn jointly from the exact conditional
// under a nonnegative-truncated Gaussian amplitude prior, no mixing variable
void btg_iteration(LatentState& state, Observation& obs, Hyperparams& hp,
                   const SamplerConfig& cfg, RandomStream& rng,
                   MoveCounters& counters);

// scalar conditional statistics for one site of the baseline sampler given
// the residual with that site's contribution removed
struct BtgSiteStats {
  double mean;
  double var;
  double log_odds;  // log posterior odds of the site being active
};
BtgSiteStats btg_site_stats(int k, const Vector& residual_without_k,
                            const Observation& obs, const Hyperparams& hp);

// neutral start: empty support, zero amplitudes
LatentState cold_state(const Observation& obs, const Hyperparams& hp);
// over-dispersed start: sites included independently, mixing variances from
// the prior, amplitudes from a nonnegative half-Gaussian
LatentState random_state(const Observation& obs, const Hyperparams& hp,
                         const GhParams& nu_N, double inclusion,
                         RandomStream& rng);

// run one chain to completion; fully deterministic given cfg.seed
ChainStore run_chain(const SamplerConfig& cfg, const Observation& obs,
                     const LatentState& init, const Hyperparams& hp0,
                     const GhParams& nu_N, SamplerKind kind);

}  // namespace spikegh
