#include "spikegh/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace spikegh {

namespace {

constexpr double kLogTwoPi = 1.8378770664093454835606594728112353;
constexpr double kLnTwo = 0.6931471805599453094172321214581766;

bool accept_log(double log_ratio, RandomStream& rng) {
  if (log_ratio >= 0.0) return true;
  return std::log(rng.uniform()) < log_ratio;
}

// candidates far outside the prior's numerical range are auto-rejected
bool w_in_bounds(double w, double amp_var) {
  return w >= 1e-12 * amp_var && w <= 1e12 * amp_var;
}

double residual_ss(const LatentState& state, const Observation& obs) {
  Vector r = obs.y();
  for (int k = 0; k < obs.m(); ++k) {
    if (!state.q[k]) continue;
    const Vector& col = obs.column(k);
    for (int i = 0; i < obs.n(); ++i) r[i] -= state.x[k] * col[i];
  }
  double ss = 0.0;
  for (double v : r) ss += v * v;
  return ss;
}

// log conditional density of amp_var given the active (w, x) pairs,
// up to constants: per site, the mixing-variance prior times the
// Gaussian amplitude layer
double bgh_amp_var_log_target(const LatentState& state, const GhParams& nu,
                              double amp_var) {
  const double sx = std::sqrt(amp_var);
  const GigParams mix = scale_gh_prior(nu, sx).second;
  double acc = 0.0;
  for (int pos = 0; pos < state.chol.size(); ++pos) {
    const int k = state.chol.active()[pos];
    const double w = state.chol.w_at_position(pos);
    const double mu_x = sx * nu.mu + (nu.beta / sx) * w;
    acc += gig_log_pdf(mix, w) + log_norm_pdf(state.x[k], mu_x, w);
  }
  return acc;
}

// baseline counterpart: active amplitudes carry a nonnegative-truncated
// Gaussian prior with variance amp_var
double btg_amp_var_log_target(const LatentState& state, double amp_var) {
  double acc = 0.0;
  int l = 0;
  double sq = 0.0;
  for (std::size_t k = 0; k < state.q.size(); ++k) {
    if (!state.q[k]) continue;
    ++l;
    sq += state.x[k] * state.x[k];
  }
  acc = l * (kLnTwo - 0.5 * (kLogTwoPi + std::log(amp_var))) -
        sq / (2.0 * amp_var);
  return acc;
}

// random-walk Metropolis step on the log of a positive scalar with a flat
// prior on [lo, hi] (out-of-box candidates are rejected outright)
template <class F>
double mh_ln_walk(double current, double step, double lo, double hi,
                  const F& log_target, RandomStream& rng, long long& proposed,
                  long long& accepted) {
  ++proposed;
  const double u = std::log(current);
  const double u_cand = u + step * rng.normal();
  const double cand = std::exp(u_cand);
  if (cand < lo || cand > hi) return current;
  const double log_ratio = log_target(cand) - log_target(current) +
                           (u_cand - u);  // Jacobian of the log map
  if (accept_log(log_ratio, rng)) {
    ++accepted;
    return cand;
  }
  return current;
}

struct MoveOutcome {
  bool accepted = false;
  double log_marginal_after = 0.0;
};

// one site move against the cached factor; `lm` is log_marginal at the
// current state and is kept current on acceptance
MoveOutcome site_move(int k, LatentState& state, double& lm,
                      const Observation& obs, const Hyperparams& hp,
                      const GhParams& nu, const SamplerConfig& cfg,
                      RandomStream& rng, MoveCounters& counters) {
  const double sx = std::sqrt(hp.amp_var);
  const GigParams mix = scale_gh_prior(nu, sx).second;
  const int pos = state.chol.position_of(k);

  if (pos < 0) {
    ++counters.birth_proposed;
    const double w_cand = gig_sample(mix, rng);
    if (!w_in_bounds(w_cand, hp.amp_var)) return {};
    ActiveSetCholesky cand = state.chol;
    cand.insert(k, w_cand, obs, hp.noise_var);
    const double lm_cand = log_marginal(cand, obs, hp, nu);
    const double log_ratio = lm_cand - lm + std::log(cfg.moves.p10) -
                             std::log(cfg.moves.p01) - gig_log_pdf(mix, w_cand);
    if (!accept_log(log_ratio, rng)) return {};
    state.chol = std::move(cand);
    state.q[k] = 1;
    state.x[k] = 0.0;
    lm = lm_cand;
    ++counters.birth_accepted;
    return {true, lm};
  }

  const double w_cur = state.chol.w_at_position(pos);
  if (rng.uniform() < cfg.moves.p10) {
    ++counters.death_proposed;
    ActiveSetCholesky cand = state.chol;
    cand.remove(k);
    const double lm_cand = log_marginal(cand, obs, hp, nu);
    const double log_ratio = lm_cand - lm + std::log(cfg.moves.p01) +
                             gig_log_pdf(mix, w_cur) - std::log(cfg.moves.p10);
    if (!accept_log(log_ratio, rng)) return {};
    state.chol = std::move(cand);
    state.q[k] = 0;
    state.x[k] = 0.0;
    lm = lm_cand;
    ++counters.death_accepted;
    return {true, lm};
  }

  ++counters.update_proposed;
  const auto [w_cand, branch] =
      propose_update_w(w_cur, sx, nu, rng, cfg.moves.update_mix);
  if (!w_in_bounds(w_cand, hp.amp_var)) return {};
  ActiveSetCholesky cand = state.chol;
  cand.update_w(k, w_cand);
  const double lm_cand = log_marginal(cand, obs, hp, nu);
  const GigParams prop = update_branch_params(branch, sx, nu);
  const double log_ratio =
      lm_cand - lm + gig_log_pdf(prop, w_cur) - gig_log_pdf(prop, w_cand);
  if (!accept_log(log_ratio, rng)) return {};
  state.chol = std::move(cand);
  lm = lm_cand;
  ++counters.update_accepted;
  return {true, lm};
}

}  // namespace

void validate(const MoveProbabilities& mp) {
  if (mp.p01 != 1.0) {
    throw std::domain_error("birth proposal probability must be 1");
  }
  if (mp.p10 < 0.0 || mp.p11 < 0.0 || std::abs(mp.p10 + mp.p11 - 1.0) > 1e-12) {
    throw std::domain_error("death/update probabilities must sum to 1");
  }
  if (mp.update_mix < 0.0 || mp.update_mix > 1.0) {
    throw std::domain_error("update proposal mix weight must lie in [0, 1]");
  }
}

void validate(const SamplerConfig& cfg) {
  if (cfg.iterations <= 0) throw std::domain_error("iterations must be positive");
  if (cfg.burn_in < 0 || cfg.burn_in >= cfg.iterations) {
    throw std::domain_error("burn-in must be nonnegative and below iterations");
  }
  if (cfg.amp_var_step <= 0.0 || cfg.scale_step < 0.0) {
    throw std::domain_error("step sizes must be positive");
  }
  if (cfg.scale_min <= 0.0 || cfg.scale_max <= cfg.scale_min) {
    throw std::domain_error("scale box must be positive and ordered");
  }
  if (cfg.amp_var_min <= 0.0 || cfg.amp_var_max <= cfg.amp_var_min) {
    throw std::domain_error("amp_var box must be positive and ordered");
  }
  if (cfg.noise_prior_shape <= 0.0 || cfg.noise_prior_rate <= 0.0) {
    throw std::domain_error("noise prior parameters must be positive");
  }
  if (cfg.thin <= 0) throw std::domain_error("thin must be positive");
  validate(cfg.moves);
}

GigParams update_branch_params(int branch, double sigma_x, const GhParams& nu_N) {
  validate(nu_N);
  if (sigma_x <= 0.0) throw std::domain_error("sigma_x must be positive");
  if (branch == 0) return scale_gh_prior(nu_N, sigma_x).second;
  if (branch == 1) {
    return GigParams{nu_N.lambda - 0.5,
                     std::hypot(nu_N.gamma(), nu_N.beta) / sigma_x,
                     sigma_x * std::hypot(nu_N.delta, nu_N.mu)};
  }
  throw std::invalid_argument("unknown update proposal branch");
}

std::pair<double, int> propose_update_w(double /*w_k*/, double sigma_x,
                                        const GhParams& nu_N, RandomStream& rng,
                                        double prior_branch_prob) {
  const int branch = rng.uniform() < prior_branch_prob ? 0 : 1;
  const GigParams p = update_branch_params(branch, sigma_x, nu_N);
  return {gig_sample(p, rng), branch};
}

double acceptance_log_ratio(const std::vector<std::uint8_t>& q, const Vector& w,
                            const std::vector<std::uint8_t>& q_cand,
                            const Vector& w_cand, MoveKind move,
                            int update_branch, const Observation& obs,
                            const Hyperparams& hp, const GhParams& nu_N,
                            const SamplerConfig& cfg) {
  validate(hp);
  validate(cfg);
  const int m = obs.m();
  if (static_cast<int>(q.size()) != m || static_cast<int>(q_cand.size()) != m ||
      static_cast<int>(w.size()) != m || static_cast<int>(w_cand.size()) != m) {
    throw std::invalid_argument("state dimensions must match the dictionary");
  }
  int site = -1;
  for (int k = 0; k < m; ++k) {
    const bool differs =
        q[k] != q_cand[k] || (q[k] && q_cand[k] && w[k] != w_cand[k]);
    if (!differs) continue;
    if (site >= 0) {
      throw std::invalid_argument("states must differ at exactly one site");
    }
    site = k;
  }
  if (site < 0) {
    // a degenerate update that re-proposes the current value: the marginal
    // and both proposal densities cancel exactly
    if (move == MoveKind::kUpdate && q == q_cand) return 0.0;
    throw std::invalid_argument("states must differ at exactly one site");
  }

  const double sx = std::sqrt(hp.amp_var);
  const GigParams mix = scale_gh_prior(nu_N, sx).second;

  ActiveSetCholesky chol;
  for (int k = 0; k < m; ++k) {
    if (q[k]) chol.insert(k, w[k], obs, hp.noise_var);
  }
  const double lm_cur = log_marginal(chol, obs, hp, nu_N);

  switch (move) {
    case MoveKind::kBirth: {
      if (q[site] || !q_cand[site]) {
        throw std::invalid_argument("birth must activate the differing site");
      }
      chol.insert(site, w_cand[site], obs, hp.noise_var);
      const double lm_new = log_marginal(chol, obs, hp, nu_N);
      return lm_new - lm_cur + std::log(cfg.moves.p10) -
             std::log(cfg.moves.p01) - gig_log_pdf(mix, w_cand[site]);
    }
    case MoveKind::kDeath: {
      if (!q[site] || q_cand[site]) {
        throw std::invalid_argument("death must deactivate the differing site");
      }
      chol.remove(site);
      const double lm_new = log_marginal(chol, obs, hp, nu_N);
      return lm_new - lm_cur + std::log(cfg.moves.p01) +
             gig_log_pdf(mix, w[site]) - std::log(cfg.moves.p10);
    }
    case MoveKind::kUpdate: {
      if (!q[site] || !q_cand[site]) {
        throw std::invalid_argument("update must keep the differing site active");
      }
      chol.update_w(site, w_cand[site]);
      const double lm_new = log_marginal(chol, obs, hp, nu_N);
      const GigParams prop = update_branch_params(update_branch, sx, nu_N);
      return lm_new - lm_cur + gig_log_pdf(prop, w[site]) -
             gig_log_pdf(prop, w_cand[site]);
    }
  }
  throw std::invalid_argument("unknown move kind");
}

LatentState rj_site_step(int k, const LatentState& state, const Observation& obs,
                         const Hyperparams& hp, const GhParams& nu_N,
                         const SamplerConfig& cfg, RandomStream& rng) {
  if (k < 0 || k >= obs.m()) throw std::out_of_range("site index out of range");
  LatentState next = state;
  double lm = log_marginal(next.chol, obs, hp, nu_N);
  MoveCounters scratch;
  site_move(k, next, lm, obs, hp, nu_N, cfg, rng, scratch);
  return next;
}

void sample_amplitudes(LatentState& state, const Observation& obs,
                       const Hyperparams& hp, const GhParams& nu_N,
                       RandomStream& rng) {
  std::fill(state.x.begin(), state.x.end(), 0.0);
  const int l = state.chol.size();
  if (l == 0) return;
  const double sx = std::sqrt(hp.amp_var);
  Vector eta(l);
  for (int pos = 0; pos < l; ++pos) {
    const int k = state.chol.active()[pos];
    const double w = state.chol.w_at_position(pos);
    const double mu_x = sx * nu_N.mu + (nu_N.beta / sx) * w;
    eta[pos] = obs.hty(k) / hp.noise_var + mu_x / w;
  }
  state.chol.forward_solve(eta);
  state.chol.back_solve_transpose(eta);
  Vector z(l);
  for (double& v : z) v = rng.normal();
  state.chol.back_solve_transpose(z);
  for (int pos = 0; pos < l; ++pos) {
    state.x[state.chol.active()[pos]] = eta[pos] + z[pos];
  }
}

Hyperparams sample_hyperparams(const LatentState& state, const Observation& obs,
                               const Hyperparams& hp, const GhParams& nu_N,
                               const SamplerConfig& cfg, RandomStream& rng,
                               MoveCounters& counters) {
  Hyperparams out = hp;
  const int m = obs.m();
  const int l = state.chol.size();
  if (cfg.sample_bern_prob) {
    out.bern_prob = rng.beta(1.0 + l, 1.0 + (m - l));
  }
  if (cfg.sample_amp_var) {
    out.amp_var = mh_ln_walk(
        out.amp_var, cfg.amp_var_step, cfg.amp_var_min, cfg.amp_var_max,
        [&](double v) { return bgh_amp_var_log_target(state, nu_N, v); }, rng,
        counters.amp_var_proposed, counters.amp_var_accepted);
  }
  if (cfg.sample_noise_var) {
    const double rss = residual_ss(state, obs);
    out.noise_var = rng.inverse_gamma(cfg.noise_prior_shape + 0.5 * obs.n(),
                                      cfg.noise_prior_rate + 0.5 * rss);
  }
  return out;
}

Hyperparams sample_ir_scale(const LatentState& state, Observation& obs,
                            const Hyperparams& hp, const SamplerConfig& cfg,
                            RandomStream& rng, MoveCounters& counters) {
  if (!obs.parametric()) {
    throw std::logic_error("scale sampling requires a parametric dictionary");
  }
  Hyperparams out = hp;
  out.ir_scale = obs.ir_scale();
  ++counters.scale_proposed;
  const double u = std::log(out.ir_scale);
  const double u_cand = u + cfg.scale_step * rng.normal();
  const double s_cand = std::exp(u_cand);
  if (s_cand < cfg.scale_min || s_cand > cfg.scale_max) return out;
  const Observation cand = obs.with_ir_scale(s_cand);
  const double rss_cur = residual_ss(state, obs);
  const double rss_cand = residual_ss(state, cand);
  const double log_ratio =
      (rss_cur - rss_cand) / (2.0 * hp.noise_var) + (u_cand - u);
  if (!accept_log(log_ratio, rng)) return out;
  obs = cand;
  out.ir_scale = s_cand;
  ++counters.scale_accepted;
  return out;
}

void bgh_iteration(LatentState& state, Observation& obs, Hyperparams& hp,
                   const GhParams& nu_N, const SamplerConfig& cfg,
                   RandomStream& rng, MoveCounters& counters) {
  const int m = obs.m();
  double lm = log_marginal(state.chol, obs, hp, nu_N);
  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  if (cfg.shuffle_sites) {
    for (int k = m - 1; k > 0; --k) {
      std::swap(order[k], order[rng.uniform_int(k + 1)]);
    }
  }
  for (int k : order) {
    site_move(k, state, lm, obs, hp, nu_N, cfg, rng, counters);
  }
  sample_amplitudes(state, obs, hp, nu_N, rng);
  const double noise_before = hp.noise_var;
  hp = sample_hyperparams(state, obs, hp, nu_N, cfg, rng, counters);
  if (hp.noise_var != noise_before) state.chol.rebuild(obs, hp.noise_var);
  if (cfg.sample_scale) {
    const double scale_before = obs.ir_scale();
    hp = sample_ir_scale(state, obs, hp, cfg, rng, counters);
    if (obs.ir_scale() != scale_before) state.chol.rebuild(obs, hp.noise_var);
  }
}

BtgSiteStats btg_site_stats(int k, const Vector& residual_without_k,
                            const Observation& obs, const Hyperparams& hp) {
  const Vector& col = obs.column(k);
  double htr = 0.0;
  for (int i = 0; i < obs.n(); ++i) htr += col[i] * residual_without_k[i];
  const double v =
      1.0 / (obs.gram(k, k) / hp.noise_var + 1.0 / hp.amp_var);
  const double mean = v * htr / hp.noise_var;
  const double log_odds = std::log(hp.bern_prob) - std::log1p(-hp.bern_prob) +
                          kLnTwo + 0.5 * std::log(v / hp.amp_var) +
                          0.5 * mean * mean / v +
                          log_norm_cdf(mean / std::sqrt(v));
  return {mean, v, log_odds};
}

void btg_iteration(LatentState& state, Observation& obs, Hyperparams& hp,
                   const SamplerConfig& cfg, RandomStream& rng,
                   MoveCounters& counters) {
  const int m = obs.m();
  const int n = obs.n();
  Vector r = obs.y();
  for (int k = 0; k < m; ++k) {
    if (!state.q[k]) continue;
    const Vector& col = obs.column(k);
    for (int i = 0; i < n; ++i) r[i] -= state.x[k] * col[i];
  }
  for (int k = 0; k < m; ++k) {
    const Vector& col = obs.column(k);
    if (state.q[k]) {
      for (int i = 0; i < n; ++i) r[i] += state.x[k] * col[i];
    }
    const BtgSiteStats st = btg_site_stats(k, r, obs, hp);
    // P(active) from the log odds, overflow-safe on both sides
    const double p1 = st.log_odds >= 0.0
                          ? 1.0 / (1.0 + std::exp(-st.log_odds))
                          : std::exp(st.log_odds - std::log1p(std::exp(st.log_odds)));
    if (rng.uniform() < p1) {
      state.q[k] = 1;
      state.x[k] = truncnorm_sample(st.mean, std::sqrt(st.var), rng);
      for (int i = 0; i < n; ++i) r[i] -= state.x[k] * col[i];
    } else {
      state.q[k] = 0;
      state.x[k] = 0.0;
    }
  }
  int l = 0;
  for (int k = 0; k < m; ++k) l += state.q[k] ? 1 : 0;
  if (cfg.sample_bern_prob) {
    hp.bern_prob = rng.beta(1.0 + l, 1.0 + (m - l));
  }
  if (cfg.sample_amp_var) {
    hp.amp_var = mh_ln_walk(
        hp.amp_var, cfg.amp_var_step, cfg.amp_var_min, cfg.amp_var_max,
        [&](double v) { return btg_amp_var_log_target(state, v); }, rng,
        counters.amp_var_proposed, counters.amp_var_accepted);
  }
  if (cfg.sample_noise_var) {
    double rss = 0.0;
    for (double v : r) rss += v * v;
    hp.noise_var = rng.inverse_gamma(cfg.noise_prior_shape + 0.5 * n,
                                     cfg.noise_prior_rate + 0.5 * rss);
  }
  if (cfg.sample_scale) {
    hp = sample_ir_scale(state, obs, hp, cfg, rng, counters);
  }
}

LatentState cold_state(const Observation& obs, const Hyperparams& hp) {
  const std::vector<std::uint8_t> q(obs.m(), 0);
  const Vector zeros(obs.m(), 0.0);
  return make_state(q, zeros, zeros, obs, hp);
}

LatentState random_state(const Observation& obs, const Hyperparams& hp,
                         const GhParams& nu_N, double inclusion,
                         RandomStream& rng) {
  if (inclusion < 0.0 || inclusion > 1.0) {
    throw std::domain_error("inclusion probability must lie in [0, 1]");
  }
  const int m = obs.m();
  const double sx = std::sqrt(hp.amp_var);
  const GigParams mix = scale_gh_prior(nu_N, sx).second;
  std::vector<std::uint8_t> q(m, 0);
  Vector x(m, 0.0), w(m, 0.0);
  for (int k = 0; k < m; ++k) {
    if (rng.uniform() >= inclusion) continue;
    q[k] = 1;
    w[k] = gig_sample(mix, rng);
    x[k] = truncnorm_sample(0.0, sx, rng);
  }
  return make_state(q, x, w, obs, hp);
}

ChainStore run_chain(const SamplerConfig& cfg, const Observation& obs,
                     const LatentState& init, const Hyperparams& hp0,
                     const GhParams& nu_N, SamplerKind kind) {
  validate(cfg);
  validate(hp0);
  validate(nu_N);
  if (cfg.sample_scale && !obs.parametric()) {
    throw std::invalid_argument(
        "scale sampling requires a parametric dictionary");
  }
  Observation run_obs = obs;
  LatentState state = init;
  Hyperparams hp = hp0;
  if (run_obs.parametric()) hp.ir_scale = run_obs.ir_scale();
  RandomStream rng(cfg.seed);

  ChainStore out;
  out.kind = kind;
  out.seed = cfg.seed;
  out.site_count = run_obs.m();
  out.burn_in = cfg.burn_in;
  out.thin = cfg.thin;
  out.q_hist.reserve(cfg.iterations);
  out.theta_hist.reserve(cfg.iterations);
  out.counter_hist.reserve(cfg.iterations);
  out.pm_x.assign(run_obs.m(), 0.0);

  for (int it = 1; it <= cfg.iterations; ++it) {
    if (kind == SamplerKind::kBgh) {
      bgh_iteration(state, run_obs, hp, nu_N, cfg, rng, out.counters);
    } else {
      btg_iteration(state, run_obs, hp, cfg, rng, out.counters);
    }
    out.q_hist.push_back(state.q);
    out.theta_hist.push_back(
        {hp.bern_prob, hp.noise_var, hp.amp_var, hp.ir_scale});
    out.counter_hist.push_back(out.counters);
    if (it % cfg.thin == 0) {
      out.x_hist.push_back(state.x);
      out.x_iters.push_back(it);
    }
    if (it > cfg.burn_in) {
      for (int k = 0; k < run_obs.m(); ++k) out.pm_x[k] += state.x[k];
      ++out.pm_count;
    }
  }
  if (out.pm_count > 0) {
    for (double& v : out.pm_x) v /= out.pm_count;
  }
  out.final_hp = hp;
  return out;
}

}  // namespace spikegh
