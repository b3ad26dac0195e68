// Acceptance gate: one checker per shipped guarantee, each ending in a
// single verdict line "criterion N: PASS/FAIL - detail". Run with a
// criterion number (1-8) to check one guarantee, or with no arguments for
// the whole battery. The exit status is the number of failed criteria.
//
// Known honest failure: criterion 7's divergence bound. The truncated
// normal target sits outside the GH family on a degenerate ridge of the
// likelihood, so any usable (capped) fit keeps a divergence above the
// bound; see README for the analysis. The check is still run at the
// stated bound rather than weakened.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "spikegh/diagnostics.hpp"
#include "spikegh/distributions.hpp"
#include "spikegh/gh_fit.hpp"
#include "spikegh/model.hpp"
#include "spikegh/rng.hpp"
#include "spikegh/samplers.hpp"
#include "spikegh/simulation.hpp"
#include "spikegh/specfun.hpp"
#include "support/enumerate.hpp"
#include "support/model_oracle.hpp"
#include "support/quad.hpp"
#include "support/stats.hpp"

using spikegh::ActiveSetCholesky;
using spikegh::ChainStore;
using spikegh::FittedGhApprox;
using spikegh::GeneratedScenario;
using spikegh::GhParams;
using spikegh::GigParams;
using spikegh::Hyperparams;
using spikegh::LatentState;
using spikegh::Matrix;
using spikegh::MonitorSet;
using spikegh::Observation;
using spikegh::PosteriorSummary;
using spikegh::RandomStream;
using spikegh::SamplerConfig;
using spikegh::SamplerKind;
using spikegh::Scenario;
using spikegh::Vector;

namespace {

// generic well-conditioned prior shape for the oracle-based checks; the
// fitted production shape is exercised by criteria 1, 2 and 7
const GhParams kNu{-0.5, 2.0, 0.6, 0.9, 0.15};

std::string default_fit_path() {
  return std::string(SPIKEGH_DATA_DIR) + "/gh_fit_default.json";
}

bool verdict(int n, bool ok, const std::string& detail) {
  std::cout << "criterion " << n << ": " << (ok ? "PASS" : "FAIL") << " - "
            << detail << std::endl;
  return ok;
}

void note(const std::string& line) {
  std::cout << "  " << line << std::endl;
}

std::string fmt(double v, int prec = 4) {
  std::ostringstream os;
  os.precision(prec);
  os << v;
  return os.str();
}

// ---------------------------------------------------------------------
// shared experiment harness for the convergence and restoration checks:
// the regenerated default scenario, four parallel chains started from
// over-dispersed supports, inclusion probability and amplitude variance
// sampled, noise variance held at its true value, response scale sampled
// ---------------------------------------------------------------------

struct ExperimentRun {
  std::vector<ChainStore> chains;
  std::optional<int> conv;  // sustained-threshold trace length
};

ExperimentRun run_experiment(const GeneratedScenario& gen, SamplerKind kind,
                             int iterations, int batch,
                             std::uint64_t base_seed,
                             const FittedGhApprox& fit, int thin) {
  const int chain_count = 4;
  SamplerConfig cfg;
  cfg.iterations = iterations;
  cfg.burn_in = 0;
  cfg.sample_bern_prob = true;
  cfg.sample_amp_var = true;
  cfg.sample_noise_var = false;
  cfg.sample_scale = true;
  cfg.thin = thin;

  ExperimentRun out;
  out.chains.resize(chain_count);
  std::vector<std::exception_ptr> errors(chain_count);
  std::vector<std::thread> threads;
  threads.reserve(chain_count);
  for (int j = 0; j < chain_count; ++j) {
    threads.emplace_back([&, j] {
      try {
        SamplerConfig mine = cfg;
        mine.seed = base_seed + static_cast<std::uint64_t>(j);
        RandomStream init_rng(base_seed + 900 + static_cast<std::uint64_t>(j));
        const LatentState init =
            spikegh::random_state(gen.obs, gen.hp, fit.nu_N, 0.25, init_rng);
        out.chains[j] =
            spikegh::run_chain(mine, gen.obs, init, gen.hp, fit.nu_N, kind);
      } catch (...) {
        errors[j] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  const auto trace = spikegh::mpsrf_trace(spikegh::q_monitors(out.chains), batch);
  out.conv = spikegh::convergence_iteration(trace, 1.2);
  return out;
}

GeneratedScenario replication_scenario(int rep) {
  Scenario sc;  // defaults: N=84, L_h=21, s=3, 5 spikes, 10 dB, known noise
  sc.seed = static_cast<std::uint64_t>(rep + 1);
  return spikegh::generate_scenario(sc);
}

// ---------------------------------------------------------------------
// criterion 1: convergence-speed reproduction
// ---------------------------------------------------------------------

bool criterion1() {
  FittedGhApprox fit;
  try {
    fit = spikegh::load_gh_fit(default_fit_path());
  } catch (const std::exception& e) {
    return verdict(1, false, std::string("mixing-law fit unavailable: ") + e.what());
  }

  const int bgh_iters = 16000, bgh_batch = 800;
  const int btg_iters = 40000, btg_batch = 2000;
  int passes = 0;
  for (int rep = 0; rep < 5; ++rep) {
    const auto t0 = std::chrono::steady_clock::now();
    const GeneratedScenario gen = replication_scenario(rep);
    const std::uint64_t base = 10000ull * static_cast<std::uint64_t>(rep + 1);
    const ExperimentRun bgh =
        run_experiment(gen, SamplerKind::kBgh, bgh_iters, bgh_batch, base, fit, 1000);
    const ExperimentRun btg = run_experiment(gen, SamplerKind::kBtg, btg_iters,
                                             btg_batch, base + 50, fit, 1000);
    bool ok = false;
    std::ostringstream line;
    line << "rep " << rep + 1 << " (scenario seed " << rep + 1 << "): ";
    if (!bgh.conv) {
      line << "collapsed sampler not sustained below 1.2 within " << bgh_iters;
    } else {
      // a run that never sustains the threshold lower-bounds the baseline's
      // convergence point by its own length
      const int btg_iter = btg.conv ? *btg.conv : btg_iters;
      ok = btg_iter >= 5 * *bgh.conv;
      line << "bgh=" << *bgh.conv << " btg=" << (btg.conv ? "" : ">")
           << btg_iter << " ratio=" << (btg.conv ? "" : ">")
           << fmt(static_cast<double>(btg_iter) / *bgh.conv, 3);
    }
    const double secs = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - t0)
                            .count();
    line << (ok ? "  [ok]" : "  [not ok]") << "  (" << fmt(secs, 3) << " s)";
    note(line.str());
    passes += ok ? 1 : 0;
  }
  std::ostringstream d;
  d << "sustained 5x convergence speedup in " << passes
    << " of 5 replications (need >= 4)";
  return verdict(1, passes >= 4, d.str());
}

// ---------------------------------------------------------------------
// criterion 2: restoration parity of the posterior-mean estimates
// ---------------------------------------------------------------------

struct RestorationResult {
  double recall;
  double rmse;
  int burn;
  bool converged;
};

RestorationResult restoration_run(const GeneratedScenario& gen, SamplerKind kind,
                                  int iterations, std::uint64_t base_seed,
                                  const FittedGhApprox& fit) {
  const ExperimentRun run = run_experiment(gen, kind, iterations,
                                           iterations / 20, base_seed, fit, 1);
  // summarize only past the measured convergence point, but keep at least a
  // 4000-iteration tail so the average rests on real mass
  int burn = run.conv ? *run.conv : iterations / 2;
  burn = std::min(burn, iterations - 4000);

  const int m = run.chains.front().site_count;
  Vector mean_x(m, 0.0), inclusion(m, 0.0);
  for (const ChainStore& chain : run.chains) {
    const PosteriorSummary s = spikegh::posterior_mean(chain, burn);
    for (int k = 0; k < m; ++k) {
      mean_x[k] += s.mean_x[k] / run.chains.size();
      inclusion[k] += s.inclusion[k] / run.chains.size();
    }
  }
  const auto metrics =
      spikegh::reconstruction_metrics(mean_x, inclusion, gen.truth, 1);
  return {metrics.recall, metrics.rmse, burn, run.conv.has_value()};
}

bool criterion2() {
  FittedGhApprox fit;
  try {
    fit = spikegh::load_gh_fit(default_fit_path());
  } catch (const std::exception& e) {
    return verdict(2, false, std::string("mixing-law fit unavailable: ") + e.what());
  }

  double recall_bgh = 0.0, recall_btg = 0.0, rmse_bgh = 0.0, rmse_btg = 0.0;
  for (int rep = 0; rep < 5; ++rep) {
    const auto t0 = std::chrono::steady_clock::now();
    const GeneratedScenario gen = replication_scenario(rep);
    const std::uint64_t base = 20000ull * static_cast<std::uint64_t>(rep + 1);
    const RestorationResult bgh =
        restoration_run(gen, SamplerKind::kBgh, 20000, base, fit);
    const RestorationResult btg =
        restoration_run(gen, SamplerKind::kBtg, 45000, base + 50, fit);
    recall_bgh += bgh.recall / 5.0;
    recall_btg += btg.recall / 5.0;
    rmse_bgh += bgh.rmse / 5.0;
    rmse_btg += btg.rmse / 5.0;
    const double secs = std::chrono::duration<double>(
                            std::chrono::steady_clock::now() - t0)
                            .count();
    std::ostringstream line;
    line << "rep " << rep + 1 << ": bgh recall=" << fmt(bgh.recall, 3)
         << " rmse=" << fmt(bgh.rmse) << " (burn " << bgh.burn
         << (bgh.converged ? "" : ", unconverged") << "), btg recall="
         << fmt(btg.recall, 3) << " rmse=" << fmt(btg.rmse) << " (burn "
         << btg.burn << (btg.converged ? "" : ", unconverged") << ")  ("
         << fmt(secs, 3) << " s)";
    note(line.str());
  }
  const bool recall_ok = recall_bgh >= 0.8 && recall_btg >= 0.8;
  const bool rmse_ok = std::abs(rmse_bgh - rmse_btg) <= 0.25 * rmse_btg;
  std::ostringstream d;
  d << "mean recall bgh=" << fmt(recall_bgh, 3) << " btg=" << fmt(recall_btg, 3)
    << " (need >= 0.8), mean rmse bgh=" << fmt(rmse_bgh) << " vs btg="
    << fmt(rmse_btg) << " (need within 25%)";
  return verdict(2, recall_ok && rmse_ok, d.str());
}

// ---------------------------------------------------------------------
// criterion 3: exact stationarity on an enumerable instance
// ---------------------------------------------------------------------

long long support_index(const std::vector<std::uint8_t>& q) {
  long long idx = 0;
  for (std::size_t k = 0; k < q.size(); ++k) idx |= (q[k] ? 1LL : 0LL) << k;
  return idx;
}

bool criterion3() {
  const Vector ir{1.0, 0.6};
  const Matrix h = spikegh::build_dictionary(ir, 3);
  const Vector y{0.9, 1.1, 0.3, 0.4};
  const Observation obs(y, h);
  const Hyperparams hp{0.35, 0.4, 1.5, 1.0};

  const auto probs_bgh = oracle::support_distribution(3, [&](const auto& q) {
    return oracle::bgh_support_log_mass(q, obs, hp, kNu);
  });
  const auto probs_btg = oracle::support_distribution(3, [&](const auto& q) {
    return oracle::btg_support_log_mass(q, obs, hp);
  });

  const long long keep = 2000000;
  const int burn = 2000;
  SamplerConfig cfg;
  cfg.iterations = 1;
  cfg.sample_bern_prob = false;
  cfg.sample_amp_var = false;
  cfg.sample_noise_var = false;
  cfg.sample_scale = false;

  auto count_supports = [&](SamplerKind kind, std::uint64_t seed,
                            std::vector<long long>& counts) {
    SamplerConfig mine = cfg;
    mine.seed = seed;
    RandomStream rng(seed);
    spikegh::MoveCounters counters;
    LatentState state = spikegh::cold_state(obs, hp);
    Observation local = obs;
    Hyperparams theta = hp;
    counts.assign(8, 0);
    for (long long it = 0; it < burn + keep; ++it) {
      if (kind == SamplerKind::kBgh) {
        spikegh::bgh_iteration(state, local, theta, kNu, mine, rng, counters);
      } else {
        spikegh::btg_iteration(state, local, theta, mine, rng, counters);
      }
      if (it >= burn) counts[support_index(state.q)] += 1;
    }
  };

  std::vector<long long> counts_bgh, counts_btg;
  std::thread tb([&] { count_supports(SamplerKind::kBgh, 3001, counts_bgh); });
  count_supports(SamplerKind::kBtg, 3002, counts_btg);
  tb.join();

  const double p_bgh = oracle::support_chi_square_pvalue(counts_bgh, probs_bgh);
  const double p_btg = oracle::support_chi_square_pvalue(counts_btg, probs_btg);
  note("collapsed sampler chi-square p=" + fmt(p_bgh));
  note("baseline sampler chi-square p=" + fmt(p_btg));
  std::ostringstream d;
  d << "support law over 2e6 sweeps vs enumeration: p_bgh=" << fmt(p_bgh)
    << ", p_btg=" << fmt(p_btg) << " (need > 0.01)";
  return verdict(3, p_bgh > 0.01 && p_btg > 0.01, d.str());
}

// ---------------------------------------------------------------------
// criterion 4: amplitude-marginalization identity
// ---------------------------------------------------------------------

bool criterion4() {
  RandomStream rng(7100);
  double worst_rel = 0.0;
  for (int rep = 0; rep < 50; ++rep) {
    const int n = 10 + static_cast<int>(rng.uniform_int(15));
    const int m = 6 + static_cast<int>(rng.uniform_int(11));
    const Observation obs = oracle::random_obs(rng, n, m);
    const Hyperparams hp{0.05 + 0.6 * rng.uniform(), 0.2 + 1.5 * rng.uniform(),
                         0.4 + 2.0 * rng.uniform(), 1.0};
    std::vector<std::uint8_t> q(m, 0);
    Vector w(m, 0.0);
    int l = 0;
    for (int k = 0; k < m && l < 10; ++k) {
      if (rng.uniform() < 0.4) {
        q[k] = 1;
        w[k] = std::exp(1.2 * rng.normal());
        ++l;
      }
    }
    const double got = spikegh::log_marginal(q, w, obs, hp, kNu);
    const double want = oracle::oracle_marginal(q, w, obs, hp, kNu);
    worst_rel = std::max(
        worst_rel, std::abs(got - want) / std::max(1.0, std::abs(want)));
  }

  double worst_quad = 0.0;
  for (int rep = 0; rep < 5; ++rep) {
    const int n = 6 + static_cast<int>(rng.uniform_int(6));
    const int m = 4 + static_cast<int>(rng.uniform_int(4));
    const Observation obs = oracle::random_obs(rng, n, m);
    const Hyperparams hp{0.2 + 0.4 * rng.uniform(), 0.3 + rng.uniform(),
                         0.6 + rng.uniform(), 1.0};
    const int site = static_cast<int>(rng.uniform_int(m));
    std::vector<std::uint8_t> q(m, 0);
    q[site] = 1;
    Vector w(m, 0.0);
    w[site] = std::exp(rng.normal());
    const double direct = spikegh::log_marginal(q, w, obs, hp, kNu);
    const double quad = oracle::log_integrate(
        [&](double x) {
          Vector xv(m, 0.0);
          xv[site] = x;
          const LatentState st = spikegh::make_state(q, xv, w, obs, hp);
          return spikegh::log_joint(st, obs, hp, kNu);
        },
        -60.0, 60.0, 1e-12);
    worst_quad = std::max(worst_quad, std::abs(direct - quad));
  }

  std::ostringstream d;
  d << "dense-covariance oracle max rel err " << fmt(worst_rel, 3)
    << " (need <= 1e-8) over 50 instances; single-site quadrature max err "
    << fmt(worst_quad, 3) << " (need <= 1e-7)";
  return verdict(4, worst_rel <= 1e-8 && worst_quad <= 1e-7, d.str());
}

// ---------------------------------------------------------------------
// criterion 5: incremental factor maintenance does not drift
// ---------------------------------------------------------------------

bool criterion5() {
  RandomStream rng(51000);
  const Observation obs = oracle::random_obs(rng, 80, 48);
  const Hyperparams hp{0.3, 0.7, 1.0, 1.0};
  const int cap = 32;

  ActiveSetCholesky chol;
  std::vector<std::uint8_t> active(48, 0);
  std::vector<int> active_list;
  double worst = 0.0;
  for (int op = 1; op <= 10000; ++op) {
    const int l = static_cast<int>(active_list.size());
    double move = rng.uniform();
    if (l == 0) move = 0.0;                       // must insert
    if (l == cap && move < 1.0 / 3.0) move = 0.5; // cannot insert
    if (move < 1.0 / 3.0) {
      int k = static_cast<int>(rng.uniform_int(48));
      while (active[k]) k = static_cast<int>(rng.uniform_int(48));
      chol.insert(k, std::exp(1.1 * rng.normal()), obs, hp.noise_var);
      active[k] = 1;
      active_list.push_back(k);
    } else if (move < 2.0 / 3.0) {
      const int pos = static_cast<int>(rng.uniform_int(l));
      const int k = active_list[pos];
      chol.remove(k);
      active[k] = 0;
      active_list.erase(active_list.begin() + pos);
    } else {
      const int k = active_list[rng.uniform_int(l)];
      chol.update_w(k, std::exp(1.1 * rng.normal()));
    }
    if (op % 1000 == 0 || op == 10000) {
      if (!chol.active().empty()) {
        const Matrix dense = oracle::dense_factor(chol.active(), chol.w(), obs,
                                                  hp.noise_var);
        worst = std::max(worst, oracle::factor_gap(chol.factor(), dense));
      }
    }
  }
  std::ostringstream d;
  d << "max relative gap to full refactorization " << fmt(worst, 3)
    << " after 1e4 mixed operations (need <= 1e-8)";
  return verdict(5, worst <= 1e-8, d.str());
}

// ---------------------------------------------------------------------
// criterion 6: distribution layer (normalization, samplers, moments,
// log-domain Bessel evaluation)
// ---------------------------------------------------------------------

bool criterion6() {
  bool ok = true;
  std::ostringstream why;

  const GigParams gig_grid[5] = {{-0.5, 1.0, 1.0},
                                 {2.0, 1.5, 0.5},
                                 {0.3, 1.1, 0.7},
                                 {-2.2, 0.4, 3.0},
                                 {5.0, 6.0, 0.02}};
  const GhParams gh_grid[5] = {{-0.5, 1.5, 0.3, 0.8, 0.2},
                               {1.2, 2.0, -0.8, 1.5, 0.0},
                               {1.0, 2.0, 0.0, 1.0, 3.0},
                               {0.5, 1.5, 0.5, 1.0, 0.0},
                               {-1.1, 3.0, 2.2, 0.4, -1.0}};

  double worst_mass = 0.0;
  for (const auto& p : gig_grid) {
    const double z = oracle::integrate_upper(
        [&](double w) { return std::exp(spikegh::gig_log_pdf(p, w)); }, 0.0,
        1e-10);
    worst_mass = std::max(worst_mass, std::abs(z - 1.0));
  }
  for (const auto& p : gh_grid) {
    const double z = oracle::integrate_real_line(
        [&](double x) { return std::exp(spikegh::gh_log_pdf(p, x)); }, 1e-10);
    worst_mass = std::max(worst_mass, std::abs(z - 1.0));
  }
  if (worst_mass > 1e-7) {
    ok = false;
    why << "density mass off by " << fmt(worst_mass, 3) << "; ";
  }
  note("worst |mass - 1| over the 10-point grid: " + fmt(worst_mass, 3));

  // samplers against the quadrature cdf at the 1% level
  const int ks_n = 20000;
  double worst_ks_margin = -1e9;  // max of (distance - critical)
  auto ks_check = [&](const std::string& name, auto pdf, auto draw,
                      bool real_line) {
    std::vector<double> xs(ks_n);
    for (double& x : xs) x = draw();
    const double d = oracle::ks_distance(pdf, xs, real_line);
    const double crit = oracle::ks_critical_1pct(ks_n);
    worst_ks_margin = std::max(worst_ks_margin, d - crit);
    note(name + " ks=" + fmt(d, 3) + " (1% critical " + fmt(crit, 3) + ")");
  };
  {
    RandomStream rng(61001);
    const GigParams p = gig_grid[1];
    ks_check("gig sampler", [&](double w) {
      return std::exp(spikegh::gig_log_pdf(p, w));
    }, [&] { return spikegh::gig_sample(p, rng); }, false);
  }
  {
    RandomStream rng(61002);
    const GigParams p = gig_grid[3];
    ks_check("gig sampler (heavy tail)", [&](double w) {
      return std::exp(spikegh::gig_log_pdf(p, w));
    }, [&] { return spikegh::gig_sample(p, rng); }, false);
  }
  {
    RandomStream rng(61003);
    const GhParams p = gh_grid[0];
    ks_check("gh sampler", [&](double x) {
      return std::exp(spikegh::gh_log_pdf(p, x));
    }, [&] { return spikegh::gh_sample(p, rng); }, true);
  }
  {
    RandomStream rng(61004);
    const GhParams p = gh_grid[4];
    ks_check("gh sampler (skewed)", [&](double x) {
      return std::exp(spikegh::gh_log_pdf(p, x));
    }, [&] { return spikegh::gh_sample(p, rng); }, true);
  }
  {
    RandomStream rng(61005);
    ks_check("truncated normal sampler", [](double x) {
      return std::exp(-0.5 * (x - 0.4) * (x - 0.4) / (1.69));
    }, [&] { return spikegh::truncnorm_sample(0.4, 1.3, rng); }, false);
  }
  if (worst_ks_margin > 0.0) {
    ok = false;
    why << "a sampler failed the 1% KS bound; ";
  }

  // sample moments of the mixing law vs the closed form
  double worst_moment_se = 0.0;
  for (int idx : {0, 1, 2}) {
    const GigParams p = gig_grid[idx];
    RandomStream rng(61100 + idx);
    const int n = 200000;
    for (double power : {1.0, 2.0, -1.0}) {
      double s1 = 0.0, s2 = 0.0;
      RandomStream local(rng.uniform_int(1u << 30));
      std::vector<double> draws(n);
      for (double& w : draws) w = spikegh::gig_sample(p, local);
      for (double w : draws) {
        const double t = std::pow(w, power);
        s1 += t;
        s2 += t * t;
      }
      const double mean = s1 / n;
      const double var = std::max(0.0, s2 / n - mean * mean);
      const double se = std::sqrt(var / n);
      const double want = spikegh::gig_moment(p, power);
      worst_moment_se = std::max(worst_moment_se, std::abs(mean - want) / se);
    }
  }
  note("worst mixing-law moment deviation: " + fmt(worst_moment_se, 3) +
       " standard errors");
  if (worst_moment_se > 4.0) {
    ok = false;
    why << "a sample moment sits " << fmt(worst_moment_se, 3) << " se away; ";
  }

  // log-domain Bessel: three-term recurrence and order symmetry
  double worst_bessel = 0.0;
  for (double order : {0.3, 1.7, 5.5, 12.0}) {
    for (double x : {0.05, 1.0, 10.0, 300.0}) {
      const double lo = spikegh::log_bessel_k(order - 1.0, x);
      const double mid = spikegh::log_bessel_k(order, x);
      const double hi = spikegh::log_bessel_k(order + 1.0, x);
      const double term = std::log(2.0 * order / x) + mid;
      const double peak = std::max(lo, term);
      const double rhs =
          peak + std::log(std::exp(lo - peak) + std::exp(term - peak));
      worst_bessel = std::max(worst_bessel, std::abs(std::expm1(hi - rhs)));
      const double sym =
          std::abs(spikegh::log_bessel_k(-order, x) - mid) /
          std::max(1.0, std::abs(mid));
      worst_bessel = std::max(worst_bessel, sym);
    }
  }
  note("worst Bessel recurrence/symmetry relative error: " +
       fmt(worst_bessel, 3));
  if (worst_bessel > 1e-9) {
    ok = false;
    why << "Bessel identity error " << fmt(worst_bessel, 3) << "; ";
  }

  std::ostringstream d;
  if (ok) {
    d << "normalization <= 1e-7, samplers within the 1% KS bound, moments "
         "within 4 se, Bessel identities <= 1e-9";
  } else {
    d << why.str();
  }
  return verdict(6, ok, d.str());
}

// ---------------------------------------------------------------------
// criterion 7: quality of the fitted amplitude prior
// ---------------------------------------------------------------------

bool criterion7() {
  FittedGhApprox fit;
  try {
    fit = spikegh::load_gh_fit(default_fit_path());
  } catch (const std::exception& e) {
    return verdict(7, false, std::string("mixing-law fit unavailable: ") + e.what());
  }
  const GhParams nu = fit.nu_N;

  // divergence of the half-normal target from the fitted shape, by quadrature
  const double kl = oracle::integrate_upper(
      [&](double x) {
        const double logf = 0.5 * std::log(2.0 / M_PI) - 0.5 * x * x;
        return std::exp(logf) * (logf - spikegh::gh_log_pdf(nu, x));
      },
      0.0, 1e-11);
  note("divergence of the half-normal target from the fit: " + fmt(kl, 6) +
       " nats (bound 0.01)");

  // scaled-prior mixture identity: the scaled density must equal a normal
  // mixed over the matching scaled mixing law
  double worst_mix = 0.0;
  RandomStream rng(71001);
  for (double sx : {0.3, 1.0, 2.7}) {
    const auto [amp, mix] = spikegh::scale_gh_prior(nu, sx);
    for (int i = 0; i < 7; ++i) {
      const double x = spikegh::gh_sample(amp, rng);
      const double direct = std::exp(spikegh::gh_log_pdf(amp, x));
      const double byquad = oracle::integrate_upper(
          [&](double w) {
            return std::exp(spikegh::gig_log_pdf(mix, w) +
                            spikegh::log_norm_pdf(
                                x, nu.mu * sx + (nu.beta / sx) * w, w));
          },
          0.0, 1e-10);
      worst_mix = std::max(worst_mix, std::abs(direct - byquad) /
                                          std::max(byquad, 1e-300));
    }
  }
  note("scaled-family mixture identity worst relative error: " +
       fmt(worst_mix, 3));

  const bool kl_ok = kl <= 0.01;
  const bool mix_ok = worst_mix <= 1e-7;
  std::ostringstream d;
  d << "divergence " << fmt(kl, 5) << " nats (need <= 0.01"
    << (kl_ok ? "" : "; fails: the target lies outside the fitted family")
    << "), mixture identity max rel err " << fmt(worst_mix, 3)
    << " (need <= 1e-7)";
  return verdict(7, kl_ok && mix_ok, d.str());
}

// ---------------------------------------------------------------------
// criterion 8: convergence-diagnostic calibration
// ---------------------------------------------------------------------

MonitorSet iid_monitors(RandomStream& rng, int chains, int len, int dim) {
  MonitorSet out(chains);
  for (auto& chain : out) {
    chain.resize(len, Vector(dim));
    for (auto& row : chain) {
      for (double& v : row) v = rng.normal();
    }
  }
  return out;
}

bool criterion8() {
  int in_band = 0;
  const int seeds = 100;
  for (std::uint64_t seed = 1; seed <= seeds; ++seed) {
    RandomStream rng(seed);
    const MonitorSet chains = iid_monitors(rng, 4, 10000, 5);
    const double r = spikegh::mpsrf(chains);
    if (r >= 0.99 && r <= 1.05) ++in_band;
  }
  note("null calibration: " + std::to_string(in_band) + " of 100 seeds in "
       "[0.99, 1.05]");

  RandomStream rng(80001);
  MonitorSet separated(2);
  for (int c = 0; c < 2; ++c) {
    separated[c].resize(2000, Vector(1));
    for (auto& row : separated[c]) row[0] = rng.normal(10.0 * c, 1.0);
  }
  const double r_sep = spikegh::mpsrf(separated);
  note("separated chains: R=" + fmt(r_sep, 4));

  const MonitorSet scalar_chains = iid_monitors(rng, 3, 500, 1);
  const double w = spikegh::intra_chain_cov(scalar_chains)[0][0];
  const double b = spikegh::inter_chain_cov(scalar_chains)[0][0];
  const double scalar_formula = 499.0 / 500.0 + (4.0 / 3.0) * (b / w);
  const double r_scalar = spikegh::mpsrf(scalar_chains);
  const double scalar_gap = std::abs(r_scalar - scalar_formula) / scalar_formula;
  note("scalar case: |R - psrf| / psrf = " + fmt(scalar_gap, 3));

  const MonitorSet base_chains = iid_monitors(rng, 3, 300, 5);
  const double r_base = spikegh::mpsrf(base_chains);
  Matrix a(5, Vector(5));
  for (int r = 0; r < 5; ++r) {
    for (int c = 0; c < 5; ++c) a[r][c] = rng.normal() + (r == c ? 3.0 : 0.0);
  }
  Vector shift(5);
  for (double& v : shift) v = rng.normal(0.0, 2.0);
  MonitorSet mapped = base_chains;
  for (auto& chain : mapped) {
    for (auto& row : chain) {
      Vector out(5, 0.0);
      for (int r = 0; r < 5; ++r) {
        out[r] = shift[r];
        for (int c = 0; c < 5; ++c) out[r] += a[r][c] * row[c];
      }
      row = out;
    }
  }
  const double affine_gap = std::abs(spikegh::mpsrf(mapped) - r_base) / r_base;
  note("affine invariance relative gap: " + fmt(affine_gap, 3));

  const bool ok = in_band >= 99 && r_sep > 10.0 && scalar_gap <= 1e-9 &&
                  affine_gap <= 1e-9;
  std::ostringstream d;
  d << "null band " << in_band << "/100 (need >= 99), separated R="
    << fmt(r_sep, 4) << " (need > 10), scalar gap " << fmt(scalar_gap, 3)
    << ", affine gap " << fmt(affine_gap, 3) << " (need <= 1e-9)";
  return verdict(8, ok, d.str());
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> todo;
  if (argc > 1) {
    const int n = std::atoi(argv[1]);
    if (n < 1 || n > 8) {
      std::cerr << "usage: acceptance [criterion 1-8]" << std::endl;
      return 64;
    }
    todo.push_back(n);
  } else {
    for (int n = 1; n <= 8; ++n) todo.push_back(n);
  }

  int failures = 0;
  for (int n : todo) {
    bool ok = false;
    try {
      switch (n) {
        case 1: ok = criterion1(); break;
        case 2: ok = criterion2(); break;
        case 3: ok = criterion3(); break;
        case 4: ok = criterion4(); break;
        case 5: ok = criterion5(); break;
        case 6: ok = criterion6(); break;
        case 7: ok = criterion7(); break;
        case 8: ok = criterion8(); break;
      }
    } catch (const std::exception& e) {
      ok = verdict(n, false, std::string("unexpected error: ") + e.what());
    }
    failures += ok ? 0 : 1;
  }
  return failures;
}
