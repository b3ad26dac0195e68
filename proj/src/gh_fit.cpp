#include "spikegh/gh_fit.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <thread>
#include <vector>

#include "json.hpp"
#include "spikegh/specfun.hpp"

namespace spikegh {
namespace {

constexpr double kLogTwoPi = 1.8378770664093454835606594728112353;
constexpr double kLogTwo = 0.6931471805599453094172321214581766;
constexpr int kDim = 5;
using Vec5 = std::array<double, kDim>;
using Mat5 = std::array<Vec5, kDim>;

double sigmoid(double u) { return 1.0 / (1.0 + std::exp(-u)); }
double logit(double s) { return std::log(s / (1.0 - s)); }

double dot(const Vec5& a, const Vec5& b) {
  double s = 0.0;
  for (int i = 0; i < kDim; ++i) s += a[i] * b[i];
  return s;
}

double norm_inf(const Vec5& a) {
  double s = 0.0;
  for (double v : a) s = std::max(s, std::abs(v));
  return s;
}

// smooth bijection between R^5 and the constraint box; tanh/sigmoid maps keep
// alpha > |beta| and delta > 0 without clipping, and saturate gently at the
// box edges so a binding cap behaves like a vanishing-gradient boundary
struct Reparam {
  GhFitConfig cfg;

  GhParams unpack(const Vec5& u) const {
    GhParams p;
    p.lambda = cfg.lambda_cap * std::tanh(u[0] / cfg.lambda_cap);
    p.alpha = cfg.alpha_cap * sigmoid(u[1]);
    p.beta = p.alpha * std::tanh(u[2]);
    const double llo = std::log(cfg.delta_lo);
    const double lhi = std::log(cfg.delta_hi);
    p.delta = std::exp(llo + (lhi - llo) * sigmoid(u[3]));
    p.mu = cfg.mu_cap * std::tanh(u[4] / cfg.mu_cap);
    return p;
  }

  Vec5 pack(const GhParams& p) const {
    const double llo = std::log(cfg.delta_lo);
    const double lhi = std::log(cfg.delta_hi);
    return {cfg.lambda_cap * std::atanh(p.lambda / cfg.lambda_cap),
            logit(p.alpha / cfg.alpha_cap), std::atanh(p.beta / p.alpha),
            logit((std::log(p.delta) - llo) / (lhi - llo)),
            cfg.mu_cap * std::atanh(p.mu / cfg.mu_cap)};
  }
};

template <class Obj>
Vec5 central_gradient(const Obj& obj, Vec5 u) {
  constexpr double h = 1e-5;
  Vec5 g{};
  for (int i = 0; i < kDim; ++i) {
    const double saved = u[i];
    u[i] = saved + h;
    const double fp = obj(u);
    u[i] = saved - h;
    const double fm = obj(u);
    u[i] = saved;
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

struct MinimizeResult {
  Vec5 u;
  double f;
};

// BFGS on the inverse Hessian with Armijo backtracking; dimensions are tiny,
// all the cost sits in the objective
template <class Obj>
MinimizeResult minimize(const Obj& obj, Vec5 u, int max_iter, double gtol) {
  Mat5 H{};
  for (int i = 0; i < kDim; ++i) H[i][i] = 1.0;
  double f = obj(u);
  Vec5 g = central_gradient(obj, u);
  bool scaled = false;
  int stall = 0;

  for (int iter = 0; iter < max_iter; ++iter) {
    if (norm_inf(g) < gtol) break;

    Vec5 p{};
    for (int i = 0; i < kDim; ++i) {
      for (int j = 0; j < kDim; ++j) p[i] -= H[i][j] * g[j];
    }
    double gp = dot(g, p);
    if (!(gp < 0.0)) {
      for (int i = 0; i < kDim; ++i) {
        for (int j = 0; j < kDim; ++j) H[i][j] = (i == j) ? 1.0 : 0.0;
        p[i] = -g[i];
      }
      gp = dot(g, p);
    }

    double step = 1.0;
    Vec5 unew;
    double fnew = f;
    bool improved = false;
    for (int ls = 0; ls < 60; ++ls) {
      for (int i = 0; i < kDim; ++i) unew[i] = u[i] + step * p[i];
      fnew = obj(unew);
      if (fnew <= f + 1e-4 * step * gp) {
        improved = true;
        break;
      }
      step *= 0.5;
    }
    if (!improved || !(fnew < f)) break;

    Vec5 gnew = central_gradient(obj, unew);
    Vec5 s, y;
    for (int i = 0; i < kDim; ++i) {
      s[i] = unew[i] - u[i];
      y[i] = gnew[i] - g[i];
    }
    const double sy = dot(s, y);
    if (!scaled && sy > 0.0) {
      const double yy = dot(y, y);
      if (yy > 0.0) {
        for (int i = 0; i < kDim; ++i) H[i][i] = sy / yy;
      }
      scaled = true;
    }
    if (sy > 1e-12 * std::sqrt(dot(s, s) * dot(y, y))) {
      const double rho = 1.0 / sy;
      Vec5 hy{};
      for (int i = 0; i < kDim; ++i) {
        for (int j = 0; j < kDim; ++j) hy[i] += H[i][j] * y[j];
      }
      const double yhy = dot(y, hy);
      for (int i = 0; i < kDim; ++i) {
        for (int j = 0; j < kDim; ++j) {
          H[i][j] += -rho * (s[i] * hy[j] + hy[i] * s[j]) +
                     (rho * rho * yhy + rho) * s[i] * s[j];
        }
      }
    }

    stall = (f - fnew <= 1e-14 * (1.0 + std::abs(fnew))) ? stall + 1 : 0;
    u = unew;
    f = fnew;
    g = gnew;
    if (stall >= 2) break;
  }
  return {u, f};
}

}  // namespace

GhParams gh_fit_moment_init() {
  // mean and variance of the half normal, matched at a fixed right-skewed
  // shape (lambda, alpha, beta) by solving the two-moment equations for
  // delta and mu
  const double m = std::sqrt(2.0 / M_PI);
  const double v = 1.0 - 2.0 / M_PI;
  const double lambda = -0.5;
  const double alpha = 2.0;
  const double beta = 1.0;
  const double gamma = std::sqrt(alpha * alpha - beta * beta);
  const double delta = v * gamma * gamma * gamma / (gamma * gamma + beta * beta);
  const double mu = m - beta * delta / gamma;
  return {lambda, alpha, beta, delta, mu};
}

double mean_gh_log_likelihood(const GhParams& p, const std::vector<double>& xs) {
  validate(p);
  if (xs.empty()) throw std::domain_error("empty sample");
  const double g = p.gamma();
  const double ord = p.lambda - 0.5;
  const double base = p.lambda * (std::log(g) - std::log(p.delta)) -
                      0.5 * kLogTwoPi - log_bessel_k(p.lambda, p.delta * g) -
                      ord * std::log(p.alpha);
  auto chunk_sum = [&](std::size_t lo, std::size_t hi) {
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
      const double dx = xs[i] - p.mu;
      const double q = std::hypot(p.delta, dx);
      s += log_bessel_k(ord, p.alpha * q) + ord * std::log(q) + p.beta * dx;
    }
    return s;
  };

  const std::size_t n = xs.size();
  unsigned hw = std::thread::hardware_concurrency();
  const unsigned nt =
      static_cast<unsigned>(std::min<std::size_t>(hw == 0 ? 1 : hw, 8));
  double total = 0.0;
  if (n < 20000 || nt <= 1) {
    total = chunk_sum(0, n);
  } else {
    std::vector<double> partial(nt, 0.0);
    std::vector<std::thread> pool;
    pool.reserve(nt);
    for (unsigned t = 0; t < nt; ++t) {
      const std::size_t lo = n * t / nt;
      const std::size_t hi = n * (t + 1) / nt;
      pool.emplace_back([&, t, lo, hi] { partial[t] = chunk_sum(lo, hi); });
    }
    for (auto& th : pool) th.join();
    for (double s : partial) total += s;
  }
  return base + total / static_cast<double>(n);
}

FittedGhApprox fit_gh_to_truncated_normal(std::uint64_t sample_count,
                                          RandomStream& rng) {
  return fit_gh_to_truncated_normal(sample_count, rng, GhFitConfig{});
}

FittedGhApprox fit_gh_to_truncated_normal(std::uint64_t sample_count,
                                          RandomStream& rng,
                                          const GhFitConfig& cfg) {
  if (sample_count < 10000) {
    throw std::domain_error("gh fit needs at least 1e4 samples");
  }
  std::vector<double> xs(sample_count);
  for (double& x : xs) x = truncnorm_sample(0.0, 1.0, rng);

  const Reparam rp{cfg};
  const Vec5 u0 = rp.pack(gh_fit_moment_init());
  auto obj = [&](const Vec5& u) {
    const double v = -mean_gh_log_likelihood(rp.unpack(u), xs);
    return std::isfinite(v) ? v : 1e100;
  };

  const double f0 = obj(u0);
  const MinimizeResult res = minimize(obj, u0, cfg.max_iterations, cfg.grad_tol);
  if (!(res.f < f0)) {
    throw std::runtime_error("gh fit did not improve on its initialization");
  }
  const GhParams best = rp.unpack(res.u);
  validate(best);

  double ref = 0.0;
  for (double x : xs) ref += kLogTwo - 0.5 * kLogTwoPi - 0.5 * x * x;
  ref /= static_cast<double>(sample_count);

  FittedGhApprox out;
  out.nu_N = best;
  out.fit_sample_count = sample_count;
  out.fit_seed = 0;
  out.fit_kl_estimate = ref - (-res.f);
  return out;
}

FittedGhApprox fit_gh_with_seed(std::uint64_t sample_count, std::uint64_t seed,
                                const GhFitConfig& cfg) {
  RandomStream rng(seed);
  FittedGhApprox out = fit_gh_to_truncated_normal(sample_count, rng, cfg);
  out.fit_seed = seed;
  return out;
}

void save_gh_fit(const FittedGhApprox& fit, const std::string& path) {
  nlohmann::json j;
  j["lambda"] = fit.nu_N.lambda;
  j["alpha"] = fit.nu_N.alpha;
  j["beta"] = fit.nu_N.beta;
  j["delta"] = fit.nu_N.delta;
  j["mu"] = fit.nu_N.mu;
  j["fit_sample_count"] = fit.fit_sample_count;
  j["fit_seed"] = fit.fit_seed;
  j["fit_kl_estimate"] = fit.fit_kl_estimate;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << j.dump(2) << "\n";
  out.flush();
  if (!out) throw std::runtime_error("failed writing " + path);
}

FittedGhApprox load_gh_fit(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("malformed fit file " + path + ": " + e.what());
  }
  FittedGhApprox fit;
  try {
    fit.nu_N.lambda = j.at("lambda").get<double>();
    fit.nu_N.alpha = j.at("alpha").get<double>();
    fit.nu_N.beta = j.at("beta").get<double>();
    fit.nu_N.delta = j.at("delta").get<double>();
    fit.nu_N.mu = j.at("mu").get<double>();
    fit.fit_sample_count = j.at("fit_sample_count").get<std::uint64_t>();
    fit.fit_seed = j.at("fit_seed").get<std::uint64_t>();
    fit.fit_kl_estimate = j.at("fit_kl_estimate").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("fit file " + path + " missing fields: " + e.what());
  }
  validate(fit.nu_N);
  if (fit.fit_sample_count == 0) {
    throw std::domain_error("fit file has zero sample count");
  }
  return fit;
}

}  // namespace spikegh
