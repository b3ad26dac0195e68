#include "spikegh/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "spikegh/specfun.hpp"

namespace spikegh {
namespace {

constexpr double kLogTwoPi = 1.8378770664093454835606594728112353;

double dot(const Vector& a, const Vector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// per-site prior pieces shared by the joint and the marginal: the scaled
// amplitude prior has conditional mean sigma_x mu_N + (beta_N/sigma_x) w and
// mixing law GIG(lambda_N, gamma_N/sigma_x, delta_N sigma_x); note the Bessel
// argument delta_N gamma_N is scale free, so the normalizer costs one Bessel
// evaluation per call regardless of sigma_x
struct PriorTerms {
  double sigma_x;
  double mu_n;
  double beta_n;
  double g_lambda;
  double g_gamma;
  double g_delta;
  double g_lognorm;
};

PriorTerms make_prior_terms(const Hyperparams& hp, const GhParams& nu) {
  validate(nu);
  PriorTerms t;
  t.sigma_x = std::sqrt(hp.amp_var);
  t.mu_n = nu.mu;
  t.beta_n = nu.beta;
  const double gam = nu.gamma();
  t.g_lambda = nu.lambda;
  t.g_gamma = gam / t.sigma_x;
  t.g_delta = nu.delta * t.sigma_x;
  t.g_lognorm = nu.lambda * (std::log(t.g_gamma) - std::log(t.g_delta)) -
                std::log(2.0) - log_bessel_k(nu.lambda, nu.delta * gam);
  return t;
}

double gig_term(const PriorTerms& t, double w) {
  return t.g_lognorm + (t.g_lambda - 1.0) * std::log(w) -
         0.5 * (t.g_delta * t.g_delta / w + t.g_gamma * t.g_gamma * w);
}

double mu_x_at(const PriorTerms& t, double w) {
  return t.sigma_x * t.mu_n + (t.beta_n / t.sigma_x) * w;
}

// conditional right-hand side G = noise_var^{-1} Hbar^T y + W^{-1} mu_x
Vector conditional_rhs(const ActiveSetCholesky& chol, const Observation& obs,
                       const Hyperparams& hp, const PriorTerms& t) {
  const int L = chol.size();
  Vector g(L);
  for (int i = 0; i < L; ++i) {
    const int k = chol.active()[i];
    const double w = chol.w()[i];
    g[i] = obs.hty(k) / hp.noise_var + t.sigma_x * t.mu_n / w +
           t.beta_n / t.sigma_x;
  }
  return g;
}

}  // namespace

Vector impulse_response(double s, int length) {
  if (!(s > 0.0) || !std::isfinite(s)) {
    throw std::domain_error("impulse response needs s > 0");
  }
  if (length <= 0 || length % 2 == 0) {
    throw std::domain_error("impulse response length must be odd");
  }
  Vector h(length);
  const int half = (length - 1) / 2;
  for (int i = 0; i < length; ++i) {
    const double nn = i - half;
    h[i] = s * s / (s * s + nn * nn);
  }
  return h;
}

Matrix build_dictionary(const Vector& ir, int site_count) {
  if (ir.empty()) throw std::domain_error("empty impulse response");
  if (site_count < 1) throw std::domain_error("site count must be positive");
  const int lh = static_cast<int>(ir.size());
  const int m = site_count;
  const int n = m + lh - 1;
  Matrix h(n, Vector(m, 0.0));
  for (int k = 0; k < m; ++k) {
    for (int j = 0; j < lh; ++j) h[k + j][k] = ir[j];
  }
  return h;
}

void validate(const Hyperparams& hp) {
  const bool ok = std::isfinite(hp.bern_prob) && hp.bern_prob > 0.0 &&
                  hp.bern_prob < 1.0 && std::isfinite(hp.noise_var) &&
                  hp.noise_var > 0.0 && std::isfinite(hp.amp_var) &&
                  hp.amp_var > 0.0 && std::isfinite(hp.ir_scale) &&
                  hp.ir_scale > 0.0;
  if (!ok) {
    throw std::domain_error(
        "hyperparameters need bern_prob in (0,1) and positive variances/scale");
  }
}

Observation::Observation(Vector y, Matrix H) : y_(std::move(y)) {
  if (y_.empty() || H.size() != y_.size() || H.front().empty()) {
    throw std::domain_error("dictionary must be N x M with N matching y");
  }
  m_ = static_cast<int>(H.front().size());
  for (const auto& row : H) {
    if (static_cast<int>(row.size()) != m_) {
      throw std::domain_error("dictionary rows must have equal width");
    }
  }
  cols_.assign(m_, Vector(y_.size()));
  for (std::size_t i = 0; i < y_.size(); ++i) {
    for (int k = 0; k < m_; ++k) cols_[k][i] = H[i][k];
  }
  build_caches();
}

Observation::Observation(Vector y, double ir_scale, int ir_length)
    : y_(std::move(y)), ir_scale_(ir_scale), ir_length_(ir_length) {
  const Vector ir = impulse_response(ir_scale, ir_length);
  const int n = static_cast<int>(y_.size());
  m_ = n - ir_length + 1;
  if (m_ < 1) throw std::domain_error("signal shorter than the impulse response");
  cols_.assign(m_, Vector(n, 0.0));
  for (int k = 0; k < m_; ++k) {
    for (int j = 0; j < ir_length; ++j) cols_[k][k + j] = ir[j];
  }
  build_caches();
}

void Observation::build_caches() {
  gram_.assign(static_cast<std::size_t>(m_) * m_, 0.0);
  hty_.assign(m_, 0.0);
  for (int j = 0; j < m_; ++j) {
    hty_[j] = dot(cols_[j], y_);
    for (int k = 0; k <= j; ++k) {
      const double g = dot(cols_[j], cols_[k]);
      gram_[j * m_ + k] = g;
      gram_[k * m_ + j] = g;
    }
  }
  yty_ = dot(y_, y_);
}

Observation Observation::with_ir_scale(double s) const {
  if (!parametric()) {
    throw std::domain_error("observation has no parametric impulse response");
  }
  return Observation(y_, s, ir_length_);
}

int ActiveSetCholesky::position_of(int k) const {
  for (std::size_t i = 0; i < active_.size(); ++i) {
    if (active_[i] == k) return static_cast<int>(i);
  }
  return -1;
}

void ActiveSetCholesky::insert(int k, double w_k, const Observation& obs,
                               double noise_var) {
  if (is_active(k)) throw std::invalid_argument("site already active");
  if (k < 0 || k >= obs.m()) throw std::out_of_range("site index out of range");
  if (!(w_k > 0.0) || !std::isfinite(w_k)) {
    throw std::domain_error("mixing variance must be positive");
  }
  if (!(noise_var > 0.0)) throw std::domain_error("noise variance must be positive");
  if (size() == 0) {
    noise_var_ = noise_var;
  } else if (noise_var != noise_var_) {
    throw std::logic_error("factor was built under a different noise variance");
  }
  const int n = size();
  Vector row(n);
  for (int i = 0; i < n; ++i) row[i] = obs.gram(k, active_[i]) / noise_var;
  forward_solve(row);
  const double a = obs.gram(k, k) / noise_var + 1.0 / w_k;
  const double d2 = a - dot(row, row);
  if (!(d2 > 0.0)) {
    throw std::runtime_error("insertion lost positive definiteness");
  }
  row.push_back(std::sqrt(d2));
  rows_.push_back(std::move(row));
  active_.push_back(k);
  w_.push_back(w_k);
}

void ActiveSetCholesky::remove(int k) {
  const int p = position_of(k);
  if (p < 0) throw std::out_of_range("site not active");
  active_.erase(active_.begin() + p);
  w_.erase(w_.begin() + p);
  rows_.erase(rows_.begin() + p);
  const int n = size();
  // rows below the deleted one carry one superdiagonal entry; Givens
  // rotations from the right restore the triangle without touching A
  for (int j = p; j < n; ++j) {
    Vector& rj = rows_[j];
    const double a = rj[j];
    const double b = rj[j + 1];
    const double r = std::hypot(a, b);
    if (!(r > 0.0)) throw std::runtime_error("removal degenerated the factor");
    const double c = a / r;
    const double s = b / r;
    rj[j] = r;
    rj.resize(j + 1);
    for (int i = j + 1; i < n; ++i) {
      Vector& ri = rows_[i];
      const double u = ri[j];
      const double v = ri[j + 1];
      ri[j] = c * u + s * v;
      ri[j + 1] = c * v - s * u;
    }
  }
}

void ActiveSetCholesky::update_w(int k, double w_new) {
  const int p = position_of(k);
  if (p < 0) throw std::out_of_range("site not active");
  if (!(w_new > 0.0) || !std::isfinite(w_new)) {
    throw std::domain_error("mixing variance must be positive");
  }
  const double delta = 1.0 / w_new - 1.0 / w_[p];
  w_[p] = w_new;
  if (delta == 0.0) return;
  const int n = size();
  Vector v(n, 0.0);
  v[p] = std::sqrt(std::abs(delta));
  if (delta > 0.0) {
    for (int j = p; j < n; ++j) {
      const double f = rows_[j][j];
      const double vj = v[j];
      const double r = std::hypot(f, vj);
      const double c = r / f;
      const double s = vj / f;
      rows_[j][j] = r;
      for (int i = j + 1; i < n; ++i) {
        rows_[i][j] = (rows_[i][j] + s * v[i]) / c;
        v[i] = c * v[i] - s * rows_[i][j];
      }
    }
  } else {
    for (int j = p; j < n; ++j) {
      const double f = rows_[j][j];
      const double vj = v[j];
      const double d2 = (f - vj) * (f + vj);
      if (!(d2 > 0.0)) {
        throw std::runtime_error("variance update lost positive definiteness");
      }
      const double r = std::sqrt(d2);
      const double c = r / f;
      const double s = vj / f;
      rows_[j][j] = r;
      for (int i = j + 1; i < n; ++i) {
        rows_[i][j] = (rows_[i][j] - s * v[i]) / c;
        v[i] = c * v[i] - s * rows_[i][j];
      }
    }
  }
}

void ActiveSetCholesky::rebuild(const Observation& obs, double noise_var) {
  if (!(noise_var > 0.0)) throw std::domain_error("noise variance must be positive");
  noise_var_ = noise_var;
  const int n = size();
  rows_.assign(n, Vector());
  for (int i = 0; i < n; ++i) {
    rows_[i].resize(i + 1);
    for (int j = 0; j <= i; ++j) {
      double a = obs.gram(active_[i], active_[j]) / noise_var;
      if (i == j) a += 1.0 / w_[i];
      for (int t = 0; t < j; ++t) a -= rows_[i][t] * rows_[j][t];
      if (i == j) {
        if (!(a > 0.0)) throw std::runtime_error("rebuild lost positive definiteness");
        rows_[i][i] = std::sqrt(a);
      } else {
        rows_[i][j] = a / rows_[j][j];
      }
    }
  }
}

void ActiveSetCholesky::clear() {
  active_.clear();
  w_.clear();
  rows_.clear();
  noise_var_ = 0.0;
}

double ActiveSetCholesky::log_det_half() const {
  double s = 0.0;
  for (int i = 0; i < size(); ++i) s += std::log(rows_[i][i]);
  return s;
}

void ActiveSetCholesky::forward_solve(Vector& b) const {
  const int n = static_cast<int>(b.size());
  for (int i = 0; i < n; ++i) {
    double s = b[i];
    for (int j = 0; j < i; ++j) s -= rows_[i][j] * b[j];
    b[i] = s / rows_[i][i];
  }
}

void ActiveSetCholesky::back_solve_transpose(Vector& b) const {
  const int n = static_cast<int>(b.size());
  for (int i = n - 1; i >= 0; --i) {
    double s = b[i];
    for (int j = i + 1; j < n; ++j) s -= rows_[j][i] * b[j];
    b[i] = s / rows_[i][i];
  }
}

ActiveSetCholesky chol_insert(ActiveSetCholesky chol, int k, double w_k,
                              const Observation& obs, const Hyperparams& hp) {
  validate(hp);
  chol.insert(k, w_k, obs, hp.noise_var);
  return chol;
}

ActiveSetCholesky chol_remove(ActiveSetCholesky chol, int k) {
  chol.remove(k);
  return chol;
}

ActiveSetCholesky chol_update_w(ActiveSetCholesky chol, int k, double w_new) {
  chol.update_w(k, w_new);
  return chol;
}

LatentState make_state(const std::vector<std::uint8_t>& q, const Vector& x,
                       const Vector& w, const Observation& obs,
                       const Hyperparams& hp) {
  validate(hp);
  const int m = obs.m();
  if (static_cast<int>(q.size()) != m || static_cast<int>(x.size()) != m ||
      static_cast<int>(w.size()) != m) {
    throw std::domain_error("state vectors must have the dictionary width");
  }
  LatentState st;
  st.q = q;
  st.x = x;
  for (int k = 0; k < m; ++k) {
    if (q[k]) {
      st.chol.insert(k, w[k], obs, hp.noise_var);
    } else if (x[k] != 0.0) {
      throw std::domain_error("amplitudes must vanish off the support");
    }
  }
  return st;
}

ConditionalGaussian conditional_amplitude_params(const LatentState& state,
                                                 const Observation& obs,
                                                 const Hyperparams& hp,
                                                 const GhParams& nu_N) {
  validate(hp);
  const ActiveSetCholesky& chol = state.chol;
  const int L = chol.size();
  if (L < 1) throw std::domain_error("empty support has no amplitude conditional");
  const PriorTerms t = make_prior_terms(hp, nu_N);

  ConditionalGaussian out;
  out.eta = conditional_rhs(chol, obs, hp, t);
  chol.forward_solve(out.eta);
  chol.back_solve_transpose(out.eta);

  // dense covariance through the factor, then its own Cholesky
  Matrix gamma(L, Vector(L, 0.0));
  for (int j = 0; j < L; ++j) {
    Vector e(L, 0.0);
    e[j] = 1.0;
    chol.forward_solve(e);
    chol.back_solve_transpose(e);
    for (int i = 0; i < L; ++i) gamma[i][j] = e[i];
  }
  out.gamma_chol.assign(L, Vector(L, 0.0));
  for (int i = 0; i < L; ++i) {
    for (int j = 0; j <= i; ++j) {
      double a = 0.5 * (gamma[i][j] + gamma[j][i]);
      for (int t2 = 0; t2 < j; ++t2) {
        a -= out.gamma_chol[i][t2] * out.gamma_chol[j][t2];
      }
      if (i == j) {
        if (!(a > 0.0)) {
          throw std::runtime_error("conditional covariance is not positive definite");
        }
        out.gamma_chol[i][i] = std::sqrt(a);
      } else {
        out.gamma_chol[i][j] = a / out.gamma_chol[j][j];
      }
    }
  }
  return out;
}

double log_joint(const LatentState& state, const Observation& obs,
                 const Hyperparams& hp, const GhParams& nu_N) {
  validate(hp);
  const int n = obs.n();
  const int m = obs.m();
  const PriorTerms t = make_prior_terms(hp, nu_N);

  Vector r = obs.y();
  const int L = state.chol.size();
  for (int i = 0; i < L; ++i) {
    const int k = state.chol.active()[i];
    const double xk = state.x[k];
    const Vector& col = obs.column(k);
    for (int j = 0; j < n; ++j) r[j] -= xk * col[j];
  }
  const double rss = dot(r, r);

  double acc = -0.5 * n * (kLogTwoPi + std::log(hp.noise_var)) -
               rss / (2.0 * hp.noise_var) + L * std::log(hp.bern_prob) +
               (m - L) * std::log1p(-hp.bern_prob);
  for (int i = 0; i < L; ++i) {
    const int k = state.chol.active()[i];
    const double w = state.chol.w()[i];
    acc += gig_term(t, w) + log_norm_pdf(state.x[k], mu_x_at(t, w), w);
  }
  return acc;
}

double log_marginal(const ActiveSetCholesky& chol, const Observation& obs,
                    const Hyperparams& hp, const GhParams& nu_N) {
  validate(hp);
  const int n = obs.n();
  const int m = obs.m();
  const int L = chol.size();
  double acc = -0.5 * n * (kLogTwoPi + std::log(hp.noise_var)) -
               obs.yty() / (2.0 * hp.noise_var) + L * std::log(hp.bern_prob) +
               (m - L) * std::log1p(-hp.bern_prob);
  if (L == 0) return acc;
  if (chol.built_noise_var() != hp.noise_var) {
    throw std::logic_error("factor was built under a different noise variance");
  }

  const PriorTerms t = make_prior_terms(hp, nu_N);
  double sum_log_w = 0.0;
  double quad_mu = 0.0;
  for (int i = 0; i < L; ++i) {
    const double w = chol.w()[i];
    sum_log_w += std::log(w);
    acc += gig_term(t, w);
    quad_mu += t.sigma_x * t.sigma_x * t.mu_n * t.mu_n / w +
               2.0 * t.mu_n * t.beta_n +
               t.beta_n * t.beta_n * w / (t.sigma_x * t.sigma_x);
  }
  Vector tv = conditional_rhs(chol, obs, hp, t);
  chol.forward_solve(tv);
  return acc - 0.5 * sum_log_w - chol.log_det_half() + 0.5 * dot(tv, tv) -
         0.5 * quad_mu;
}

double log_marginal(const std::vector<std::uint8_t>& q, const Vector& w,
                    const Observation& obs, const Hyperparams& hp,
                    const GhParams& nu_N) {
  validate(hp);
  const int m = obs.m();
  if (static_cast<int>(q.size()) != m || static_cast<int>(w.size()) != m) {
    throw std::domain_error("support vectors must have the dictionary width");
  }
  ActiveSetCholesky chol;
  for (int k = 0; k < m; ++k) {
    if (q[k]) chol.insert(k, w[k], obs, hp.noise_var);
  }
  return log_marginal(chol, obs, hp, nu_N);
}

}  // namespace spikegh
