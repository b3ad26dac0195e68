#pragma once

#include <cstdint>
#include <vector>

#include "spikegh/distributions.hpp"

namespace spikegh {

using Vector = std::vector<double>;
using Matrix = std::vector<std::vector<double>>;  // dense, row major

// h_n = s^2 / (s^2 + n^2) for n in {-(length-1)/2, ..., (length-1)/2}
Vector impulse_response(double s, int length);

// full-convolution Toeplitz operator, (M + L_h - 1) x M; column k is the
// impulse response placed at offset k
Matrix build_dictionary(const Vector& ir, int site_count);

struct Hyperparams {
  double bern_prob;  // site activation probability
  double noise_var;
  double amp_var;    // squared amplitude scale
  double ir_scale;
};
void validate(const Hyperparams& hp);

// observed signal with the dictionary and the cached projections every
// marginal evaluation needs (H^T H, H^T y, |y|^2); immutable after build
class Observation {
 public:
  Observation(Vector y, Matrix H);
  Observation(Vector y, double ir_scale, int ir_length);

  int n() const { return static_cast<int>(y_.size()); }
  int m() const { return m_; }
  const Vector& y() const { return y_; }
  const Vector& column(int k) const { return cols_[k]; }
  double gram(int j, int k) const { return gram_[j * m_ + k]; }
  double hty(int k) const { return hty_[k]; }
  double yty() const { return yty_; }

  bool parametric() const { return ir_length_ > 0; }
  double ir_scale() const { return ir_scale_; }
  int ir_length() const { return ir_length_; }
  // same signal under a different response scale (parametric dictionaries)
  Observation with_ir_scale(double s) const;

 private:
  void build_caches();
  Vector y_;
  std::vector<Vector> cols_;
  int m_ = 0;
  Vector gram_;
  Vector hty_;
  double yty_ = 0.0;
  double ir_scale_ = 0.0;
  int ir_length_ = 0;
};

// Lower-triangular factor F of the active-set precision
//   A = noise_var^{-1} Hbar^T Hbar + diag(1/w),
// maintained incrementally: O(L^2) insert (append), remove (Givens
// re-triangularization), and diagonal update (rank-one modification). The
// factor is built against one Observation and one noise variance; rebuild()
// refreshes it after either changes.
class ActiveSetCholesky {
 public:
  int size() const { return static_cast<int>(active_.size()); }
  const std::vector<int>& active() const { return active_; }
  const Vector& w() const { return w_; }
  double w_at_position(int pos) const { return w_[pos]; }
  int position_of(int k) const;  // -1 when inactive
  bool is_active(int k) const { return position_of(k) >= 0; }

  void insert(int k, double w_k, const Observation& obs, double noise_var);
  void remove(int k);
  void update_w(int k, double w_new);
  void rebuild(const Observation& obs, double noise_var);
  void clear();

  // noise variance the current factor was built against
  double built_noise_var() const { return noise_var_; }
  // row i holds entries 0..i of the factor
  const Matrix& factor() const { return rows_; }
  double log_det_half() const;  // sum of log diagonal entries
  void forward_solve(Vector& b) const;         // F b' = b
  void back_solve_transpose(Vector& b) const;  // F^T b' = b

 private:
  std::vector<int> active_;
  Vector w_;
  Matrix rows_;
  double noise_var_ = 0.0;
};

// functional wrappers over the incremental operations
ActiveSetCholesky chol_insert(ActiveSetCholesky chol, int k, double w_k,
                              const Observation& obs, const Hyperparams& hp);
ActiveSetCholesky chol_remove(ActiveSetCholesky chol, int k);
ActiveSetCholesky chol_update_w(ActiveSetCholesky chol, int k, double w_new);

struct LatentState {
  std::vector<std::uint8_t> q;
  Vector x;  // zero off the support
  ActiveSetCholesky chol;
};

// assembles a consistent state (factor included); w is read on the support
LatentState make_state(const std::vector<std::uint8_t>& q, const Vector& x,
                       const Vector& w, const Observation& obs,
                       const Hyperparams& hp);

struct ConditionalGaussian {
  Vector eta;         // conditional mean of the active amplitudes
  Matrix gamma_chol;  // lower Cholesky factor of the conditional covariance
};

ConditionalGaussian conditional_amplitude_params(const LatentState& state,
                                                 const Observation& obs,
                                                 const Hyperparams& hp,
                                                 const GhParams& nu_N);

// log p(y | q, x) + log P(q) + sum over the support of the amplitude and
// mixing-variance prior terms
double log_joint(const LatentState& state, const Observation& obs,
                 const Hyperparams& hp, const GhParams& nu_N);

// amplitude-marginalized log p(y, q, w | theta), through the cached factor
double log_marginal(const ActiveSetCholesky& chol, const Observation& obs,
                    const Hyperparams& hp, const GhParams& nu_N);
double log_marginal(const std::vector<std::uint8_t>& q, const Vector& w,
                    const Observation& obs, const Hyperparams& hp,
                    const GhParams& nu_N);

}  // namespace spikegh
