#include "spikegh/diagnostics.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace spikegh {

namespace {

void check_shape(const MonitorSet& chains, int min_len) {
  if (chains.size() < 2) {
    throw std::domain_error("at least two chains are required");
  }
  const std::size_t len = chains.front().size();
  if (static_cast<int>(len) < min_len) {
    throw std::domain_error("chains are too short");
  }
  const std::size_t dim = chains.front().front().size();
  if (dim == 0) throw std::domain_error("monitor dimension must be positive");
  for (const auto& chain : chains) {
    if (chain.size() != len) {
      throw std::domain_error("chains must have equal length");
    }
    for (const auto& row : chain) {
      if (row.size() != dim) {
        throw std::domain_error("monitor rows must have equal dimension");
      }
    }
  }
}

Vector chain_mean(const MonitorChain& chain) {
  const std::size_t dim = chain.front().size();
  Vector mean(dim, 0.0);
  for (const auto& row : chain) {
    for (std::size_t c = 0; c < dim; ++c) mean[c] += row[c];
  }
  for (double& v : mean) v /= static_cast<double>(chain.size());
  return mean;
}

}  // namespace

Matrix intra_chain_cov(const MonitorSet& chains) {
  check_shape(chains, 2);
  const int j = static_cast<int>(chains.size());
  const int i = static_cast<int>(chains.front().size());
  const int d = static_cast<int>(chains.front().front().size());
  Matrix cov(d, Vector(d, 0.0));
  Vector dev(d);
  for (const auto& chain : chains) {
    const Vector mean = chain_mean(chain);
    for (const auto& row : chain) {
      for (int c = 0; c < d; ++c) dev[c] = row[c] - mean[c];
      for (int a = 0; a < d; ++a) {
        for (int b = 0; b <= a; ++b) cov[a][b] += dev[a] * dev[b];
      }
    }
  }
  const double norm = 1.0 / (static_cast<double>(j) * (i - 1));
  for (int a = 0; a < d; ++a) {
    for (int b = 0; b <= a; ++b) {
      cov[a][b] *= norm;
      cov[b][a] = cov[a][b];
    }
  }
  return cov;
}

Matrix inter_chain_cov(const MonitorSet& chains) {
  check_shape(chains, 1);
  const int j = static_cast<int>(chains.size());
  const int d = static_cast<int>(chains.front().front().size());
  std::vector<Vector> means;
  means.reserve(j);
  for (const auto& chain : chains) means.push_back(chain_mean(chain));
  Vector grand(d, 0.0);
  for (const auto& m : means) {
    for (int c = 0; c < d; ++c) grand[c] += m[c];
  }
  for (double& v : grand) v /= j;
  Matrix cov(d, Vector(d, 0.0));
  Vector dev(d);
  for (const auto& m : means) {
    for (int c = 0; c < d; ++c) dev[c] = m[c] - grand[c];
    for (int a = 0; a < d; ++a) {
      for (int b = 0; b <= a; ++b) cov[a][b] += dev[a] * dev[b];
    }
  }
  const double norm = 1.0 / (j - 1);
  for (int a = 0; a < d; ++a) {
    for (int b = 0; b <= a; ++b) {
      cov[a][b] *= norm;
      cov[b][a] = cov[a][b];
    }
  }
  return cov;
}

double mpsrf(const MonitorSet& chains) {
  check_shape(chains, 2);
  const double j = static_cast<double>(chains.size());
  const double i = static_cast<double>(chains.front().size());
  const Matrix intra = intra_chain_cov(chains);
  const Matrix inter = inter_chain_cov(chains);
  const int d = static_cast<int>(intra.size());

  // coordinates with no variation anywhere carry no convergence information
  // and break the whitening; drop them. A coordinate frozen within each chain
  // but differing across chains is kept — that disagreement is exactly what
  // the diagnostic must flag. "No variation" is judged against the
  // coordinate's own magnitude so that rounding noise from mean subtraction
  // does not masquerade as variance.
  Vector second_moment(d, 0.0), total_dev(d, 0.0);
  Vector grand_mean(d, 0.0);
  double samples = 0.0;
  for (const auto& chain : chains) {
    samples += static_cast<double>(chain.size());
    for (const auto& row : chain) {
      for (int c = 0; c < d; ++c) grand_mean[c] += row[c];
    }
  }
  for (int c = 0; c < d; ++c) grand_mean[c] /= samples;
  for (const auto& chain : chains) {
    for (const auto& row : chain) {
      for (int c = 0; c < d; ++c) {
        second_moment[c] += row[c] * row[c];
        const double dev = row[c] - grand_mean[c];
        total_dev[c] += dev * dev;
      }
    }
  }
  std::vector<int> keep;
  for (int c = 0; c < d; ++c) {
    if (total_dev[c] > 1e-28 * second_moment[c]) keep.push_back(c);
  }
  if (keep.empty()) {
    throw std::runtime_error(
        "every monitor coordinate is constant across all chains");
  }
  const int r = static_cast<int>(keep.size());
  Eigen::MatrixXd w(r, r), b(r, r);
  for (int a = 0; a < r; ++a) {
    for (int c = 0; c < r; ++c) {
      w(a, c) = intra[keep[a]][keep[c]];
      b(a, c) = inter[keep[a]][keep[c]];
    }
  }
  // the ridge scale falls back to the between-chain magnitude so that chains
  // frozen at different points still factor (and report a huge R)
  const double ridge =
      1e-12 * std::max(w.diagonal().mean(), b.diagonal().mean());
  w.diagonal().array() += ridge;

  // whiten: lambda_max(W^{-1} B) = lambda_max(L^{-1} B L^{-T}), W = L L^T
  Eigen::LLT<Eigen::MatrixXd> llt(w);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("within-chain covariance is not positive definite");
  }
  const Eigen::MatrixXd half = llt.matrixL().solve(b);
  const Eigen::MatrixXd white =
      llt.matrixL().solve(half.transpose()).transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(
      0.5 * (white + white.transpose()), Eigen::EigenvaluesOnly);
  const double lambda_max = eig.eigenvalues().maxCoeff();
  return (i - 1.0) / i + ((j + 1.0) / j) * lambda_max;
}

std::vector<TracePoint> mpsrf_trace(const MonitorSet& chains, int batch) {
  check_shape(chains, 2);
  if (batch < 2) throw std::domain_error("batch must be at least 2");
  const int len = static_cast<int>(chains.front().size());
  std::vector<TracePoint> trace;
  for (int kb = batch; kb <= len; kb += batch) {
    const int first = (kb + 1) / 2;  // 1-based start of the second half
    MonitorSet window(chains.size());
    for (std::size_t c = 0; c < chains.size(); ++c) {
      window[c].assign(chains[c].begin() + (first - 1),
                       chains[c].begin() + kb);
    }
    trace.push_back({kb, mpsrf(window)});
  }
  return trace;
}

std::optional<int> convergence_iteration(const std::vector<TracePoint>& trace,
                                         double threshold) {
  if (threshold <= 1.0) throw std::domain_error("threshold must exceed 1");
  std::optional<int> hit;
  for (const TracePoint& pt : trace) {
    if (pt.r < threshold) {
      if (!hit) hit = pt.length;
    } else {
      hit.reset();
    }
  }
  return hit;
}

PosteriorSummary posterior_mean(const ChainStore& chain, int burn_in) {
  const int iters = static_cast<int>(chain.q_hist.size());
  if (iters == 0) throw std::domain_error("empty chain");
  if (burn_in < 0 || burn_in >= iters) {
    throw std::domain_error("burn-in must be below the chain length");
  }
  const int m = chain.site_count;
  PosteriorSummary out;
  out.mean_x.assign(m, 0.0);
  out.inclusion.assign(m, 0.0);

  int x_rows = 0;
  for (std::size_t rec = 0; rec < chain.x_hist.size(); ++rec) {
    if (chain.x_iters[rec] <= burn_in) continue;
    ++x_rows;
    for (int k = 0; k < m; ++k) out.mean_x[k] += chain.x_hist[rec][k];
  }
  if (x_rows == 0) {
    throw std::domain_error("no recorded amplitude rows past the burn-in");
  }
  for (double& v : out.mean_x) v /= x_rows;

  int q_rows = 0;
  for (int rec = burn_in; rec < iters; ++rec) {
    ++q_rows;
    for (int k = 0; k < m; ++k) out.inclusion[k] += chain.q_hist[rec][k];
  }
  for (double& v : out.inclusion) v /= q_rows;
  return out;
}

MonitorSet q_monitors(const std::vector<ChainStore>& chains) {
  MonitorSet monitors;
  monitors.reserve(chains.size());
  for (const ChainStore& chain : chains) {
    MonitorChain rows;
    rows.reserve(chain.q_hist.size());
    for (const auto& q : chain.q_hist) {
      Vector row(q.size());
      for (std::size_t k = 0; k < q.size(); ++k) row[k] = q[k];
      rows.push_back(std::move(row));
    }
    monitors.push_back(std::move(rows));
  }
  return monitors;
}

}  // namespace spikegh
