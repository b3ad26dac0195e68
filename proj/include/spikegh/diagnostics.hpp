#pragma once

#include <optional>
#include <vector>

#include "spikegh/model.hpp"
#include "spikegh/samplers.hpp"

namespace spikegh {

// J aligned chains of d-dimensional monitor vectors, equal lengths
using MonitorChain = std::vector<Vector>;
using MonitorSet = std::vector<MonitorChain>;

// pooled within-chain covariance, normalized by J(I-1)
Matrix intra_chain_cov(const MonitorSet& chains);
// covariance of the chain means around the grand mean, normalized by J-1
Matrix inter_chain_cov(const MonitorSet& chains);

// multivariate potential scale reduction factor
//   R = (I-1)/I + ((J+1)/J) * lambda_max(V_intra^{-1} V_inter),
// solved as a symmetric generalized eigenproblem after dropping coordinates
// with no within-chain variance and adding a relative ridge
double mpsrf(const MonitorSet& chains);

struct TracePoint {
  int length;  // kb: number of leading samples considered
  double r;    // MPSRF over the second half of that prefix
};

// monitoring series: for k = 1.., R over samples ceil(kb/2)..kb
std::vector<TracePoint> mpsrf_trace(const MonitorSet& chains, int batch);

// smallest trace length whose R sits below the threshold and never rises
// back above it afterwards
std::optional<int> convergence_iteration(const std::vector<TracePoint>& trace,
                                         double threshold);

struct PosteriorSummary {
  Vector mean_x;     // componentwise amplitude mean past the burn-in
  Vector inclusion;  // per-site activation frequency past the burn-in
};
PosteriorSummary posterior_mean(const ChainStore& chain, int burn_in);

// binary support trajectories of several runs as MPSRF monitor chains
MonitorSet q_monitors(const std::vector<ChainStore>& chains);

}  // namespace spikegh
