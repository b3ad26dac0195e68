#pragma once

#include <cstdint>
#include <utility>

#include "spikegh/rng.hpp"

namespace spikegh {

// GIG(lambda, gamma, delta): density proportional to
//   w^{lambda-1} exp(-1/2 (delta^2/w + gamma^2 w)),  w > 0
struct GigParams {
  double lambda;
  double gamma;
  double delta;
};

// GH(lambda, alpha, beta, delta, mu) with derived gamma^2 = alpha^2 - beta^2
struct GhParams {
  double lambda;
  double alpha;
  double beta;
  double delta;
  double mu;

  double gamma() const;
};

struct FittedGhApprox {
  GhParams nu_N;
  std::uint64_t fit_sample_count = 0;
  std::uint64_t fit_seed = 0;
  double fit_kl_estimate = 0.0;
};

// throw std::domain_error on invariant violations
void validate(const GigParams& p);
void validate(const GhParams& p);

double gig_log_pdf(const GigParams& p, double w);
double gig_sample(const GigParams& p, RandomStream& rng);
double gig_moment(const GigParams& p, double power);

double gh_log_pdf(const GhParams& p, double x);
double gh_sample(const GhParams& p, RandomStream& rng);

// law of aX + b for X ~ GH(p), a != 0
GhParams gh_affine(const GhParams& p, double a, double b);

// scaled amplitude prior and its mixing distribution:
// GH_N(sigma_x^2) = gh_affine(nu_N, sigma_x, 0),
// GIG_N(sigma_x^2) = GIG(lambda_N, gamma_N/sigma_x, delta_N*sigma_x)
std::pair<GhParams, GigParams> scale_gh_prior(const GhParams& nu_N,
                                              double sigma_x);

// exact draw from Normal(mean, std^2) truncated to [0, inf), efficient for
// arbitrarily negative mean
double truncnorm_sample(double mean, double std, RandomStream& rng);

// shared Gaussian helpers (stable in both tails)
double log_norm_pdf(double x, double mean, double var);
double norm_cdf(double z);
double log_norm_cdf(double z);

}  // namespace spikegh
