#include "spikegh/distributions.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "spikegh/specfun.hpp"

namespace spikegh {

namespace {

constexpr double kLogTwoPi = 1.8378770664093454835606594728112353;
constexpr double kInvSqrt2 = 0.7071067811865475244008443621048490;
constexpr double kInf = std::numeric_limits<double>::infinity();

// unnormalized log-density of the standardized two-parameter form,
// g(x) = x^{lambda-1} exp(-omega/2 (x + 1/x))
double std_log_kernel(double lambda, double omega, double x) {
  return (lambda - 1.0) * std::log(x) - 0.5 * omega * (x + 1.0 / x);
}

// mode of the standardized kernel, written to stay accurate for lambda < 1
double std_mode(double lambda, double omega) {
  double lm1 = lambda - 1.0;
  if (lm1 >= 0.0) {
    return (lm1 + std::sqrt(lm1 * lm1 + omega * omega)) / omega;
  }
  return omega / (std::sqrt(lm1 * lm1 + omega * omega) - lm1);
}

// ratio-of-uniforms without mode shift; valid whenever the kernel is bounded,
// used for moderate parameters
double sample_rou_noshift(double lambda, double omega, RandomStream& rng) {
  double m = std_mode(lambda, omega);
  double lgm = std_log_kernel(lambda, omega, m);
  double lp1 = lambda + 1.0;
  double xu = (lp1 + std::sqrt(lp1 * lp1 + omega * omega)) / omega;
  double uplus = xu * std::exp(0.5 * (std_log_kernel(lambda, omega, xu) - lgm));
  for (;;) {
    double u = uplus * rng.uniform();
    double v = rng.uniform();
    if (v <= 0.0) continue;
    double x = u / v;
    if (2.0 * std::log(v) <= std_log_kernel(lambda, omega, x) - lgm) {
      return x;
    }
  }
}

// mode-relocated ratio-of-uniforms for large lambda or omega; the bounding
// rectangle extrema solve a cubic handled by the trigonometric Cardano form
double sample_rou_shift(double lambda, double omega, RandomStream& rng) {
  double m = std_mode(lambda, omega);
  double lgm = std_log_kernel(lambda, omega, m);

  double a = -(m + 2.0 * (lambda + 1.0) / omega);
  double b = 2.0 * (lambda - 1.0) * m / omega - 1.0;
  double c = m;

  double p = b - a * a / 3.0;
  double q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
  double r = std::sqrt(-p / 3.0);
  double cosarg = -(q / 2.0) / (r * r * r);
  if (cosarg > 1.0) cosarg = 1.0;
  if (cosarg < -1.0) cosarg = -1.0;
  double phi = std::acos(cosarg);

  double xlo = m;
  double xhi = m;
  for (int k = 0; k < 3; ++k) {
    double root = 2.0 * r * std::cos((phi - 2.0 * M_PI * k) / 3.0) - a / 3.0;
    if (root > m) xhi = root;
    if (root > 0.0 && root < m) xlo = root;
  }

  double uminus = (xlo - m) * std::exp(0.5 * (std_log_kernel(lambda, omega, xlo) - lgm));
  double uplus = (xhi - m) * std::exp(0.5 * (std_log_kernel(lambda, omega, xhi) - lgm));

  for (;;) {
    double u = rng.uniform(uminus, uplus);
    double v = rng.uniform();
    if (v <= 0.0) continue;
    double x = u / v + m;
    if (x <= 0.0) continue;
    if (2.0 * std::log(v) <= std_log_kernel(lambda, omega, x) - lgm) {
      return x;
    }
  }
}

// three-piece rejection envelope for 0 <= lambda < 1 with small omega, where
// the kernel has a pole-like spike near zero and ratio-of-uniforms degrades:
//   (0, x0]        constant hat at the kernel maximum
//   [x0, 2/omega]  power hat  exp(-omega) x^{lambda-1}
//   [xb, inf)      exponential hat x0b^{lambda-1} exp(-omega x / 2)
double sample_three_piece(double lambda, double omega, RandomStream& rng) {
  double m = std_mode(lambda, omega);
  double x0 = omega / (1.0 - lambda);
  double xtail = 2.0 / omega;

  double lk0 = std_log_kernel(lambda, omega, m);
  double area0 = std::exp(lk0) * x0;

  double area1 = 0.0;
  double span1 = 0.0;  // expm1(lambda * log(xtail/x0)), reused by inversion
  double logratio1 = 0.0;
  if (x0 < xtail) {
    logratio1 = std::log(xtail / x0);
    if (lambda > 0.0) {
      span1 = std::expm1(lambda * logratio1);
      area1 = std::exp(-omega + lambda * std::log(x0)) * span1 / lambda;
    } else {
      area1 = std::exp(-omega) * logratio1;
    }
  }

  double xb = std::max(x0, xtail);
  double lk2 = (lambda - 1.0) * std::log(xb);
  double area2 = std::exp(lk2 - 0.5 * omega * xb) * 2.0 / omega;

  double total = area0 + area1 + area2;
  for (;;) {
    double u = rng.uniform() * total;
    double x;
    double lhat;
    if (u < area0) {
      x = x0 * u / area0;
      if (x <= 0.0) continue;
      lhat = lk0;
    } else if (u < area0 + area1) {
      double f = rng.uniform();
      if (lambda > 0.0) {
        x = x0 * std::exp(std::log1p(f * span1) / lambda);
      } else {
        x = x0 * std::exp(f * logratio1);
      }
      lhat = -omega + (lambda - 1.0) * std::log(x);
    } else {
      x = xb + rng.exponential() * 2.0 / omega;
      lhat = lk2 - 0.5 * omega * x;
    }
    double lu = std::log(rng.uniform());
    if (lu + lhat <= std_log_kernel(lambda, omega, x)) {
      return x;
    }
  }
}

double sample_standard_gig(double lambda, double omega, RandomStream& rng) {
  if (lambda > 2.0 || omega > 3.0) {
    return sample_rou_shift(lambda, omega, rng);
  }
  if (lambda >= 1.0 - 2.25 * omega * omega || omega > 0.2) {
    return sample_rou_noshift(lambda, omega, rng);
  }
  return sample_three_piece(lambda, omega, rng);
}

}  // namespace

double GhParams::gamma() const {
  return std::sqrt((alpha - beta) * (alpha + beta));
}

void validate(const GigParams& p) {
  if (!std::isfinite(p.lambda) || !std::isfinite(p.gamma) ||
      !std::isfinite(p.delta) || p.gamma <= 0.0 || p.delta <= 0.0) {
    throw std::domain_error("gig parameters require finite lambda and gamma > 0, delta > 0");
  }
}

void validate(const GhParams& p) {
  if (!std::isfinite(p.lambda) || !std::isfinite(p.alpha) ||
      !std::isfinite(p.beta) || !std::isfinite(p.delta) ||
      !std::isfinite(p.mu) || p.delta <= 0.0 ||
      p.alpha <= std::abs(p.beta)) {
    throw std::domain_error("gh parameters require finite values, delta > 0 and alpha > |beta|");
  }
}

double gig_log_pdf(const GigParams& p, double w) {
  validate(p);
  if (!(w > 0.0)) return -kInf;
  double omega = p.delta * p.gamma;
  double lognorm = p.lambda * (std::log(p.gamma) - std::log(p.delta)) -
                   std::log(2.0) - log_bessel_k(p.lambda, omega);
  return lognorm + (p.lambda - 1.0) * std::log(w) -
         0.5 * (p.delta * p.delta / w + p.gamma * p.gamma * w);
}

double gig_sample(const GigParams& p, RandomStream& rng) {
  validate(p);
  double omega = p.delta * p.gamma;
  double scale = p.delta / p.gamma;
  if (p.lambda >= 0.0) {
    return scale * sample_standard_gig(p.lambda, omega, rng);
  }
  return scale / sample_standard_gig(-p.lambda, omega, rng);
}

double gig_moment(const GigParams& p, double power) {
  validate(p);
  if (power == 0.0) return 1.0;
  double omega = p.delta * p.gamma;
  double logscale = power * (std::log(p.delta) - std::log(p.gamma));
  if (power == 1.0) {
    return std::exp(logscale + log_bessel_k_ratio(p.lambda, omega));
  }
  return std::exp(logscale + log_bessel_k(p.lambda + power, omega) -
                  log_bessel_k(p.lambda, omega));
}

double gh_log_pdf(const GhParams& p, double x) {
  validate(p);
  if (!std::isfinite(x)) return -kInf;
  double g = p.gamma();
  double dx = x - p.mu;
  double q = std::hypot(p.delta, dx);
  return p.lambda * (std::log(g) - std::log(p.delta)) - 0.5 * kLogTwoPi -
         log_bessel_k(p.lambda, p.delta * g) +
         log_bessel_k(p.lambda - 0.5, p.alpha * q) +
         (p.lambda - 0.5) * (std::log(q) - std::log(p.alpha)) + p.beta * dx;
}

double gh_sample(const GhParams& p, RandomStream& rng) {
  validate(p);
  double w = gig_sample({p.lambda, p.gamma(), p.delta}, rng);
  return rng.normal(p.mu + p.beta * w, std::sqrt(w));
}

GhParams gh_affine(const GhParams& p, double a, double b) {
  validate(p);
  if (a == 0.0 || !std::isfinite(a) || !std::isfinite(b)) {
    throw std::domain_error("gh affine map requires finite b and nonzero finite a");
  }
  double s = std::abs(a);
  return {p.lambda, p.alpha / s, p.beta / a, p.delta * s, a * p.mu + b};
}

std::pair<GhParams, GigParams> scale_gh_prior(const GhParams& nu_N,
                                              double sigma_x) {
  validate(nu_N);
  if (!(sigma_x > 0.0) || !std::isfinite(sigma_x)) {
    throw std::domain_error("prior scaling requires sigma_x > 0");
  }
  GhParams amp = gh_affine(nu_N, sigma_x, 0.0);
  GigParams mix{nu_N.lambda, nu_N.gamma() / sigma_x, nu_N.delta * sigma_x};
  return {amp, mix};
}

double truncnorm_sample(double mean, double std, RandomStream& rng) {
  if (!(std > 0.0) || !std::isfinite(std) || !std::isfinite(mean)) {
    throw std::domain_error("truncated normal requires finite mean and std > 0");
  }
  double a = -mean / std;
  double z;
  if (a < 0.4) {
    do {
      z = rng.normal();
    } while (z < a);
  } else {
    // exponential envelope with the optimal rate, accepts at a rate bounded
    // away from zero uniformly in a
    double rate = 0.5 * (a + std::sqrt(a * a + 4.0));
    for (;;) {
      z = a + rng.exponential() / rate;
      double d = z - rate;
      if (std::log(rng.uniform()) <= -0.5 * d * d) break;
    }
  }
  double x = mean + std * z;
  return x > 0.0 ? x : 0.0;
}

double log_norm_pdf(double x, double mean, double var) {
  double d = x - mean;
  return -0.5 * (kLogTwoPi + std::log(var) + d * d / var);
}

double norm_cdf(double z) {
  return 0.5 * std::erfc(-z * kInvSqrt2);
}

double log_norm_cdf(double z) {
  if (z > -30.0) {
    return std::log(0.5 * std::erfc(-z * kInvSqrt2));
  }
  double zz = z * z;
  double inv = 1.0 / zz;
  double series = 1.0 + inv * (-1.0 + inv * (3.0 + inv * (-15.0 + inv * 105.0)));
  return -0.5 * zz - 0.5 * kLogTwoPi - std::log(-z) + std::log(series);
}

}  // namespace spikegh
