#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "quad.hpp"

namespace oracle {

template <class F>
double integrate_lower(const F& f, double b, double rel_tol = 1e-12) {
  return integrate_upper([&](double u) { return f(b - u); }, 0.0, rel_tol);
}

// Kolmogorov-Smirnov distance between the empirical law of `samples` and the
// law whose unnormalized density is `pdf` on (support_lo, inf) or on the whole
// line when real_line is true. The cdf is accumulated with one Gauss-Kronrod
// panel per inter-sample gap, plus adaptive tail integrals, and normalized by
// the grand total so small normalization error in pdf cancels out.
template <class Pdf>
double ks_distance(const Pdf& pdf, std::vector<double> samples,
                   bool real_line, double support_lo = 0.0) {
  std::sort(samples.begin(), samples.end());
  const std::size_t n = samples.size();
  std::vector<double> cum(n);
  double acc = real_line ? integrate_lower(pdf, samples.front(), 1e-10)
                         : integrate(pdf, support_lo, samples.front(), 1e-10);
  cum[0] = acc;
  for (std::size_t i = 1; i < n; ++i) {
    acc += detail::gk15(pdf, samples[i - 1], samples[i]).value;
    cum[i] = acc;
  }
  const double total = acc + integrate_upper(pdf, samples.back(), 1e-10);
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double F = cum[i] / total;
    d = std::max(d, F - static_cast<double>(i) / n);
    d = std::max(d, static_cast<double>(i + 1) / n - F);
  }
  return d;
}

inline double ks_critical_1pct(std::size_t n) {
  return 1.6276 / std::sqrt(static_cast<double>(n));
}

inline double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double var_of(const std::vector<double>& v) {
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

}  // namespace oracle
