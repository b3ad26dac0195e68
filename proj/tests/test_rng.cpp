#include <doctest.h>

#include <cmath>
#include <vector>

#include "spikegh/rng.hpp"

using spikegh::RandomStream;

namespace {

struct Moments {
  double mean;
  double var;
};

template <class Draw>
Moments sample_moments(Draw draw, int n) {
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = draw();
    s += x;
    s2 += x * x;
  }
  const double m = s / n;
  return {m, s2 / n - m * m};
}

}  // namespace

TEST_SUITE("rng") {

TEST_CASE("same seed reproduces the stream, different seed diverges") {
  RandomStream a(42), b(42), c(43);
  bool all_equal = true, any_diff = false;
  for (int i = 0; i < 1000; ++i) {
    const double x = a.uniform();
    all_equal = all_equal && (x == b.uniform());
    any_diff = any_diff || (x != c.uniform());
  }
  CHECK(all_equal);
  CHECK(any_diff);
}

TEST_CASE("uniform stays in [0,1) and matches its first two moments") {
  RandomStream r(7);
  const int n = 200000;
  bool in_range = true;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    in_range = in_range && u >= 0.0 && u < 1.0;
    s += u;
    s2 += u * u;
  }
  CHECK(in_range);
  const double mean = s / n;
  const double var = s2 / n - mean * mean;
  CHECK(std::fabs(mean - 0.5) < 4.0 * std::sqrt(1.0 / 12.0 / n));
  CHECK(std::fabs(var - 1.0 / 12.0) < 4.0 * 1.0 / 12.0 / std::sqrt(double(n)));
}

TEST_CASE("normal moments") {
  RandomStream r(11);
  const int n = 200000;
  const auto m = sample_moments([&] { return r.normal(); }, n);
  CHECK(std::fabs(m.mean) < 4.0 / std::sqrt(double(n)));
  CHECK(std::fabs(m.var - 1.0) < 4.0 * std::sqrt(2.0 / n));
}

TEST_CASE("exponential moments") {
  RandomStream r(13);
  const int n = 200000;
  const auto m = sample_moments([&] { return r.exponential(); }, n);
  CHECK(std::fabs(m.mean - 1.0) < 4.0 / std::sqrt(double(n)));
  CHECK(std::fabs(m.var - 1.0) < 4.0 * std::sqrt(8.0 / n));
}

TEST_CASE("gamma moments across shapes, including shape < 1") {
  RandomStream r(17);
  const int n = 200000;
  for (const double shape : {0.4, 1.0, 2.5, 9.0}) {
    for (const double scale : {0.5, 2.0}) {
      const auto m =
          sample_moments([&] { return r.gamma(shape, scale); }, n);
      const double true_mean = shape * scale;
      const double true_var = shape * scale * scale;
      const double se_mean = std::sqrt(true_var / n);
      CHECK(std::fabs(m.mean - true_mean) < 5.0 * se_mean);
      // var of the sample variance for gamma: (kurtosis excess 6/shape)
      const double var_of_var =
          true_var * true_var * (2.0 + 6.0 / shape) / n;
      CHECK(std::fabs(m.var - true_var) < 5.0 * std::sqrt(var_of_var));
    }
  }
}

TEST_CASE("beta moments") {
  RandomStream r(19);
  const int n = 200000;
  const double a = 2.0, b = 5.0;
  const auto m = sample_moments([&] { return r.beta(a, b); }, n);
  const double true_mean = a / (a + b);
  const double true_var = a * b / ((a + b) * (a + b) * (a + b + 1.0));
  CHECK(std::fabs(m.mean - true_mean) < 5.0 * std::sqrt(true_var / n));
  CHECK(std::fabs(m.var - true_var) < 0.05 * true_var);
}

TEST_CASE("inverse gamma matches 1/Gamma draw moments") {
  RandomStream r(23);
  const int n = 200000;
  const double shape = 4.0, rate = 3.0;
  const auto m =
      sample_moments([&] { return r.inverse_gamma(shape, rate); }, n);
  const double true_mean = rate / (shape - 1.0);
  const double true_var =
      rate * rate / ((shape - 1.0) * (shape - 1.0) * (shape - 2.0));
  CHECK(std::fabs(m.mean - true_mean) < 5.0 * std::sqrt(true_var / n));
}

TEST_CASE("uniform_int is unbiased over a small range") {
  RandomStream r(29);
  const int n = 120000;
  std::vector<int> counts(6, 0);
  for (int i = 0; i < n; ++i) counts[r.uniform_int(6)]++;
  for (int k = 0; k < 6; ++k) {
    const double expect = n / 6.0;
    CHECK(std::fabs(counts[k] - expect) < 5.0 * std::sqrt(expect));
  }
}

}  // TEST_SUITE
