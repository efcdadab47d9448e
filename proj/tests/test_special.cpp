#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "countflow/special.hpp"

using namespace countflow;

namespace {

// Independent normal cdf built on the C math library, good to full
// double precision for the bisection oracle below.
double std_norm_cdf(double x) { return 0.5 * std::erfc(-x * 0.7071067811865475244); }

// Quantile by bisection against std_norm_cdf; the interval [-40, 40]
// covers every p representable away from 0 and 1. Upper-half p is
// reflected (1 - p is exact there) because the cdf saturates near 1 in
// double precision and bisection loses ~1e-8 of x resolution.
double quantile_bisect(double p) {
  if (p > 0.5) return -quantile_bisect(1.0 - p);
  double lo = -40.0, hi = 40.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (std_norm_cdf(mid) < p ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_SUITE("special") {

TEST_CASE("erfc matches the C library across all three branches") {
  const std::vector<double> xs = {-26.0, -8.0,  -5.9, -4.0, -2.0, -1.0, -0.5, -0.46875,
                                  -0.1,  0.0,   0.1,  0.3,  0.46875, 0.5, 1.0, 1.5,
                                  2.0,   2.5,   3.0,  4.0,  4.5,  5.0,  5.9, 6.0,
                                  8.0,   10.0,  13.0, 20.0, 26.0, 26.5};
  for (const double x : xs) {
    const double ours = erfc_cody(x);
    const double ref = std::erfc(x);
    if (ref == 0.0) {
      CHECK(ours == 0.0);
    } else {
      CHECK(std::abs(ours - ref) / std::abs(ref) < 1e-12);
    }
  }
}

TEST_CASE("erf matches the C library") {
  for (double x = -6.0; x <= 6.0; x += 0.173) {
    CHECK(std::abs(erf_cody(x) - std::erf(x)) < 1e-14);
  }
  CHECK(erf_cody(0.0) == 0.0);
}

TEST_CASE("normal cdf basics") {
  CHECK(norm_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(norm_cdf(1.959963984540054) == doctest::Approx(0.975).epsilon(1e-12));
  CHECK(norm_cdf(-1.959963984540054) == doctest::Approx(0.025).epsilon(1e-12));
  // Symmetry.
  for (double x = 0.1; x < 8.0; x += 0.37) {
    CHECK(norm_cdf(x) + norm_cdf(-x) == doctest::Approx(1.0).epsilon(1e-14));
  }
}

TEST_CASE("normal quantile against a bisection oracle") {
  const std::vector<double> ps = {1e-12, 1e-9, 1e-6, 1e-4, 0.01, 0.025, 0.1,  0.25, 0.5,
                                  0.75,  0.9,  0.975, 0.99, 0.9999, 1.0 - 1e-6, 1.0 - 1e-9};
  for (const double p : ps) {
    const double ref = quantile_bisect(p);
    const double ours = norm_quantile(p);
    CHECK(std::abs(ours - ref) < 1e-9 * std::max(1.0, std::abs(ref)));
  }
  CHECK(norm_quantile(0.5) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(norm_quantile(0.975) == doctest::Approx(1.959963984540054).epsilon(1e-13));
  CHECK(norm_quantile(0.01) == doctest::Approx(-2.3263478740408408).epsilon(1e-13));
}

TEST_CASE("quantile and cdf invert each other") {
  for (double p = 0.001; p < 1.0; p += 0.0173) {
    CHECK(norm_cdf(norm_quantile(p)) == doctest::Approx(p).epsilon(1e-12));
  }
  // Deep tails, where cdf -> quantile is the stable direction.
  for (const double x : {-8.0, -5.0, -3.0, 3.0}) {
    CHECK(norm_quantile(norm_cdf(x)) == doctest::Approx(x).epsilon(1e-9));
  }
}

TEST_CASE("quantile rejects p outside (0, 1)") {
  CHECK_THROWS_AS((void)norm_quantile(0.0), std::domain_error);
  CHECK_THROWS_AS((void)norm_quantile(1.0), std::domain_error);
  CHECK_THROWS_AS((void)norm_quantile(-0.2), std::domain_error);
  CHECK_THROWS_AS((void)norm_quantile(1.2), std::domain_error);
}

TEST_CASE("normal pdf") {
  CHECK(norm_pdf(0.0) == doctest::Approx(0.3989422804014327).epsilon(1e-15));
  CHECK(norm_pdf(1.0) == doctest::Approx(0.24197072451914337).epsilon(1e-14));
  CHECK(norm_pdf(-1.0) == norm_pdf(1.0));
}

}  // TEST_SUITE
