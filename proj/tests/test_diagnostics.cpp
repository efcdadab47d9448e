#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <stdexcept>

#include "countflow/diagnostics.hpp"
#include "countflow/rng.hpp"

using namespace countflow;

TEST_SUITE("diagnostics") {

TEST_CASE("correlogram hand oracle") {
  Eigen::MatrixXd x(3, 1);
  x << 1.0, 2.0, 4.0;
  const Correlogram cg = correlogram(x, 1);
  REQUIRE(cg.values.size() == 2);
  CHECK(cg.values[0](0, 0) == doctest::Approx(1.0).epsilon(1e-14));
  // mean 7/3, biased c0 = 14/9, c1 = -1/27, r1 = -1/42.
  CHECK(cg.values[1](0, 0) == doctest::Approx(-1.0 / 42.0).epsilon(1e-12));
  CHECK(cg.band == doctest::Approx(1.96 / std::sqrt(3.0)).epsilon(1e-14));
}

TEST_CASE("lag-0 has unit diagonal and symmetric cross terms") {
  Xoshiro256pp rng(3);
  Eigen::MatrixXd x(400, 2);
  for (Eigen::Index t = 0; t < 400; ++t) {
    x(t, 0) = rng.normal();
    x(t, 1) = 0.6 * x(t, 0) + rng.normal();
  }
  const Correlogram cg = correlogram(x, 5);
  CHECK(cg.values[0](0, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(cg.values[0](1, 1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(cg.values[0](0, 1) == doctest::Approx(cg.values[0](1, 0)).epsilon(1e-12));
  CHECK(cg.values[0](0, 1) > 0.3);
}

TEST_CASE("cross-correlation convention: r_ij(h) pairs x_i,t+h with x_j,t") {
  Xoshiro256pp rng(4);
  const Eigen::Index n = 2000;
  Eigen::MatrixXd x(n, 2);
  Eigen::VectorXd e(n + 1);
  for (Eigen::Index t = 0; t < n + 1; ++t) e(t) = rng.normal();
  for (Eigen::Index t = 0; t < n; ++t) {
    x(t, 0) = e(t + 1);  // x1 leads
    x(t, 1) = e(t);      // x2 lags one step behind
  }
  const Correlogram cg = correlogram(x, 2);
  // x2 at time t+1 equals x1 at time t, so r_21(1) is near one.
  CHECK(cg.values[1](1, 0) == doctest::Approx(1.0).epsilon(0.02));
  CHECK(std::fabs(cg.values[1](0, 1)) < 0.1);
}

TEST_CASE("white noise stays inside the correlogram band") {
  Xoshiro256pp rng(5);
  Eigen::MatrixXd x(4000, 1);
  for (Eigen::Index t = 0; t < 4000; ++t) x(t, 0) = rng.normal();
  const Correlogram cg = correlogram(x, 20);
  int outside = 0;
  for (int h = 1; h <= 20; ++h) {
    if (std::fabs(cg.values[static_cast<std::size_t>(h)](0, 0)) > cg.band) ++outside;
  }
  CHECK(outside <= 3);
}

TEST_CASE("constant series is rejected") {
  Eigen::MatrixXd x = Eigen::MatrixXd::Constant(50, 1, 2.0);
  CHECK_THROWS_AS((void)correlogram(x, 3), std::invalid_argument);
}

TEST_CASE("goertzel powers agree with a direct transform") {
  Xoshiro256pp rng(6);
  const Eigen::Index n = 17;
  Eigen::VectorXd x(n);
  for (Eigen::Index t = 0; t < n; ++t) x(t) = rng.uniform() * 3.0;
  const Eigen::VectorXd centered = x.array() - x.mean();

  const CumulativePeriodogram cp = cumulative_periodogram(x);
  const Eigen::Index m = (n - 1) / 2;
  REQUIRE(cp.cumulative.size() == m);

  // Direct DFT powers at the Fourier frequencies.
  Eigen::VectorXd power(m);
  for (Eigen::Index k = 1; k <= m; ++k) {
    std::complex<double> acc(0.0, 0.0);
    const double w = 2.0 * M_PI * static_cast<double>(k) / static_cast<double>(n);
    for (Eigen::Index t = 0; t < n; ++t) {
      acc += centered(t) * std::polar(1.0, -w * static_cast<double>(t));
    }
    power(k - 1) = std::norm(acc);
  }
  double total = power.sum();
  double running = 0.0;
  for (Eigen::Index k = 0; k < m; ++k) {
    running += power(k);
    CHECK(cp.cumulative(k) == doctest::Approx(running / total).epsilon(1e-9));
    CHECK(cp.frequency(k) ==
          doctest::Approx(2.0 * M_PI * static_cast<double>(k + 1) / static_cast<double>(n))
              .epsilon(1e-12));
  }
}

TEST_CASE("pure sine concentrates the cumulative periodogram") {
  const Eigen::Index n = 256;
  Eigen::VectorXd x(n);
  const double w = 2.0 * M_PI * 90.0 / static_cast<double>(n);
  for (Eigen::Index t = 0; t < n; ++t) x(t) = std::sin(w * static_cast<double>(t));
  const CumulativePeriodogram cp = cumulative_periodogram(x);
  CHECK_FALSE(cp.inside_band);
  CHECK(cp.max_deviation > 0.5);
  // All mass arrives at frequency index 90.
  CHECK(cp.cumulative(88) < 0.01);
  CHECK(cp.cumulative(89) > 0.99);
}

TEST_CASE("white noise stays inside the 95% band") {
  Xoshiro256pp rng(7);
  Eigen::VectorXd x(2048);
  for (Eigen::Index t = 0; t < 2048; ++t) x(t) = rng.normal();
  const CumulativePeriodogram cp = cumulative_periodogram(x, 0.95);
  CHECK(cp.inside_band);
  CHECK(cp.band_halfwidth == doctest::Approx(1.358 / std::sqrt(1023.0)).epsilon(1e-12));
}

TEST_CASE("99% band is wider than 95%") {
  Xoshiro256pp rng(8);
  Eigen::VectorXd x(200);
  for (Eigen::Index t = 0; t < 200; ++t) x(t) = rng.normal();
  const auto cp95 = cumulative_periodogram(x, 0.95);
  const auto cp99 = cumulative_periodogram(x, 0.99);
  CHECK(cp99.band_halfwidth > cp95.band_halfwidth);
  CHECK(cp99.band_halfwidth == doctest::Approx(1.628 / std::sqrt(99.0)).epsilon(1e-12));
  CHECK_THROWS_AS((void)cumulative_periodogram(x, 0.5), std::invalid_argument);
}

TEST_CASE("overdispersion hand oracle") {
  Eigen::MatrixXd x(4, 1);
  x << 0.0, 1.0, 2.0, 3.0;
  const OverdispersionSummary od = overdispersion_summary(x);
  CHECK(od.mean(0) == doctest::Approx(1.5).epsilon(1e-14));
  CHECK(od.variance(0) == doctest::Approx(5.0 / 3.0).epsilon(1e-14));
  CHECK(od.ratio(0) == doctest::Approx(10.0 / 9.0).epsilon(1e-14));
}

TEST_CASE("poisson draws are near equidispersion") {
  Xoshiro256pp rng(9);
  Eigen::MatrixXd x(20000, 1);
  // Inverse-transform Poisson(3) via exponential waits.
  for (Eigen::Index t = 0; t < 20000; ++t) {
    double acc = 0.0;
    int k = -1;
    while (acc <= 1.0) {
      acc += rng.exponential() / 3.0;
      ++k;
    }
    x(t, 0) = k;
  }
  const OverdispersionSummary od = overdispersion_summary(x);
  CHECK(od.ratio(0) == doctest::Approx(1.0).epsilon(0.05));
  CHECK(od.mean(0) == doctest::Approx(3.0).epsilon(0.03));
}

}  // TEST_SUITE
