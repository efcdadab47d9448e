#pragma once

#include <Eigen/Dense>
#include <vector>

namespace countflow {

// Auto- and cross-correlations of a multivariate series at lags
// 0..max_lag, biased (divide by n) covariance estimator:
//   r_{ij}(h) = c_{ij}(h) / sqrt(c_{ii}(0) c_{jj}(0)),
//   c_{ij}(h) = n^{-1} sum_{t} (x_{i,t+h} - xbar_i)(x_{j,t} - xbar_j).
struct Correlogram {
  int max_lag = 0;
  // values[h] is the p x p matrix of r_{ij}(h).
  std::vector<Eigen::MatrixXd> values;
  // Two-sided white-noise band +/- 1.96 / sqrt(n).
  double band = 0.0;
};
Correlogram correlogram(const Eigen::MatrixXd& x, int max_lag);

// Cumulative periodogram of one series at the Fourier frequencies
// 2 pi k / n, k = 1..floor((n-1)/2); the mean (zero frequency) is
// removed. band_halfwidth is the Kolmogorov-Smirnov band 1.358/sqrt(m)
// at 95% or 1.628/sqrt(m) at 99%.
struct CumulativePeriodogram {
  Eigen::VectorXd frequency;   // omega_k
  Eigen::VectorXd cumulative;  // C_1..C_m
  double band_halfwidth = 0.0;
  // max_j |C_j - j/m|; the series is inside the band iff this is below
  // band_halfwidth.
  double max_deviation = 0.0;
  bool inside_band = false;
};
CumulativePeriodogram cumulative_periodogram(const Eigen::VectorXd& x, double level = 0.95);

// Per-component mean, variance (divide by n-1) and their ratio.
struct OverdispersionSummary {
  Eigen::VectorXd mean;
  Eigen::VectorXd variance;
  Eigen::VectorXd ratio;
};
OverdispersionSummary overdispersion_summary(const Eigen::MatrixXd& x);

}  // namespace countflow
