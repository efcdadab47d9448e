#include "countflow/diagnostics.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace countflow {

Correlogram correlogram(const Eigen::MatrixXd& x, int max_lag) {
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  if (n < 2 || p < 1) throw std::invalid_argument("correlogram: series too short");
  if (max_lag < 0 || max_lag >= n) {
    throw std::invalid_argument("correlogram: max_lag must lie in [0, n)");
  }
  const Eigen::MatrixXd centered = x.rowwise() - x.colwise().mean();
  Eigen::VectorXd c0(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    c0(j) = centered.col(j).squaredNorm() / static_cast<double>(n);
    if (c0(j) <= 0.0) {
      throw std::invalid_argument("correlogram: column " + std::to_string(j) +
                                  " has zero variance");
    }
  }

  Correlogram out;
  out.max_lag = max_lag;
  out.band = 1.96 / std::sqrt(static_cast<double>(n));
  out.values.reserve(static_cast<std::size_t>(max_lag) + 1);
  for (int h = 0; h <= max_lag; ++h) {
    Eigen::MatrixXd r(p, p);
    const Eigen::Index m = n - h;
    for (Eigen::Index i = 0; i < p; ++i) {
      for (Eigen::Index j = 0; j < p; ++j) {
        const double c =
            centered.col(i).tail(m).dot(centered.col(j).head(m)) / static_cast<double>(n);
        r(i, j) = c / std::sqrt(c0(i) * c0(j));
      }
    }
    out.values.push_back(std::move(r));
  }
  return out;
}

CumulativePeriodogram cumulative_periodogram(const Eigen::VectorXd& x, double level) {
  const Eigen::Index n = x.size();
  if (n < 4) throw std::invalid_argument("cumulative_periodogram: series too short");
  double constant;
  if (level == 0.95) {
    constant = 1.358;
  } else if (level == 0.99) {
    constant = 1.628;
  } else {
    throw std::invalid_argument("cumulative_periodogram: level must be 0.95 or 0.99");
  }
  const Eigen::Index m = (n - 1) / 2;
  if (m < 1) throw std::invalid_argument("cumulative_periodogram: no Fourier frequencies");

  const Eigen::VectorXd centered = x.array() - x.mean();
  CumulativePeriodogram out;
  out.frequency.resize(m);
  out.cumulative.resize(m);

  // Goertzel-style recurrence per frequency; O(n m) but dependency-free
  // and exact enough for the band test.
  Eigen::VectorXd intensity(m);
  double total = 0.0;
  for (Eigen::Index k = 1; k <= m; ++k) {
    const double w = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n);
    const double coeff = 2.0 * std::cos(w);
    double s_prev = 0.0, s_prev2 = 0.0;
    for (Eigen::Index t = 0; t < n; ++t) {
      const double s = centered(t) + coeff * s_prev - s_prev2;
      s_prev2 = s_prev;
      s_prev = s;
    }
    const double power =
        s_prev * s_prev + s_prev2 * s_prev2 - coeff * s_prev * s_prev2;
    intensity(k - 1) = power;
    total += power;
    out.frequency(k - 1) = w;
  }
  if (total <= 0.0) throw std::invalid_argument("cumulative_periodogram: degenerate series");

  double acc = 0.0;
  double max_dev = 0.0;
  for (Eigen::Index j = 0; j < m; ++j) {
    acc += intensity(j);
    const double c = acc / total;
    out.cumulative(j) = c;
    const double dev = std::fabs(c - static_cast<double>(j + 1) / static_cast<double>(m));
    if (dev > max_dev) max_dev = dev;
  }
  out.band_halfwidth = constant / std::sqrt(static_cast<double>(m));
  out.max_deviation = max_dev;
  out.inside_band = max_dev < out.band_halfwidth;
  return out;
}

OverdispersionSummary overdispersion_summary(const Eigen::MatrixXd& x) {
  const Eigen::Index n = x.rows();
  const Eigen::Index p = x.cols();
  if (n < 2) throw std::invalid_argument("overdispersion_summary: need at least two rows");
  OverdispersionSummary out;
  out.mean = x.colwise().mean();
  out.variance.resize(p);
  out.ratio.resize(p);
  for (Eigen::Index j = 0; j < p; ++j) {
    const double v =
        (x.col(j).array() - out.mean(j)).square().sum() / static_cast<double>(n - 1);
    out.variance(j) = v;
    out.ratio(j) = out.mean(j) != 0.0
                       ? v / out.mean(j)
                       : std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

}  // namespace countflow
