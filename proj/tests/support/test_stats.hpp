#pragma once

// Statistical helpers for the test suites: chi-square tail areas via the
// regularized incomplete gamma function, Kolmogorov-Smirnov utilities,
// and a Poisson goodness-of-fit test. Independent of the library under
// test on purpose; everything here leans on the C math library only.

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

namespace teststats {

// Lower regularized incomplete gamma P(a, x) by series expansion.
inline double gamma_p_series(double a, double x) {
  double ap = a;
  double sum = 1.0 / a;
  double del = sum;
  for (int i = 0; i < 500; ++i) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::fabs(del) < std::fabs(sum) * 1e-15) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Upper regularized incomplete gamma Q(a, x) by Lentz continued fraction.
inline double gamma_q_cf(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 500; ++i) {
    const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-15) break;
  }
  return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

inline double gamma_q(double a, double x) {
  if (x < 0.0 || a <= 0.0) throw std::invalid_argument("gamma_q: bad arguments");
  if (x == 0.0) return 1.0;
  if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
  return gamma_q_cf(a, x);
}

// Survival function of the chi-square distribution with df degrees.
inline double chi2_sf(double x, double df) { return gamma_q(0.5 * df, 0.5 * x); }

// Kolmogorov limit tail Q(lambda) = 2 sum_j (-1)^{j-1} exp(-2 j^2 lambda^2).
inline double kolmogorov_q(double lambda) {
  if (lambda <= 0.0) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int j = 1; j <= 100; ++j) {
    const double term = std::exp(-2.0 * j * j * lambda * lambda);
    sum += sign * term;
    if (term < 1e-12) break;
    sign = -sign;
  }
  return std::min(1.0, std::max(0.0, 2.0 * sum));
}

// One-sample KS statistic of data against the cdf values supplied for
// each observation (i.e. u_i = F(x_i)).
inline double ks_statistic(std::vector<double> u) {
  std::sort(u.begin(), u.end());
  const double n = static_cast<double>(u.size());
  double d = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double hi = (static_cast<double>(i) + 1.0) / n - u[i];
    const double lo = u[i] - static_cast<double>(i) / n;
    d = std::max(d, std::max(hi, lo));
  }
  return d;
}

// Asymptotic p-value of the one-sample KS test.
inline double ks_pvalue(const std::vector<double>& u) {
  const double n = static_cast<double>(u.size());
  return kolmogorov_q(std::sqrt(n) * ks_statistic(u));
}

inline double poisson_pmf(int k, double lambda) {
  return std::exp(-lambda + k * std::log(lambda) - std::lgamma(k + 1.0));
}

// Chi-square goodness of fit of integer draws against Poisson(lambda).
// Cells are consecutive counts, with the two tails pooled so that every
// expected cell count is at least 5. Returns the p-value.
inline double poisson_gof_pvalue(const std::vector<int>& draws, double lambda) {
  if (draws.empty()) throw std::invalid_argument("poisson_gof: no draws");
  const double n = static_cast<double>(draws.size());
  std::map<int, int> hist;
  for (const int k : draws) ++hist[k];
  const int kmax = hist.rbegin()->first;

  // Pool cells from both ends until expected counts reach 5.
  std::vector<double> expected;
  std::vector<double> observed;
  double exp_acc = 0.0, obs_acc = 0.0, tail_mass = 1.0;
  for (int k = 0; k <= kmax; ++k) {
    const double pk = poisson_pmf(k, lambda);
    tail_mass -= pk;
    exp_acc += n * pk;
    const auto it = hist.find(k);
    obs_acc += it == hist.end() ? 0.0 : it->second;
    if (exp_acc >= 5.0) {
      expected.push_back(exp_acc);
      observed.push_back(obs_acc);
      exp_acc = obs_acc = 0.0;
    }
  }
  // Everything above kmax plus any unfinished cell becomes the tail cell.
  exp_acc += n * std::max(0.0, tail_mass);
  if (expected.empty() || exp_acc >= 5.0) {
    expected.push_back(exp_acc);
    observed.push_back(obs_acc);
  } else {
    expected.back() += exp_acc;
    observed.back() += obs_acc;
  }
  if (expected.size() < 2) throw std::invalid_argument("poisson_gof: too few cells");

  double stat = 0.0;
  for (std::size_t c = 0; c < expected.size(); ++c) {
    const double diff = observed[c] - expected[c];
    stat += diff * diff / expected[c];
  }
  return chi2_sf(stat, static_cast<double>(expected.size() - 1));
}

inline double sample_mean(const std::vector<double>& x) {
  double s = 0.0;
  for (const double v : x) s += v;
  return s / static_cast<double>(x.size());
}

inline double sample_variance(const std::vector<double>& x) {
  const double m = sample_mean(x);
  double s = 0.0;
  for (const double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size() - 1);
}

}  // namespace teststats
