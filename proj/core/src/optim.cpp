#include "countflow/optim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace countflow {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

AscentResult ascent_quasi_newton(const AscentObjective& objective,
                                 const Eigen::VectorXd& x0,
                                 const AscentOptions& opts) {
  const Eigen::Index dim = x0.size();
  AscentResult res;
  res.x = x0;
  Eigen::VectorXd grad(dim);
  Eigen::MatrixXd metric(dim, dim);
  double f = objective.value_grad_metric(res.x, grad, metric);
  if (!std::isfinite(f)) {
    throw std::runtime_error("ascent_quasi_newton: infeasible starting point");
  }

  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    res.iterations = iter;
    if (grad.lpNorm<Eigen::Infinity>() < opts.grad_tol) {
      res.status = AscentStatus::Converged;
      res.value = f;
      res.gradient = grad;
      return res;
    }

    // Newton-type direction; escalate a ridge until the metric factors
    // and the direction points uphill.
    Eigen::VectorXd dir;
    double ridge = 0.0;
    const double scale = std::max(1.0, metric.diagonal().cwiseAbs().maxCoeff());
    for (int attempt = 0; attempt < 12; ++attempt) {
      Eigen::MatrixXd m = metric;
      if (ridge > 0.0) m.diagonal().array() += ridge;
      Eigen::LLT<Eigen::MatrixXd> llt(m);
      if (llt.info() == Eigen::Success) {
        dir = llt.solve(grad);
        if (dir.allFinite() && grad.dot(dir) > 0.0) break;
      }
      dir.resize(0);
      ridge = ridge == 0.0 ? 1e-8 * scale : ridge * 100.0;
    }
    if (dir.size() == 0) dir = grad;  // last resort: steepest ascent

    const double slope = grad.dot(dir);
    // Near the optimum the whole predicted gain can sink below the resolution
    // of the objective in double precision; sufficient-decrease comparisons are
    // rounding noise there, so accept the undamped step whenever it does not
    // measurably lower the objective.
    const double noise =
        8.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::fabs(f));
    double step = 1.0;
    double f_new = kNegInf;
    Eigen::VectorXd x_new;
    bool accepted = false;
    for (int bt = 0; bt < opts.max_backtracks; ++bt) {
      x_new = res.x + step * dir;
      f_new = objective.value(x_new);
      if (std::isfinite(f_new) &&
          (f_new >= f + opts.armijo * step * slope ||
           (opts.armijo * step * slope <= noise && f_new >= f - noise))) {
        accepted = true;
        break;
      }
      step *= opts.backtrack;
    }
    if (!accepted) {
      res.status = AscentStatus::Stalled;
      res.value = f;
      res.gradient = grad;
      return res;
    }
    res.x = x_new;
    f = objective.value_grad_metric(res.x, grad, metric);
  }
  res.iterations = opts.max_iterations;
  res.status = AscentStatus::MaxIterations;
  res.value = f;
  res.gradient = grad;
  return res;
}

SimplexResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                          const Eigen::VectorXd& x0,
                          const SimplexOptions& opts) {
  const Eigen::Index n = x0.size();
  if (n == 0) throw std::invalid_argument("nelder_mead: empty start");
  const int m = static_cast<int>(n) + 1;

  std::vector<Eigen::VectorXd> pts(m, x0);
  std::vector<double> vals(m);
  for (int i = 1; i < m; ++i) {
    const double h = x0(i - 1) != 0.0 ? opts.initial_step * std::fabs(x0(i - 1))
                                      : opts.initial_step;
    pts[i](i - 1) += h;
  }
  for (int i = 0; i < m; ++i) vals[i] = f(pts[i]);

  std::vector<int> order(m);
  SimplexResult res;
  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    res.iterations = iter;
    for (int i = 0; i < m; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) { return vals[a] < vals[b]; });
    const int best = order[0], worst = order[m - 1], second = order[m - 2];

    if (std::fabs(vals[worst] - vals[best]) <=
        opts.tol * (std::fabs(vals[best]) + std::fabs(vals[worst]) + 1e-30)) {
      res.converged = true;
      res.x = pts[best];
      res.value = vals[best];
      return res;
    }

    Eigen::VectorXd centroid = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < m; ++i) {
      if (i == worst) continue;
      centroid += pts[i];
    }
    centroid /= static_cast<double>(m - 1);

    const Eigen::VectorXd reflected = centroid + (centroid - pts[worst]);
    const double fr = f(reflected);
    if (fr < vals[best]) {
      const Eigen::VectorXd expanded = centroid + 2.0 * (centroid - pts[worst]);
      const double fe = f(expanded);
      if (fe < fr) {
        pts[worst] = expanded;
        vals[worst] = fe;
      } else {
        pts[worst] = reflected;
        vals[worst] = fr;
      }
      continue;
    }
    if (fr < vals[second]) {
      pts[worst] = reflected;
      vals[worst] = fr;
      continue;
    }
    const Eigen::VectorXd contracted = centroid + 0.5 * (pts[worst] - centroid);
    const double fc = f(contracted);
    if (fc < vals[worst]) {
      pts[worst] = contracted;
      vals[worst] = fc;
      continue;
    }
    // Shrink toward the best vertex.
    for (int i = 0; i < m; ++i) {
      if (i == best) continue;
      pts[i] = pts[best] + 0.5 * (pts[i] - pts[best]);
      vals[i] = f(pts[i]);
    }
  }
  for (int i = 0; i < m; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) { return vals[a] < vals[b]; });
  res.x = pts[order[0]];
  res.value = vals[order[0]];
  res.converged = false;
  return res;
}

}  // namespace countflow
