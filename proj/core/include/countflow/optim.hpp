#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>

namespace countflow {

// Objective for ascent_quasi_newton. value() may return -inf to mark an
// infeasible point; value_grad_metric() is only called at feasible
// points and must fill the gradient and a positive semidefinite metric
// (an expected-information surrogate for the negative Hessian).
struct AscentObjective {
  std::function<double(const Eigen::VectorXd&)> value;
  std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&, Eigen::MatrixXd&)>
      value_grad_metric;
};

enum class AscentStatus { Converged, MaxIterations, Stalled };

struct AscentResult {
  Eigen::VectorXd x;
  double value = 0.0;
  Eigen::VectorXd gradient;
  int iterations = 0;
  AscentStatus status = AscentStatus::Stalled;
};

struct AscentOptions {
  int max_iterations = 500;
  double grad_tol = 1e-8;      // max-norm of the gradient
  double armijo = 1e-4;        // sufficient-increase constant
  double backtrack = 0.5;      // step shrink factor
  int max_backtracks = 60;
};

// Quasi-Newton ascent: direction from solving metric * s = gradient
// (with a ridge fallback when the metric is not positive definite),
// step length from backtracking until the Armijo condition holds.
AscentResult ascent_quasi_newton(const AscentObjective& objective,
                                 const Eigen::VectorXd& x0,
                                 const AscentOptions& opts = {});

struct SimplexResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct SimplexOptions {
  double tol = 1e-6;        // spread of simplex values at convergence
  int max_iterations = 5000;
  double initial_step = 0.1;
};

// Nelder-Mead minimization, standard reflection/expansion/contraction
// coefficients. Used for the small local-likelihood problems where
// gradients are not worth deriving.
SimplexResult nelder_mead(const std::function<double(const Eigen::VectorXd&)>& f,
                          const Eigen::VectorXd& x0,
                          const SimplexOptions& opts = {});

}  // namespace countflow
