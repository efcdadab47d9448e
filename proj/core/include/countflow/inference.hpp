#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "countflow/types.hpp"

namespace countflow {

// Parameter vector layout: theta = (d', vec(A)', vec(B)') with
// column-major vec, so dim = p (1 + 2p).
Eigen::Index theta_dim(Eigen::Index p);
Eigen::VectorXd pack_theta(const ModelParams& params);
ModelParams unpack_theta(ModelKind kind, Eigen::Index p, const Eigen::VectorXd& theta);

// Intensity filter. The recursion starts from a presample state set to
// the column means of y (their log(mean + 1) transform for the
// log-linear model) with zero gradient; the same presample value stands
// in for the unobserved count regressor at the first step. Row t of the
// result then depends on y rows 0..t-1 only.
//
// For the linear model, parameters are not sign-restricted here; the
// pass is valid as long as every filtered intensity stays positive, and
// throws otherwise. gradients[t] is the p x dim(theta) Jacobian of the
// state at time t.
struct FilterResult {
  IntensityPath path;
  std::vector<Eigen::MatrixXd> gradients;
};
FilterResult filter_intensity_and_gradients(const ModelParams& params, const CountSeries& y);

// Poisson quasi-log-likelihood sum_t sum_i (y_it log lambda_it -
// lambda_it). Returns -inf when a linear parameter point drives the
// filtered intensity out of (0, inf), so optimizers can reject the
// point without an exception.
double quasi_loglik(const ModelParams& params, const CountSeries& y);

// Analytic score of quasi_loglik.
Eigen::VectorXd score(const ModelParams& params, const CountSeries& y);

// H: expected-information surrogate, sum_t J_t' D_t^{-1} J_t for the
// linear model (D_t = diag lambda_t) and sum_t J_t' D_t J_t for the
// log-linear one (D_t = diag exp nu_t). G: outer-product sum of the
// per-observation score terms. Both are sums over t, so the sandwich
// H^{-1} G H^{-1} estimates the covariance of theta_hat directly.
struct InformationMatrices {
  Eigen::MatrixXd H;
  Eigen::MatrixXd G;
};
InformationMatrices hessian_and_information(const ModelParams& params, const CountSeries& y);

// Raw curvature -d^2 loglik / dtheta dtheta', from the exact
// second-derivative recursions. Slower than the expected form; meant
// for diagnostics and cross-checks.
Eigen::MatrixXd observed_hessian(const ModelParams& params, const CountSeries& y);

// Data-driven starting values: linear regresses y_t on (1, y_{t-1})
// for (d, B) and sets A = 0.1 I; log-linear runs univariate fits per
// component for the diagonals, then one least-squares sweep for the
// off-diagonal entries.
ModelParams starting_values(ModelKind kind, const CountSeries& y);

struct FitOptions {
  int max_iterations = 500;
  double grad_tol = 1e-8;
  // Explicit start overrides starting_values().
  std::optional<Eigen::VectorXd> theta0;
  // Linear only: optimize log-transformed coordinates so every entry of
  // (d, A, B) stays strictly positive. Off by default because freely
  // estimated zero entries sit on that boundary; the default search
  // leaves coordinates unconstrained and relies on the positive-path
  // guard in quasi_loglik.
  bool positive_transform = false;
  // Entries with mask false are pinned at their starting value (zero
  // unless theta0 says otherwise) and excluded from the search.
  std::optional<std::vector<bool>> free_mask;
};

struct FitConvergence {
  int iterations = 0;
  double grad_norm = 0.0;
  std::string status;  // "converged", "max_iterations", "stalled"
};

struct FitResult {
  ModelParams params;
  Eigen::VectorXd theta;
  double loglik = 0.0;
  Eigen::MatrixXd H;
  Eigen::MatrixXd G;
  Eigen::MatrixXd sandwich;      // H^{-1} G H^{-1}
  Eigen::VectorXd std_errors;    // sqrt diag of sandwich
  IntensityPath fitted_intensity;
  FitConvergence convergence;
};

// Quasi-maximum-likelihood fit. Requires n > dim(theta).
FitResult fit(ModelKind kind, const CountSeries& y, const FitOptions& opts = {});

// (y - lambda) / sqrt(lambda), rowwise.
Eigen::MatrixXd pearson_residuals(const CountSeries& y, const IntensityPath& fitted);

// One-step-ahead conditional mean E[Y_{n+1} | F_n], on the intensity
// scale for both model kinds.
Eigen::VectorXd predict_one_step(const ModelParams& params, const CountSeries& y);

}  // namespace countflow
