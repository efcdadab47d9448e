#include "countflow/inference.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "countflow/model.hpp"
#include "countflow/optim.hpp"

namespace countflow {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_shapes(const ModelParams& params, const Eigen::MatrixXd& y) {
  const Eigen::Index p = params.dim();
  if (p == 0) throw std::invalid_argument("inference: empty parameter vector");
  if (params.A.rows() != p || params.A.cols() != p || params.B.rows() != p ||
      params.B.cols() != p) {
    throw std::invalid_argument("inference: A/B shape mismatch");
  }
  if (y.cols() != p) throw std::invalid_argument("inference: y has wrong number of columns");
  if (y.rows() < 1) throw std::invalid_argument("inference: y is empty");
}

// Presample state; doubles as the stand-in for the count regressor at
// the first step. Zero gradient by convention.
Eigen::VectorXd presample_state(const ModelParams& params, const Eigen::MatrixXd& y) {
  Eigen::VectorXd m = y.colwise().mean();
  if (params.kind == ModelKind::LogLinear) m = (m.array() + 1.0).log().matrix();
  return m;
}

struct PassRequest {
  bool path = false;
  bool gradients = false;
  bool score = false;
  bool info = false;
};

struct PassOutput {
  bool feasible = false;
  double loglik = kNegInf;
  Eigen::MatrixXd path;
  std::vector<Eigen::MatrixXd> gradients;
  Eigen::VectorXd score;
  Eigen::MatrixXd H;
  Eigen::MatrixXd G;
};

// One sweep through the data computing whatever the caller asked for.
// All gradient-bearing quantities share the Jacobian recursion
//   J_t = [I | state_{t-1}' (x) I | reg_{t-1}' (x) I] + A J_{t-1},
// where reg is the raw count for the linear model and log(count + 1)
// for the log-linear one.
PassOutput run_pass(const ModelParams& params, const Eigen::MatrixXd& y, const PassRequest& req) {
  check_shapes(params, y);
  const Eigen::Index p = params.dim();
  const Eigen::Index n = y.rows();
  const Eigen::Index dim = theta_dim(p);
  const bool linear = params.kind == ModelKind::Linear;
  const bool need_grad = req.gradients || req.score || req.info;

  PassOutput out;
  if (req.path) out.path.resize(n, p);
  if (req.gradients) out.gradients.reserve(static_cast<std::size_t>(n));
  if (req.score) out.score = Eigen::VectorXd::Zero(dim);
  if (req.info) {
    out.H = Eigen::MatrixXd::Zero(dim, dim);
    out.G = Eigen::MatrixXd::Zero(dim, dim);
  }

  Eigen::VectorXd state_prev = presample_state(params, y);
  Eigen::VectorXd reg_prev = state_prev;
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(p, dim);
  Eigen::MatrixXd J_new(p, dim);

  double loglik = 0.0;
  for (Eigen::Index t = 0; t < n; ++t) {
    const Eigen::VectorXd state = params.d + params.A * state_prev + params.B * reg_prev;
    if (!state.allFinite()) return out;

    if (need_grad) {
      J_new.noalias() = params.A * J;
      J_new.leftCols(p).diagonal().array() += 1.0;
      for (Eigen::Index s = 0; s < p; ++s) {
        J_new.block(0, p + s * p, p, p).diagonal().array() += state_prev(s);
        J_new.block(0, p + p * p + s * p, p, p).diagonal().array() += reg_prev(s);
      }
      J.swap(J_new);
    }

    const Eigen::VectorXd yt = y.row(t).transpose();
    Eigen::VectorXd lambda;
    if (linear) {
      if ((state.array() <= 0.0).any()) return out;
      lambda = state;
    } else {
      lambda = state.array().exp().matrix();
    }

    for (Eigen::Index i = 0; i < p; ++i) {
      loglik += yt(i) * (linear ? std::log(lambda(i)) : state(i)) - lambda(i);
    }
    if (!std::isfinite(loglik)) return out;

    if (req.path) out.path.row(t) = state.transpose();
    if (req.gradients) out.gradients.push_back(J);

    if (req.score || req.info) {
      // Per-observation score term: J' D^{-1} (y - lambda) for the
      // linear model, J' (y - lambda) for the log-linear one.
      Eigen::VectorXd w = yt - lambda;
      if (linear) w.array() /= lambda.array();
      if (req.info) {
        const Eigen::VectorXd st = J.transpose() * w;
        out.G.noalias() += st * st.transpose();
        Eigen::ArrayXd d_weights = lambda.array();
        if (linear) d_weights = d_weights.inverse();
        out.H.noalias() += J.transpose() * (J.array().colwise() * d_weights).matrix();
        if (req.score) out.score += st;
      } else {
        out.score.noalias() += J.transpose() * w;
      }
    }

    state_prev = state;
    if (linear) {
      reg_prev = yt;
    } else {
      reg_prev = (yt.array() + 1.0).log().matrix();
    }
  }

  out.feasible = true;
  out.loglik = loglik;
  return out;
}

Eigen::MatrixXd counts_or_throw(const CountSeries& y) {
  y.validate();
  return y.values;
}

}  // namespace

Eigen::Index theta_dim(Eigen::Index p) { return p * (1 + 2 * p); }

Eigen::VectorXd pack_theta(const ModelParams& params) {
  const Eigen::Index p = params.dim();
  Eigen::VectorXd theta(theta_dim(p));
  theta.head(p) = params.d;
  theta.segment(p, p * p) = Eigen::Map<const Eigen::VectorXd>(params.A.data(), p * p);
  theta.tail(p * p) = Eigen::Map<const Eigen::VectorXd>(params.B.data(), p * p);
  return theta;
}

ModelParams unpack_theta(ModelKind kind, Eigen::Index p, const Eigen::VectorXd& theta) {
  if (theta.size() != theta_dim(p)) throw std::invalid_argument("unpack_theta: wrong length");
  ModelParams params;
  params.kind = kind;
  params.d = theta.head(p);
  params.A = Eigen::Map<const Eigen::MatrixXd>(theta.data() + p, p, p);
  params.B = Eigen::Map<const Eigen::MatrixXd>(theta.data() + p + p * p, p, p);
  return params;
}

FilterResult filter_intensity_and_gradients(const ModelParams& params, const CountSeries& y) {
  PassRequest req;
  req.path = true;
  req.gradients = true;
  PassOutput out = run_pass(params, counts_or_throw(y), req);
  if (!out.feasible) {
    throw std::runtime_error("filter_intensity_and_gradients: intensity left (0, inf)");
  }
  FilterResult res;
  res.path.values = std::move(out.path);
  res.path.scale =
      params.kind == ModelKind::Linear ? IntensityScale::Mean : IntensityScale::LogMean;
  res.gradients = std::move(out.gradients);
  return res;
}

double quasi_loglik(const ModelParams& params, const CountSeries& y) {
  PassRequest req;
  PassOutput out = run_pass(params, counts_or_throw(y), req);
  return out.loglik;
}

Eigen::VectorXd score(const ModelParams& params, const CountSeries& y) {
  PassRequest req;
  req.score = true;
  PassOutput out = run_pass(params, counts_or_throw(y), req);
  if (!out.feasible) throw std::runtime_error("score: intensity left (0, inf)");
  return out.score;
}

InformationMatrices hessian_and_information(const ModelParams& params, const CountSeries& y) {
  PassRequest req;
  req.info = true;
  PassOutput out = run_pass(params, counts_or_throw(y), req);
  if (!out.feasible) throw std::runtime_error("hessian_and_information: intensity left (0, inf)");
  return {std::move(out.H), std::move(out.G)};
}

Eigen::MatrixXd observed_hessian(const ModelParams& params, const CountSeries& y) {
  const Eigen::MatrixXd yv = counts_or_throw(y);
  check_shapes(params, yv);
  const Eigen::Index p = params.dim();
  const Eigen::Index n = yv.rows();
  const Eigen::Index dim = theta_dim(p);
  const bool linear = params.kind == ModelKind::Linear;

  Eigen::VectorXd state_prev = presample_state(params, yv);
  Eigen::VectorXd reg_prev = state_prev;
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(p, dim);
  Eigen::MatrixXd J_new(p, dim);
  // Second derivatives, stored as p rows by dim*dim columns with
  // column index j * dim + k. Only the A-block of theta makes the
  // recursion second-order: d2 state_t (j,k) = A d2 state_{t-1} (j,k)
  //   + e_r dstate_{t-1,k}(s) [theta_j = A(r,s)]
  //   + e_r dstate_{t-1,j}(s) [theta_k = A(r,s)].
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(p, dim * dim);
  Eigen::MatrixXd T_new(p, dim * dim);

  Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(dim, dim);
  for (Eigen::Index t = 0; t < n; ++t) {
    const Eigen::VectorXd state = params.d + params.A * state_prev + params.B * reg_prev;
    if (!state.allFinite()) throw std::runtime_error("observed_hessian: state diverged");

    T_new.noalias() = params.A * T;
    for (Eigen::Index s = 0; s < p; ++s) {
      for (Eigen::Index r = 0; r < p; ++r) {
        const Eigen::Index j = p + s * p + r;  // theta index of A(r, s)
        for (Eigen::Index k = 0; k < dim; ++k) {
          const double g = J(s, k);
          T_new(r, j * dim + k) += g;
          T_new(r, k * dim + j) += g;
        }
      }
    }
    T.swap(T_new);

    J_new.noalias() = params.A * J;
    J_new.leftCols(p).diagonal().array() += 1.0;
    for (Eigen::Index s = 0; s < p; ++s) {
      J_new.block(0, p + s * p, p, p).diagonal().array() += state_prev(s);
      J_new.block(0, p + p * p + s * p, p, p).diagonal().array() += reg_prev(s);
    }
    J.swap(J_new);

    const Eigen::VectorXd yt = yv.row(t).transpose();
    Eigen::VectorXd lambda = state;
    if (!linear) lambda = state.array().exp().matrix();
    if (linear && (lambda.array() <= 0.0).any()) {
      throw std::runtime_error("observed_hessian: intensity left (0, inf)");
    }

    // -d2 loglik: first-order part plus the curvature of the state.
    Eigen::ArrayXd quad_w = lambda.array();
    if (linear) quad_w = yt.array() / (lambda.array() * lambda.array());
    hess.noalias() += J.transpose() * (J.array().colwise() * quad_w).matrix();
    Eigen::VectorXd lin_w = yt - lambda;
    if (linear) lin_w.array() /= lambda.array();
    for (Eigen::Index j = 0; j < dim; ++j) {
      for (Eigen::Index k = 0; k < dim; ++k) {
        double acc = 0.0;
        for (Eigen::Index i = 0; i < p; ++i) acc += lin_w(i) * T(i, j * dim + k);
        hess(j, k) -= acc;
      }
    }

    state_prev = state;
    reg_prev = yt;
    if (!linear) reg_prev = (yt.array() + 1.0).log().matrix();
  }
  return hess;
}

namespace {

// Least-squares helper: response column r against design X.
Eigen::VectorXd ls_solve(const Eigen::MatrixXd& X, const Eigen::VectorXd& r) {
  return X.colPivHouseholderQr().solve(r);
}

ModelParams linear_start(const CountSeries& y) {
  const Eigen::Index p = y.p();
  const Eigen::Index n = y.n();
  ModelParams start;
  start.kind = ModelKind::Linear;
  start.d = Eigen::VectorXd::Constant(p, 1e-3);
  start.A = 0.1 * Eigen::MatrixXd::Identity(p, p);
  start.B = Eigen::MatrixXd::Zero(p, p);
  if (n < 2) return start;

  Eigen::MatrixXd X(n - 1, 1 + p);
  X.col(0).setOnes();
  X.rightCols(p) = y.values.topRows(n - 1);
  for (Eigen::Index i = 0; i < p; ++i) {
    const Eigen::VectorXd beta = ls_solve(X, y.values.col(i).tail(n - 1));
    start.d(i) = std::max(beta(0), 1e-3);
    for (Eigen::Index j = 0; j < p; ++j) start.B(i, j) = std::max(beta(1 + j), 0.0);
  }
  return start;
}

// Heuristic start for a single log-linear component, used to seed the
// univariate fits below.
Eigen::Vector3d loglinear_scalar_start(const Eigen::VectorXd& column) {
  const Eigen::Index n = column.size();
  const Eigen::ArrayXd z = (column.array() + 1.0).log();
  double b = 0.3;
  if (n >= 3) {
    Eigen::MatrixXd X(n - 1, 2);
    X.col(0).setOnes();
    X.col(1) = z.head(n - 1).matrix();
    const Eigen::VectorXd beta = ls_solve(X, z.tail(n - 1).matrix());
    b = std::clamp(beta(1) - 0.1, -0.8, 0.8);
  }
  const double a = 0.1;
  const double d = z.mean() * (1.0 - a - b);
  return {d, a, b};
}

ModelParams loglinear_start(const CountSeries& y) {
  const Eigen::Index p = y.p();
  const Eigen::Index n = y.n();
  ModelParams start;
  start.kind = ModelKind::LogLinear;
  start.d = Eigen::VectorXd::Zero(p);
  start.A = Eigen::MatrixXd::Zero(p, p);
  start.B = Eigen::MatrixXd::Zero(p, p);

  for (Eigen::Index i = 0; i < p; ++i) {
    Eigen::Vector3d sv = loglinear_scalar_start(y.values.col(i));
    if (p == 1) {
      start.d(i) = sv(0);
      start.A(i, i) = sv(1);
      start.B(i, i) = sv(2);
      continue;
    }
    // Univariate quasi-likelihood fit of component i for the diagonal.
    CountSeries col;
    col.values = y.values.col(i);
    try {
      FitOptions uni;
      uni.theta0 = (Eigen::VectorXd(3) << sv(0), sv(1), sv(2)).finished();
      uni.max_iterations = 200;
      uni.grad_tol = 1e-6;
      const FitResult r = fit(ModelKind::LogLinear, col, uni);
      sv << r.params.d(0), r.params.A(0, 0), r.params.B(0, 0);
    } catch (const std::exception&) {
      // Keep the heuristic values.
    }
    start.d(i) = sv(0);
    start.A(i, i) = sv(1);
    start.B(i, i) = sv(2);
  }
  if (p == 1 || n < 2 + 2 * p) return start;

  // One least-squares sweep for the off-diagonal entries: regress
  // z_t on (1, nu_hat_{t-1}, z_{t-1}) where nu_hat comes from the
  // univariate filters.
  const Eigen::MatrixXd z = (y.values.array() + 1.0).log();
  Eigen::MatrixXd nu_hat(n, p);
  for (Eigen::Index i = 0; i < p; ++i) {
    double prev_nu = std::log(y.values.col(i).mean() + 1.0);
    double prev_z = prev_nu;
    for (Eigen::Index t = 0; t < n; ++t) {
      const double nu = start.d(i) + start.A(i, i) * prev_nu + start.B(i, i) * prev_z;
      nu_hat(t, i) = nu;
      prev_nu = nu;
      prev_z = z(t, i);
    }
  }
  Eigen::MatrixXd X(n - 1, 1 + 2 * p);
  X.col(0).setOnes();
  X.block(0, 1, n - 1, p) = nu_hat.topRows(n - 1);
  X.block(0, 1 + p, n - 1, p) = z.topRows(n - 1);
  for (Eigen::Index i = 0; i < p; ++i) {
    const Eigen::VectorXd beta = ls_solve(X, z.col(i).tail(n - 1).matrix());
    for (Eigen::Index j = 0; j < p; ++j) {
      if (j == i) continue;
      start.A(i, j) = std::clamp(beta(1 + j), -0.5, 0.5);
      start.B(i, j) = std::clamp(beta(1 + p + j), -0.5, 0.5);
    }
  }
  return start;
}

}  // namespace

ModelParams starting_values(ModelKind kind, const CountSeries& y) {
  y.validate();
  if (y.n() < 1 || y.p() < 1) throw std::invalid_argument("starting_values: empty series");
  return kind == ModelKind::Linear ? linear_start(y) : loglinear_start(y);
}

namespace {

std::vector<Eigen::Index> free_indices(const std::optional<std::vector<bool>>& mask,
                                       Eigen::Index dim) {
  std::vector<Eigen::Index> idx;
  if (!mask.has_value()) {
    idx.resize(static_cast<std::size_t>(dim));
    for (Eigen::Index i = 0; i < dim; ++i) idx[static_cast<std::size_t>(i)] = i;
    return idx;
  }
  if (static_cast<Eigen::Index>(mask->size()) != dim) {
    throw std::invalid_argument("fit: free_mask has wrong length");
  }
  for (Eigen::Index i = 0; i < dim; ++i) {
    if ((*mask)[static_cast<std::size_t>(i)]) idx.push_back(i);
  }
  if (idx.empty()) throw std::invalid_argument("fit: free_mask pins every coordinate");
  return idx;
}

}  // namespace

FitResult fit(ModelKind kind, const CountSeries& y, const FitOptions& opts) {
  y.validate();
  const Eigen::Index p = y.p();
  const Eigen::Index dim = theta_dim(p);
  if (y.n() <= dim) {
    throw std::invalid_argument("fit: need more observations than parameters");
  }
  if (opts.positive_transform && kind != ModelKind::Linear) {
    throw std::invalid_argument("fit: positive_transform applies to the linear model only");
  }

  Eigen::VectorXd theta_start;
  if (opts.theta0.has_value()) {
    if (opts.theta0->size() != dim) throw std::invalid_argument("fit: theta0 has wrong length");
    theta_start = *opts.theta0;
  } else {
    theta_start = pack_theta(starting_values(kind, y));
  }

  const std::vector<Eigen::Index> free = free_indices(opts.free_mask, dim);
  const bool transform = opts.positive_transform;
  Eigen::VectorXd theta_full = theta_start;

  auto to_full = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXd theta = theta_full;
    for (std::size_t k = 0; k < free.size(); ++k) {
      const double v = x(static_cast<Eigen::Index>(k));
      theta(free[k]) = transform ? std::exp(v) : v;
    }
    return theta;
  };

  const Eigen::MatrixXd& yv = y.values;
  AscentObjective objective;
  objective.value = [&](const Eigen::VectorXd& x) {
    PassRequest req;
    return run_pass(unpack_theta(kind, p, to_full(x)), yv, req).loglik;
  };
  objective.value_grad_metric = [&](const Eigen::VectorXd& x, Eigen::VectorXd& grad,
                                    Eigen::MatrixXd& metric) {
    PassRequest req;
    req.score = true;
    req.info = true;
    const Eigen::VectorXd theta = to_full(x);
    PassOutput out = run_pass(unpack_theta(kind, p, theta), yv, req);
    if (!out.feasible) return kNegInf;
    const auto m = static_cast<Eigen::Index>(free.size());
    grad.resize(m);
    metric.resize(m, m);
    for (Eigen::Index a = 0; a < m; ++a) {
      const double ja = transform ? theta(free[static_cast<std::size_t>(a)]) : 1.0;
      grad(a) = out.score(free[static_cast<std::size_t>(a)]) * ja;
      for (Eigen::Index b = 0; b < m; ++b) {
        const double jb = transform ? theta(free[static_cast<std::size_t>(b)]) : 1.0;
        metric(a, b) = out.H(free[static_cast<std::size_t>(a)],
                             free[static_cast<std::size_t>(b)]) * ja * jb;
      }
    }
    return out.loglik;
  };

  Eigen::VectorXd x0(static_cast<Eigen::Index>(free.size()));
  for (std::size_t k = 0; k < free.size(); ++k) {
    const double v = theta_start(free[k]);
    // In log coordinates the gradient and curvature of an entry scale with the
    // entry itself, so a start too close to zero leaves that coordinate
    // numerically frozen; floor starts at a small interior value instead.
    x0(static_cast<Eigen::Index>(k)) = transform ? std::log(std::max(v, 1e-2)) : v;
  }

  AscentOptions aopts;
  aopts.max_iterations = opts.max_iterations;
  aopts.grad_tol = opts.grad_tol;
  const AscentResult ares = ascent_quasi_newton(objective, x0, aopts);

  FitResult res;
  res.theta = to_full(ares.x);
  res.params = unpack_theta(kind, p, res.theta);

  PassRequest req;
  req.path = true;
  req.score = true;
  req.info = true;
  PassOutput out = run_pass(res.params, yv, req);
  if (!out.feasible) throw std::runtime_error("fit: final parameter point infeasible");
  res.loglik = out.loglik;
  res.H = std::move(out.H);
  res.G = std::move(out.G);
  res.fitted_intensity.values = std::move(out.path);
  res.fitted_intensity.scale =
      kind == ModelKind::Linear ? IntensityScale::Mean : IntensityScale::LogMean;

  // Sandwich on the free block; pinned coordinates keep zero rows.
  const auto m = static_cast<Eigen::Index>(free.size());
  Eigen::MatrixXd Hf(m, m), Gf(m, m);
  for (Eigen::Index a = 0; a < m; ++a) {
    for (Eigen::Index b = 0; b < m; ++b) {
      Hf(a, b) = res.H(free[static_cast<std::size_t>(a)], free[static_cast<std::size_t>(b)]);
      Gf(a, b) = res.G(free[static_cast<std::size_t>(a)], free[static_cast<std::size_t>(b)]);
    }
  }
  Eigen::LDLT<Eigen::MatrixXd> ldlt(Hf);
  Eigen::MatrixXd Sf;
  if (ldlt.info() == Eigen::Success) {
    Sf = ldlt.solve(ldlt.solve(Gf).transpose()).transpose();
  } else {
    Eigen::MatrixXd ridged = Hf;
    ridged.diagonal().array() += 1e-10 * std::max(1.0, Hf.diagonal().cwiseAbs().maxCoeff());
    Eigen::LDLT<Eigen::MatrixXd> ldlt2(ridged);
    Sf = ldlt2.solve(ldlt2.solve(Gf).transpose()).transpose();
  }
  Sf = 0.5 * (Sf + Sf.transpose()).eval();

  res.sandwich = Eigen::MatrixXd::Zero(dim, dim);
  res.std_errors = Eigen::VectorXd::Zero(dim);
  for (Eigen::Index a = 0; a < m; ++a) {
    for (Eigen::Index b = 0; b < m; ++b) {
      res.sandwich(free[static_cast<std::size_t>(a)], free[static_cast<std::size_t>(b)]) = Sf(a, b);
    }
    const double v = Sf(a, a);
    res.std_errors(free[static_cast<std::size_t>(a)]) = v > 0.0 ? std::sqrt(v) : 0.0;
  }

  res.convergence.iterations = ares.iterations;
  res.convergence.grad_norm = ares.gradient.size() ? ares.gradient.lpNorm<Eigen::Infinity>() : 0.0;
  switch (ares.status) {
    case AscentStatus::Converged: res.convergence.status = "converged"; break;
    case AscentStatus::MaxIterations: res.convergence.status = "max_iterations"; break;
    case AscentStatus::Stalled: res.convergence.status = "stalled"; break;
  }
  return res;
}

Eigen::MatrixXd pearson_residuals(const CountSeries& y, const IntensityPath& fitted) {
  if (y.n() != fitted.n() || y.p() != fitted.p()) {
    throw std::invalid_argument("pearson_residuals: shape mismatch");
  }
  const Eigen::MatrixXd lambda = fitted.means();
  if ((lambda.array() <= 0.0).any()) {
    throw std::invalid_argument("pearson_residuals: nonpositive intensity");
  }
  return ((y.values - lambda).array() / lambda.array().sqrt()).matrix();
}

Eigen::VectorXd predict_one_step(const ModelParams& params, const CountSeries& y) {
  const Eigen::MatrixXd yv = counts_or_throw(y);
  PassRequest req;
  req.path = true;
  PassOutput out = run_pass(params, yv, req);
  if (!out.feasible) throw std::runtime_error("predict_one_step: intensity left (0, inf)");
  const Eigen::VectorXd last_state = out.path.row(yv.rows() - 1).transpose();
  const Eigen::VectorXd next =
      mean_update(params, last_state, yv.row(yv.rows() - 1).transpose());
  if (params.kind == ModelKind::Linear) return next;
  return next.array().exp().matrix();
}

}  // namespace countflow
