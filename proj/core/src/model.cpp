#include "countflow/model.hpp"

#include <cmath>
#include <stdexcept>

#include "countflow/stationarity.hpp"

namespace countflow {

void ModelParams::validate() const {
  const Eigen::Index p = d.size();
  if (p == 0) throw std::invalid_argument("ModelParams: d is empty");
  if (A.rows() != p || A.cols() != p || B.rows() != p || B.cols() != p) {
    throw std::invalid_argument("ModelParams: A and B must be p x p with p = d.size()");
  }
  if (!d.allFinite() || !A.allFinite() || !B.allFinite()) {
    throw std::invalid_argument("ModelParams: parameters must be finite");
  }
  if (kind == ModelKind::Linear) {
    if ((d.array() <= 0.0).any()) {
      throw std::invalid_argument("ModelParams: linear model requires d > 0");
    }
    if ((A.array() < 0.0).any() || (B.array() < 0.0).any()) {
      throw std::invalid_argument("ModelParams: linear model requires A, B >= 0 entrywise");
    }
  }
}

void CountSeries::validate() const {
  if (!labels.empty() && static_cast<Eigen::Index>(labels.size()) != p()) {
    throw std::invalid_argument("CountSeries: label count does not match columns");
  }
  for (Eigen::Index j = 0; j < p(); ++j) {
    for (Eigen::Index i = 0; i < n(); ++i) {
      const double v = values(i, j);
      if (!std::isfinite(v) || v < 0.0 || v != std::floor(v)) {
        throw std::invalid_argument("CountSeries: entry (" + std::to_string(i) + ", " +
                                    std::to_string(j) + ") is not a nonnegative integer");
      }
    }
  }
}

Eigen::MatrixXd IntensityPath::means() const {
  if (scale == IntensityScale::Mean) return values;
  return values.array().exp();
}

std::vector<std::string> default_labels(Eigen::Index p) {
  std::vector<std::string> out;
  out.reserve(static_cast<std::size_t>(p));
  for (Eigen::Index j = 0; j < p; ++j) out.push_back("y" + std::to_string(j + 1));
  return out;
}

Eigen::VectorXd mean_update(const ModelParams& params,
                            const Eigen::VectorXd& state,
                            const Eigen::VectorXd& y) {
  const Eigen::Index p = params.dim();
  if (state.size() != p || y.size() != p) {
    throw std::invalid_argument("mean_update: state/y dimension mismatch");
  }
  if (params.kind == ModelKind::Linear) {
    return params.d + params.A * state + params.B * y;
  }
  // Log-linear: feedback enters through log(y + 1).
  return params.d + params.A * state + params.B * (y.array() + 1.0).log().matrix();
}

Eigen::VectorXd fixed_point(const ModelParams& params) {
  if (params.kind != ModelKind::Linear) {
    throw std::invalid_argument("fixed_point: defined for the linear model only");
  }
  if (operator_norm(params.A, MatrixNorm::Two) >= 1.0) {
    throw std::invalid_argument("fixed_point: requires |||A|||_2 < 1");
  }
  const Eigen::Index p = params.dim();
  return (Eigen::MatrixXd::Identity(p, p) - params.A).lu().solve(params.d);
}

Eigen::VectorXd unconditional_mean_linear(const ModelParams& params) {
  if (params.kind != ModelKind::Linear) {
    throw std::invalid_argument("unconditional_mean_linear: defined for the linear model only");
  }
  if (operator_norm(params.A + params.B, MatrixNorm::Two) >= 1.0) {
    throw std::invalid_argument("unconditional_mean_linear: requires |||A + B|||_2 < 1");
  }
  const Eigen::Index p = params.dim();
  return (Eigen::MatrixXd::Identity(p, p) - params.A - params.B).lu().solve(params.d);
}

Eigen::VectorXd truncated_infinite_representation(const ModelParams& params,
                                                  const Eigen::MatrixXd& history) {
  if (params.kind != ModelKind::Linear) {
    throw std::invalid_argument("truncated_infinite_representation: linear model only");
  }
  if (history.rows() > 0 && history.cols() != params.dim()) {
    throw std::invalid_argument("truncated_infinite_representation: history has wrong width");
  }
  Eigen::VectorXd acc = fixed_point(params);
  // Horner-style accumulation of sum_j A^j B y_{t-j-1}.
  Eigen::MatrixXd AjB = params.B;
  for (Eigen::Index j = 0; j < history.rows(); ++j) {
    acc += AjB * history.row(j).transpose();
    if (j + 1 < history.rows()) AjB = params.A * AjB;
  }
  return acc;
}

}  // namespace countflow
