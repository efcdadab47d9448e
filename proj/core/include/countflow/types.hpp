#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace countflow {

enum class ModelKind { Linear, LogLinear };

// Parameters of the p-dimensional count autoregression.
//
// Linear:     lambda_t = d + A lambda_{t-1} + B y_{t-1}
// LogLinear:  nu_t     = d + A nu_{t-1}     + B log(y_{t-1} + 1),
//             lambda_t = exp(nu_t) componentwise.
//
// Linear requires d > 0 and A, B >= 0 entrywise; the log-linear map is
// unconstrained in sign.
struct ModelParams {
  ModelKind kind = ModelKind::Linear;
  Eigen::VectorXd d;
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;

  Eigen::Index dim() const { return d.size(); }

  // Throws std::invalid_argument on shape mismatch or, for Linear,
  // on violated positivity constraints.
  void validate() const;
};

// Observed or simulated counts, one row per time point, one column per
// component. Values are stored as doubles but must be nonnegative
// integers; validate() enforces this.
struct CountSeries {
  Eigen::MatrixXd values;
  std::vector<std::string> labels;

  Eigen::Index n() const { return values.rows(); }
  Eigen::Index p() const { return values.cols(); }

  void validate() const;
};

enum class IntensityScale { Mean, LogMean };

// A path of conditional means (scale Mean) or log means (scale LogMean),
// aligned row-for-row with the counts it was computed from.
struct IntensityPath {
  Eigen::MatrixXd values;
  IntensityScale scale = IntensityScale::Mean;

  Eigen::Index n() const { return values.rows(); }
  Eigen::Index p() const { return values.cols(); }

  // Conditional means regardless of stored scale.
  Eigen::MatrixXd means() const;
};

std::vector<std::string> default_labels(Eigen::Index p);

}  // namespace countflow
