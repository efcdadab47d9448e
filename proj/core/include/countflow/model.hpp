#pragma once

#include <Eigen/Dense>

#include "countflow/types.hpp"

namespace countflow {

// One step of the mean recursion. `state` and the result are lambda for
// the linear model and nu = log(lambda) for the log-linear model; `y` is
// the count vector observed at the same time as `state`.
Eigen::VectorXd mean_update(const ModelParams& params,
                            const Eigen::VectorXd& state,
                            const Eigen::VectorXd& y);

// Fixed point (I - A)^{-1} d of the deterministic part of the linear
// recursion. Requires kind == Linear and ||| A |||_2 < 1.
Eigen::VectorXd fixed_point(const ModelParams& params);

// Stationary mean (I - A - B)^{-1} d of the linear model. Requires
// kind == Linear and ||| A + B |||_2 < 1.
Eigen::VectorXd unconditional_mean_linear(const ModelParams& params);

// Truncated moving-average form of the linear intensity,
//   (I - A)^{-1} d + sum_{j=0}^{K-1} A^j B y_{t-j-1},
// where history.row(j) holds y_{t-j-1} (most recent first). Equals the
// value reached by iterating mean_update K steps from the fixed point
// through that history.
Eigen::VectorXd truncated_infinite_representation(const ModelParams& params,
                                                  const Eigen::MatrixXd& history);

}  // namespace countflow
