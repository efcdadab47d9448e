#pragma once

#include <Eigen/Dense>

#include "countflow/types.hpp"

namespace countflow {

enum class MatrixNorm { One, Two, Frobenius };

// Induced matrix norm: One = max absolute column sum, Two = largest
// singular value, Frobenius = entrywise 2-norm. Empty matrices have
// norm zero.
double operator_norm(const Eigen::MatrixXd& m, MatrixNorm which);

struct StationaritySeries {
  double sum = 0.0;        // sum_j |||A^j B|||_2 up to truncation
  int truncated_at = 0;    // last j included
  bool converged = false;  // increment fell below tol before max_j
};

// Sufficient conditions for a stationary, ergodic solution. Which pair
// of spectral/column-sum bounds applies depends on the model kind:
// Linear checks |||A+B|||_2 and |||A|||_1 + |||B|||_1, LogLinear checks
// |||A|||_2 + |||B|||_2 and the same column-sum bound. The series
// criterion sum_j |||A^j B|||_2 < 1 applies to both kinds.
struct StationarityReport {
  ModelKind kind = ModelKind::Linear;
  double norm2_A_plus_B = 0.0;           // |||A + B|||_2
  double norm2_A_plus_norm2_B = 0.0;     // |||A|||_2 + |||B|||_2
  double norm1_A_plus_norm1_B = 0.0;     // |||A|||_1 + |||B|||_1
  StationaritySeries series;

  bool spectral_pass = false;   // kind-specific spectral bound < 1
  bool column_sum_pass = false; // |||A|||_1 + |||B|||_1 < 1
  bool series_pass = false;     // series sum < 1 (and converged)
  bool any_pass = false;
};

struct SeriesOptions {
  double tol = 1e-12;
  int max_j = 10000;
};

StationarityReport check_conditions(const ModelParams& params,
                                    const SeriesOptions& opts = {});

}  // namespace countflow
