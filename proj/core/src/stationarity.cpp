#include "countflow/stationarity.hpp"

#include <cmath>
#include <stdexcept>

namespace countflow {

namespace {

double spectral_norm(const Eigen::MatrixXd& m) {
  // sqrt of the largest eigenvalue of M'M. For large matrices a power
  // iteration on M'M avoids the full eigendecomposition.
  const Eigen::MatrixXd mtm = m.transpose() * m;
  if (m.cols() <= 50) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(mtm, Eigen::EigenvaluesOnly);
    const double top = es.eigenvalues().maxCoeff();
    return top > 0.0 ? std::sqrt(top) : 0.0;
  }
  Eigen::VectorXd v = Eigen::VectorXd::Ones(m.cols());
  v.normalize();
  double value = 0.0;
  for (int it = 0; it < 1000; ++it) {
    Eigen::VectorXd w = mtm * v;
    const double next = w.norm();
    if (next == 0.0) return 0.0;
    w /= next;
    if (std::fabs(next - value) <= 1e-14 * next) {
      value = next;
      break;
    }
    value = next;
    v = w;
  }
  return std::sqrt(value);
}

}  // namespace

double operator_norm(const Eigen::MatrixXd& m, MatrixNorm which) {
  if (m.size() == 0) return 0.0;
  switch (which) {
    case MatrixNorm::One:
      return m.cwiseAbs().colwise().sum().maxCoeff();
    case MatrixNorm::Frobenius:
      return m.norm();
    case MatrixNorm::Two:
      return spectral_norm(m);
  }
  throw std::invalid_argument("operator_norm: unknown norm");
}

StationarityReport check_conditions(const ModelParams& params, const SeriesOptions& opts) {
  params.validate();
  if (!(opts.tol > 0.0) || opts.max_j < 1) {
    throw std::invalid_argument("check_conditions: bad series options");
  }
  StationarityReport rep;
  rep.kind = params.kind;
  rep.norm2_A_plus_B = operator_norm(params.A + params.B, MatrixNorm::Two);
  rep.norm2_A_plus_norm2_B = operator_norm(params.A, MatrixNorm::Two) +
                             operator_norm(params.B, MatrixNorm::Two);
  rep.norm1_A_plus_norm1_B = operator_norm(params.A, MatrixNorm::One) +
                             operator_norm(params.B, MatrixNorm::One);

  // sum_j |||A^j B|||_2, truncated once the increment drops below tol.
  Eigen::MatrixXd AjB = params.B;
  double sum = 0.0;
  int j = 0;
  bool converged = false;
  for (; j < opts.max_j; ++j) {
    const double term = operator_norm(AjB, MatrixNorm::Two);
    sum += term;
    if (term < opts.tol) {
      converged = true;
      break;
    }
    if (!std::isfinite(sum)) break;
    AjB = params.A * AjB;
  }
  rep.series.sum = sum;
  rep.series.truncated_at = j;
  rep.series.converged = converged;

  const double spectral =
      params.kind == ModelKind::Linear ? rep.norm2_A_plus_B : rep.norm2_A_plus_norm2_B;
  rep.spectral_pass = spectral < 1.0;
  rep.column_sum_pass = rep.norm1_A_plus_norm1_B < 1.0;
  rep.series_pass = converged && rep.series.sum < 1.0;
  rep.any_pass = rep.spectral_pass || rep.column_sum_pass || rep.series_pass;
  return rep;
}

}  // namespace countflow
