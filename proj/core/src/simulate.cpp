#include "countflow/simulate.hpp"

#include <cmath>
#include <stdexcept>

#include "countflow/model.hpp"
#include "countflow/stationarity.hpp"

namespace countflow {

namespace {

// The waiting-time construction in copula_poisson_draw costs O(lambda) copula
// rows per observation, so a diverging path grinds long before any per-draw
// guard trips; cut it off at an intensity no count model plausibly reaches.
constexpr double kMaxIntensity = 1e6;

Eigen::VectorXd auto_initial_state(const ModelParams& params,
                                   std::vector<std::string>& warnings) {
  const Eigen::Index p = params.dim();
  if (params.kind == ModelKind::LogLinear) return Eigen::VectorXd::Zero(p);
  if (operator_norm(params.A + params.B, MatrixNorm::Two) < 1.0) {
    return unconditional_mean_linear(params);
  }
  warnings.push_back("simulate: |||A + B|||_2 >= 1, path may be nonstationary");
  if (operator_norm(params.A, MatrixNorm::Two) < 1.0) return fixed_point(params);
  return params.d;
}

}  // namespace

SimulationResult simulate_path(const ModelParams& params,
                               const CopulaSpec& copula,
                               const SimulationConfig& config) {
  params.validate();
  copula.validate(params.dim());
  if (config.n < 0 || config.burn_in < 0) {
    throw std::invalid_argument("simulate_path: n and burn_in must be nonnegative");
  }
  const Eigen::Index p = params.dim();

  SimulationResult result;
  Eigen::VectorXd state;
  if (config.initial_state.has_value()) {
    state = *config.initial_state;
    if (state.size() != p) throw std::invalid_argument("simulate_path: initial state has wrong size");
    if (params.kind == ModelKind::Linear && (state.array() <= 0.0).any()) {
      throw std::invalid_argument("simulate_path: linear initial state must be positive");
    }
  } else {
    state = auto_initial_state(params, result.warnings);
  }

  Xoshiro256pp rng(config.seed);
  const Eigen::Index total = config.burn_in + config.n;
  result.counts.values.resize(config.n, p);
  result.counts.labels = default_labels(p);
  result.intensity.values.resize(config.n, p);
  result.intensity.scale =
      params.kind == ModelKind::Linear ? IntensityScale::Mean : IntensityScale::LogMean;

  for (Eigen::Index t = 0; t < total; ++t) {
    const Eigen::VectorXd lambda =
        params.kind == ModelKind::Linear ? state : state.array().exp().matrix();
    if (!lambda.allFinite() || (lambda.array() <= 0.0).any()) {
      throw std::runtime_error("simulate_path: intensity left (0, inf); check stationarity");
    }
    if ((lambda.array() > kMaxIntensity).any()) {
      throw std::runtime_error(
          "simulate_path: intensity exceeded 1e6, the path is diverging; check stationarity");
    }
    const Eigen::VectorXd y = copula_poisson_draw(copula, lambda, rng);
    const Eigen::Index k = t - config.burn_in;
    if (k >= 0) {
      result.intensity.values.row(k) = state.transpose();
      result.counts.values.row(k) = y.transpose();
    }
    state = mean_update(params, state, y);
  }
  return result;
}

}  // namespace countflow
