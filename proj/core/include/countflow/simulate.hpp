#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "countflow/copula.hpp"
#include "countflow/types.hpp"

namespace countflow {

struct SimulationConfig {
  Eigen::Index n = 0;
  Eigen::Index burn_in = 500;
  std::uint64_t seed = 0;
  // Initial state (lambda for Linear, nu for LogLinear). When absent:
  // Linear starts from the unconditional mean (falling back to the
  // fixed point, then to d, when those are undefined), LogLinear starts
  // from the zero vector.
  std::optional<Eigen::VectorXd> initial_state;
};

struct SimulationResult {
  CountSeries counts;
  IntensityPath intensity;  // scale matches the model kind
  std::vector<std::string> warnings;
};

// Simulates burn_in + n steps of the count autoregression and returns
// the last n. Consecutive returned rows satisfy the recursion
// state_{t+1} = mean_update(state_t, y_t) exactly. A linear model with
// |||A + B|||_2 >= 1 is simulated anyway but flagged with a warning.
SimulationResult simulate_path(const ModelParams& params,
                               const CopulaSpec& copula,
                               const SimulationConfig& config);

}  // namespace countflow
