#pragma once

#include <Eigen/Dense>
#include <vector>

#include "countflow/rng.hpp"

namespace countflow {

enum class CopulaFamily { Independence, Gaussian, Clayton };

// Cross-sectional dependence driver for the count draws. phi is ignored
// for Independence. Gaussian uses one exchangeable correlation phi,
// valid on [-1/(p-1), 1]; the endpoints are admitted (degenerate but
// well defined through the symmetric square root). Clayton requires
// phi > 0.
struct CopulaSpec {
  CopulaFamily family = CopulaFamily::Independence;
  double phi = 0.0;

  void validate(Eigen::Index p) const;
};

const char* family_name(CopulaFamily family);
CopulaFamily family_from_name(const std::string& name);

// One row of dependent uniforms, each marginally U(0, 1).
Eigen::VectorXd sample_copula(const CopulaSpec& spec, Eigen::Index p, Xoshiro256pp& rng);

// Number of arrivals of a unit-rate process before time 1, given the
// successive waiting times: max { k : w_1 + ... + w_k <= 1 }.
int arrivals_before_unit_time(const std::vector<double>& waits);

// Draws one count vector with Poisson(lambda_i) marginals. Component i
// counts the arrivals of a Poisson process with rate lambda_i before
// time 1, where the exponential waiting times are formed from copula
// rows: x_{i,l} = -log(u_{i,l}) / lambda_i. Rows are drawn until every
// component's accumulated time exceeds 1; a hard ceiling of 10^7 rows
// guards against runaway intensities.
Eigen::VectorXd copula_poisson_draw(const CopulaSpec& spec,
                                    const Eigen::VectorXd& lambda,
                                    Xoshiro256pp& rng);

}  // namespace countflow
