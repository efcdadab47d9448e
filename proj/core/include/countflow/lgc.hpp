#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "countflow/copula.hpp"
#include "countflow/inference.hpp"
#include "countflow/types.hpp"

namespace countflow {

// Parameters of the locally fitted bivariate normal.
struct LocalParams {
  double mu1 = 0.0, mu2 = 0.0;
  double sigma1 = 1.0, sigma2 = 1.0;
  double rho = 0.0;
};

// Fits the local bivariate normal at point x by maximizing the
// kernel-weighted local likelihood
//   n^{-1} sum_i K_b(X_i - x) log psi(X_i; gamma)
//     - integral K_b(v - x) psi(v; gamma) dv,
// with a product Gaussian kernel. The integral is the Gaussian
// convolution in closed form: the density of x under mean (mu1, mu2)
// and covariance Sigma(gamma) + diag(b1^2, b2^2). Requires n >= 30 and
// nondegenerate locally weighted data. `init` seeds the simplex search
// (pass the previous grid point's solution to warm-start).
LocalParams local_gaussian_fit(const Eigen::MatrixXd& data,
                               const Eigen::Vector2d& x,
                               const Eigen::Vector2d& bandwidth,
                               const LocalParams* init = nullptr);

// Local correlation field along a grid of evaluation points.
struct LgcField {
  Eigen::MatrixXd grid;             // m x 2 evaluation points
  Eigen::Vector2d bandwidth;        // 1.1 x per-coordinate sample sd
  std::vector<LocalParams> params;  // one per grid row
  Eigen::VectorXd rho;              // convenience copy of params[.].rho
};

// Bandwidths are always 1.1 times the per-coordinate sample standard
// deviation of `data`. With an empty grid (0 x 2), the diagonal-auto
// rule is used: integer points (k, k), k = 1..max value present in the
// data.
LgcField lgc_curve(const Eigen::MatrixXd& data, const Eigen::MatrixXd& grid = {});

// Mean squared difference of the two rho fields; grids must agree.
double lgc_distance(const LgcField& a, const LgcField& b);

struct CopulaSelectOptions {
  std::vector<CopulaFamily> families{CopulaFamily::Gaussian, CopulaFamily::Clayton};
  // Per-family phi grids; when a family is missing here the defaults
  // are Clayton 0.5..8 step 0.25 and Gaussian -1..1 step 0.05.
  std::map<CopulaFamily, std::vector<double>> grids;
  int replications = 1;  // bootstrap repetitions of the whole search
  std::uint64_t seed = 0;
  std::size_t workers = 0;  // 0 = automatic
};

struct BootstrapRecord {
  int replications = 0;
  std::map<std::string, int> votes;  // family name -> times chosen
  double phi_mean = 0.0;             // over replications picking the modal family
  double phi_se = 0.0;
};

struct CopulaSelection {
  CopulaFamily chosen_family = CopulaFamily::Independence;
  double phi_hat = 0.0;
  double distance = 0.0;
  // Average distance curve per family, one value per grid phi.
  std::map<std::string, std::vector<std::pair<double, double>>> curves;
  BootstrapRecord bootstrap;
};

// Data-driven copula choice for a bivariate count series: regenerate
// full synthetic paths from the fitted parameters under each candidate
// (family, phi), compare local correlation fields on the shared
// diagonal grid of the observed data, and pick the minimizer of the
// mean squared rho distance. With replications > 1 the search repeats
// with fresh simulation randomness and the modal family wins.
CopulaSelection copula_select(const CountSeries& y,
                              const FitResult& fitted,
                              const CopulaSelectOptions& options = {});

}  // namespace countflow
