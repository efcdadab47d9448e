#include "countflow/copula.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "countflow/special.hpp"

namespace countflow {

void CopulaSpec::validate(Eigen::Index p) const {
  if (p < 1) throw std::invalid_argument("CopulaSpec: dimension must be positive");
  switch (family) {
    case CopulaFamily::Independence:
      return;
    case CopulaFamily::Gaussian: {
      const double lo = p > 1 ? -1.0 / static_cast<double>(p - 1) : -1.0;
      if (!(phi >= lo && phi <= 1.0)) {
        throw std::invalid_argument("CopulaSpec: Gaussian phi must lie in [-1/(p-1), 1]");
      }
      return;
    }
    case CopulaFamily::Clayton:
      if (!(phi > 0.0)) throw std::invalid_argument("CopulaSpec: Clayton phi must be positive");
      return;
  }
  throw std::invalid_argument("CopulaSpec: unknown family");
}

const char* family_name(CopulaFamily family) {
  switch (family) {
    case CopulaFamily::Independence: return "independence";
    case CopulaFamily::Gaussian: return "gaussian";
    case CopulaFamily::Clayton: return "clayton";
  }
  return "unknown";
}

CopulaFamily family_from_name(const std::string& name) {
  if (name == "independence") return CopulaFamily::Independence;
  if (name == "gaussian") return CopulaFamily::Gaussian;
  if (name == "clayton") return CopulaFamily::Clayton;
  throw std::invalid_argument("unknown copula family: " + name);
}

Eigen::VectorXd sample_copula(const CopulaSpec& spec, Eigen::Index p, Xoshiro256pp& rng) {
  spec.validate(p);
  Eigen::VectorXd u(p);
  switch (spec.family) {
    case CopulaFamily::Independence: {
      for (Eigen::Index i = 0; i < p; ++i) u(i) = rng.uniform();
      return u;
    }
    case CopulaFamily::Gaussian: {
      // Exchangeable correlation (1-phi) I + phi 11'. Its symmetric
      // square root has the closed form
      //   sqrt(1-phi) (I - J/p) + sqrt(1 + (p-1) phi) J/p,
      // which stays defined at the boundary of the parameter set.
      const double pd = static_cast<double>(p);
      const double s1 = std::sqrt(std::max(0.0, 1.0 - spec.phi));
      const double s2 = std::sqrt(std::max(0.0, 1.0 + (pd - 1.0) * spec.phi));
      Eigen::VectorXd z(p);
      for (Eigen::Index i = 0; i < p; ++i) z(i) = rng.normal();
      const double zbar = z.mean();
      for (Eigen::Index i = 0; i < p; ++i) {
        const double x = s1 * (z(i) - zbar) + s2 * zbar;
        u(i) = norm_cdf(x);
      }
      return u;
    }
    case CopulaFamily::Clayton: {
      // Marshall-Olkin frailty: W ~ Gamma(1/phi, 1),
      // U_i = (1 - log(E_i)/W)^(-1/phi) with E_i iid uniform.
      const double w = rng.gamma(1.0 / spec.phi);
      for (Eigen::Index i = 0; i < p; ++i) {
        const double e = rng.uniform();
        u(i) = std::exp(-std::log1p(-std::log(e) / w) / spec.phi);
      }
      return u;
    }
  }
  throw std::invalid_argument("sample_copula: unknown family");
}

int arrivals_before_unit_time(const std::vector<double>& waits) {
  double acc = 0.0;
  int count = 0;
  for (const double w : waits) {
    if (!(w >= 0.0)) throw std::invalid_argument("arrivals_before_unit_time: negative wait");
    acc += w;
    if (acc > 1.0) break;
    ++count;
  }
  return count;
}

Eigen::VectorXd copula_poisson_draw(const CopulaSpec& spec,
                                    const Eigen::VectorXd& lambda,
                                    Xoshiro256pp& rng) {
  const Eigen::Index p = lambda.size();
  spec.validate(p);
  if ((lambda.array() <= 0.0).any() || !lambda.allFinite()) {
    throw std::invalid_argument("copula_poisson_draw: lambda must be positive and finite");
  }
  constexpr long kMaxRows = 10000000;

  Eigen::VectorXd acc = Eigen::VectorXd::Zero(p);  // accumulated waiting time
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(p);
  Eigen::Index open = p;  // components with acc <= 1
  for (long row = 0; open > 0; ++row) {
    if (row >= kMaxRows) {
      throw std::runtime_error("copula_poisson_draw: exceeded 1e7 copula rows; intensity too large");
    }
    const Eigen::VectorXd u = sample_copula(spec, p, rng);
    for (Eigen::Index i = 0; i < p; ++i) {
      if (acc(i) > 1.0) continue;
      acc(i) += -std::log(u(i)) / lambda(i);
      if (acc(i) > 1.0) {
        --open;
      } else {
        counts(i) += 1.0;
      }
    }
  }
  return counts;
}

}  // namespace countflow
