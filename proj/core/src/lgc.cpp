#include "countflow/lgc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "countflow/optim.hpp"
#include "countflow/parallel.hpp"
#include "countflow/simulate.hpp"

namespace countflow {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct WeightedPoint {
  double v1, v2, w;
};

// gamma packed for the simplex search as (mu1, mu2, log s1, log s2,
// atanh rho); keeps the scales positive and |rho| < 1 without
// constraints.
Eigen::VectorXd pack_gamma(const LocalParams& g) {
  Eigen::VectorXd x(5);
  x << g.mu1, g.mu2, std::log(g.sigma1), std::log(g.sigma2),
      std::atanh(std::clamp(g.rho, -0.999, 0.999));
  return x;
}

LocalParams unpack_gamma(const Eigen::VectorXd& x) {
  LocalParams g;
  g.mu1 = x(0);
  g.mu2 = x(1);
  g.sigma1 = std::exp(x(2));
  g.sigma2 = std::exp(x(3));
  g.rho = std::tanh(x(4));
  return g;
}

double local_objective(const std::vector<WeightedPoint>& pts, double n_total,
                       const Eigen::Vector2d& x, const Eigen::Vector2d& b,
                       const LocalParams& g) {
  const double s1 = g.sigma1, s2 = g.sigma2, rho = g.rho;
  const double one_m_r2 = 1.0 - rho * rho;
  if (!(s1 > 0.0) || !(s2 > 0.0) || !(one_m_r2 > 0.0)) return -kInf;
  const double log_norm =
      -std::log(2.0 * std::numbers::pi * s1 * s2 * std::sqrt(one_m_r2));

  double data_term = 0.0;
  for (const auto& pt : pts) {
    const double z1 = (pt.v1 - g.mu1) / s1;
    const double z2 = (pt.v2 - g.mu2) / s2;
    const double q = (z1 * z1 - 2.0 * rho * z1 * z2 + z2 * z2) / one_m_r2;
    data_term += pt.w * (log_norm - 0.5 * q);
  }
  data_term /= n_total;

  // Closed-form kernel integral: normal density of x under mean mu and
  // covariance Sigma(gamma) + diag(b^2).
  const double c11 = s1 * s1 + b(0) * b(0);
  const double c22 = s2 * s2 + b(1) * b(1);
  const double c12 = rho * s1 * s2;
  const double det = c11 * c22 - c12 * c12;
  if (!(det > 0.0)) return -kInf;
  const double d1 = x(0) - g.mu1;
  const double d2 = x(1) - g.mu2;
  const double quad = (c22 * d1 * d1 - 2.0 * c12 * d1 * d2 + c11 * d2 * d2) / det;
  const double integral =
      std::exp(-0.5 * quad) / (2.0 * std::numbers::pi * std::sqrt(det));

  const double value = data_term - integral;
  return std::isfinite(value) ? value : -kInf;
}

}  // namespace

LocalParams local_gaussian_fit(const Eigen::MatrixXd& data,
                               const Eigen::Vector2d& x,
                               const Eigen::Vector2d& bandwidth,
                               const LocalParams* init) {
  const Eigen::Index n = data.rows();
  if (data.cols() != 2) throw std::invalid_argument("local_gaussian_fit: data must be n x 2");
  if (n < 30) throw std::invalid_argument("local_gaussian_fit: need at least 30 observations");
  if (!(bandwidth(0) > 0.0) || !(bandwidth(1) > 0.0)) {
    throw std::invalid_argument("local_gaussian_fit: bandwidths must be positive");
  }

  // Kernel weights at x; negligible ones are dropped.
  const double kernel_norm = 1.0 / (2.0 * std::numbers::pi * bandwidth(0) * bandwidth(1));
  std::vector<WeightedPoint> pts;
  pts.reserve(static_cast<std::size_t>(n));
  double w_max = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double u1 = (data(i, 0) - x(0)) / bandwidth(0);
    const double u2 = (data(i, 1) - x(1)) / bandwidth(1);
    const double w = kernel_norm * std::exp(-0.5 * (u1 * u1 + u2 * u2));
    if (w > w_max) w_max = w;
    pts.push_back({data(i, 0), data(i, 1), w});
  }
  std::vector<WeightedPoint> kept;
  kept.reserve(pts.size());
  for (const auto& pt : pts) {
    if (pt.w > w_max * 1e-12) kept.push_back(pt);
  }

  // Weighted moments: default start, and evidence of degeneracy.
  double sw = 0.0, m1 = 0.0, m2 = 0.0;
  for (const auto& pt : kept) {
    sw += pt.w;
    m1 += pt.w * pt.v1;
    m2 += pt.w * pt.v2;
  }
  if (!(sw > 0.0)) throw std::invalid_argument("local_gaussian_fit: no effective mass at x");
  m1 /= sw;
  m2 /= sw;
  double v1 = 0.0, v2 = 0.0, cv = 0.0;
  for (const auto& pt : kept) {
    v1 += pt.w * (pt.v1 - m1) * (pt.v1 - m1);
    v2 += pt.w * (pt.v2 - m2) * (pt.v2 - m2);
    cv += pt.w * (pt.v1 - m1) * (pt.v2 - m2);
  }
  v1 /= sw;
  v2 /= sw;
  cv /= sw;
  if (v1 < 1e-10 || v2 < 1e-10) {
    throw std::invalid_argument("local_gaussian_fit: locally degenerate data");
  }

  LocalParams moment_start;
  moment_start.mu1 = m1;
  moment_start.mu2 = m2;
  moment_start.sigma1 = std::sqrt(v1);
  moment_start.sigma2 = std::sqrt(v2);
  moment_start.rho = std::clamp(cv / std::sqrt(v1 * v2), -0.95, 0.95);

  const double n_total = static_cast<double>(n);
  auto neg = [&](const Eigen::VectorXd& gx) {
    return -local_objective(kept, n_total, x, bandwidth, unpack_gamma(gx));
  };

  SimplexOptions sopts;
  sopts.tol = 1e-6;
  sopts.max_iterations = 5000;
  SimplexResult best = nelder_mead(neg, pack_gamma(init ? *init : moment_start), sopts);
  if (init != nullptr) {
    // A warm start can sit in the wrong basin; keep whichever start
    // ends lower.
    const SimplexResult alt = nelder_mead(neg, pack_gamma(moment_start), sopts);
    if (alt.value < best.value) best = alt;
  }
  if (!best.converged) {
    SimplexOptions wide = sopts;
    wide.initial_step = 0.5;
    const SimplexResult retry = nelder_mead(neg, pack_gamma(moment_start), wide);
    if (retry.value <= best.value) best = retry;
    if (!best.converged && !retry.converged) {
      throw std::runtime_error("local_gaussian_fit: simplex search did not converge");
    }
  }
  if (!std::isfinite(best.value)) {
    throw std::runtime_error("local_gaussian_fit: objective unbounded at solution");
  }
  return unpack_gamma(best.x);
}

LgcField lgc_curve(const Eigen::MatrixXd& data, const Eigen::MatrixXd& grid) {
  const Eigen::Index n = data.rows();
  if (data.cols() != 2) throw std::invalid_argument("lgc_curve: data must be n x 2");
  if (n < 30) throw std::invalid_argument("lgc_curve: need at least 30 observations");

  LgcField field;
  for (int j = 0; j < 2; ++j) {
    const double mean = data.col(j).mean();
    const double sd = std::sqrt((data.col(j).array() - mean).square().sum() /
                                static_cast<double>(n - 1));
    if (!(sd > 0.0)) throw std::invalid_argument("lgc_curve: constant coordinate");
    field.bandwidth(j) = 1.1 * sd;
  }

  if (grid.size() == 0) {
    // Diagonal-auto rule: integer points (k, k) up to the largest value
    // present in either coordinate.
    const int kmax = static_cast<int>(std::floor(data.maxCoeff()));
    if (kmax < 1) throw std::invalid_argument("lgc_curve: no room for a diagonal grid");
    field.grid.resize(kmax, 2);
    for (int k = 1; k <= kmax; ++k) {
      field.grid(k - 1, 0) = k;
      field.grid(k - 1, 1) = k;
    }
  } else {
    if (grid.cols() != 2) throw std::invalid_argument("lgc_curve: grid must be m x 2");
    field.grid = grid;
  }

  const Eigen::Index m = field.grid.rows();
  field.params.reserve(static_cast<std::size_t>(m));
  field.rho.resize(m);
  LocalParams prev;
  for (Eigen::Index j = 0; j < m; ++j) {
    const Eigen::Vector2d x = field.grid.row(j).transpose();
    const LocalParams g =
        local_gaussian_fit(data, x, field.bandwidth, j > 0 ? &prev : nullptr);
    field.params.push_back(g);
    field.rho(j) = g.rho;
    prev = g;
  }
  return field;
}

double lgc_distance(const LgcField& a, const LgcField& b) {
  if (a.grid.rows() != b.grid.rows() || a.grid.rows() == 0) {
    throw std::invalid_argument("lgc_distance: grids differ in size");
  }
  if ((a.grid - b.grid).cwiseAbs().maxCoeff() > 1e-9) {
    throw std::invalid_argument("lgc_distance: grids differ");
  }
  return (a.rho - b.rho).squaredNorm() / static_cast<double>(a.rho.size());
}

namespace {

std::vector<double> default_grid(CopulaFamily family) {
  std::vector<double> g;
  switch (family) {
    case CopulaFamily::Clayton:
      for (int k = 0; k <= 30; ++k) g.push_back(0.5 + 0.25 * k);
      return g;
    case CopulaFamily::Gaussian:
      for (int k = 0; k <= 40; ++k) g.push_back((-100.0 + 5.0 * k) / 100.0);
      return g;
    case CopulaFamily::Independence:
      return {0.0};
  }
  throw std::invalid_argument("copula_select: unknown family");
}

// The regenerated paths need simulate_path's strict linear constraints;
// freely estimated parameters can sit a hair below zero, so they are
// clamped into the admissible set. Clamping negative entries removes
// feedback and can push the spectral radius of A + B past one, and a short
// sample can estimate past the boundary outright; either way the mean
// recursion would diverge, so shrink A and B until it contracts.
ModelParams regeneration_params(const ModelParams& fitted) {
  ModelParams p = fitted;
  if (p.kind == ModelKind::Linear) {
    p.d = p.d.cwiseMax(1e-6);
    p.A = p.A.cwiseMax(0.0);
    p.B = p.B.cwiseMax(0.0);
    constexpr double kTargetRadius = 0.98;
    const double radius = (p.A + p.B).eigenvalues().cwiseAbs().maxCoeff();
    if (radius > kTargetRadius) {
      const double shrink = kTargetRadius / radius;
      p.A *= shrink;
      p.B *= shrink;
    }
  }
  return p;
}

}  // namespace

CopulaSelection copula_select(const CountSeries& y,
                              const FitResult& fitted,
                              const CopulaSelectOptions& options) {
  y.validate();
  if (y.p() != 2) throw std::invalid_argument("copula_select: bivariate series required");
  if (options.families.empty()) throw std::invalid_argument("copula_select: no families given");
  if (options.replications < 1) {
    throw std::invalid_argument("copula_select: replications must be >= 1");
  }

  const LgcField observed = lgc_curve(y.values);
  const ModelParams regen = regeneration_params(fitted.params);

  struct Cell {
    int rep;
    std::size_t family_idx;
    std::size_t grid_idx;
    double phi;
  };
  std::vector<std::vector<double>> grids;
  for (const CopulaFamily f : options.families) {
    auto it = options.grids.find(f);
    grids.push_back(it != options.grids.end() ? it->second : default_grid(f));
    if (grids.back().empty()) throw std::invalid_argument("copula_select: empty phi grid");
  }
  std::vector<Cell> cells;
  for (int r = 0; r < options.replications; ++r) {
    for (std::size_t f = 0; f < options.families.size(); ++f) {
      for (std::size_t g = 0; g < grids[f].size(); ++g) {
        cells.push_back({r, f, g, grids[f][g]});
      }
    }
  }

  std::vector<double> dist(cells.size(), kInf);
  const auto worker = [&](std::size_t idx) {
    const Cell& c = cells[idx];
    CopulaSpec spec;
    spec.family = options.families[c.family_idx];
    spec.phi = c.phi;
    SimulationConfig cfg;
    cfg.n = y.n();
    cfg.seed = derive_seed(options.seed, static_cast<std::uint64_t>(idx));
    try {
      const SimulationResult sim = simulate_path(regen, spec, cfg);
      const LgcField synthetic = lgc_curve(sim.counts.values, observed.grid);
      dist[idx] = lgc_distance(observed, synthetic);
    } catch (const std::exception&) {
      // Degenerate draw or diverging path: this cell simply loses.
      dist[idx] = kInf;
    }
  };
  parallel_for(cells.size(), effective_workers(options.workers), worker);

  // Reduce: per-replication winner, then votes across replications.
  CopulaSelection sel;
  std::vector<double> curve_sum;
  std::vector<int> curve_count;
  std::size_t n_cells_per_rep = cells.size() / static_cast<std::size_t>(options.replications);
  curve_sum.assign(n_cells_per_rep, 0.0);
  curve_count.assign(n_cells_per_rep, 0);

  std::map<std::string, int> votes;
  std::map<std::string, std::vector<std::pair<double, double>>> winners;  // phi, dist
  for (int r = 0; r < options.replications; ++r) {
    double best = kInf;
    std::size_t best_cell = 0;
    bool found = false;
    for (std::size_t k = 0; k < n_cells_per_rep; ++k) {
      const std::size_t idx = static_cast<std::size_t>(r) * n_cells_per_rep + k;
      const double d = dist[idx];
      if (std::isfinite(d)) {
        curve_sum[k] += d;
        curve_count[k] += 1;
        if (d < best) {
          best = d;
          best_cell = idx;
          found = true;
        }
      }
    }
    if (!found) continue;
    const Cell& c = cells[best_cell];
    const std::string name = family_name(options.families[c.family_idx]);
    votes[name] += 1;
    winners[name].push_back({c.phi, best});
  }
  if (votes.empty()) throw std::runtime_error("copula_select: every candidate cell failed");

  for (std::size_t k = 0; k < n_cells_per_rep; ++k) {
    const Cell& c = cells[k];
    const std::string name = family_name(options.families[c.family_idx]);
    const double avg = curve_count[k] > 0 ? curve_sum[k] / curve_count[k] : kInf;
    sel.curves[name].push_back({c.phi, avg});
  }

  // Modal family; ties resolve in the order families were listed.
  std::string modal;
  int best_votes = -1;
  for (const CopulaFamily f : options.families) {
    const std::string name = family_name(f);
    const auto it = votes.find(name);
    const int v = it == votes.end() ? 0 : it->second;
    if (v > best_votes) {
      best_votes = v;
      modal = name;
      sel.chosen_family = f;
    }
  }

  const auto& wins = winners[modal];
  double phi_sum = 0.0, dist_sum = 0.0;
  for (const auto& [phi, d] : wins) {
    phi_sum += phi;
    dist_sum += d;
  }
  const double k = static_cast<double>(wins.size());
  sel.phi_hat = phi_sum / k;
  sel.distance = dist_sum / k;

  sel.bootstrap.replications = options.replications;
  sel.bootstrap.votes = votes;
  sel.bootstrap.phi_mean = sel.phi_hat;
  if (wins.size() > 1) {
    double ss = 0.0;
    for (const auto& [phi, d] : wins) ss += (phi - sel.phi_hat) * (phi - sel.phi_hat);
    sel.bootstrap.phi_se = std::sqrt(ss / (k - 1.0));
  }
  return sel;
}

}  // namespace countflow
