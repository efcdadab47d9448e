#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "countflow/inference.hpp"
#include "countflow/model.hpp"
#include "countflow/rng.hpp"
#include "countflow/simulate.hpp"

using namespace countflow;

namespace {

ModelParams first_linear_design() {
  ModelParams params;
  params.kind = ModelKind::Linear;
  params.d.resize(2);
  params.d << 1.0, 2.0;
  params.A = Eigen::Vector2d(0.3, 0.25).asDiagonal();
  params.B = Eigen::Vector2d(0.5, 0.4).asDiagonal();
  return params;
}

ModelParams first_loglinear_design() {
  ModelParams params;
  params.kind = ModelKind::LogLinear;
  params.d.resize(2);
  params.d << 0.5, 1.0;
  params.A.resize(2, 2);
  params.A << -0.3, 0.0, 0.0, 0.25;
  params.B = Eigen::Vector2d(0.5, 0.4).asDiagonal();
  return params;
}

CountSeries series_from(std::initializer_list<std::initializer_list<double>> rows) {
  CountSeries y;
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto p = static_cast<Eigen::Index>(rows.begin()->size());
  y.values.resize(n, p);
  Eigen::Index i = 0;
  for (const auto& row : rows) {
    Eigen::Index j = 0;
    for (const double v : row) y.values(i, j++) = v;
    ++i;
  }
  return y;
}

// Random stable parameters for gradient checks.
ModelParams random_params(ModelKind kind, Eigen::Index p, Xoshiro256pp& rng) {
  ModelParams params;
  params.kind = kind;
  params.d.resize(p);
  params.A.resize(p, p);
  params.B.resize(p, p);
  for (Eigen::Index i = 0; i < p; ++i) {
    params.d(i) = 0.2 + rng.uniform();
    for (Eigen::Index j = 0; j < p; ++j) {
      const double a = 0.35 * rng.uniform() / static_cast<double>(p);
      const double b = 0.45 * rng.uniform() / static_cast<double>(p);
      params.A(i, j) = kind == ModelKind::Linear ? a : (rng.uniform() < 0.4 ? -a : a);
      params.B(i, j) = kind == ModelKind::Linear ? b : (rng.uniform() < 0.4 ? -b : b);
    }
  }
  return params;
}

CountSeries random_counts(Eigen::Index n, Eigen::Index p, double level, Xoshiro256pp& rng) {
  CountSeries y;
  y.values.resize(n, p);
  for (Eigen::Index t = 0; t < n; ++t) {
    for (Eigen::Index j = 0; j < p; ++j) {
      y.values(t, j) = std::floor(rng.uniform() * level);
    }
  }
  return y;
}

Eigen::VectorXd fd_score(const ModelParams& params, const CountSeries& y, double h) {
  const Eigen::VectorXd theta = pack_theta(params);
  Eigen::VectorXd g(theta.size());
  for (Eigen::Index k = 0; k < theta.size(); ++k) {
    Eigen::VectorXd up = theta, dn = theta;
    up(k) += h;
    dn(k) -= h;
    const double fu = quasi_loglik(unpack_theta(params.kind, params.dim(), up), y);
    const double fd = quasi_loglik(unpack_theta(params.kind, params.dim(), dn), y);
    g(k) = (fu - fd) / (2.0 * h);
  }
  return g;
}

}  // namespace

TEST_SUITE("inference") {

TEST_CASE("theta packing layout is column-major") {
  CHECK(theta_dim(2) == 10);
  CHECK(theta_dim(3) == 21);
  ModelParams params;
  params.kind = ModelKind::Linear;
  params.d.resize(2);
  params.d << 1.0, 2.0;
  params.A.resize(2, 2);
  params.A << 3.0, 5.0, 4.0, 6.0;
  params.B.resize(2, 2);
  params.B << 7.0, 9.0, 8.0, 10.0;
  const Eigen::VectorXd theta = pack_theta(params);
  for (Eigen::Index k = 0; k < 10; ++k) CHECK(theta(k) == static_cast<double>(k + 1));
  const ModelParams back = unpack_theta(ModelKind::Linear, 2, theta);
  CHECK(back.A == params.A);
  CHECK(back.B == params.B);
  CHECK(back.d == params.d);
}

TEST_CASE("single-point likelihood oracles") {
  ModelParams params;
  params.kind = ModelKind::Linear;
  params.d.resize(2);
  params.d << 1.0, 1.0;
  params.A = Eigen::MatrixXd::Zero(2, 2);
  params.B = Eigen::MatrixXd::Zero(2, 2);
  CHECK(quasi_loglik(params, series_from({{2, 1}})) == doctest::Approx(-2.0).epsilon(1e-14));

  params.d << 1.0, 2.0;
  CHECK(quasi_loglik(params, series_from({{0, 0}})) == doctest::Approx(-3.0).epsilon(1e-14));
}

TEST_CASE("two-step likelihood against a hand recursion") {
  ModelParams params;
  params.kind = ModelKind::Linear;
  params.d = Eigen::VectorXd::Constant(1, 0.5);
  params.A = Eigen::MatrixXd::Constant(1, 1, 0.3);
  params.B = Eigen::MatrixXd::Constant(1, 1, 0.4);
  const CountSeries y = series_from({{2}, {3}});
  // Presample state and count proxy are both the column mean 2.5.
  const double l1 = 0.5 + 0.3 * 2.5 + 0.4 * 2.5;
  const double l2 = 0.5 + 0.3 * l1 + 0.4 * 2.0;
  const double expected = 2.0 * std::log(l1) - l1 + 3.0 * std::log(l2) - l2;
  CHECK(quasi_loglik(params, y) == doctest::Approx(expected).epsilon(1e-14));

  const FilterResult filt = filter_intensity_and_gradients(params, y);
  CHECK(filt.path.values(0, 0) == doctest::Approx(l1).epsilon(1e-14));
  CHECK(filt.path.values(1, 0) == doctest::Approx(l2).epsilon(1e-14));
}

TEST_CASE("log-linear two-step likelihood by hand") {
  ModelParams params;
  params.kind = ModelKind::LogLinear;
  params.d = Eigen::VectorXd::Constant(1, 0.2);
  params.A = Eigen::MatrixXd::Constant(1, 1, -0.3);
  params.B = Eigen::MatrixXd::Constant(1, 1, 0.4);
  const CountSeries y = series_from({{1}, {4}});
  const double nu0 = std::log(2.5 + 1.0);  // presample on the log scale
  const double nu1 = 0.2 - 0.3 * nu0 + 0.4 * nu0;
  const double nu2 = 0.2 - 0.3 * nu1 + 0.4 * std::log(2.0);
  const double expected =
      1.0 * nu1 - std::exp(nu1) + 4.0 * nu2 - std::exp(nu2);
  CHECK(quasi_loglik(params, y) == doctest::Approx(expected).epsilon(1e-13));
}

TEST_CASE("infeasible linear path yields -inf, not an exception") {
  ModelParams params;
  params.kind = ModelKind::Linear;
  params.d = Eigen::VectorXd::Constant(1, -5.0);
  params.A = Eigen::MatrixXd::Constant(1, 1, 0.1);
  params.B = Eigen::MatrixXd::Constant(1, 1, 0.1);
  const CountSeries y = series_from({{1}, {2}, {0}});
  CHECK(quasi_loglik(params, y) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("analytic score matches central differences") {
  Xoshiro256pp rng(808);
  for (int rep = 0; rep < 8; ++rep) {
    for (const ModelKind kind : {ModelKind::Linear, ModelKind::LogLinear}) {
      const ModelParams params = random_params(kind, 2, rng);
      const CountSeries y = random_counts(25, 2, 6.0, rng);
      const Eigen::VectorXd analytic = score(params, y);
      const Eigen::VectorXd numeric = fd_score(params, y, 1e-6);
      const double scale = std::max(1.0, numeric.cwiseAbs().maxCoeff());
      CAPTURE(rep);
      CAPTURE(kind == ModelKind::Linear);
      CHECK((analytic - numeric).cwiseAbs().maxCoeff() / scale < 1e-7);
    }
  }
}

TEST_CASE("filter gradients match finite differences of the path") {
  Xoshiro256pp rng(333);
  const ModelParams params = random_params(ModelKind::Linear, 2, rng);
  const CountSeries y = random_counts(12, 2, 5.0, rng);
  const FilterResult filt = filter_intensity_and_gradients(params, y);
  const Eigen::VectorXd theta = pack_theta(params);
  const double h = 1e-6;
  for (const Eigen::Index k : {0L, 3L, 7L, 9L}) {
    Eigen::VectorXd up = theta, dn = theta;
    up(k) += h;
    dn(k) -= h;
    const auto pu = filter_intensity_and_gradients(unpack_theta(params.kind, 2, up), y);
    const auto pd = filter_intensity_and_gradients(unpack_theta(params.kind, 2, dn), y);
    for (const Eigen::Index t : {0L, 5L, 11L}) {
      const Eigen::VectorXd fd =
          (pu.path.values.row(t) - pd.path.values.row(t)).transpose() / (2.0 * h);
      CHECK((filt.gradients[static_cast<std::size_t>(t)].col(k) - fd).cwiseAbs().maxCoeff() <
            1e-6);
    }
  }
}

TEST_CASE("observed hessian matches finite differences of the score") {
  Xoshiro256pp rng(44);
  for (const ModelKind kind : {ModelKind::Linear, ModelKind::LogLinear}) {
    CAPTURE(kind == ModelKind::Linear);
    const ModelParams params = random_params(kind, 2, rng);
    const CountSeries y = random_counts(15, 2, 5.0, rng);
    const Eigen::MatrixXd hess = observed_hessian(params, y);
    CHECK((hess - hess.transpose()).cwiseAbs().maxCoeff() < 1e-8);

    const Eigen::VectorXd theta = pack_theta(params);
    const double h = 1e-5;
    for (const Eigen::Index k : {0L, 4L, 8L}) {
      Eigen::VectorXd up = theta, dn = theta;
      up(k) += h;
      dn(k) -= h;
      const Eigen::VectorXd su = score(unpack_theta(kind, 2, up), y);
      const Eigen::VectorXd sd = score(unpack_theta(kind, 2, dn), y);
      const Eigen::VectorXd fd = (su - sd) / (2.0 * h);
      // hess is -d2 loglik, the score derivative is +d2 loglik.
      const double scale = std::max(1.0, fd.cwiseAbs().maxCoeff());
      CHECK((hess.col(k) + fd).cwiseAbs().maxCoeff() / scale < 1e-5);
    }
  }
}

TEST_CASE("information matrices are symmetric and positive semidefinite") {
  Xoshiro256pp rng(55);
  const ModelParams params = random_params(ModelKind::Linear, 2, rng);
  const CountSeries y = random_counts(60, 2, 5.0, rng);
  const InformationMatrices info = hessian_and_information(params, y);
  CHECK((info.H - info.H.transpose()).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((info.G - info.G.transpose()).cwiseAbs().maxCoeff() < 1e-10);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> esH(info.H), esG(info.G);
  CHECK(esH.eigenvalues().minCoeff() > -1e-8);
  CHECK(esG.eigenvalues().minCoeff() > -1e-8);
}

TEST_CASE("component relabeling permutes the likelihood consistently") {
  Xoshiro256pp rng(66);
  const ModelParams params = random_params(ModelKind::Linear, 2, rng);
  const CountSeries y = random_counts(40, 2, 5.0, rng);

  ModelParams swapped = params;
  std::swap(swapped.d(0), swapped.d(1));
  Eigen::PermutationMatrix<2> perm;
  perm.indices() << 1, 0;
  swapped.A = perm * params.A * perm.transpose();
  swapped.B = perm * params.B * perm.transpose();
  CountSeries ys = y;
  ys.values.col(0).swap(ys.values.col(1));

  CHECK(quasi_loglik(swapped, ys) == doctest::Approx(quasi_loglik(params, y)).epsilon(1e-13));
}

TEST_CASE("linear fit recovers the generating parameters loosely") {
  SimulationConfig cfg;
  cfg.n = 3000;
  cfg.seed = 71;
  const ModelParams truth = first_linear_design();
  const SimulationResult sim = simulate_path(truth, {CopulaFamily::Gaussian, 0.5}, cfg);
  const FitResult res = fit(ModelKind::Linear, sim.counts);
  CHECK(res.convergence.status == "converged");
  CHECK(res.convergence.grad_norm < 1e-6);
  CHECK((res.params.d - truth.d).cwiseAbs().maxCoeff() < 0.6);
  CHECK((res.params.A - truth.A).cwiseAbs().maxCoeff() < 0.2);
  CHECK((res.params.B - truth.B).cwiseAbs().maxCoeff() < 0.15);
  CHECK(res.std_errors.allFinite());
  CHECK((res.std_errors.array() >= 0.0).all());
  CHECK(res.fitted_intensity.values.rows() == 3000);
  // Score at the optimum is numerically zero.
  CHECK(score(res.params, sim.counts).cwiseAbs().maxCoeff() < 1e-5);
}

TEST_CASE("log-linear fit recovers the generating parameters loosely") {
  SimulationConfig cfg;
  cfg.n = 3000;
  cfg.seed = 72;
  const ModelParams truth = first_loglinear_design();
  const SimulationResult sim = simulate_path(truth, {CopulaFamily::Independence, 0.0}, cfg);
  const FitResult res = fit(ModelKind::LogLinear, sim.counts);
  CHECK(res.convergence.status == "converged");
  CHECK((res.params.A - truth.A).cwiseAbs().maxCoeff() < 0.25);
  CHECK((res.params.B - truth.B).cwiseAbs().maxCoeff() < 0.2);
}

TEST_CASE("positive transform keeps linear estimates strictly positive") {
  // This sample's unconstrained optimum is interior (every entry positive),
  // so the log-coordinate fit must match it and return strictly positive
  // entries throughout.
  ModelParams truth;
  truth.kind = ModelKind::Linear;
  truth.d.resize(2);
  truth.d << 1.0, 0.8;
  truth.A.resize(2, 2);
  truth.A << 0.3, 0.1, 0.1, 0.3;
  truth.B.resize(2, 2);
  truth.B << 0.2, 0.1, 0.1, 0.2;
  SimulationConfig cfg;
  cfg.n = 1200;
  cfg.seed = 91;
  const SimulationResult sim = simulate_path(truth, {CopulaFamily::Independence, 0.0}, cfg);
  FitOptions opts;
  opts.positive_transform = true;
  const FitResult res = fit(ModelKind::Linear, sim.counts, opts);
  CHECK((res.params.d.array() > 0.0).all());
  CHECK((res.params.A.array() > 0.0).all());
  CHECK((res.params.B.array() > 0.0).all());
  const FitResult raw = fit(ModelKind::Linear, sim.counts);
  CHECK(res.loglik == doctest::Approx(raw.loglik).epsilon(1e-6));

  // With true zeros the optimum sits on the boundary; the transform may drive
  // those entries to zero but never below it.
  SimulationConfig diag_cfg;
  diag_cfg.n = 800;
  diag_cfg.seed = 73;
  const SimulationResult diag =
      simulate_path(first_linear_design(), {CopulaFamily::Independence, 0.0}, diag_cfg);
  const FitResult res_diag = fit(ModelKind::Linear, diag.counts, opts);
  CHECK((res_diag.params.d.array() > 0.0).all());
  CHECK((res_diag.params.A.array() >= 0.0).all());
  CHECK((res_diag.params.B.array() >= 0.0).all());
}

TEST_CASE("free mask pins entries at their starting values") {
  SimulationConfig cfg;
  cfg.n = 600;
  cfg.seed = 74;
  const SimulationResult sim =
      simulate_path(first_linear_design(), {CopulaFamily::Independence, 0.0}, cfg);
  FitOptions opts;
  // theta = (d1 d2 | a11 a21 a12 a22 | b11 b21 b12 b22): pin the
  // off-diagonals of A and B to zero.
  opts.free_mask = std::vector<bool>{true, true, true, false, false, true,
                                     true, false, false, true};
  const FitResult res = fit(ModelKind::Linear, sim.counts, opts);
  CHECK(res.params.A(1, 0) == 0.0);
  CHECK(res.params.A(0, 1) == 0.0);
  CHECK(res.params.B(1, 0) == 0.0);
  CHECK(res.params.B(0, 1) == 0.0);
  CHECK(res.std_errors(3) == 0.0);
  CHECK(res.std_errors(4) == 0.0);
  CHECK(res.params.A(0, 0) != 0.0);
}

TEST_CASE("fit refuses tiny samples") {
  Xoshiro256pp rng(1);
  const CountSeries y = random_counts(9, 2, 4.0, rng);
  CHECK_THROWS_AS((void)fit(ModelKind::Linear, y), std::invalid_argument);
}

TEST_CASE("pearson residuals formula") {
  const CountSeries y = series_from({{4}, {1}});
  IntensityPath path;
  path.scale = IntensityScale::Mean;
  path.values.resize(2, 1);
  path.values << 4.0, 2.0;
  const Eigen::MatrixXd r = pearson_residuals(y, path);
  CHECK(r(0, 0) == doctest::Approx(0.0));
  CHECK(r(1, 0) == doctest::Approx((1.0 - 2.0) / std::sqrt(2.0)).epsilon(1e-14));
}

TEST_CASE("one-step prediction equals the recursion applied to the tail") {
  Xoshiro256pp rng(77);
  const ModelParams params = random_params(ModelKind::Linear, 2, rng);
  const CountSeries y = random_counts(30, 2, 5.0, rng);
  const FilterResult filt = filter_intensity_and_gradients(params, y);
  const Eigen::VectorXd last_state = filt.path.values.row(29).transpose();
  const Eigen::VectorXd expected =
      mean_update(params, last_state, y.values.row(29).transpose());
  CHECK((predict_one_step(params, y) - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("starting values are stable and finite") {
  SimulationConfig cfg;
  cfg.n = 500;
  cfg.seed = 81;
  for (const auto& truth : {first_linear_design(), first_loglinear_design()}) {
    const SimulationResult sim =
        simulate_path(truth, {CopulaFamily::Independence, 0.0}, cfg);
    const ModelParams start = starting_values(truth.kind, sim.counts);
    CHECK(start.d.allFinite());
    CHECK(start.A.allFinite());
    CHECK(start.B.allFinite());
    CHECK(std::isfinite(quasi_loglik(start, sim.counts)));
  }
}

}  // TEST_SUITE
