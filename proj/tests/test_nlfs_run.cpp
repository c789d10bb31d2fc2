#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "nlfs/diagnostics.hpp"
#include "nlfs/nlfs_sampler.hpp"
#include "nlfs/simulation.hpp"

#include <cmath>

using namespace nlfs;

TEST_CASE("run_nlfs: identical (data, config, seed) reproduce the chain bitwise") {
  Rng dr(derive_seed({1, 2, 3}));
  const Dataset data = generate_dataset(TruthSpec::hill(), 60, 0.005, dr);
  NlfsConfig config;
  config.n_draws = 500;
  config.burn_in = 100;
  Rng r1(99), r2(99);
  const FitResult a = run_nlfs(data, FunctionSpace::hill(), config, r1);
  const FitResult b = run_nlfs(data, FunctionSpace::hill(), config, r2);
  REQUIRE(a.draws.samples.rows() == b.draws.samples.rows());
  CHECK(a.draws.samples == b.draws.samples);
  Rng r3(100);
  const FitResult c = run_nlfs(data, FunctionSpace::hill(), config, r3);
  CHECK(a.draws.samples != c.draws.samples);
}

TEST_CASE("run_nlfs: zero-noise constant data is recovered flat") {
  Rng dr(7);
  Dataset data;
  data.x.resize(60);
  for (int i = 0; i < 60; ++i) data.x[i] = dr.uniform();
  data.y = Eigen::VectorXd::Constant(60, 0.7);
  NlfsConfig config;
  config.n_draws = 3000;
  config.burn_in = 1000;
  Rng rng(5);
  const FitResult fit = run_nlfs(data, FunctionSpace::hill(), config, rng);
  const Eigen::VectorXd curve = posterior_mean_curve(fit, data.x);
  for (Eigen::Index i = 0; i < curve.size(); ++i)
    CHECK(std::abs(curve[i] - 0.7) < 1e-2);
}

TEST_CASE("run_nlfs: correct space shrinks, misspecified space releases") {
  Rng dr(derive_seed({21, 1}));
  const Dataset data = generate_dataset(TruthSpec::hill(), 50, 0.005, dr);
  NlfsConfig config;
  config.n_draws = 4000;
  config.burn_in = 1000;
  config.theta1_var = 1.0;

  Rng r1(11);
  const FitResult correct = run_nlfs(data, FunctionSpace::hill(), config, r1);
  CHECK(correct.draws.column("omega").mean() > 0.9);

  Rng r2(12);
  const FitResult wrong = run_nlfs(data, FunctionSpace::power(), config, r2);
  CHECK(wrong.draws.column("omega").mean() < 0.2);
  CHECK(wrong.draws.column("omega").mean() <
        correct.draws.column("omega").mean() - 0.5);
}

TEST_CASE("run_nlfs: draw layout, acceptance records, and state invariants") {
  Rng dr(derive_seed({22, 1}));
  const Dataset data = generate_dataset(TruthSpec::hill(), 40, 0.05, dr);
  NlfsConfig config;
  config.n_draws = 400;
  config.burn_in = 150;
  config.n_internal_knots = 8;
  Rng rng(3);
  const FitResult fit = run_nlfs(data, FunctionSpace::hill_power(), config, rng);

  CHECK(fit.draws.n_draws() == 250);
  CHECK(fit.draws.burn_in == 150);
  REQUIRE(fit.draws.col("hill_theta3") >= 0);
  REQUIRE(fit.draws.col("power_theta3") >= 0);
  REQUIRE(fit.draws.col("omega") >= 0);
  CHECK(fit.basis.dim() == 8 + 4 - 1);

  // invariants of every stored state
  const Eigen::VectorXd sigma2 = fit.draws.column("sigma2");
  const Eigen::VectorXd tau2 = fit.draws.column("tau2");
  const Eigen::VectorXd omega = fit.draws.column("omega");
  const Eigen::VectorXd t3 = fit.draws.column("hill_theta3");
  const Eigen::VectorXd t4 = fit.draws.column("hill_theta4");
  for (Eigen::Index m = 0; m < fit.draws.n_draws(); ++m) {
    CHECK(sigma2[m] > 0.0);
    CHECK(tau2[m] >= 0.001);
    CHECK(tau2[m] <= 10.0);
    CHECK(omega[m] == doctest::Approx(1.0 / (1.0 + tau2[m])).epsilon(1e-12));
    CHECK(t3[m] > 0.0);
    CHECK(t4[m] > 0.0);
  }

  bool has_rate = false;
  for (const auto& [name, value] : fit.draws.acceptance) {
    if (name.rfind("accept_", 0) == 0) {
      has_rate = true;
      CHECK(value >= 0.0);
      CHECK(value <= 1.0);
    }
  }
  CHECK(has_rate);
}

TEST_CASE("run_nlfs: numerical failures carry the iteration index") {
  Rng dr(derive_seed({23, 1}));
  Dataset data = generate_dataset(TruthSpec::hill(), 40, 0.005, dr);
  data.y[0] = std::numeric_limits<double>::quiet_NaN();
  NlfsConfig config;
  config.n_draws = 50;
  config.burn_in = 10;
  Rng rng(1);
  try {
    run_nlfs(data, FunctionSpace::hill(), config, rng);
    FAIL("expected numerical_error");
  } catch (const numerical_error& err) {
    CHECK(std::string(err.what()).find("iteration") != std::string::npos);
  }
}

TEST_CASE("run_nlfs: basis functions with no data support are dropped, not fatal") {
  // a wide gap right after the lowest covariate starves the leading interior
  // basis functions of data; their coefficients are non-identified under the
  // projection prior and must come back as exact zeros
  Rng dr(derive_seed({27, 1}));
  Dataset data;
  data.x.resize(60);
  data.x[0] = 0.0;
  for (int i = 1; i < 60; ++i) data.x[i] = 0.3 + 0.7 * dr.uniform();
  data.y = hill_mean(data.x, {0.0, 1.0, 0.5, 3.0});
  for (int i = 0; i < 60; ++i) data.y[i] += 0.05 * dr.normal();

  NlfsConfig config;
  config.n_draws = 600;
  config.burn_in = 200;
  Rng rng(6);
  const FitResult fit = run_nlfs(data, FunctionSpace::hill(), config, rng);

  const Eigen::MatrixXd phi = design_matrix(fit.basis, data.x);
  int dead_columns = 0;
  for (int j = 0; j < static_cast<int>(phi.cols()); ++j) {
    const bool no_data = phi.col(j).squaredNorm() == 0.0;
    const Eigen::VectorXd beta_j = fit.draws.column("beta_" + std::to_string(j + 1));
    if (no_data) {
      ++dead_columns;
      CHECK(beta_j.cwiseAbs().maxCoeff() == 0.0);
    } else {
      CHECK(beta_j.cwiseAbs().maxCoeff() > 0.0);
    }
  }
  CHECK(dead_columns > 0);
  CHECK(posterior_mean_curve(fit, data.x).allFinite());
}

TEST_CASE("run_nlfs: precondition violations are rejected up front") {
  Rng dr(derive_seed({24, 1}));
  const Dataset small = generate_dataset(TruthSpec::hill(), 15, 0.005, dr);
  NlfsConfig config;
  Rng rng(1);
  CHECK_THROWS_AS(run_nlfs(small, FunctionSpace::hill(), config, rng), std::invalid_argument);

  const Dataset ok = generate_dataset(TruthSpec::hill(), 60, 0.005, dr);
  NlfsConfig bad;
  bad.burn_in = bad.n_draws;
  CHECK_THROWS_AS(run_nlfs(ok, FunctionSpace::hill(), bad, rng), std::invalid_argument);
}

TEST_CASE("update wrappers agree with the cores on one sweep") {
  Rng dr(derive_seed({25, 1}));
  const Dataset data = generate_dataset(TruthSpec::hill(), 45, 0.005, dr);
  const SplineBasis basis{make_knots(10, 4, {0.0, 1.0}), true};
  const Eigen::MatrixXd phi = design_matrix(basis, data.x);
  const ProjectionOperator p = projection(hill_jacobian(data.x, 0.35, 5.0));

  McmcState state;
  state.beta = Eigen::VectorXd::Zero(phi.cols());
  state.theta1 = 0.1;
  state.sigma2 = 0.01;
  state.tau2 = 0.5;
  state.theta_nl = FunctionSpace::hill().nl_init();

  Rng r1(8), r2(8);
  const Eigen::VectorXd via_wrapper = update_beta(state, phi, p, data.y, r1);
  const Eigen::VectorXd via_core = beta_conditional_draw(
      phi.transpose() * phi, p.residual_gram(phi),
      phi.transpose() * (data.y.array() - state.theta1).matrix(), state.sigma2, state.tau2, r2);
  CHECK(via_wrapper == via_core);

  Rng r3(9), r4(9);
  state.beta = via_wrapper;
  const double s2_wrapper = update_sigma2(state, phi, p, data.y, 0.001, 0.001, r3);
  const Eigen::MatrixXd a_gram = p.residual_gram(phi);
  const double rss = (data.y.array() - state.theta1 - (phi * state.beta).array())
                         .matrix()
                         .squaredNorm();
  const double s2_core = sigma2_conditional_draw(
      rss, state.beta.dot(a_gram * state.beta), static_cast<int>(data.size()),
      static_cast<int>(phi.cols()), state.tau2, 0.001, 0.001, r4);
  CHECK(s2_wrapper == s2_core);

  // slice wrapper resolves the own-slice hyperparameters from the config
  NlfsConfig config;
  Rng r5(10), r6(10);
  const double t2_wrapper = update_tau2_slice(state, phi, p, config, 45, r5);
  const auto sp = resolve_shrinkage(config, 45);
  const double t2_core = tau2_slice_step(
      state.tau2, static_cast<int>(phi.cols()), sp.a, sp.b,
      state.beta.dot(a_gram * state.beta) / (2.0 * state.sigma2), config.tau2_bounds, r6);
  CHECK(t2_wrapper == t2_core);
}

TEST_CASE("resolve_shrinkage: own-slice b decays with n, half-Cauchy is fixed") {
  NlfsConfig config;
  const auto s50 = resolve_shrinkage(config, 50);
  CHECK(s50.a == 0.5);
  CHECK(s50.b == doctest::Approx(std::exp(-15.0 * std::log(50.0) / 2.0)));
  const auto s500 = resolve_shrinkage(config, 500);
  CHECK(s500.b < s50.b);
  config.shrinkage = ShrinkageKind::half_cauchy;
  const auto hc = resolve_shrinkage(config, 50);
  CHECK(hc.a == 0.5);
  CHECK(hc.b == 0.5);
  config.shrinkage = ShrinkageKind::own_slice;
  config.shrink_b = 0.25;
  CHECK(resolve_shrinkage(config, 50).b == 0.25);
}

TEST_CASE("curve_draws mean equals posterior_mean_curve for spline fits") {
  Rng dr(derive_seed({26, 1}));
  const Dataset data = generate_dataset(TruthSpec::hill(), 50, 0.05, dr);
  NlfsConfig config;
  config.n_draws = 300;
  config.burn_in = 100;
  Rng rng(4);
  const FitResult fit = run_nlfs(data, FunctionSpace::hill(), config, rng);
  Eigen::VectorXd grid(21);
  for (int i = 0; i < 21; ++i) grid[i] = data.x.minCoeff() +
                                         (data.x.maxCoeff() - data.x.minCoeff()) * i / 20.0;
  const Eigen::MatrixXd draws = curve_draws(fit, grid);
  const Eigen::VectorXd mean = posterior_mean_curve(fit, grid);
  CHECK((draws.colwise().mean().transpose() - mean).cwiseAbs().maxCoeff() < 1e-12);
}
