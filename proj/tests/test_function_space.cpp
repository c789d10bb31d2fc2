#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "nlfs/basis.hpp"
#include "nlfs/function_space.hpp"
#include "nlfs/rng.hpp"
#include "oracles.hpp"

using namespace nlfs;

namespace {

Eigen::VectorXd uniform_x(int n, std::uint64_t seed, bool include_zero = false) {
  Rng rng(seed);
  Eigen::VectorXd x(n);
  for (int i = 0; i < n; ++i) x[i] = rng.uniform();
  if (include_zero) x[0] = 0.0;
  return x;
}

}  // namespace

TEST_CASE("hill_mean: half-maximal point, background, and table value") {
  Eigen::VectorXd x(3);
  x << 0.3, 0.0, 0.6;
  const HillParams p{0.0, 1.0, 0.3, 6.0};
  const Eigen::VectorXd m = hill_mean(x, p);
  CHECK(m[0] == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(m[1] == 0.0);  // exactly theta1 at x = 0
  CHECK(m[2] == doctest::Approx(46656.0 / 47385.0).epsilon(1e-14));

  const HillParams shifted{2.0, -3.0, 0.4, 2.5};
  Eigen::VectorXd xs(2);
  xs << 0.4, 0.0;
  const Eigen::VectorXd ms = hill_mean(xs, shifted);
  CHECK(ms[0] == doctest::Approx(2.0 - 1.5).epsilon(1e-14));
  CHECK(ms[1] == 2.0);
}

TEST_CASE("hill_mean: invalid parameters rejected") {
  Eigen::VectorXd x(1);
  x << 0.5;
  CHECK_THROWS_AS(hill_mean(x, {0, 1, -0.1, 2}), std::invalid_argument);
  CHECK_THROWS_AS(hill_mean(x, {0, 1, 0.5, 0.0}), std::invalid_argument);
  x << -0.5;
  CHECK_THROWS_AS(hill_mean(x, {0, 1, 0.5, 2}), std::invalid_argument);
}

TEST_CASE("hill_jacobian: half-max symmetry and x = 0 limit") {
  Eigen::VectorXd x(2);
  x << 0.3, 0.0;
  const Eigen::MatrixXd jac = hill_jacobian(x, 0.3, 6.0);
  CHECK(jac(0, 1) == doctest::Approx(0.5).epsilon(1e-14));
  // s = 1/4 at x = theta3, so column 3 is -(theta4/theta3)/4
  CHECK(jac(0, 2) == doctest::Approx(-(6.0 / 0.3) * 0.25).epsilon(1e-13));
  CHECK(jac(0, 3) == doctest::Approx(0.0));
  CHECK(jac(1, 0) == 1.0);
  CHECK(jac(1, 1) == 0.0);
  CHECK(jac(1, 2) == 0.0);
  CHECK(jac(1, 3) == 0.0);
}

TEST_CASE("hill_jacobian: columns match central finite differences") {
  Rng rng(99);
  const Eigen::VectorXd x = uniform_x(25, 5).array() + 0.01;  // away from 0
  for (int rep = 0; rep < 5; ++rep) {
    const double t3 = rng.uniform(0.1, 0.9);
    const double t4 = rng.uniform(0.8, 8.0);
    const Eigen::MatrixXd jac = hill_jacobian(x, t3, t4);

    // column 2: d/d theta2 at theta2 = 1 is the saturation term itself
    const Eigen::VectorXd fd2 = oracle::central_difference(
        [&](double v) { return hill_mean(x, {0.0, v, t3, t4}); }, 1.0);
    // columns 3-4: theta2 = 1 scaling
    const Eigen::VectorXd fd3 = oracle::central_difference(
        [&](double v) { return hill_mean(x, {0.0, 1.0, v, t4}); }, t3);
    const Eigen::VectorXd fd4 = oracle::central_difference(
        [&](double v) { return hill_mean(x, {0.0, 1.0, t3, v}); }, t4);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      CHECK(jac(i, 1) == doctest::Approx(fd2[i]).epsilon(1e-5));
      CHECK(jac(i, 2) == doctest::Approx(fd3[i]).epsilon(1e-5));
      if (std::abs(fd4[i]) > 1e-12)
        CHECK(jac(i, 3) == doctest::Approx(fd4[i]).epsilon(1e-5));
    }
  }
}

TEST_CASE("power_mean: affine case, square root, and x = 0") {
  Eigen::VectorXd x(3);
  x << 0.25, 0.0, 2.0;
  CHECK(power_mean(x, {0.5, 2.0, 1.0})[2] == doctest::Approx(4.5));
  const Eigen::VectorXd m = power_mean(x, {0.0, 1.0, 0.5});
  CHECK(m[0] == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(m[1] == 0.0);
  Eigen::VectorXd xz(1);
  xz << 0.0;
  CHECK(power_mean(xz, {3.0, 1.0, 0.5})[0] == 3.0);
  CHECK_THROWS_AS(power_mean(xz, {0.0, 1.0, -0.5}), numerical_error);
  CHECK_THROWS_AS(power_mean(xz, {0.0, 1.0, 0.0}), numerical_error);
}

TEST_CASE("power_jacobian: unit point, x = 0 limit, finite differences") {
  Eigen::VectorXd x(2);
  x << 1.0, 0.0;
  const Eigen::MatrixXd jac = power_jacobian(x, 0.5);
  CHECK(jac(0, 0) == 1.0);
  CHECK(jac(0, 1) == doctest::Approx(1.0));
  CHECK(jac(0, 2) == doctest::Approx(0.0));
  CHECK(jac(1, 0) == 1.0);
  CHECK(jac(1, 1) == 0.0);
  CHECK(jac(1, 2) == 0.0);

  Rng rng(17);
  const Eigen::VectorXd xr = uniform_x(25, 21).array() + 0.01;
  for (int rep = 0; rep < 5; ++rep) {
    const double t3 = rng.uniform(0.2, 2.0);
    const Eigen::MatrixXd j = power_jacobian(xr, t3);
    const Eigen::VectorXd fd = oracle::central_difference(
        [&](double v) { return power_mean(xr, {0.0, 1.0, v}); }, t3);
    for (Eigen::Index i = 0; i < xr.size(); ++i)
      CHECK(j(i, 2) == doctest::Approx(fd[i]).epsilon(1e-5));
  }
}

TEST_CASE("combined_jacobian: hill+power has six columns, one intercept") {
  const Eigen::VectorXd x = uniform_x(30, 3);
  Eigen::VectorXd theta(3);
  theta << 0.3, 6.0, 0.5;  // hill theta3, theta4, power theta3
  const std::vector<ParametricSpace> members{hill_space(), power_space()};
  const Eigen::MatrixXd h = combined_jacobian(members, theta, x);
  REQUIRE(h.cols() == 6);
  CHECK((h.col(0).array() == 1.0).all());
  // no other constant column
  for (Eigen::Index c = 1; c < h.cols(); ++c)
    CHECK((h.col(c) - Eigen::VectorXd::Ones(x.size())).norm() > 1e-6);
}

TEST_CASE("combined_jacobian: duplicate space collapses to the single-space projector") {
  const Eigen::VectorXd x = uniform_x(40, 9);
  Eigen::VectorXd theta(4);
  theta << 0.3, 6.0, 0.3, 6.0;
  const std::vector<ParametricSpace> twice{hill_space(), hill_space()};
  const Eigen::MatrixXd h2 = combined_jacobian(twice, theta, x);
  REQUIRE(h2.cols() == 7);
  const ProjectionOperator p2 = projection(h2);
  const ProjectionOperator p1 = projection(hill_jacobian(x, 0.3, 6.0));
  CHECK(p2.rank() == p1.rank());
  Rng rng(4);
  for (int rep = 0; rep < 5; ++rep) {
    Eigen::VectorXd y(x.size());
    for (Eigen::Index i = 0; i < y.size(); ++i) y[i] = rng.normal();
    CHECK((p2.apply(y) - p1.apply(y)).norm() < 1e-10);
  }
}

TEST_CASE("combined_jacobian: member spaces are nested in the combination") {
  const Eigen::VectorXd x = uniform_x(50, 31);
  Rng rng(6);
  for (int rep = 0; rep < 5; ++rep) {
    Eigen::VectorXd theta(3);
    theta << rng.uniform(0.2, 0.8), rng.uniform(1.0, 7.0), rng.uniform(0.2, 1.5);
    const std::vector<ParametricSpace> members{hill_space(), power_space()};
    const ProjectionOperator pc = projection(combined_jacobian(members, theta, x));
    const ProjectionOperator ph = projection(hill_jacobian(x, theta[0], theta[1]));
    const ProjectionOperator pp = projection(power_jacobian(x, theta[2]));
    Eigen::VectorXd y(x.size());
    for (Eigen::Index i = 0; i < y.size(); ++i) y[i] = rng.normal();
    const double rc = (y - pc.apply(y)).norm();
    CHECK(rc <= (y - ph.apply(y)).norm() + 1e-10);
    CHECK(rc <= (y - pp.apply(y)).norm() + 1e-10);
  }
}

TEST_CASE("projection: single constant column gives the mean map") {
  const int n = 25;
  const Eigen::MatrixXd h = Eigen::MatrixXd::Ones(n, 1);
  const ProjectionOperator p = projection(h);
  CHECK(p.rank() == 1);
  Rng rng(8);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) y[i] = rng.normal();
  const Eigen::VectorXd py = p.apply(y);
  for (int i = 0; i < n; ++i) CHECK(py[i] == doctest::Approx(y.mean()).epsilon(1e-13));
}

TEST_CASE("projection: invariant to invertible column scaling (Lemma 1 property)") {
  const Eigen::VectorXd x = uniform_x(40, 15);
  Rng rng(16);
  for (int rep = 0; rep < 10; ++rep) {
    const double t3 = rng.uniform(0.15, 0.85);
    const double t4 = rng.uniform(0.8, 7.0);
    const Eigen::MatrixXd h = hill_jacobian(x, t3, t4);
    Eigen::MatrixXd h_scaled = h;
    const double theta2 = rng.uniform(0.1, 5.0) * (rng.uniform() < 0.5 ? -1.0 : 1.0);
    h_scaled.col(2) *= theta2;
    h_scaled.col(3) *= theta2;
    h_scaled.col(1) *= 7.3;
    const ProjectionOperator p = projection(h);
    const ProjectionOperator ps = projection(h_scaled);
    Eigen::VectorXd y(x.size());
    for (Eigen::Index i = 0; i < y.size(); ++i) y[i] = rng.normal();
    CHECK((p.apply(y) - ps.apply(y)).norm() < 1e-10 * y.norm());
  }
}

TEST_CASE("projection: projector identities on random full-rank input") {
  Rng rng(23);
  const int n = 60, s = 5;
  Eigen::MatrixXd h(n, s);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < s; ++j) h(i, j) = rng.normal();
  const ProjectionOperator p = projection(h);
  CHECK(p.rank() == s);
  const Eigen::MatrixXd q = p.orthonormal_basis();
  const Eigen::MatrixXd pm = q * q.transpose();
  CHECK((pm - pm.transpose()).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((pm * pm - pm).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(pm.trace() == doctest::Approx(static_cast<double>(s)).epsilon(1e-10));
}

TEST_CASE("projection: rank-deficient input drops the dependent directions") {
  Rng rng(27);
  const int n = 30;
  Eigen::MatrixXd h(n, 4);
  for (int i = 0; i < n; ++i) {
    h(i, 0) = 1.0;
    h(i, 1) = rng.normal();
  }
  h.col(2) = 2.0 * h.col(1);
  h.col(3) = h.col(0) - 0.5 * h.col(1);
  const ProjectionOperator p = projection(h);
  CHECK(p.rank() == 2);
}

TEST_CASE("projection: requires more rows than columns") {
  CHECK_THROWS_AS(projection(Eigen::MatrixXd::Ones(3, 3)), std::invalid_argument);
}

TEST_CASE("residual_gram equals the dense Phi'(I-P)Phi") {
  const Eigen::VectorXd x = uniform_x(45, 77);
  const SplineBasis basis{make_knots(8, 4, {0.0, 1.0}), true};
  const Eigen::MatrixXd phi = design_matrix(basis, x);
  const Eigen::MatrixXd h = hill_jacobian(x, 0.4, 3.0);
  const ProjectionOperator p = projection(h);
  const Eigen::MatrixXd q = p.orthonormal_basis();
  const Eigen::MatrixXd dense =
      phi.transpose() * (Eigen::MatrixXd::Identity(x.size(), x.size()) - q * q.transpose()) * phi;
  const Eigen::MatrixXd fast = p.residual_gram(phi);
  CHECK((dense - fast).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((fast - fast.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("FunctionSpace: combined factory rejects duplicates and singletons") {
  CHECK_THROWS_AS(FunctionSpace::combined({hill_space()}), std::invalid_argument);
  CHECK_THROWS_AS(FunctionSpace::combined({hill_space(), hill_space()}), std::invalid_argument);
  const FunctionSpace hp = FunctionSpace::hill_power();
  CHECK(hp.name() == "hill+power");
  CHECK(hp.n_nonlinear() == 3);
  const auto names = hp.nl_names();
  REQUIRE(names.size() == 3);
  CHECK(names[0] == "hill_theta3");
  CHECK(names[2] == "power_theta3");
}

TEST_CASE("hill space priors match the dose-response specification") {
  const ParametricSpace s = hill_space();
  REQUIRE(s.nl_priors.size() == 2);
  CHECK(s.nl_priors[0].a == doctest::Approx(0.5));
  CHECK(s.nl_priors[0].b == doctest::Approx(0.05));
  // LN matched to mean 3, variance 3
  CHECK(s.nl_priors[1].a == doctest::Approx(0.9547712524422194).epsilon(1e-12));
  CHECK(s.nl_priors[1].b == doctest::Approx(0.28768207245178085).epsilon(1e-12));
}
