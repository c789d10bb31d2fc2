#pragma once

#include "nlfs/distributions.hpp"
#include "nlfs/types.hpp"

#include <string>
#include <vector>

namespace nlfs {

/// Hill response theta1 + theta2 * x^theta4 / (theta3^theta4 + x^theta4).
/// theta3 is the half-maximal covariate, theta4 the steepness.
struct HillParams {
  double theta1 = 0.0;
  double theta2 = 1.0;
  double theta3 = 0.5;
  double theta4 = 1.0;
};

/// Power response theta1 + theta2 * x^theta3.
struct PowerParams {
  double theta1 = 0.0;
  double theta2 = 1.0;
  double theta3 = 1.0;
};

template <class Scalar>
Scalar hill_response(Scalar x, Scalar theta1, Scalar theta2, Scalar theta3, Scalar theta4) {
  if (x == Scalar(0)) return theta1;
  // 1/(1 + (theta3/x)^theta4) stays finite when x^theta4 overflows
  const Scalar v = std::pow(theta3 / x, theta4);
  return theta1 + theta2 / (Scalar(1) + v);
}

template <class Scalar>
Scalar power_response(Scalar x, Scalar theta1, Scalar theta2, Scalar theta3) {
  if (x == Scalar(0)) return theta1;  // 0^theta3 := 0 for theta3 > 0; caller guards theta3 <= 0
  return theta1 + theta2 * std::pow(x, theta3);
}

/// Vector Hill mean; exact theta1 at x = 0. Throws std::invalid_argument for
/// non-positive theta3/theta4 or negative covariates.
Eigen::VectorXd hill_mean(Eigen::Ref<const Eigen::VectorXd> x, const HillParams& p);

/// Vector power mean with 0^theta3 := 0 for theta3 > 0. Throws
/// numerical_error when some x = 0 while theta3 <= 0 (singular evaluation).
Eigen::VectorXd power_mean(Eigen::Ref<const Eigen::VectorXd> x, const PowerParams& p);

/// n x 4 Hill Jacobian columns [1, x^t4/(x^t4 + t3^t4), -(t4/t3) s, log(x/t3) s]
/// with s = ((x/t3)^t4 + 1)^-1 ((t3/x)^t4 + 1)^-1. The theta2 prefactor of
/// columns 3-4 is dropped (the projection is invariant to column scaling).
/// Rows at x = 0 are the analytic limit (1, 0, 0, 0).
Eigen::MatrixXd hill_jacobian(Eigen::Ref<const Eigen::VectorXd> x, double theta3, double theta4);

/// n x 3 power Jacobian [1, x^t3, log(x) x^t3]; rows at x = 0 are (1, 0, 0).
Eigen::MatrixXd power_jacobian(Eigen::Ref<const Eigen::VectorXd> x, double theta3);

/// Prior over one scalar parameter, as used for the non-linear parameters and
/// the parametric baselines.
struct PriorSpec {
  enum class Family { normal, trunc_normal, log_normal };
  Family family = Family::normal;
  double a = 0.0;  // mean (normal / trunc_normal) or log-mean (log_normal)
  double b = 1.0;  // variance, or log-variance for log_normal

  double logpdf(double x) const;
  double sample(Rng& rng) const;
  double mean_value() const;  // used for chain initialization
  double variance() const { return family == Family::log_normal ? moment_var() : b; }
  bool positive_support() const { return family != Family::normal; }

 private:
  double moment_var() const;
};

enum class SpaceKind { hill, power };

/// One parametric model space: its kind and the priors of its non-linear
/// parameters (Hill: theta3, theta4; power: theta3).
struct ParametricSpace {
  SpaceKind kind = SpaceKind::hill;
  std::vector<PriorSpec> nl_priors;

  int n_nonlinear() const { return kind == SpaceKind::hill ? 2 : 1; }
  int jacobian_cols() const { return kind == SpaceKind::hill ? 4 : 3; }
  int n_linear() const { return 2; }  // intercept + scale for both models

  Eigen::MatrixXd jacobian(Eigen::Ref<const Eigen::VectorXd> x,
                           Eigen::Ref<const Eigen::VectorXd> theta_nl) const;
  /// Mean under the full parameter vector (theta1, theta2, then non-linear).
  Eigen::VectorXd mean(Eigen::Ref<const Eigen::VectorXd> x,
                       Eigen::Ref<const Eigen::VectorXd> theta_full) const;
  Eigen::VectorXd nl_init() const;
  std::vector<std::string> nl_names() const;
};

/// Hill space with the dose-response priors theta3 ~ N+(0.5, 0.05),
/// theta4 ~ LN matched to mean 3, variance 3.
ParametricSpace hill_space();

/// Power space with exponent prior theta3 ~ N(0.5, 0.25).
ParametricSpace power_space();

/// The prior function space: one parametric model or a combination.
struct FunctionSpace {
  std::vector<ParametricSpace> members;

  static FunctionSpace single(ParametricSpace m);
  /// Requires at least two members of distinct kinds.
  static FunctionSpace combined(std::vector<ParametricSpace> ms);
  static FunctionSpace hill() { return single(hill_space()); }
  static FunctionSpace power() { return single(power_space()); }
  static FunctionSpace hill_power() { return combined({hill_space(), power_space()}); }

  int n_nonlinear() const;
  std::string name() const;
  /// Non-linear parameter names, prefixed by space when combined.
  std::vector<std::string> nl_names() const;
  Eigen::VectorXd nl_init() const;
};

/// Horizontal concatenation of member Jacobians with every intercept column
/// after the first removed, evaluated at the concatenated non-linear
/// parameters. Duplicate or rank-deficient columns are handled downstream by
/// the rank-revealing projection.
Eigen::MatrixXd combined_jacobian(const std::vector<ParametricSpace>& members,
                                  Eigen::Ref<const Eigen::VectorXd> theta_nl,
                                  Eigen::Ref<const Eigen::VectorXd> x);

/// Orthogonal projection onto the numerically determined column space of a
/// matrix, applied through its orthonormal factor Q (never materialized as
/// n x n). Singular directions below max(n, s) * eps * sigma_max are dropped.
class ProjectionOperator {
 public:
  ProjectionOperator() = default;
  explicit ProjectionOperator(Eigen::MatrixXd q) : q_(std::move(q)) {}

  int rank() const { return static_cast<int>(q_.cols()); }
  const Eigen::MatrixXd& orthonormal_basis() const { return q_; }

  /// P y = Q (Q^T y).
  Eigen::VectorXd apply(Eigen::Ref<const Eigen::VectorXd> y) const {
    return q_ * (q_.transpose() * y);
  }

  /// Phi^T (I - P) Phi, computed as B^T B with B = Phi - Q (Q^T Phi),
  /// symmetric positive semidefinite by construction.
  Eigen::MatrixXd residual_gram(Eigen::Ref<const Eigen::MatrixXd> phi) const;

 private:
  Eigen::MatrixXd q_;  // n x rank, orthonormal columns
};

/// Rank-revealing construction of the projector onto col(H). Requires more
/// rows than columns.
ProjectionOperator projection(Eigen::Ref<const Eigen::MatrixXd> h);

}  // namespace nlfs
