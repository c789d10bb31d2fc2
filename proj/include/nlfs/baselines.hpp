#pragma once

#include "nlfs/basis.hpp"
#include "nlfs/chain.hpp"
#include "nlfs/function_space.hpp"
#include "nlfs/types.hpp"

#include <optional>

namespace nlfs {

/// K = R'R with R the (k-2) x k second-order difference matrix. K annihilates
/// coefficient vectors that are constant or linear in the index; rank k - 2.
Eigen::MatrixXd second_difference_penalty(int k);

/// Shared settings of the spline baselines (Bayesian B-spline and P-spline):
/// y = theta1 + Phi beta + eps over the full clamped basis, theta1 ~ N(m, v),
/// sigma2 ~ IG. The B-spline uses beta ~ N(0, sigma2 lambda2 I) with
/// lambda2 ~ IG(lambda_shape, lambda_scale); the P-spline uses
/// beta ~ N(0, sigma2 tau2 K^-) with tau2 ~ IG(tau_shape, tau_scale).
struct SplineFitConfig {
  int n_draws = 10000;
  int burn_in = 2000;
  int n_internal_knots = 15;
  int spline_order = 4;
  std::optional<Interval> domain;  // basis domain; defaults to the data range
  double theta1_mean = 0.0;
  double theta1_var = 1.0;
  double sigma2_shape = 0.001;
  double sigma2_scale = 0.001;
  double lambda_shape = 0.001;
  double lambda_scale = 0.001;
  double tau_shape = 1.0;
  double tau_scale = 0.005;
};

/// Unsmoothed Bayesian B-spline (ridge scaling on the coefficients).
FitResult fit_bspline(const Dataset& data, const SplineFitConfig& config, Rng& rng);

/// Penalized Bayesian smoothing spline with a second-order difference
/// penalty. The improper prior directions (K's null space) get no shape
/// contribution: the sigma2 and tau2 conditionals use rank(K) = k - 2.
FitResult fit_pspline(const Dataset& data, const SplineFitConfig& config, Rng& rng);

/// Settings of the fully parametric Bayesian fits: componentwise random-walk
/// MH over (theta1, theta2, non-linear parameters, log sigma2). Proposal sds
/// are per-parameter tuned fractions of the prior sd; prop_scale rescales
/// them all.
struct ParametricFitConfig {
  int n_draws = 10000;
  int burn_in = 2000;
  double theta1_mean = 0.0;
  double theta1_var = 1.0;
  double theta2_mean = 1.5;
  double theta2_var = 2.0;
  double log_sigma2_mean = -1.75;
  double log_sigma2_var = 1.0;
  double prop_scale = 1.0;
};

FitResult fit_parametric(const Dataset& data, const ParametricSpace& space,
                         const ParametricFitConfig& config, Rng& rng);

/// Parametric model plus a horseshoe-shrunk B-spline for misspecification:
/// y = h_theta(x) + Phi beta + eps, beta ~ N(0, sigma2 tau2 diag(lambda^2)),
/// tau and lambda_j ~ C+(0,1) via the inverse-gamma ladder; MH for theta.
/// Uses the same full basis as the other spline methods by default (theta1
/// lives in h_theta; the horseshoe shrinks the redundant direction away).
struct ParamHsConfig {
  int n_draws = 10000;
  int burn_in = 2000;
  int n_internal_knots = 15;
  int spline_order = 4;
  bool drop_intercept = false;
  std::optional<Interval> domain;  // basis domain; defaults to the data range
  double theta1_mean = 0.0;
  double theta1_var = 1.0;
  double theta2_mean = 1.5;
  double theta2_var = 2.0;
  double sigma2_shape = 0.001;
  double sigma2_scale = 0.001;
  double prop_scale = 1.0;
};

FitResult fit_param_plus_hs_spline(const Dataset& data, const ParametricSpace& space,
                                   const ParamHsConfig& config, Rng& rng);

}  // namespace nlfs
