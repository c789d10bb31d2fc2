#pragma once

#include "nlfs/basis.hpp"
#include "nlfs/chain.hpp"
#include "nlfs/distributions.hpp"
#include "nlfs/function_space.hpp"
#include "nlfs/types.hpp"

#include <optional>

namespace nlfs {

enum class ShrinkageKind {
  own_slice,    // omega ~ Beta(a, b), b = exp(-knots log(n)/2), slice sampled on bounded tau^2
  half_cauchy,  // tau ~ C+(0,1) via the inverse-gamma ladder, unbounded
};

struct NlfsConfig {
  int n_draws = 10000;  // total iterations; burn_in of them are discarded
  int burn_in = 2000;

  ShrinkageKind shrinkage = ShrinkageKind::own_slice;
  double shrink_a = 0.5;
  std::optional<double> shrink_b;  // own_slice default: exp(-n_internal_knots * log(n) / 2)
  Interval tau2_bounds{0.001, 10.0};

  double theta1_mean = 0.0;
  double theta1_var = 20.0;
  double sigma2_shape = 0.001;
  double sigma2_scale = 0.001;

  int n_internal_knots = 15;
  int spline_order = 4;
  std::optional<Interval> domain;  // basis domain; defaults to the data range

  std::optional<double> proposal_sd;  // override; default is each parameter's prior sd
  bool adaptive_proposals = false;    // window variance of the last 100 draws
  bool marginal_on_centered = true;   // theta marginal uses y - theta1*1 (not raw y)
};

struct McmcState {
  Eigen::VectorXd beta;
  double theta1 = 0.0;
  double sigma2 = 1.0;
  double tau2 = 1.0;
  Eigen::VectorXd theta_nl;
};

struct ShrinkageParams {
  double a = 0.5;
  double b = 0.5;
};

/// Beta(a, b) hyperparameters of the shrinkage weight for a run on n points.
ShrinkageParams resolve_shrinkage(const NlfsConfig& config, int n_data);

// ---------------------------------------------------------------------------
// Full-conditional cores. These operate on the precomputed Gram matrices
//   XtX = Phi'Phi and A = Phi'(I - P_theta)Phi
// and are the single implementation used by both run_nlfs and the
// (Phi, P)-shaped wrappers below.
// ---------------------------------------------------------------------------

/// Posterior mean of beta | rest: (XtX + A/tau2)^{-1} Phi'(y - theta1*1).
Eigen::VectorXd beta_conditional_mean(Eigen::Ref<const Eigen::MatrixXd> xtx,
                                      Eigen::Ref<const Eigen::MatrixXd> a_gram,
                                      Eigen::Ref<const Eigen::VectorXd> xty_tilde, double tau2);

/// Draw from beta | rest with precision (XtX + A/tau2)/sigma2.
Eigen::VectorXd beta_conditional_draw(Eigen::Ref<const Eigen::MatrixXd> xtx,
                                      Eigen::Ref<const Eigen::MatrixXd> a_gram,
                                      Eigen::Ref<const Eigen::VectorXd> xty_tilde, double sigma2,
                                      double tau2, Rng& rng);

/// Conjugate intercept draw; resid_sum = 1'(y - Phi beta).
double intercept_conditional_draw(double resid_sum, int n, double sigma2, double prior_mean,
                                  double prior_var, Rng& rng);

/// sigma2 | rest ~ IG((n+k)/2 + shape, (rss + quad/tau2)/2 + scale) with
/// rss = ||y - theta1*1 - Phi beta||^2 and quad = beta'A beta.
double sigma2_conditional_draw(double rss, double quad, int n, int k, double tau2, double shape,
                               double scale, Rng& rng);

/// One shrinkage-slice transition for tau (reported as tau^2), targeting
///   g(tau) = (-k/2 + b - 1/2) log tau^2 - (a + b) log(1 + tau^2) - penalty/tau^2
/// restricted to tau^2 in `bounds`, with penalty = beta'A beta / (2 sigma2).
double tau2_slice_step(double tau2, int k_dim, double a, double b, double penalty,
                       Interval bounds, Rng& rng);

/// Inverse-gamma ladder transition for tau^2 under tau ~ C+(0,1); unbounded.
double tau2_halfcauchy_step(HalfCauchyScale& hc, int k_dim, double penalty, Rng& rng);

/// Log marginal likelihood of the centered data with beta integrated out:
///   log N(y_t; 0, sigma2 tau2 Phi A^{-1} Phi' + sigma2 I_n)
/// evaluated through k x k factorizations only. xty = Phi'y_t, yty = y_t'y_t.
/// Throws numerical_error if A or XtX + A/tau2 is not positive definite.
double nlfs_log_marginal(Eigen::Ref<const Eigen::MatrixXd> xtx,
                         Eigen::Ref<const Eigen::MatrixXd> a_gram,
                         Eigen::Ref<const Eigen::VectorXd> xty, double yty, double sigma2,
                         double tau2, Eigen::Index n);

// ---------------------------------------------------------------------------
// Single updates over (Phi, P), recomputing the Gram matrices on the fly.
// Phi must be intercept-free.
// ---------------------------------------------------------------------------

Eigen::VectorXd update_beta(const McmcState& state, Eigen::Ref<const Eigen::MatrixXd> phi,
                            const ProjectionOperator& p, Eigen::Ref<const Eigen::VectorXd> y,
                            Rng& rng);

double update_intercept(const McmcState& state, Eigen::Ref<const Eigen::MatrixXd> phi,
                        Eigen::Ref<const Eigen::VectorXd> y, double prior_mean, double prior_var,
                        Rng& rng);

double update_sigma2(const McmcState& state, Eigen::Ref<const Eigen::MatrixXd> phi,
                     const ProjectionOperator& p, Eigen::Ref<const Eigen::VectorXd> y,
                     double shape, double scale, Rng& rng);

double update_tau2_slice(const McmcState& state, Eigen::Ref<const Eigen::MatrixXd> phi,
                         const ProjectionOperator& p, const NlfsConfig& config, int n_data,
                         Rng& rng);

double update_tau2_halfcauchy(const McmcState& state, Eigen::Ref<const Eigen::MatrixXd> phi,
                              const ProjectionOperator& p, HalfCauchyScale& hc, Rng& rng);

struct ThetaUpdate {
  Eigen::VectorXd theta_nl;
  std::vector<bool> accepted;
  int numerical_rejects = 0;
};

/// One Metropolis-Hastings sweep over the non-linear parameters, sequentially
/// per parameter, with beta marginalized out of the acceptance ratio.
/// Positive-support parameters use truncated-normal proposals with the
/// asymmetry correction; unconstrained ones use a normal random walk.
/// Proposals whose Jacobian or marginal factorization fails numerically are
/// rejected and counted.
ThetaUpdate update_theta_mh(const McmcState& state, const FunctionSpace& space,
                            Eigen::Ref<const Eigen::MatrixXd> phi, const Dataset& data,
                            const NlfsConfig& config, Rng& rng);

/// Runs the full NLFS chain: per iteration, recompute the Jacobian projection
/// at the current non-linear parameters, then Gibbs updates for beta, theta1,
/// sigma2, a slice (or half-Cauchy ladder) update for the shrinkage weight,
/// and MH updates for the non-linear parameters. Returns post-burn-in draws
/// with columns beta_*, theta1, sigma2, tau2, omega and the non-linear
/// parameters, plus acceptance rates.
FitResult run_nlfs(const Dataset& data, const FunctionSpace& space, const NlfsConfig& config,
                   Rng& rng);

}  // namespace nlfs
