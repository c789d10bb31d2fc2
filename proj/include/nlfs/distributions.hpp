#pragma once

#include "nlfs/rng.hpp"
#include "nlfs/types.hpp"

#include <Eigen/Cholesky>

namespace nlfs {

/// Normal distribution truncated from below at `lower` (default 0);
/// mu and var are the location and scale of the untruncated normal.
struct TruncNormalSpec {
  double mu = 0.0;
  double var = 1.0;
  double lower = 0.0;
};

/// Log-normal with the given mean and variance of log(X).
struct LogNormalSpec {
  double log_mu = 0.0;
  double log_var = 1.0;
};

/// Standard normal CDF.
double norm_cdf(double z);

/// Standard normal quantile (Wichura's AS241, double precision).
double norm_quantile(double p);

double normal_logpdf(double x, double mean, double var);

/// Draws from N(precision^{-1} * mean_rhs, precision^{-1}) by Cholesky.
/// Throws numerical_error with condition diagnostics if `precision` is not
/// positive definite.
Eigen::VectorXd sample_mvn_precision(Eigen::Ref<const Eigen::VectorXd> mean_rhs,
                                     Eigen::Ref<const Eigen::MatrixXd> precision, Rng& rng);

/// Draw reusing a precomputed factorization of the *unscaled* precision M,
/// where the full precision is M / sigma2. Mean solves M mu = mean_rhs.
Eigen::VectorXd sample_mvn_precision_chol(const Eigen::LLT<Eigen::MatrixXd>& chol_m,
                                          Eigen::Ref<const Eigen::VectorXd> mean_rhs,
                                          double sigma2, Rng& rng);

/// Inverse-CDF sampler: l = P(X < lower), u ~ Unif[l, 1], return the
/// u-quantile. Throws numerical_error when essentially all mass lies below
/// the truncation point.
double sample_trunc_normal(const TruncNormalSpec& spec, Rng& rng);

double trunc_normal_logpdf(double x, const TruncNormalSpec& spec);

/// Matches a log-normal to a target mean and variance of X itself:
/// log_var = log(1 + var/mean^2), log_mu = log(mean) - log_var/2.
LogNormalSpec lognormal_from_moments(double mean, double var);

double sample_lognormal(const LogNormalSpec& spec, Rng& rng);
double lognormal_logpdf(double x, const LogNormalSpec& spec);

/// Inverse-gamma with shape/scale parameterization, mean scale/(shape-1).
double sample_inverse_gamma(double shape, double scale, Rng& rng);

double sample_beta(double a, double b, Rng& rng);

/// A squared scale with a half-Cauchy C+(0,1) prior, kept with its
/// inverse-gamma auxiliary (Makalic-Schmidt construction). Conditioned on a
/// Gaussian quantity the scale multiplies, the update adds `shape_inc` to the
/// IG shape and `rate_inc` to the IG rate:
///   scale2 | aux, . ~ IG(1/2 + shape_inc, 1/aux + rate_inc)
///   aux | scale2    ~ IG(1, 1 + 1/scale2)
struct HalfCauchyScale {
  double scale2 = 1.0;
  double aux = 1.0;

  void update(double shape_inc, double rate_inc, Rng& rng) {
    scale2 = sample_inverse_gamma(0.5 + shape_inc, 1.0 / aux + rate_inc, rng);
    aux = sample_inverse_gamma(1.0, 1.0 + 1.0 / scale2, rng);
  }
};

}  // namespace nlfs
