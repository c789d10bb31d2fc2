#include "nlfs/distributions.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace nlfs {

double norm_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

// AS241 (Wichura 1988), PPND16: maximum absolute error ~1e-16 on (0,1).
double norm_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("norm_quantile: p must be in (0,1)");
  const double q = p - 0.5;
  double r;
  if (std::abs(q) <= 0.425) {
    r = 0.180625 - q * q;
    return q *
           (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                 6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
               1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
             1.3314166789178437745e2) * r + 3.3871328727963666080e0) /
           (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                 3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
               5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
             4.2313330701600911252e1) * r + 1.0);
  }
  r = q < 0.0 ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    val = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
              3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
            4.63033784615654529590e0) * r + 1.42343711074968357734e0) /
          (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
              6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
            2.05319162663775882187e0) * r + 1.0);
  } else {
    r -= 5.0;
    val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
              2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
            5.46378491116411436990e0) * r + 6.65790464350110377720e0) /
          (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
              1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
            5.99832206555887937690e-1) * r + 1.0);
  }
  return q < 0.0 ? -val : val;
}

double normal_logpdf(double x, double mean, double var) {
  const double d = x - mean;
  return -0.5 * (std::log(2.0 * M_PI * var) + d * d / var);
}

Eigen::VectorXd sample_mvn_precision(Eigen::Ref<const Eigen::VectorXd> mean_rhs,
                                     Eigen::Ref<const Eigen::MatrixXd> precision, Rng& rng) {
  Eigen::LLT<Eigen::MatrixXd> chol(precision);
  if (chol.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "sample_mvn_precision: Cholesky failed on " << precision.rows() << "x"
        << precision.cols() << " precision (diag range [" << precision.diagonal().minCoeff()
        << ", " << precision.diagonal().maxCoeff() << "])";
    throw numerical_error(msg.str());
  }
  return sample_mvn_precision_chol(chol, mean_rhs, 1.0, rng);
}

Eigen::VectorXd sample_mvn_precision_chol(const Eigen::LLT<Eigen::MatrixXd>& chol_m,
                                          Eigen::Ref<const Eigen::VectorXd> mean_rhs,
                                          double sigma2, Rng& rng) {
  const Eigen::Index k = mean_rhs.size();
  Eigen::VectorXd draw = chol_m.solve(mean_rhs);
  Eigen::VectorXd z(k);
  for (Eigen::Index i = 0; i < k; ++i) z[i] = rng.normal();
  // covariance (M/sigma2)^{-1} = sigma2 * L^{-T} L^{-1}
  draw.noalias() += std::sqrt(sigma2) * chol_m.matrixU().solve(z);
  return draw;
}

double sample_trunc_normal(const TruncNormalSpec& spec, Rng& rng) {
  if (!(spec.var > 0.0)) throw std::invalid_argument("sample_trunc_normal: var must be > 0");
  const double sd = std::sqrt(spec.var);
  const double l = norm_cdf((spec.lower - spec.mu) / sd);
  if (l >= 1.0 - 1e-15)
    throw numerical_error("sample_trunc_normal: truncation removes essentially all mass");
  const double u = l + (1.0 - l) * rng.uniform();
  return spec.mu + sd * norm_quantile(u);
}

double trunc_normal_logpdf(double x, const TruncNormalSpec& spec) {
  if (x < spec.lower) return -std::numeric_limits<double>::infinity();
  const double sd = std::sqrt(spec.var);
  const double l = norm_cdf((spec.lower - spec.mu) / sd);
  return normal_logpdf(x, spec.mu, spec.var) - std::log1p(-l);
}

LogNormalSpec lognormal_from_moments(double mean, double var) {
  if (!(mean > 0.0 && var > 0.0))
    throw std::invalid_argument("lognormal_from_moments: mean and var must be > 0");
  const double log_var = std::log1p(var / (mean * mean));
  return {std::log(mean) - 0.5 * log_var, log_var};
}

double sample_lognormal(const LogNormalSpec& spec, Rng& rng) {
  return std::exp(spec.log_mu + std::sqrt(spec.log_var) * rng.normal());
}

double lognormal_logpdf(double x, const LogNormalSpec& spec) {
  if (!(x > 0.0)) return -std::numeric_limits<double>::infinity();
  const double lx = std::log(x);
  return normal_logpdf(lx, spec.log_mu, spec.log_var) - lx;
}

double sample_inverse_gamma(double shape, double scale, Rng& rng) {
  if (!(shape > 0.0 && scale > 0.0))
    throw std::invalid_argument("sample_inverse_gamma: shape and scale must be > 0");
  // reciprocal-gamma in log space: for tiny shapes the gamma draw underflows
  // (its log median scales like log(u)/shape), so form log X = log scale -
  // log G and clamp into the finite double range
  double log_g;
  if (shape < 1.0) {
    log_g = std::log(rng.gamma(shape + 1.0, 1.0)) + std::log(rng.uniform()) / shape;
  } else {
    log_g = std::log(rng.gamma(shape, 1.0));
  }
  const double log_x = std::log(scale) - log_g;
  const double log_max = std::log(std::numeric_limits<double>::max());
  if (log_x >= log_max) return std::numeric_limits<double>::max();
  if (log_x <= -log_max) return std::numeric_limits<double>::min();
  return std::exp(log_x);
}

double sample_beta(double a, double b, Rng& rng) {
  const double ga = rng.gamma(a, 1.0);
  const double gb = rng.gamma(b, 1.0);
  return ga / (ga + gb);
}

}  // namespace nlfs
