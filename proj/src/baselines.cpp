#include "nlfs/baselines.hpp"

#include "nlfs/distributions.hpp"
#include "nlfs/nlfs_sampler.hpp"

#include <cmath>

namespace nlfs {

Eigen::MatrixXd second_difference_penalty(int k) {
  if (k < 3) throw std::invalid_argument("second_difference_penalty: k must be >= 3");
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(k - 2, k);
  for (int i = 0; i < k - 2; ++i) {
    r(i, i) = 1.0;
    r(i, i + 1) = -2.0;
    r(i, i + 2) = 1.0;
  }
  return r.transpose() * r;
}

namespace {

struct SplineWork {
  SplineBasis basis;
  Eigen::MatrixXd phi, xtx;
  Eigen::RowVectorXd phi_colsum;
  int n = 0, k = 0;
};

SplineWork make_spline_work(const Dataset& data, int knots, int order,
                            std::optional<Interval> domain, bool drop_intercept) {
  SplineWork w;
  const Interval dom = domain.value_or(Interval{data.x.minCoeff(), data.x.maxCoeff()});
  w.basis = SplineBasis{make_knots(knots, order, dom), drop_intercept};
  w.phi = design_matrix(w.basis, data.x);
  w.xtx = w.phi.transpose() * w.phi;
  w.phi_colsum = w.phi.colwise().sum();
  w.n = static_cast<int>(data.size());
  w.k = static_cast<int>(w.phi.cols());
  if (w.n <= w.k) throw std::invalid_argument("spline fit: need n > basis dimension");
  return w;
}

std::vector<std::string> spline_names(int k, std::initializer_list<const char*> extra) {
  std::vector<std::string> names;
  for (int j = 1; j <= k; ++j) names.push_back("beta_" + std::to_string(j));
  for (const char* e : extra) names.emplace_back(e);
  return names;
}

// Conjugate Gibbs chain shared by the B-spline and P-spline fits. The two
// differ only in the coefficient penalty matrix (identity vs K), the prior on
// its scale, and the rank entering the shape increments.
FitResult run_penalized_spline(const Dataset& data, const SplineFitConfig& config,
                               const Eigen::MatrixXd& penalty, int penalty_rank,
                               double scale_shape, double scale_scale, const char* scale_name,
                               Rng& rng) {
  auto w = make_spline_work(data, config.n_internal_knots, config.spline_order, config.domain,
                            false);
  if (config.burn_in >= config.n_draws)
    throw std::invalid_argument("spline fit: burn_in must be < n_draws");
  const double y_sum = data.y.sum();

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(w.k);
  double theta1 = config.theta1_mean;
  double sigma2 = 1.0;
  double scale2 = 1.0;  // lambda2 (B-spline) or tau2 (P-spline)

  const auto names = spline_names(w.k, {"theta1", "sigma2", scale_name});
  const int kept = config.n_draws - config.burn_in;
  Eigen::MatrixXd samples(kept, static_cast<Eigen::Index>(names.size()));

  Eigen::VectorXd y_tilde(w.n), xty(w.k), fit(w.n);
  for (int it = 0; it < config.n_draws; ++it) {
    y_tilde = data.y.array() - theta1;
    xty.noalias() = w.phi.transpose() * y_tilde;
    beta = beta_conditional_draw(w.xtx, penalty, xty, sigma2, scale2, rng);
    fit.noalias() = w.phi * beta;

    const double resid_sum = y_sum - w.phi_colsum.dot(beta);
    theta1 = intercept_conditional_draw(resid_sum, w.n, sigma2, config.theta1_mean,
                                        config.theta1_var, rng);

    const double rss = (data.y.array() - theta1 - fit.array()).matrix().squaredNorm();
    const double quad = beta.dot(penalty * beta);
    sigma2 = sigma2_conditional_draw(rss, quad, w.n, penalty_rank, scale2, config.sigma2_shape,
                                     config.sigma2_scale, rng);

    scale2 = sample_inverse_gamma(scale_shape + 0.5 * penalty_rank,
                                  scale_scale + quad / (2.0 * sigma2), rng);

    if (it >= config.burn_in) {
      const int row = it - config.burn_in;
      samples.block(row, 0, 1, w.k) = beta.transpose();
      samples(row, w.k) = theta1;
      samples(row, w.k + 1) = sigma2;
      samples(row, w.k + 2) = scale2;
    }
  }

  FitResult result;
  result.family = FitFamily::spline;
  result.basis = w.basis;
  result.draws.names = names;
  result.draws.samples = std::move(samples);
  result.draws.burn_in = config.burn_in;
  return result;
}

// Componentwise random-walk MH step over one scalar coordinate of theta.
// Returns true when accepted. log_post evaluates the target at the candidate.
template <class LogPost>
bool rw_mh_step(double& value, double prop_sd, bool positive, double& cur_log_post,
                LogPost log_post, Rng& rng) {
  double cand;
  double log_q_correction = 0.0;
  if (positive) {
    const TruncNormalSpec fwd{value, prop_sd * prop_sd, 0.0};
    cand = sample_trunc_normal(fwd, rng);
    const TruncNormalSpec rev{cand, prop_sd * prop_sd, 0.0};
    log_q_correction = trunc_normal_logpdf(value, rev) - trunc_normal_logpdf(cand, fwd);
  } else {
    cand = value + prop_sd * rng.normal();
  }
  double cand_log_post;
  try {
    cand_log_post = log_post(cand);
  } catch (const numerical_error&) {
    return false;
  } catch (const std::invalid_argument&) {
    return false;
  }
  const double log_hr = cand_log_post - cur_log_post + log_q_correction;
  if (std::isfinite(log_hr) && std::log(rng.uniform()) < log_hr) {
    value = cand;
    cur_log_post = cand_log_post;
    return true;
  }
  return false;
}

// Priors of the full parametric vector (theta1, theta2, non-linear...),
// with random-walk step sizes as multiples of each prior sd. The multipliers
// were tuned once on the study generators so acceptance lands in [0.2, 0.5]:
// the linear parameters need much smaller steps than their vague priors
// suggest, the steepness and noise parameters larger ones.
struct ParamBlock {
  std::vector<PriorSpec> priors;
  std::vector<double> step_mult;
};

ParamBlock parametric_priors(const ParametricSpace& space, double t1_mean, double t1_var,
                             double t2_mean, double t2_var) {
  ParamBlock block;
  block.priors.push_back({PriorSpec::Family::normal, t1_mean, t1_var});
  block.step_mult.push_back(0.05);
  block.priors.push_back({PriorSpec::Family::normal, t2_mean, t2_var});
  block.step_mult.push_back(0.05);
  for (const auto& p : space.nl_priors) {
    block.priors.push_back(p);
    if (space.kind == SpaceKind::hill) {
      block.step_mult.push_back(p.family == PriorSpec::Family::log_normal ? 0.55 : 0.1);
    } else {
      block.step_mult.push_back(0.15);
    }
  }
  return block;
}

constexpr double kLogSigma2StepMult = 0.55;

std::vector<std::string> parametric_names(const ParametricSpace& space) {
  std::vector<std::string> names{"theta1", "theta2"};
  for (const auto& n : space.nl_names()) names.push_back(n);
  return names;
}

}  // namespace

FitResult fit_bspline(const Dataset& data, const SplineFitConfig& config, Rng& rng) {
  const int k = config.n_internal_knots + config.spline_order;
  return run_penalized_spline(data, config, Eigen::MatrixXd::Identity(k, k), k,
                              config.lambda_shape, config.lambda_scale, "lambda2", rng);
}

FitResult fit_pspline(const Dataset& data, const SplineFitConfig& config, Rng& rng) {
  const int k = config.n_internal_knots + config.spline_order;
  return run_penalized_spline(data, config, second_difference_penalty(k), k - 2,
                              config.tau_shape, config.tau_scale, "tau2", rng);
}

FitResult fit_parametric(const Dataset& data, const ParametricSpace& space,
                         const ParametricFitConfig& config, Rng& rng) {
  if (config.burn_in >= config.n_draws)
    throw std::invalid_argument("fit_parametric: burn_in must be < n_draws");
  const int n = static_cast<int>(data.size());
  const auto block = parametric_priors(space, config.theta1_mean, config.theta1_var,
                                       config.theta2_mean, config.theta2_var);
  const auto& priors = block.priors;
  const PriorSpec log_sigma2_prior{PriorSpec::Family::normal, config.log_sigma2_mean,
                                   config.log_sigma2_var};
  const int p = static_cast<int>(priors.size());

  Eigen::VectorXd theta(p);
  for (int j = 0; j < p; ++j) theta[j] = priors[static_cast<std::size_t>(j)].mean_value();
  double log_sigma2 = config.log_sigma2_mean;

  // joint log posterior in (theta, log sigma2); the log sigma2 prior already
  // includes the Jacobian of the log transform
  const auto log_post = [&](const Eigen::VectorXd& th, double ls2) {
    const double s2 = std::exp(ls2);
    const Eigen::VectorXd mean = space.mean(data.x, th);
    double lp = -0.5 * n * std::log(2.0 * M_PI * s2) -
                (data.y - mean).squaredNorm() / (2.0 * s2);
    for (int j = 0; j < p; ++j) lp += priors[static_cast<std::size_t>(j)].logpdf(th[j]);
    lp += log_sigma2_prior.logpdf(ls2);
    return lp;
  };

  double cur_lp = log_post(theta, log_sigma2);

  auto names = parametric_names(space);
  names.push_back("sigma2");
  const int kept = config.n_draws - config.burn_in;
  Eigen::MatrixXd samples(kept, static_cast<Eigen::Index>(names.size()));
  std::vector<long> accept(static_cast<std::size_t>(p) + 1, 0);

  for (int it = 0; it < config.n_draws; ++it) {
    for (int j = 0; j < p; ++j) {
      const auto& prior = priors[static_cast<std::size_t>(j)];
      const double prop_sd = config.prop_scale * block.step_mult[static_cast<std::size_t>(j)] *
                             std::sqrt(prior.variance());
      double value = theta[j];
      const bool ok = rw_mh_step(
          value, prop_sd, prior.positive_support(), cur_lp,
          [&](double cand) {
            Eigen::VectorXd th = theta;
            th[j] = cand;
            return log_post(th, log_sigma2);
          },
          rng);
      if (ok) {
        theta[j] = value;
        ++accept[static_cast<std::size_t>(j)];
      }
    }
    {
      const double prop_sd =
          config.prop_scale * kLogSigma2StepMult * std::sqrt(config.log_sigma2_var);
      const bool ok = rw_mh_step(
          log_sigma2, prop_sd, false, cur_lp,
          [&](double cand) { return log_post(theta, cand); }, rng);
      if (ok) ++accept.back();
    }

    if (it >= config.burn_in) {
      const int row = it - config.burn_in;
      for (int j = 0; j < p; ++j) samples(row, j) = theta[j];
      samples(row, p) = std::exp(log_sigma2);
    }
  }

  FitResult result;
  result.family = FitFamily::parametric;
  result.space = FunctionSpace::single(space);
  result.draws.names = names;
  result.draws.samples = std::move(samples);
  result.draws.burn_in = config.burn_in;
  for (int j = 0; j < p; ++j)
    result.draws.acceptance.emplace_back(
        "accept_" + names[static_cast<std::size_t>(j)],
        static_cast<double>(accept[static_cast<std::size_t>(j)]) / config.n_draws);
  result.draws.acceptance.emplace_back("accept_log_sigma2",
                                       static_cast<double>(accept.back()) / config.n_draws);
  return result;
}

FitResult fit_param_plus_hs_spline(const Dataset& data, const ParametricSpace& space,
                                   const ParamHsConfig& config, Rng& rng) {
  if (config.burn_in >= config.n_draws)
    throw std::invalid_argument("fit_param_plus_hs_spline: burn_in must be < n_draws");
  auto w = make_spline_work(data, config.n_internal_knots, config.spline_order, config.domain,
                            config.drop_intercept);
  const auto block = parametric_priors(space, config.theta1_mean, config.theta1_var,
                                       config.theta2_mean, config.theta2_var);
  const auto& priors = block.priors;
  const int p = static_cast<int>(priors.size());

  Eigen::VectorXd theta(p);
  for (int j = 0; j < p; ++j) theta[j] = priors[static_cast<std::size_t>(j)].mean_value();
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(w.k);
  double sigma2 = 1.0;
  HalfCauchyScale tau;
  std::vector<HalfCauchyScale> lambda(static_cast<std::size_t>(w.k));

  auto names = parametric_names(space);
  for (int j = 1; j <= w.k; ++j) names.push_back("beta_" + std::to_string(j));
  names.push_back("sigma2");
  names.push_back("tau2");
  const int kept = config.n_draws - config.burn_in;
  Eigen::MatrixXd samples(kept, static_cast<Eigen::Index>(names.size()));
  std::vector<long> accept(static_cast<std::size_t>(p), 0);

  Eigen::VectorXd h_mean = space.mean(data.x, theta);
  Eigen::VectorXd spline_fit = Eigen::VectorXd::Zero(w.n);
  Eigen::MatrixXd prec(w.k, w.k);

  // target for the theta MH steps: residual likelihood given the spline part
  const auto theta_log_post = [&](const Eigen::VectorXd& th) {
    const Eigen::VectorXd mean = space.mean(data.x, th);
    double lp = -(data.y - mean - spline_fit).squaredNorm() / (2.0 * sigma2);
    for (int j = 0; j < p; ++j) lp += priors[static_cast<std::size_t>(j)].logpdf(th[j]);
    return lp;
  };

  double cur_lp = theta_log_post(theta);

  for (int it = 0; it < config.n_draws; ++it) {
    // theta
    for (int j = 0; j < p; ++j) {
      const auto& prior = priors[static_cast<std::size_t>(j)];
      const double prop_sd = config.prop_scale * block.step_mult[static_cast<std::size_t>(j)] *
                             std::sqrt(prior.variance());
      double value = theta[j];
      const bool ok = rw_mh_step(
          value, prop_sd, prior.positive_support(), cur_lp,
          [&](double cand) {
            Eigen::VectorXd th = theta;
            th[j] = cand;
            return theta_log_post(th);
          },
          rng);
      if (ok) {
        theta[j] = value;
        ++accept[static_cast<std::size_t>(j)];
      }
    }
    h_mean = space.mean(data.x, theta);

    // beta with horseshoe prior N(0, sigma2 tau2 diag(lambda^2))
    prec = w.xtx;
    for (int j = 0; j < w.k; ++j)
      prec(j, j) += 1.0 / (tau.scale2 * lambda[static_cast<std::size_t>(j)].scale2);
    Eigen::LLT<Eigen::MatrixXd> llt(prec);
    if (llt.info() != Eigen::Success)
      throw numerical_error("fit_param_plus_hs_spline: beta precision not SPD");
    beta = sample_mvn_precision_chol(llt, w.phi.transpose() * (data.y - h_mean), sigma2, rng);
    spline_fit.noalias() = w.phi * beta;

    // local and global scales via the inverse-gamma ladder
    double quad = 0.0;  // sum beta_j^2 / lambda_j^2
    for (int j = 0; j < w.k; ++j) {
      auto& l = lambda[static_cast<std::size_t>(j)];
      l.update(0.5, beta[j] * beta[j] / (2.0 * sigma2 * tau.scale2), rng);
      quad += beta[j] * beta[j] / l.scale2;
    }
    tau.update(0.5 * w.k, quad / (2.0 * sigma2), rng);

    // noise variance
    const double rss = (data.y - h_mean - spline_fit).squaredNorm();
    sigma2 = sample_inverse_gamma(config.sigma2_shape + 0.5 * (w.n + w.k),
                                  config.sigma2_scale + 0.5 * (rss + quad / tau.scale2), rng);
    cur_lp = theta_log_post(theta);

    if (it >= config.burn_in) {
      const int row = it - config.burn_in;
      for (int j = 0; j < p; ++j) samples(row, j) = theta[j];
      samples.block(row, p, 1, w.k) = beta.transpose();
      samples(row, p + w.k) = sigma2;
      samples(row, p + w.k + 1) = tau.scale2;
    }
  }

  FitResult result;
  result.family = FitFamily::parametric_spline;
  result.basis = w.basis;
  result.space = FunctionSpace::single(space);
  result.draws.names = names;
  result.draws.samples = std::move(samples);
  result.draws.burn_in = config.burn_in;
  for (int j = 0; j < p; ++j)
    result.draws.acceptance.emplace_back(
        "accept_" + names[static_cast<std::size_t>(j)],
        static_cast<double>(accept[static_cast<std::size_t>(j)]) / config.n_draws);
  return result;
}

}  // namespace nlfs
