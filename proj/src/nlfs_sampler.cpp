#include "nlfs/nlfs_sampler.hpp"

#include <cmath>
#include <deque>
#include <sstream>

namespace nlfs {

namespace {

Eigen::LLT<Eigen::MatrixXd> chol_or_throw(const Eigen::MatrixXd& m, const char* what) {
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << what << ": Cholesky failed on " << m.rows() << "x" << m.cols()
        << " matrix (diag range [" << m.diagonal().minCoeff() << ", "
        << m.diagonal().maxCoeff() << "])";
    throw numerical_error(msg.str());
  }
  return llt;
}

double logdet_from_chol(const Eigen::LLT<Eigen::MatrixXd>& llt) {
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

}  // namespace

ShrinkageParams resolve_shrinkage(const NlfsConfig& config, int n_data) {
  if (config.shrinkage == ShrinkageKind::half_cauchy) return {0.5, 0.5};
  ShrinkageParams sp;
  sp.a = config.shrink_a;
  sp.b = config.shrink_b
             ? *config.shrink_b
             : std::exp(-0.5 * config.n_internal_knots * std::log(static_cast<double>(n_data)));
  return sp;
}

Eigen::VectorXd beta_conditional_mean(Eigen::Ref<const Eigen::MatrixXd> xtx,
                                      Eigen::Ref<const Eigen::MatrixXd> a_gram,
                                      Eigen::Ref<const Eigen::VectorXd> xty_tilde, double tau2) {
  Eigen::MatrixXd m = xtx + a_gram / tau2;
  return chol_or_throw(m, "beta_conditional_mean").solve(xty_tilde);
}

Eigen::VectorXd beta_conditional_draw(Eigen::Ref<const Eigen::MatrixXd> xtx,
                                      Eigen::Ref<const Eigen::MatrixXd> a_gram,
                                      Eigen::Ref<const Eigen::VectorXd> xty_tilde, double sigma2,
                                      double tau2, Rng& rng) {
  Eigen::MatrixXd m = xtx + a_gram / tau2;
  const auto llt = chol_or_throw(m, "beta_conditional_draw");
  return sample_mvn_precision_chol(llt, xty_tilde, sigma2, rng);
}

double intercept_conditional_draw(double resid_sum, int n, double sigma2, double prior_mean,
                                  double prior_var, Rng& rng) {
  const double post_var = (sigma2 * prior_var) / (n * prior_var + sigma2);
  const double post_mean = post_var * (resid_sum / sigma2 + prior_mean / prior_var);
  return post_mean + std::sqrt(post_var) * rng.normal();
}

double sigma2_conditional_draw(double rss, double quad, int n, int k, double tau2, double shape,
                               double scale, Rng& rng) {
  const double a_post = 0.5 * (n + k) + shape;
  const double b_post = 0.5 * (rss + quad / tau2) + scale;
  return sample_inverse_gamma(a_post, b_post, rng);
}

double tau2_slice_step(double tau2, int k_dim, double a, double b, double penalty,
                       Interval bounds, Rng& rng) {
  const auto log_target = [&](double t) {
    const double t2 = t * t;
    return (-0.5 * k_dim + b - 0.5) * std::log(t2) - (a + b) * std::log1p(t2) - penalty / t2;
  };
  const double t0 = std::sqrt(tau2);
  const double g0 = log_target(t0);
  if (!std::isfinite(g0))
    throw numerical_error("tau2_slice_step: non-finite target at current point");
  // level below g0, then shrink the bounded interval toward the current
  // point until a slice member is hit (no stepping out needed)
  const double level = g0 + std::log(rng.uniform());
  double lo = std::sqrt(bounds.lo);
  double hi = std::sqrt(bounds.hi);
  for (int i = 0; i < 1000; ++i) {
    const double t1 = rng.uniform(lo, hi);
    if (log_target(t1) > level) return t1 * t1;
    if (t1 < t0)
      lo = t1;
    else
      hi = t1;
  }
  return tau2;
}

double tau2_halfcauchy_step(HalfCauchyScale& hc, int k_dim, double penalty, Rng& rng) {
  hc.update(0.5 * k_dim, penalty, rng);
  return hc.scale2;
}

double nlfs_log_marginal(Eigen::Ref<const Eigen::MatrixXd> xtx,
                         Eigen::Ref<const Eigen::MatrixXd> a_gram,
                         Eigen::Ref<const Eigen::VectorXd> xty, double yty, double sigma2,
                         double tau2, Eigen::Index n) {
  // Sigma_y = sigma2 tau2 Phi A^{-1} Phi' + sigma2 I. By Woodbury and the
  // determinant lemma, with M = XtX + A/tau2:
  //   log|Sigma_y|  = n log sigma2 + k log tau2 + log|M| - log|A|
  //   y'Sigma_y^-1y = (yty - xty' M^{-1} xty) / sigma2
  const Eigen::Index k = xtx.rows();
  const auto llt_a = chol_or_throw(a_gram, "nlfs_log_marginal (A)");
  Eigen::MatrixXd m = xtx + a_gram / tau2;
  const auto llt_m = chol_or_throw(m, "nlfs_log_marginal (M)");
  const double logdet = n * std::log(sigma2) + k * std::log(tau2) + logdet_from_chol(llt_m) -
                        logdet_from_chol(llt_a);
  const double quad = (yty - xty.dot(llt_m.solve(xty))) / sigma2;
  return -0.5 * (n * std::log(2.0 * M_PI) + logdet + quad);
}

// ---------------------------------------------------------------------------
// (Phi, P) wrappers
// ---------------------------------------------------------------------------

Eigen::VectorXd update_beta(const McmcState& state, Eigen::Ref<const Eigen::MatrixXd> phi,
                            const ProjectionOperator& p, Eigen::Ref<const Eigen::VectorXd> y,
                            Rng& rng) {
  const Eigen::MatrixXd xtx = phi.transpose() * phi;
  const Eigen::MatrixXd a_gram = p.residual_gram(phi);
  const Eigen::VectorXd xty = phi.transpose() * (y.array() - state.theta1).matrix();
  return beta_conditional_draw(xtx, a_gram, xty, state.sigma2, state.tau2, rng);
}

double update_intercept(const McmcState& state, Eigen::Ref<const Eigen::MatrixXd> phi,
                        Eigen::Ref<const Eigen::VectorXd> y, double prior_mean, double prior_var,
                        Rng& rng) {
  const double resid_sum = (y - phi * state.beta).sum();
  return intercept_conditional_draw(resid_sum, static_cast<int>(y.size()), state.sigma2,
                                    prior_mean, prior_var, rng);
}

double update_sigma2(const McmcState& state, Eigen::Ref<const Eigen::MatrixXd> phi,
                     const ProjectionOperator& p, Eigen::Ref<const Eigen::VectorXd> y,
                     double shape, double scale, Rng& rng) {
  const Eigen::MatrixXd a_gram = p.residual_gram(phi);
  const double rss = (y.array() - state.theta1 - (phi * state.beta).array()).matrix().squaredNorm();
  const double quad = state.beta.dot(a_gram * state.beta);
  return sigma2_conditional_draw(rss, quad, static_cast<int>(y.size()),
                                 static_cast<int>(phi.cols()), state.tau2, shape, scale, rng);
}

double update_tau2_slice(const McmcState& state, Eigen::Ref<const Eigen::MatrixXd> phi,
                         const ProjectionOperator& p, const NlfsConfig& config, int n_data,
                         Rng& rng) {
  const auto sp = resolve_shrinkage(config, n_data);
  const Eigen::MatrixXd a_gram = p.residual_gram(phi);
  const double penalty = state.beta.dot(a_gram * state.beta) / (2.0 * state.sigma2);
  return tau2_slice_step(state.tau2, static_cast<int>(phi.cols()), sp.a, sp.b, penalty,
                         config.tau2_bounds, rng);
}

double update_tau2_halfcauchy(const McmcState& state, Eigen::Ref<const Eigen::MatrixXd> phi,
                              const ProjectionOperator& p, HalfCauchyScale& hc, Rng& rng) {
  const Eigen::MatrixXd a_gram = p.residual_gram(phi);
  const double penalty = state.beta.dot(a_gram * state.beta) / (2.0 * state.sigma2);
  return tau2_halfcauchy_step(hc, static_cast<int>(phi.cols()), penalty, rng);
}

// ---------------------------------------------------------------------------
// MH over the non-linear parameters
// ---------------------------------------------------------------------------

namespace {

struct PriorRef {
  const PriorSpec* prior;
  double proposal_var;
};

// Flattened per-parameter view of the space.
std::vector<PriorRef> flatten_priors(const FunctionSpace& space, const NlfsConfig& config) {
  std::vector<PriorRef> out;
  for (const auto& member : space.members)
    for (const auto& prior : member.nl_priors) {
      const double sd = config.proposal_sd.value_or(std::sqrt(prior.variance()));
      out.push_back({&prior, sd * sd});
    }
  return out;
}

// Sequential componentwise MH sweep; shared by update_theta_mh and run_nlfs.
struct ThetaMhContext {
  ThetaMhContext(const FunctionSpace& space_, Eigen::Ref<const Eigen::MatrixXd> phi_,
                 Eigen::Ref<const Eigen::MatrixXd> xtx_, Eigen::Ref<const Eigen::VectorXd> x_)
      : space(space_), phi(phi_), xtx(xtx_), x(x_) {}

  const FunctionSpace& space;
  Eigen::Ref<const Eigen::MatrixXd> phi;
  Eigen::Ref<const Eigen::MatrixXd> xtx;
  Eigen::Ref<const Eigen::VectorXd> x;
  Eigen::VectorXd xty;  // Phi' y_t for the centered data
  double yty = 0.0;
  double sigma2 = 1.0;
  double tau2 = 1.0;
  Eigen::Index n = 0;
  std::vector<PriorRef> priors;

  // current-state cache; the geometry part changes only when theta moves,
  // the marginal also when (theta1, sigma2, tau2) move
  Eigen::VectorXd theta;
  ProjectionOperator proj;
  Eigen::MatrixXd a_gram;
  double log_ml = 0.0;

  void rebuild_geometry() {
    const Eigen::MatrixXd h = combined_jacobian(space.members, theta, x);
    proj = projection(h);
    a_gram = proj.residual_gram(phi);
  }

  void refresh_ml() { log_ml = nlfs_log_marginal(xtx, a_gram, xty, yty, sigma2, tau2, n); }

  void rebuild_current() {
    rebuild_geometry();
    refresh_ml();
  }

  ThetaUpdate sweep(Rng& rng) {
    ThetaUpdate result;
    result.accepted.assign(priors.size(), false);
    for (std::size_t j = 0; j < priors.size(); ++j) {
      const PriorSpec& prior = *priors[j].prior;
      const double prop_var = priors[j].proposal_var;
      const double cur = theta[static_cast<Eigen::Index>(j)];

      double cand;
      double log_q_correction = 0.0;  // log q(cur|cand) - log q(cand|cur)
      if (prior.positive_support()) {
        const TruncNormalSpec fwd{cur, prop_var, 0.0};
        cand = sample_trunc_normal(fwd, rng);
        const TruncNormalSpec rev{cand, prop_var, 0.0};
        log_q_correction = trunc_normal_logpdf(cur, rev) - trunc_normal_logpdf(cand, fwd);
      } else {
        cand = cur + std::sqrt(prop_var) * rng.normal();  // symmetric
      }

      Eigen::VectorXd theta_cand = theta;
      theta_cand[static_cast<Eigen::Index>(j)] = cand;
      double cand_ml;
      ProjectionOperator cand_proj;
      Eigen::MatrixXd cand_a;
      try {
        const Eigen::MatrixXd h = combined_jacobian(space.members, theta_cand, x);
        cand_proj = projection(h);
        cand_a = cand_proj.residual_gram(phi);
        cand_ml = nlfs_log_marginal(xtx, cand_a, xty, yty, sigma2, tau2, n);
      } catch (const numerical_error&) {
        ++result.numerical_rejects;
        continue;
      } catch (const std::invalid_argument&) {
        ++result.numerical_rejects;  // proposal outside the model's domain
        continue;
      }

      const double log_hr =
          cand_ml - log_ml + prior.logpdf(cand) - prior.logpdf(cur) + log_q_correction;
      if (std::isfinite(log_hr) && std::log(rng.uniform()) < log_hr) {
        theta = std::move(theta_cand);
        proj = std::move(cand_proj);
        a_gram = std::move(cand_a);
        log_ml = cand_ml;
        result.accepted[j] = true;
      }
    }
    result.theta_nl = theta;
    return result;
  }
};

}  // namespace

ThetaUpdate update_theta_mh(const McmcState& state, const FunctionSpace& space,
                            Eigen::Ref<const Eigen::MatrixXd> phi, const Dataset& data,
                            const NlfsConfig& config, Rng& rng) {
  const Eigen::MatrixXd xtx = phi.transpose() * phi;
  ThetaMhContext mh{space, phi, xtx, data.x};
  mh.n = data.size();
  mh.priors = flatten_priors(space, config);
  Eigen::VectorXd y_tilde =
      config.marginal_on_centered ? (data.y.array() - state.theta1).matrix().eval() : data.y;
  mh.xty = phi.transpose() * y_tilde;
  mh.yty = y_tilde.squaredNorm();
  mh.sigma2 = state.sigma2;
  mh.tau2 = state.tau2;
  mh.theta = state.theta_nl;
  mh.rebuild_current();
  return mh.sweep(rng);
}

// ---------------------------------------------------------------------------
// Full chain
// ---------------------------------------------------------------------------

FitResult run_nlfs(const Dataset& data, const FunctionSpace& space, const NlfsConfig& config,
                   Rng& rng) {
  const int n = static_cast<int>(data.size());
  const Interval dom =
      config.domain.value_or(Interval{data.x.minCoeff(), data.x.maxCoeff()});
  SplineBasis basis{make_knots(config.n_internal_knots, config.spline_order, dom), true};
  const Eigen::MatrixXd phi_full = design_matrix(basis, data.x);
  const int k_full = static_cast<int>(phi_full.cols());
  if (n <= k_full) throw std::invalid_argument("run_nlfs: need n > basis dimension");
  if (config.burn_in >= config.n_draws)
    throw std::invalid_argument("run_nlfs: burn_in must be < n_draws");
  if (!(config.tau2_bounds.lo > 0.0) || config.tau2_bounds.degenerate())
    throw std::invalid_argument("run_nlfs: tau2 bounds must satisfy 0 < lo < hi");

  // basis functions whose support holds no data are non-identified here: the
  // projection prior puts zero precision on exactly those directions. Drop
  // them from the fit and report their coefficients as zero.
  std::vector<int> active;
  {
    const Eigen::VectorXd col_mass = phi_full.colwise().squaredNorm();
    const double floor = 1e-12 * col_mass.maxCoeff();
    for (int j = 0; j < k_full; ++j)
      if (col_mass[j] > floor) active.push_back(j);
  }
  Eigen::MatrixXd phi(n, static_cast<Eigen::Index>(active.size()));
  for (std::size_t j = 0; j < active.size(); ++j)
    phi.col(static_cast<Eigen::Index>(j)) = phi_full.col(active[j]);
  const int k = static_cast<int>(active.size());

  const Eigen::MatrixXd xtx = phi.transpose() * phi;
  const Eigen::RowVectorXd phi_colsum = phi.colwise().sum();
  const double y_sum = data.y.sum();
  const auto shrink = resolve_shrinkage(config, n);

  McmcState state;
  state.beta = Eigen::VectorXd::Zero(k);
  state.theta1 = config.theta1_mean;
  state.sigma2 = 1.0;
  state.tau2 = config.shrinkage == ShrinkageKind::own_slice
                   ? std::min(std::max(1.0, config.tau2_bounds.lo), config.tau2_bounds.hi)
                   : 1.0;
  state.theta_nl = space.nl_init();

  ThetaMhContext mh{space, phi, xtx, data.x};
  mh.n = n;
  mh.priors = flatten_priors(space, config);
  mh.theta = state.theta_nl;

  HalfCauchyScale hc;
  hc.scale2 = state.tau2;

  // adaptive proposal window (off by default)
  std::vector<std::deque<double>> window(mh.priors.size());

  const auto nl_names = space.nl_names();
  std::vector<std::string> names;
  for (int j = 1; j <= k_full; ++j) names.push_back("beta_" + std::to_string(j));
  names.insert(names.end(), {"theta1", "sigma2", "tau2", "omega"});
  names.insert(names.end(), nl_names.begin(), nl_names.end());

  const int kept = config.n_draws - config.burn_in;
  Eigen::MatrixXd samples(kept, static_cast<Eigen::Index>(names.size()));
  std::vector<long> accept_count(mh.priors.size(), 0);
  long numerical_rejects = 0;

  // mh caches the projection geometry of the current theta across iterations
  mh.rebuild_geometry();

  Eigen::VectorXd y_tilde(n), xty(k), fit(n);
  for (int it = 0; it < config.n_draws; ++it) {
    try {
      // beta
      y_tilde = data.y.array() - state.theta1;
      xty.noalias() = phi.transpose() * y_tilde;
      state.beta =
          beta_conditional_draw(xtx, mh.a_gram, xty, state.sigma2, state.tau2, rng);
      fit.noalias() = phi * state.beta;

      // intercept
      const double resid_sum = y_sum - phi_colsum.dot(state.beta);
      state.theta1 = intercept_conditional_draw(resid_sum, n, state.sigma2, config.theta1_mean,
                                                config.theta1_var, rng);

      // noise variance
      const double rss = (data.y.array() - state.theta1 - fit.array()).matrix().squaredNorm();
      const double quad = state.beta.dot(mh.a_gram * state.beta);
      state.sigma2 = sigma2_conditional_draw(rss, quad, n, k, state.tau2, config.sigma2_shape,
                                             config.sigma2_scale, rng);

      // shrinkage
      const double penalty = quad / (2.0 * state.sigma2);
      if (config.shrinkage == ShrinkageKind::own_slice) {
        state.tau2 = tau2_slice_step(state.tau2, k, shrink.a, shrink.b, penalty,
                                     config.tau2_bounds, rng);
      } else {
        state.tau2 = tau2_halfcauchy_step(hc, k, penalty, rng);
      }

      // non-linear parameters, beta marginalized out
      if (config.marginal_on_centered) {
        y_tilde = data.y.array() - state.theta1;
      } else {
        y_tilde = data.y;
      }
      mh.xty = phi.transpose() * y_tilde;
      mh.yty = y_tilde.squaredNorm();
      mh.sigma2 = state.sigma2;
      mh.tau2 = state.tau2;
      mh.refresh_ml();
      if (config.adaptive_proposals) {
        for (std::size_t j = 0; j < mh.priors.size(); ++j) {
          auto& w = window[j];
          if (w.size() == 100) {
            double m = 0.0, s = 0.0;
            for (double v : w) m += v;
            m /= static_cast<double>(w.size());
            for (double v : w) s += (v - m) * (v - m);
            const double var = s / static_cast<double>(w.size() - 1);
            if (var > 0.0) mh.priors[j].proposal_var = var;
          }
        }
      }
      ThetaUpdate upd = mh.sweep(rng);
      state.theta_nl = upd.theta_nl;
      numerical_rejects += upd.numerical_rejects;
      for (std::size_t j = 0; j < upd.accepted.size(); ++j) {
        if (upd.accepted[j]) ++accept_count[j];
        if (config.adaptive_proposals) {
          window[j].push_back(state.theta_nl[static_cast<Eigen::Index>(j)]);
          if (window[j].size() > 100) window[j].pop_front();
        }
      }
    } catch (const numerical_error& err) {
      throw numerical_error(std::string(err.what()) + " [iteration " + std::to_string(it) + "]");
    } catch (const std::invalid_argument& err) {
      // preconditions were validated up front; mid-chain violations mean the
      // state went numerically bad (NaN/negative scale)
      throw numerical_error(std::string(err.what()) + " [iteration " + std::to_string(it) + "]");
    }

    if (it >= config.burn_in) {
      const int row = it - config.burn_in;
      samples.block(row, 0, 1, k_full).setZero();
      for (int j = 0; j < k; ++j) samples(row, active[static_cast<std::size_t>(j)]) = state.beta[j];
      samples(row, k_full) = state.theta1;
      samples(row, k_full + 1) = state.sigma2;
      samples(row, k_full + 2) = state.tau2;
      samples(row, k_full + 3) = 1.0 / (1.0 + state.tau2);
      for (int j = 0; j < static_cast<int>(nl_names.size()); ++j)
        samples(row, k_full + 4 + j) = state.theta_nl[j];
    }
  }

  FitResult result;
  result.family = FitFamily::spline;
  result.basis = basis;
  result.space = space;
  result.draws.names = std::move(names);
  result.draws.samples = std::move(samples);
  result.draws.burn_in = config.burn_in;
  for (std::size_t j = 0; j < mh.priors.size(); ++j)
    result.draws.acceptance.emplace_back(
        "accept_" + nl_names[j],
        static_cast<double>(accept_count[j]) / static_cast<double>(config.n_draws));
  result.draws.acceptance.emplace_back("numerical_rejects",
                                       static_cast<double>(numerical_rejects));
  return result;
}

}  // namespace nlfs
