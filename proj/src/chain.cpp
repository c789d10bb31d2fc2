#include "nlfs/chain.hpp"

namespace nlfs {

namespace {

// Columns of the spline coefficients, in order.
std::vector<int> beta_cols(const ChainDraws& draws) {
  std::vector<int> cols;
  for (std::size_t i = 0; i < draws.names.size(); ++i)
    if (draws.names[i].rfind("beta_", 0) == 0) cols.push_back(static_cast<int>(i));
  return cols;
}

// Calls fn(m, h_theta(x)) for every draw m. Parametric fits are single-space
// by contract.
template <class Fn>
void for_each_parametric_curve(const FitResult& fit, Eigen::Ref<const Eigen::VectorXd> x, Fn fn) {
  const ParametricSpace& space = fit.space.members.at(0);
  const int p = space.n_linear() + space.n_nonlinear();
  std::vector<int> cols;
  cols.push_back(fit.draws.col("theta1"));
  cols.push_back(fit.draws.col("theta2"));
  for (const auto& name : space.nl_names()) cols.push_back(fit.draws.col(name));
  Eigen::VectorXd theta(p);
  for (Eigen::Index m = 0; m < fit.draws.n_draws(); ++m) {
    for (int j = 0; j < p; ++j) theta[j] = fit.draws.samples(m, cols[static_cast<std::size_t>(j)]);
    fn(m, space.mean(x, theta));
  }
}

}  // namespace

Eigen::MatrixXd curve_draws(const FitResult& fit, Eigen::Ref<const Eigen::VectorXd> x) {
  const Eigen::Index m = fit.draws.n_draws();
  Eigen::MatrixXd curves = Eigen::MatrixXd::Zero(m, x.size());
  if (fit.has_spline()) {
    const Eigen::MatrixXd phi = design_matrix(fit.basis, x);
    const auto bc = beta_cols(fit.draws);
    Eigen::MatrixXd beta(m, static_cast<Eigen::Index>(bc.size()));
    for (std::size_t j = 0; j < bc.size(); ++j)
      beta.col(static_cast<Eigen::Index>(j)) = fit.draws.samples.col(bc[j]);
    curves.noalias() += beta * phi.transpose();
    if (fit.family == FitFamily::spline) curves.colwise() += fit.draws.column("theta1");
  }
  if (fit.has_parametric_curve())
    for_each_parametric_curve(fit, x, [&](Eigen::Index m_i, const Eigen::VectorXd& h) {
      curves.row(m_i) += h.transpose();
    });
  return curves;
}

Eigen::VectorXd posterior_mean_curve(const FitResult& fit, Eigen::Ref<const Eigen::VectorXd> x) {
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(x.size());
  if (fit.has_spline()) {
    // the spline part is linear in (theta1, beta), so its mean curve is the
    // curve of the mean coefficients
    const Eigen::MatrixXd phi = design_matrix(fit.basis, x);
    const auto bc = beta_cols(fit.draws);
    Eigen::VectorXd beta_mean(static_cast<Eigen::Index>(bc.size()));
    for (std::size_t j = 0; j < bc.size(); ++j)
      beta_mean[static_cast<Eigen::Index>(j)] = fit.draws.samples.col(bc[j]).mean();
    mean.noalias() += phi * beta_mean;
    if (fit.family == FitFamily::spline) mean.array() += fit.draws.column("theta1").mean();
  }
  if (fit.has_parametric_curve()) {
    Eigen::VectorXd h_sum = Eigen::VectorXd::Zero(x.size());
    for_each_parametric_curve(
        fit, x, [&](Eigen::Index, const Eigen::VectorXd& h) { h_sum += h; });
    mean += h_sum / static_cast<double>(fit.draws.n_draws());
  }
  return mean;
}

}  // namespace nlfs
