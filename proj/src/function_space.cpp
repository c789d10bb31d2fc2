#include "nlfs/function_space.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <limits>

namespace nlfs {

Eigen::VectorXd hill_mean(Eigen::Ref<const Eigen::VectorXd> x, const HillParams& p) {
  if (!(p.theta3 > 0.0) || !(p.theta4 > 0.0))
    throw std::invalid_argument("hill_mean: theta3 and theta4 must be > 0");
  Eigen::VectorXd out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x[i] < 0.0) throw std::invalid_argument("hill_mean: negative covariate");
    out[i] = hill_response(x[i], p.theta1, p.theta2, p.theta3, p.theta4);
  }
  return out;
}

Eigen::VectorXd power_mean(Eigen::Ref<const Eigen::VectorXd> x, const PowerParams& p) {
  Eigen::VectorXd out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x[i] < 0.0) throw std::invalid_argument("power_mean: negative covariate");
    if (x[i] == 0.0 && !(p.theta3 > 0.0))
      throw numerical_error("power_mean: x = 0 with non-positive exponent is singular");
    out[i] = power_response(x[i], p.theta1, p.theta2, p.theta3);
  }
  return out;
}

Eigen::MatrixXd hill_jacobian(Eigen::Ref<const Eigen::VectorXd> x, double theta3, double theta4) {
  if (!(theta3 > 0.0) || !(theta4 > 0.0))
    throw std::invalid_argument("hill_jacobian: theta3 and theta4 must be > 0");
  Eigen::MatrixXd jac(x.size(), 4);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    if (xi < 0.0) throw std::invalid_argument("hill_jacobian: negative covariate");
    jac(i, 0) = 1.0;
    if (xi == 0.0) {
      // analytic limits for theta4 > 0; avoids 0 * log(0) at runtime
      jac(i, 1) = jac(i, 2) = jac(i, 3) = 0.0;
      continue;
    }
    const double u = std::pow(xi / theta3, theta4);
    const double v = std::pow(theta3 / xi, theta4);
    const double s = 1.0 / ((1.0 + u) * (1.0 + v));
    jac(i, 1) = 1.0 / (1.0 + v);
    jac(i, 2) = -(theta4 / theta3) * s;
    jac(i, 3) = std::log(xi / theta3) * s;
  }
  return jac;
}

Eigen::MatrixXd power_jacobian(Eigen::Ref<const Eigen::VectorXd> x, double theta3) {
  Eigen::MatrixXd jac(x.size(), 3);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    if (xi < 0.0) throw std::invalid_argument("power_jacobian: negative covariate");
    jac(i, 0) = 1.0;
    if (xi == 0.0) {
      if (!(theta3 > 0.0))
        throw numerical_error("power_jacobian: x = 0 with non-positive exponent is singular");
      jac(i, 1) = jac(i, 2) = 0.0;  // x^t3 and x^t3 log x both -> 0
      continue;
    }
    const double p = std::pow(xi, theta3);
    jac(i, 1) = p;
    jac(i, 2) = std::log(xi) * p;
  }
  return jac;
}

double PriorSpec::logpdf(double x) const {
  switch (family) {
    case Family::normal:
      return normal_logpdf(x, a, b);
    case Family::trunc_normal:
      return trunc_normal_logpdf(x, {a, b, 0.0});
    case Family::log_normal:
      return lognormal_logpdf(x, {a, b});
  }
  return -std::numeric_limits<double>::infinity();
}

double PriorSpec::sample(Rng& rng) const {
  switch (family) {
    case Family::normal:
      return a + std::sqrt(b) * rng.normal();
    case Family::trunc_normal:
      return sample_trunc_normal({a, b, 0.0}, rng);
    case Family::log_normal:
      return sample_lognormal({a, b}, rng);
  }
  return a;
}

double PriorSpec::mean_value() const {
  if (family == Family::log_normal) return std::exp(a + 0.5 * b);
  return a;  // untruncated location; good enough for initialization
}

double PriorSpec::moment_var() const {
  const double m = std::exp(a + 0.5 * b);
  return (std::exp(b) - 1.0) * m * m;
}

Eigen::MatrixXd ParametricSpace::jacobian(Eigen::Ref<const Eigen::VectorXd> x,
                                          Eigen::Ref<const Eigen::VectorXd> theta_nl) const {
  if (kind == SpaceKind::hill) return hill_jacobian(x, theta_nl[0], theta_nl[1]);
  return power_jacobian(x, theta_nl[0]);
}

Eigen::VectorXd ParametricSpace::mean(Eigen::Ref<const Eigen::VectorXd> x,
                                      Eigen::Ref<const Eigen::VectorXd> theta_full) const {
  if (kind == SpaceKind::hill)
    return hill_mean(x, {theta_full[0], theta_full[1], theta_full[2], theta_full[3]});
  return power_mean(x, {theta_full[0], theta_full[1], theta_full[2]});
}

Eigen::VectorXd ParametricSpace::nl_init() const {
  Eigen::VectorXd init(n_nonlinear());
  for (int i = 0; i < n_nonlinear(); ++i) init[i] = nl_priors[static_cast<std::size_t>(i)].mean_value();
  return init;
}

std::vector<std::string> ParametricSpace::nl_names() const {
  if (kind == SpaceKind::hill) return {"theta3", "theta4"};
  return {"theta3"};
}

ParametricSpace hill_space() {
  ParametricSpace s;
  s.kind = SpaceKind::hill;
  const LogNormalSpec ln = lognormal_from_moments(3.0, 3.0);
  s.nl_priors = {{PriorSpec::Family::trunc_normal, 0.5, 0.05},
                 {PriorSpec::Family::log_normal, ln.log_mu, ln.log_var}};
  return s;
}

ParametricSpace power_space() {
  ParametricSpace s;
  s.kind = SpaceKind::power;
  s.nl_priors = {{PriorSpec::Family::normal, 0.5, 0.25}};
  return s;
}

FunctionSpace FunctionSpace::single(ParametricSpace m) {
  FunctionSpace f;
  f.members.push_back(std::move(m));
  return f;
}

FunctionSpace FunctionSpace::combined(std::vector<ParametricSpace> ms) {
  if (ms.size() < 2) throw std::invalid_argument("FunctionSpace::combined: needs >= 2 members");
  for (std::size_t i = 0; i < ms.size(); ++i)
    for (std::size_t j = i + 1; j < ms.size(); ++j)
      if (ms[i].kind == ms[j].kind)
        throw std::invalid_argument("FunctionSpace::combined: members must be distinct spaces");
  FunctionSpace f;
  f.members = std::move(ms);
  return f;
}

int FunctionSpace::n_nonlinear() const {
  int n = 0;
  for (const auto& m : members) n += m.n_nonlinear();
  return n;
}

std::string FunctionSpace::name() const {
  std::string out;
  for (const auto& m : members) {
    if (!out.empty()) out += "+";
    out += m.kind == SpaceKind::hill ? "hill" : "power";
  }
  return out;
}

std::vector<std::string> FunctionSpace::nl_names() const {
  std::vector<std::string> names;
  for (const auto& m : members) {
    for (const auto& base : m.nl_names()) {
      if (members.size() == 1) {
        names.push_back(base);
      } else {
        names.push_back((m.kind == SpaceKind::hill ? std::string("hill_") : std::string("power_")) +
                        base);
      }
    }
  }
  return names;
}

Eigen::VectorXd FunctionSpace::nl_init() const {
  Eigen::VectorXd init(n_nonlinear());
  int at = 0;
  for (const auto& m : members) {
    init.segment(at, m.n_nonlinear()) = m.nl_init();
    at += m.n_nonlinear();
  }
  return init;
}

Eigen::MatrixXd combined_jacobian(const std::vector<ParametricSpace>& members,
                                  Eigen::Ref<const Eigen::VectorXd> theta_nl,
                                  Eigen::Ref<const Eigen::VectorXd> x) {
  int cols = 0;
  for (const auto& m : members) cols += m.jacobian_cols();
  cols -= static_cast<int>(members.size()) - 1;  // one shared intercept

  Eigen::MatrixXd h(x.size(), cols);
  int col_at = 0;
  int nl_at = 0;
  for (std::size_t r = 0; r < members.size(); ++r) {
    const auto& m = members[r];
    const Eigen::MatrixXd jac = m.jacobian(x, theta_nl.segment(nl_at, m.n_nonlinear()));
    if (r == 0) {
      h.middleCols(col_at, jac.cols()) = jac;
      col_at += static_cast<int>(jac.cols());
    } else {
      h.middleCols(col_at, jac.cols() - 1) = jac.rightCols(jac.cols() - 1);
      col_at += static_cast<int>(jac.cols()) - 1;
    }
    nl_at += m.n_nonlinear();
  }
  return h;
}

Eigen::MatrixXd ProjectionOperator::residual_gram(Eigen::Ref<const Eigen::MatrixXd> phi) const {
  Eigen::MatrixXd b = phi;
  b.noalias() -= q_ * (q_.transpose() * phi);
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(phi.cols(), phi.cols());
  gram.selfadjointView<Eigen::Lower>().rankUpdate(b.transpose());
  return gram.selfadjointView<Eigen::Lower>();
}

ProjectionOperator projection(Eigen::Ref<const Eigen::MatrixXd> h) {
  if (h.rows() <= h.cols())
    throw std::invalid_argument("projection: needs more rows than columns");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(h, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  const double tol = static_cast<double>(std::max(h.rows(), h.cols())) *
                     std::numeric_limits<double>::epsilon() * (sv.size() > 0 ? sv[0] : 0.0);
  int rank = 0;
  while (rank < sv.size() && sv[rank] > tol) ++rank;
  return ProjectionOperator(svd.matrixU().leftCols(rank));
}

}  // namespace nlfs
