// Independent reference implementations used as test oracles. These
// deliberately avoid the library's algorithms: the spline evaluator is the
// plain Cox-de Boor recursion, derivatives come from central differences, and
// density comparisons go through grid-normalized CDFs.
#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

namespace oracle {

// Naive recursive Cox-de Boor evaluation of basis function m (0-based) of
// the given order on a clamped knot sequence.
inline double bspline_recursive(const std::vector<double>& t, int m, int order, double x) {
  if (order == 1) {
    const bool last_span = m + 2 == static_cast<int>(t.size()) ||
                           (x == t.back() && t[m + 1] == t.back() && t[m] < t[m + 1]);
    if (last_span && x == t[m + 1] && x >= t[m]) return 1.0;
    return (x >= t[m] && x < t[m + 1]) ? 1.0 : 0.0;
  }
  double left = 0.0, right = 0.0;
  const double dl = t[m + order - 1] - t[m];
  if (dl > 0.0) left = (x - t[m]) / dl * bspline_recursive(t, m, order - 1, x);
  const double dr = t[m + order] - t[m + 1];
  if (dr > 0.0) right = (t[m + order] - x) / dr * bspline_recursive(t, m + 1, order - 1, x);
  return left + right;
}

// Central finite difference of a scalar-to-vector map at parameter value v.
inline Eigen::VectorXd central_difference(const std::function<Eigen::VectorXd(double)>& f,
                                          double v, double h = 1e-6) {
  return (f(v + h) - f(v - h)) / (2.0 * h);
}

// One-sample Kolmogorov-Smirnov statistic against a CDF.
inline double ks_statistic(std::vector<double> samples, const std::function<double(double)>& cdf) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max(d, std::abs(f - static_cast<double>(i) / n));
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
  }
  return d;
}

// Asymptotic KS critical value at significance alpha.
inline double ks_critical(std::size_t n, double alpha = 0.01) {
  return std::sqrt(-0.5 * std::log(alpha / 2.0)) / std::sqrt(static_cast<double>(n));
}

// Trapezoid-normalized CDF of an unnormalized log-density on [lo, hi].
class GridCdf {
 public:
  GridCdf(const std::function<double(double)>& log_density, double lo, double hi,
          int points = 20001)
      : lo_(lo), hi_(hi), grid_(points), cum_(points) {
    std::vector<double> logd(static_cast<std::size_t>(points));
    double max_logd = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < points; ++i) {
      grid_[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (points - 1);
      logd[static_cast<std::size_t>(i)] = log_density(grid_[static_cast<std::size_t>(i)]);
      max_logd = std::max(max_logd, logd[static_cast<std::size_t>(i)]);
    }
    double total = 0.0;
    cum_[0] = 0.0;
    for (int i = 1; i < points; ++i) {
      const double a = std::exp(logd[static_cast<std::size_t>(i - 1)] - max_logd);
      const double b = std::exp(logd[static_cast<std::size_t>(i)] - max_logd);
      total += 0.5 * (a + b) * (grid_[static_cast<std::size_t>(i)] - grid_[static_cast<std::size_t>(i - 1)]);
      cum_[static_cast<std::size_t>(i)] = total;
    }
    if (!(total > 0.0)) throw std::runtime_error("GridCdf: density integrates to zero");
    for (auto& c : cum_) c /= total;
  }

  double operator()(double x) const {
    if (x <= lo_) return 0.0;
    if (x >= hi_) return 1.0;
    const auto it = std::upper_bound(grid_.begin(), grid_.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - grid_.begin());
    const double x0 = grid_[i - 1], x1 = grid_[i];
    const double w = (x - x0) / (x1 - x0);
    return cum_[i - 1] * (1.0 - w) + cum_[i] * w;
  }

 private:
  double lo_, hi_;
  std::vector<double> grid_, cum_;
};

// Dense log N(y; 0, Sigma) evaluation. Long double keeps the oracle accurate
// when Sigma is assembled through ill-conditioned intermediates.
template <class Scalar = double>
Scalar dense_gaussian_logpdf(const Eigen::Vector<Scalar, Eigen::Dynamic>& y,
                             const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& sigma) {
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const Eigen::LLT<Mat> llt(sigma);
  if (llt.info() != Eigen::Success) throw std::runtime_error("dense_gaussian_logpdf: not SPD");
  const Scalar logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  const Scalar quad = y.dot(llt.solve(y));
  return -0.5 * (static_cast<Scalar>(y.size()) * std::log(2.0 * static_cast<Scalar>(M_PI)) +
                 logdet + quad);
}

}  // namespace oracle
