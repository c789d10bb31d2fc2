#include "nlfs/basis.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace nlfs {

KnotVector make_knots(int n_internal, int order, Interval domain) {
  if (domain.degenerate()) throw std::invalid_argument("make_knots: degenerate domain (lo >= hi)");
  if (order < 1) throw std::invalid_argument("make_knots: order must be >= 1");
  if (n_internal < 0) throw std::invalid_argument("make_knots: n_internal must be >= 0");

  KnotVector kv;
  kv.order = order;
  kv.knots.reserve(static_cast<std::size_t>(n_internal) + 2 * order);
  kv.knots.insert(kv.knots.end(), order, domain.lo);
  const double step = domain.length() / (n_internal + 1);
  for (int i = 1; i <= n_internal; ++i) kv.knots.push_back(domain.lo + i * step);
  kv.knots.insert(kv.knots.end(), order, domain.hi);
  return kv;
}

namespace {

// Index of the knot span [t_s, t_{s+1}) containing x, with the last
// nonempty span claiming x = hi.
int find_span(const KnotVector& kv, double x) {
  const int order = kv.order;
  const int last = kv.full_dim() - 1;  // index of the last basis function
  if (x >= kv.knots[static_cast<std::size_t>(last) + 1]) return last;
  auto it = std::upper_bound(kv.knots.begin() + order, kv.knots.begin() + last + 1, x);
  return static_cast<int>(it - kv.knots.begin()) - 1;
}

}  // namespace

Eigen::MatrixXd design_matrix(const SplineBasis& basis, Eigen::Ref<const Eigen::VectorXd> x) {
  const KnotVector& kv = basis.knots;
  const int order = kv.order;
  const int k_full = kv.full_dim();
  const auto& t = kv.knots;

  Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(x.size(), k_full);
  // de Boor's triangular scheme: builds the `order` nonzero values per point.
  std::vector<double> vals(order), left(order), right(order);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    if (xi < kv.lo() || xi > kv.hi()) {
      std::ostringstream msg;
      msg << "design_matrix: x = " << xi << " outside [" << kv.lo() << ", " << kv.hi() << "]";
      throw std::domain_error(msg.str());
    }
    const int span = find_span(kv, xi);
    vals[0] = 1.0;
    for (int j = 1; j < order; ++j) {
      left[j] = xi - t[span + 1 - j];
      right[j] = t[span + j] - xi;
      double saved = 0.0;
      for (int r = 0; r < j; ++r) {
        const double denom = right[r + 1] + left[j - r];
        const double tmp = denom != 0.0 ? vals[r] / denom : 0.0;
        vals[r] = saved + right[r + 1] * tmp;
        saved = left[j - r] * tmp;
      }
      vals[j] = saved;
    }
    for (int r = 0; r < order; ++r) phi(i, span - order + 1 + r) = vals[r];
  }

  if (basis.drop_intercept) return phi.rightCols(k_full - 1);
  return phi;
}

}  // namespace nlfs
