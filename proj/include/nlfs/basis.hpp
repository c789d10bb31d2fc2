#pragma once

#include "nlfs/types.hpp"

#include <vector>

namespace nlfs {

/// Clamped knot sequence: each boundary knot repeated `order` times, interior
/// knots strictly increasing inside the domain.
struct KnotVector {
  std::vector<double> knots;
  int order = 4;  // spline order j (= degree + 1); cubic splines have order 4

  double lo() const { return knots.front(); }
  double hi() const { return knots.back(); }
  int n_internal() const { return static_cast<int>(knots.size()) - 2 * order; }
  /// Basis dimension of the full (clamped) basis: internal knots + order.
  int full_dim() const { return n_internal() + order; }
};

/// Equally spaced interior knots on the open domain; boundary multiplicity =
/// order. Throws std::invalid_argument on a degenerate domain or bad counts.
KnotVector make_knots(int n_internal, int order, Interval domain);

/// B-spline basis over a knot vector. With drop_intercept the first basis
/// column is removed, which takes the constant function out of the column
/// space while keeping the rest of the flexibility.
struct SplineBasis {
  KnotVector knots;
  bool drop_intercept = false;

  int dim() const { return knots.full_dim() - (drop_intercept ? 1 : 0); }
  Interval domain() const { return {knots.lo(), knots.hi()}; }
};

/// Evaluates all basis functions at the given points: entry (i, m) is
/// phi_m(x_i). Rows of the full basis sum to 1; at most `order` entries per
/// row are nonzero. Throws std::domain_error for x outside the closed domain.
Eigen::MatrixXd design_matrix(const SplineBasis& basis, Eigen::Ref<const Eigen::VectorXd> x);

}  // namespace nlfs
