#pragma once

#include "nlfs/basis.hpp"
#include "nlfs/function_space.hpp"
#include "nlfs/types.hpp"

#include <string>
#include <utility>
#include <vector>

namespace nlfs {

/// Post-burn-in posterior sample matrix with named columns, plus the
/// Metropolis-Hastings acceptance rates recorded during the run.
struct ChainDraws {
  std::vector<std::string> names;
  Eigen::MatrixXd samples;  // rows = kept draws, cols = named parameters
  int burn_in = 0;          // absolute iteration index of the first kept draw
  std::vector<std::pair<std::string, double>> acceptance;

  Eigen::Index n_draws() const { return samples.rows(); }

  int col(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return static_cast<int>(i);
    return -1;
  }

  Eigen::VectorXd column(const std::string& name) const {
    const int c = col(name);
    if (c < 0) throw std::invalid_argument("ChainDraws: no column named '" + name + "'");
    return samples.col(c);
  }
};

/// How a fit's posterior response curve is assembled from its draws.
enum class FitFamily {
  spline,             // theta1 + Phi beta           (NLFS, B-spline, P-spline)
  parametric,         // h_theta(x)
  parametric_spline,  // h_theta(x) + Phi beta       (parametric + horseshoe spline)
};

/// A fitted chain together with what is needed to evaluate response draws on
/// any grid. Curves are reconstructed from the stored parameter draws rather
/// than stored per iteration.
struct FitResult {
  ChainDraws draws;
  FitFamily family = FitFamily::spline;
  SplineBasis basis;    // spline families
  FunctionSpace space;  // parametric families (members empty for pure splines)

  bool has_spline() const { return family != FitFamily::parametric; }
  bool has_parametric_curve() const { return family != FitFamily::spline; }
};

/// Response draws evaluated at `x`: row m is the curve of draw m.
Eigen::MatrixXd curve_draws(const FitResult& fit, Eigen::Ref<const Eigen::VectorXd> x);

/// Posterior mean response at `x` (streamed; never materializes all curves).
Eigen::VectorXd posterior_mean_curve(const FitResult& fit, Eigen::Ref<const Eigen::VectorXd> x);

}  // namespace nlfs
