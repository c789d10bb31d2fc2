#pragma once

#include "nlfs/chain.hpp"
#include "nlfs/types.hpp"

#include <string>
#include <vector>

namespace nlfs {

struct EssResult {
  double value = 0.0;
  bool degenerate = false;  // constant chain; value reported as N
};

/// Effective sample size N / (1 + 2 sum rho_t), with the autocorrelation sum
/// truncated by the initial monotone positive sequence rule on paired lags.
/// Chains shorter than 10 are rejected; constant chains return N flagged.
EssResult ess(Eigen::Ref<const Eigen::VectorXd> chain);

/// Empirical quantile with linear interpolation between order statistics.
double empirical_quantile(std::vector<double> values, double p);

struct ParamSummary {
  std::string name;
  double mean = 0.0;
  double sd = 0.0;
  double median = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double ess_value = 0.0;
  bool ess_degenerate = false;
};

struct PosteriorSummary {
  double level = 0.95;
  Eigen::VectorXd grid;        // evaluation points of the curve summary
  Eigen::VectorXd curve_mean;  // pointwise posterior mean of f
  Eigen::VectorXd curve_lower;
  Eigen::VectorXd curve_upper;
  std::vector<ParamSummary> params;
};

/// Pointwise mean and central (1-level)/2 quantile band of the response draws
/// on `grid`, plus per-parameter summaries (every stored column, including
/// the derived omega where present).
PosteriorSummary summarize(const FitResult& fit, Eigen::Ref<const Eigen::VectorXd> grid,
                           double level = 0.95);

}  // namespace nlfs
