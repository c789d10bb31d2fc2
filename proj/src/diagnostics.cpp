#include "nlfs/diagnostics.hpp"

#include <algorithm>
#include <cmath>

namespace nlfs {

EssResult ess(Eigen::Ref<const Eigen::VectorXd> chain) {
  const Eigen::Index n = chain.size();
  if (n < 10) throw std::invalid_argument("ess: chain length must be >= 10");
  const double mean = chain.mean();
  Eigen::VectorXd centered = chain.array() - mean;
  const double c0 = centered.squaredNorm() / static_cast<double>(n);
  if (c0 <= 0.0) return {static_cast<double>(n), true};

  const auto acov = [&](Eigen::Index t) {
    return centered.head(n - t).dot(centered.tail(n - t)) / static_cast<double>(n);
  };

  // Geyer's initial monotone positive sequence over lag pairs:
  // accumulate gamma_m = rho_{2m} + rho_{2m+1} while positive, enforcing
  // monotone non-increase, then iact = -1 + 2 sum gamma_m.
  double sum_gamma = 0.0;
  double prev_gamma = std::numeric_limits<double>::infinity();
  for (Eigen::Index m = 0; 2 * m + 1 < n; ++m) {
    double gamma = (acov(2 * m) + acov(2 * m + 1)) / c0;
    if (gamma <= 0.0) break;
    gamma = std::min(gamma, prev_gamma);
    sum_gamma += gamma;
    prev_gamma = gamma;
  }
  const double iact = std::max(-1.0 + 2.0 * sum_gamma, 1e-12);
  return {std::min(static_cast<double>(n) / iact, static_cast<double>(n)), false};
}

double empirical_quantile(std::vector<double> values, double p) {
  if (values.empty()) throw std::invalid_argument("empirical_quantile: empty input");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("empirical_quantile: p outside [0,1]");
  std::sort(values.begin(), values.end());
  const double h = p * (static_cast<double>(values.size()) - 1.0);
  const std::size_t i = static_cast<std::size_t>(std::floor(h));
  if (i + 1 >= values.size()) return values.back();
  const double w = h - static_cast<double>(i);
  return values[i] * (1.0 - w) + values[i + 1] * w;
}

PosteriorSummary summarize(const FitResult& fit, Eigen::Ref<const Eigen::VectorXd> grid,
                           double level) {
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("summarize: level in (0,1)");
  if (fit.draws.n_draws() == 0) throw std::invalid_argument("summarize: no draws");

  PosteriorSummary out;
  out.level = level;
  out.grid = grid;
  const double p_lo = (1.0 - level) / 2.0;
  const double p_hi = 1.0 - p_lo;

  const Eigen::MatrixXd curves = curve_draws(fit, grid);
  out.curve_mean = curves.colwise().mean();
  out.curve_lower.resize(grid.size());
  out.curve_upper.resize(grid.size());
  std::vector<double> buffer(static_cast<std::size_t>(curves.rows()));
  for (Eigen::Index j = 0; j < grid.size(); ++j) {
    for (Eigen::Index m = 0; m < curves.rows(); ++m)
      buffer[static_cast<std::size_t>(m)] = curves(m, j);
    out.curve_lower[j] = empirical_quantile(buffer, p_lo);
    out.curve_upper[j] = empirical_quantile(buffer, p_hi);
  }

  for (std::size_t c = 0; c < fit.draws.names.size(); ++c) {
    ParamSummary ps;
    ps.name = fit.draws.names[c];
    const Eigen::VectorXd col = fit.draws.samples.col(static_cast<Eigen::Index>(c));
    ps.mean = col.mean();
    ps.sd = std::sqrt((col.array() - ps.mean).square().sum() /
                      std::max<double>(1.0, static_cast<double>(col.size() - 1)));
    for (Eigen::Index m = 0; m < col.size(); ++m)
      buffer[static_cast<std::size_t>(m)] = col[m];
    ps.median = empirical_quantile(buffer, 0.5);
    ps.lower = empirical_quantile(buffer, p_lo);
    ps.upper = empirical_quantile(buffer, p_hi);
    const EssResult e = ess(col);
    ps.ess_value = e.value;
    ps.ess_degenerate = e.degenerate;
    out.params.push_back(std::move(ps));
  }
  return out;
}

}  // namespace nlfs
