#pragma once

#include "nlfs/chain.hpp"
#include "nlfs/rng.hpp"
#include "nlfs/types.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace nlfs {

/// Data-generating truths of the study: Hill (theta3 = 0.3, theta4 = 6 on
/// [0,1], background 0, maximal change 1), power x^0.5, and the Hill curve
/// with a quadratic downturn -1.5 (x - 0.6)^2 switched on at x = 0.6.
struct TruthSpec {
  enum class Kind { hill, power, hill_downturn };
  Kind kind = Kind::hill;
  double hill_theta3 = 0.3;
  double hill_theta4 = 6.0;
  double power_scale = 1.0;
  double power_exponent = 0.5;
  double down_knot = 0.6;
  double down_coef = -1.5;

  Eigen::VectorXd mean(Eigen::Ref<const Eigen::VectorXd> x) const;
  std::string name() const;
  static TruthSpec hill() { return {Kind::hill}; }
  static TruthSpec power() { return {Kind::power}; }
  static TruthSpec hill_downturn() { return {Kind::hill_downturn}; }
};

/// The twelve fitters of the study grid.
enum class MethodId {
  nlfs_hill_hc,
  nlfs_hill_os,
  nlfs_hill_power_hc,
  nlfs_hill_power_os,
  nlfs_power_hc,
  nlfs_power_os,
  param_hill,
  param_power,
  bspline,
  pspline,
  param_hill_hs,
  param_power_hs,
};

std::string to_string(MethodId id);
std::optional<MethodId> method_from_string(const std::string& name);
const std::vector<MethodId>& all_methods();

/// One simulation cell: truth x n x noise x method, replicated n_rep times.
struct Scenario {
  TruthSpec truth;
  int n = 50;
  double sigma2 = 0.005;
  MethodId method = MethodId::nlfs_hill_os;
  int n_rep = 100;
  std::uint64_t base_seed = 1;
};

/// x ~ Unif[0,1], y = g(x) + N(0, sigma2); deterministic per rng stream.
Dataset generate_dataset(const TruthSpec& truth, int n, double sigma2, Rng& rng);

/// Root mean squared difference of two equal-length vectors.
double rmse(Eigen::Ref<const Eigen::VectorXd> fitted_mean,
            Eigen::Ref<const Eigen::VectorXd> truth);

/// Fits one method with the study's Table-priors (theta1 ~ N(0,1)) at desk
/// scale. n_draws/burn_in as given; seed fully determines the chain.
FitResult fit_method(MethodId method, const Dataset& data, int n_draws, int burn_in,
                     std::uint64_t seed);

struct ReplicateOutcome {
  double rmse_value = 0.0;
  double omega_mean = std::numeric_limits<double>::quiet_NaN();  // NLFS methods only
  bool ok = true;
  std::string error;
};

struct ScenarioResult {
  Scenario scenario;
  std::vector<ReplicateOutcome> replicates;
  double mean_rmse = 0.0;
  double sd_rmse = 0.0;
  double mean_omega = std::numeric_limits<double>::quiet_NaN();
  int n_failed = 0;
};

struct StudyOptions {
  int n_draws = 10000;
  int burn_in = 2000;
  int parallelism = 1;
};

/// Runs every replicate of every scenario. Child streams derive from
/// (base_seed, scenario, replicate); datasets depend only on the generator
/// cell (not the method), so methods sharing a cell see identical data.
/// Failed replicates are recorded and excluded from aggregation. Results are
/// bitwise independent of the parallelism degree.
std::vector<ScenarioResult> run_study(const std::vector<Scenario>& scenarios,
                                      const StudyOptions& options);

/// Per-replicate engine, exposed for tests: generates the cell's data and
/// fits the scenario's method.
ReplicateOutcome run_replicate(const Scenario& scenario, int replicate,
                               const StudyOptions& options);

}  // namespace nlfs
