#include "nlfs/simulation.hpp"

#include "nlfs/baselines.hpp"
#include "nlfs/function_space.hpp"
#include "nlfs/nlfs_sampler.hpp"

#include <atomic>
#include <cmath>
#include <thread>

namespace nlfs {

Eigen::VectorXd TruthSpec::mean(Eigen::Ref<const Eigen::VectorXd> x) const {
  switch (kind) {
    case Kind::hill:
      return hill_mean(x, {0.0, 1.0, hill_theta3, hill_theta4});
    case Kind::power:
      return power_mean(x, {0.0, power_scale, power_exponent});
    case Kind::hill_downturn: {
      Eigen::VectorXd g = hill_mean(x, {0.0, 1.0, hill_theta3, hill_theta4});
      for (Eigen::Index i = 0; i < x.size(); ++i)
        if (x[i] >= down_knot) g[i] += down_coef * (x[i] - down_knot) * (x[i] - down_knot);
      return g;
    }
  }
  return Eigen::VectorXd::Zero(x.size());
}

std::string TruthSpec::name() const {
  switch (kind) {
    case Kind::hill:
      return "hill";
    case Kind::power:
      return "power";
    case Kind::hill_downturn:
      return "hill_downturn";
  }
  return "?";
}

std::string to_string(MethodId id) {
  switch (id) {
    case MethodId::nlfs_hill_hc: return "nlfs_hill_hc";
    case MethodId::nlfs_hill_os: return "nlfs_hill_os";
    case MethodId::nlfs_hill_power_hc: return "nlfs_hill_power_hc";
    case MethodId::nlfs_hill_power_os: return "nlfs_hill_power_os";
    case MethodId::nlfs_power_hc: return "nlfs_power_hc";
    case MethodId::nlfs_power_os: return "nlfs_power_os";
    case MethodId::param_hill: return "param_hill";
    case MethodId::param_power: return "param_power";
    case MethodId::bspline: return "bspline";
    case MethodId::pspline: return "pspline";
    case MethodId::param_hill_hs: return "param_hill_hs";
    case MethodId::param_power_hs: return "param_power_hs";
  }
  return "?";
}

const std::vector<MethodId>& all_methods() {
  static const std::vector<MethodId> methods = {
      MethodId::nlfs_hill_hc,       MethodId::nlfs_hill_os, MethodId::nlfs_hill_power_hc,
      MethodId::nlfs_hill_power_os, MethodId::nlfs_power_hc, MethodId::nlfs_power_os,
      MethodId::param_hill,         MethodId::param_power,   MethodId::bspline,
      MethodId::pspline,            MethodId::param_hill_hs, MethodId::param_power_hs,
  };
  return methods;
}

std::optional<MethodId> method_from_string(const std::string& name) {
  for (MethodId m : all_methods())
    if (to_string(m) == name) return m;
  return std::nullopt;
}

Dataset generate_dataset(const TruthSpec& truth, int n, double sigma2, Rng& rng) {
  if (n < 1) throw std::invalid_argument("generate_dataset: n must be >= 1");
  Dataset data;
  data.x.resize(n);
  data.y.resize(n);
  for (int i = 0; i < n; ++i) data.x[i] = rng.uniform();
  const Eigen::VectorXd g = truth.mean(data.x);
  const double sd = std::sqrt(sigma2);
  for (int i = 0; i < n; ++i) data.y[i] = g[i] + sd * rng.normal();
  return data;
}

double rmse(Eigen::Ref<const Eigen::VectorXd> fitted_mean,
            Eigen::Ref<const Eigen::VectorXd> truth) {
  if (fitted_mean.size() != truth.size())
    throw std::invalid_argument("rmse: length mismatch");
  return std::sqrt((fitted_mean - truth).squaredNorm() / static_cast<double>(truth.size()));
}

namespace {

bool is_nlfs(MethodId id) {
  switch (id) {
    case MethodId::nlfs_hill_hc:
    case MethodId::nlfs_hill_os:
    case MethodId::nlfs_hill_power_hc:
    case MethodId::nlfs_hill_power_os:
    case MethodId::nlfs_power_hc:
    case MethodId::nlfs_power_os:
      return true;
    default:
      return false;
  }
}

FunctionSpace nlfs_space(MethodId id) {
  switch (id) {
    case MethodId::nlfs_hill_hc:
    case MethodId::nlfs_hill_os:
      return FunctionSpace::hill();
    case MethodId::nlfs_power_hc:
    case MethodId::nlfs_power_os:
      return FunctionSpace::power();
    default:
      return FunctionSpace::hill_power();
  }
}

std::uint64_t scenario_key(const Scenario& sc) {
  return derive_seed({static_cast<std::uint64_t>(sc.truth.kind),
                      static_cast<std::uint64_t>(sc.n),
                      static_cast<std::uint64_t>(std::llround(sc.sigma2 * 1e9))});
}

}  // namespace

FitResult fit_method(MethodId method, const Dataset& data, int n_draws, int burn_in,
                     std::uint64_t seed) {
  Rng rng(seed);
  if (is_nlfs(method)) {
    NlfsConfig config;
    config.n_draws = n_draws;
    config.burn_in = burn_in;
    config.theta1_var = 1.0;  // study prior; the library default is vaguer
    const bool own_slice = method == MethodId::nlfs_hill_os ||
                           method == MethodId::nlfs_power_os ||
                           method == MethodId::nlfs_hill_power_os;
    config.shrinkage = own_slice ? ShrinkageKind::own_slice : ShrinkageKind::half_cauchy;
    return run_nlfs(data, nlfs_space(method), config, rng);
  }
  switch (method) {
    case MethodId::param_hill:
    case MethodId::param_power: {
      ParametricFitConfig config;
      config.n_draws = n_draws;
      config.burn_in = burn_in;
      return fit_parametric(data, method == MethodId::param_hill ? hill_space() : power_space(),
                            config, rng);
    }
    case MethodId::bspline:
    case MethodId::pspline: {
      SplineFitConfig config;
      config.n_draws = n_draws;
      config.burn_in = burn_in;
      return method == MethodId::bspline ? fit_bspline(data, config, rng)
                                         : fit_pspline(data, config, rng);
    }
    case MethodId::param_hill_hs:
    case MethodId::param_power_hs: {
      ParamHsConfig config;
      config.n_draws = n_draws;
      config.burn_in = burn_in;
      return fit_param_plus_hs_spline(
          data, method == MethodId::param_hill_hs ? hill_space() : power_space(), config, rng);
    }
    default:
      throw std::invalid_argument("fit_method: unhandled method");
  }
}

ReplicateOutcome run_replicate(const Scenario& scenario, int replicate,
                               const StudyOptions& options) {
  ReplicateOutcome out;
  try {
    // the dataset stream depends on the generator cell only, so every method
    // in the same cell fits the same data
    const std::uint64_t cell = scenario_key(scenario);
    Rng data_rng(derive_seed({scenario.base_seed, 0xda7aULL, cell,
                              static_cast<std::uint64_t>(replicate)}));
    const Dataset data = generate_dataset(scenario.truth, scenario.n, scenario.sigma2, data_rng);

    const std::uint64_t fit_seed =
        derive_seed({scenario.base_seed, 0xf17ULL, cell,
                     static_cast<std::uint64_t>(scenario.method),
                     static_cast<std::uint64_t>(replicate)});
    const FitResult fit =
        fit_method(scenario.method, data, options.n_draws, options.burn_in, fit_seed);

    const Eigen::VectorXd truth_curve = scenario.truth.mean(data.x);
    out.rmse_value = rmse(posterior_mean_curve(fit, data.x), truth_curve);
    if (fit.draws.col("omega") >= 0) out.omega_mean = fit.draws.column("omega").mean();
  } catch (const std::exception& err) {
    out.ok = false;
    out.error = err.what();
  }
  return out;
}

std::vector<ScenarioResult> run_study(const std::vector<Scenario>& scenarios,
                                      const StudyOptions& options) {
  struct Task {
    int scenario_index;
    int replicate;
  };
  std::vector<Task> tasks;
  for (int s = 0; s < static_cast<int>(scenarios.size()); ++s) {
    if (scenarios[static_cast<std::size_t>(s)].n_rep < 1)
      throw std::invalid_argument("run_study: n_rep must be >= 1");
    for (int r = 0; r < scenarios[static_cast<std::size_t>(s)].n_rep; ++r)
      tasks.push_back({s, r});
  }

  std::vector<ReplicateOutcome> outcomes(tasks.size());
  const int workers = std::max(1, options.parallelism);
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) break;
      outcomes[i] =
          run_replicate(scenarios[static_cast<std::size_t>(tasks[i].scenario_index)],
                        tasks[i].replicate, options);
    }
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  std::vector<ScenarioResult> results(scenarios.size());
  for (std::size_t s = 0; s < scenarios.size(); ++s) {
    results[s].scenario = scenarios[s];
    results[s].replicates.resize(static_cast<std::size_t>(scenarios[s].n_rep));
  }
  for (std::size_t i = 0; i < tasks.size(); ++i)
    results[static_cast<std::size_t>(tasks[i].scenario_index)]
        .replicates[static_cast<std::size_t>(tasks[i].replicate)] = outcomes[i];

  for (auto& res : results) {
    double sum = 0.0, omega_sum = 0.0;
    int ok_count = 0, omega_count = 0;
    for (const auto& rep : res.replicates) {
      if (!rep.ok) {
        ++res.n_failed;
        continue;
      }
      sum += rep.rmse_value;
      ++ok_count;
      if (std::isfinite(rep.omega_mean)) {
        omega_sum += rep.omega_mean;
        ++omega_count;
      }
    }
    if (ok_count > 0) {
      res.mean_rmse = sum / ok_count;
      double ss = 0.0;
      for (const auto& rep : res.replicates)
        if (rep.ok) ss += (rep.rmse_value - res.mean_rmse) * (rep.rmse_value - res.mean_rmse);
      res.sd_rmse = ok_count > 1 ? std::sqrt(ss / (ok_count - 1)) : 0.0;
    }
    if (omega_count > 0) res.mean_omega = omega_sum / omega_count;
  }
  return results;
}

}  // namespace nlfs
