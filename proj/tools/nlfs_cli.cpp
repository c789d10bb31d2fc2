// Command-line front end: fit a dataset, run the simulation study, or
// recompute summaries from persisted draws.
#include <CLI11.hpp>

#include "nlfs/baselines.hpp"
#include "nlfs/csv.hpp"
#include "nlfs/diagnostics.hpp"
#include "nlfs/nlfs_sampler.hpp"
#include "nlfs/simulation.hpp"

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <random>
#include <sstream>

namespace {

using namespace nlfs;

constexpr int exit_ok = 0;
constexpr int exit_usage = 2;
constexpr int exit_data = 3;
constexpr int exit_numerical = 4;

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::pair<double, double> parse_pair(const std::string& s, const std::string& what) {
  const auto parts = split_list(s);
  if (parts.size() != 2) throw CLI::ValidationError(what, "expected two comma-separated values");
  return {std::stod(parts[0]), std::stod(parts[1])};
}

std::uint64_t ensure_seed(std::optional<std::uint64_t> seed) {
  if (seed) return *seed;
  std::random_device rd;
  const std::uint64_t generated = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  std::cout << "no --seed given; generated seed " << generated << "\n";
  return generated;
}

// ---------------------------------------------------------------------------
// fit
// ---------------------------------------------------------------------------

struct FitArgs {
  std::string input;
  std::string out_dir = ".";
  std::string method = "nlfs";
  std::string space = "hill";
  std::optional<std::uint64_t> seed;
  int n_draws = 10000;
  int burn_in = 2000;
  int grid_points = 101;
  double level = 0.95;
  int knots = 15;
  std::optional<std::string> domain;
  std::optional<std::string> theta1_prior;
  std::optional<std::string> sigma2_prior;
  std::optional<std::string> theta3_prior;
  std::optional<std::string> theta4_moments;
  std::optional<std::string> power_exponent_prior;
  std::optional<std::string> tau2_bounds;
  std::optional<double> shrink_b;
  bool adaptive = false;
  bool marginal_raw = false;
};

FunctionSpace make_space(const std::string& name, double x_lo, double x_hi,
                         const FitArgs& args) {
  ParametricSpace hill = hill_space();
  // theta3 is a covariate location, so a prior given in original units maps
  // linearly onto the rescaled axis
  if (args.theta3_prior) {
    const auto [m, v] = parse_pair(*args.theta3_prior, "--theta3-prior");
    const double scale = x_hi - x_lo;
    hill.nl_priors[0] = {PriorSpec::Family::trunc_normal, (m - x_lo) / scale,
                         v / (scale * scale)};
  }
  if (args.theta4_moments) {
    const auto [m, v] = parse_pair(*args.theta4_moments, "--theta4-moments");
    const LogNormalSpec ln = lognormal_from_moments(m, v);
    hill.nl_priors[1] = {PriorSpec::Family::log_normal, ln.log_mu, ln.log_var};
  }
  ParametricSpace power = power_space();
  if (args.power_exponent_prior) {
    const auto [m, v] = parse_pair(*args.power_exponent_prior, "--power-exponent-prior");
    power.nl_priors[0] = {PriorSpec::Family::normal, m, v};
  }
  if (name == "hill") return FunctionSpace::single(hill);
  if (name == "power") return FunctionSpace::single(power);
  if (name == "hill+power") return FunctionSpace::combined({hill, power});
  throw CLI::ValidationError("--space", "unknown space '" + name + "'");
}

int run_fit(const FitArgs& args) {
  const Dataset raw = read_xy_csv(args.input);

  double x_lo = raw.x.minCoeff();
  double x_hi = raw.x.maxCoeff();
  if (args.domain) {
    const auto [lo, hi] = parse_pair(*args.domain, "--domain");
    x_lo = lo;
    x_hi = hi;
  }
  if (!(x_hi > x_lo)) throw parse_error("degenerate covariate range");
  if (raw.x.minCoeff() < x_lo || raw.x.maxCoeff() > x_hi)
    throw parse_error("data outside the given --domain");

  Dataset data{((raw.x.array() - x_lo) / (x_hi - x_lo)).matrix(), raw.y};
  const std::uint64_t seed = ensure_seed(args.seed);
  Rng rng(seed);

  const FunctionSpace space = make_space(args.space, x_lo, x_hi, args);
  const int k_basis = args.knots + 4 - 1;
  if (data.size() <= k_basis && args.method != "param")
    throw parse_error("under-determined data: n = " + std::to_string(data.size()) +
                      " <= basis dimension " + std::to_string(k_basis));

  FitResult fit;
  if (args.method == "nlfs" || args.method == "nlfs_hc") {
    NlfsConfig config;
    config.n_draws = args.n_draws;
    config.burn_in = args.burn_in;
    config.n_internal_knots = args.knots;
    config.domain = Interval{0.0, 1.0};
    config.shrinkage =
        args.method == "nlfs" ? ShrinkageKind::own_slice : ShrinkageKind::half_cauchy;
    if (args.theta1_prior) {
      const auto [m, v] = parse_pair(*args.theta1_prior, "--theta1-prior");
      config.theta1_mean = m;
      config.theta1_var = v;
    }
    if (args.sigma2_prior) {
      const auto [a, b] = parse_pair(*args.sigma2_prior, "--sigma2-prior");
      config.sigma2_shape = a;
      config.sigma2_scale = b;
    }
    if (args.tau2_bounds) {
      const auto [lo, hi] = parse_pair(*args.tau2_bounds, "--tau2-bounds");
      config.tau2_bounds = {lo, hi};
    }
    config.shrink_b = args.shrink_b;
    config.adaptive_proposals = args.adaptive;
    config.marginal_on_centered = !args.marginal_raw;
    fit = run_nlfs(data, space, config, rng);
  } else if (args.method == "bspline" || args.method == "pspline") {
    SplineFitConfig config;
    config.n_draws = args.n_draws;
    config.burn_in = args.burn_in;
    config.n_internal_knots = args.knots;
    config.domain = Interval{0.0, 1.0};
    if (args.theta1_prior) {
      const auto [m, v] = parse_pair(*args.theta1_prior, "--theta1-prior");
      config.theta1_mean = m;
      config.theta1_var = v;
    }
    fit = args.method == "bspline" ? fit_bspline(data, config, rng)
                                   : fit_pspline(data, config, rng);
  } else if (args.method == "param") {
    ParametricFitConfig config;
    config.n_draws = args.n_draws;
    config.burn_in = args.burn_in;
    fit = fit_parametric(data, space.members.at(0), config, rng);
  } else if (args.method == "param_hs") {
    ParamHsConfig config;
    config.n_draws = args.n_draws;
    config.burn_in = args.burn_in;
    config.n_internal_knots = args.knots;
    config.domain = Interval{0.0, 1.0};
    fit = fit_param_plus_hs_spline(data, space.members.at(0), config, rng);
  } else {
    throw CLI::ValidationError("--method", "unknown method '" + args.method + "'");
  }

  std::filesystem::create_directories(args.out_dir);

  Metadata meta;
  meta["method"] = args.method;
  meta["seed"] = std::to_string(seed);
  meta["n"] = std::to_string(data.size());
  meta["x_lo"] = format_double(x_lo);
  meta["x_hi"] = format_double(x_hi);
  meta["grid_n"] = std::to_string(args.grid_points);
  meta["level"] = format_double(args.level);
  meta["input"] = args.input;
  const std::string draws_path = args.out_dir + "/draws.csv";
  write_draws_csv(draws_path, fit, meta);

  // grid in original units, evaluated on the rescaled axis
  Eigen::VectorXd grid(args.grid_points);
  for (int i = 0; i < args.grid_points; ++i)
    grid[i] = x_lo + (x_hi - x_lo) * i / (args.grid_points - 1);
  const Eigen::VectorXd grid_scaled = ((grid.array() - x_lo) / (x_hi - x_lo)).matrix();
  PosteriorSummary summary = summarize(fit, grid_scaled, args.level);
  summary.grid = grid;
  write_summary_curve(args.out_dir + "/summary_curve.csv", summary);
  write_summary_params(args.out_dir + "/summary_params.csv", summary, fit.draws.acceptance);
  for (const auto& name : fit.draws.names)
    if (name.rfind("beta_", 0) != 0)
      write_trace(args.out_dir + "/trace_" + name + ".csv", name, fit.draws);

  std::cout << "fit complete: method=" << args.method << " n=" << data.size()
            << " draws_kept=" << fit.draws.n_draws() << "\n";
  if (fit.draws.col("omega") >= 0)
    std::cout << "posterior mean omega = " << fit.draws.column("omega").mean() << "\n";
  for (const auto& [name, rate] : fit.draws.acceptance)
    std::cout << name << " = " << rate << "\n";
  std::cout << "outputs in " << args.out_dir << "\n";
  return exit_ok;
}

// ---------------------------------------------------------------------------
// simulate
// ---------------------------------------------------------------------------

struct SimulateArgs {
  std::string truth = "all";
  std::string n_list = "50,100,200,500";
  std::string sigma2_list = "0.005,0.05";
  std::string methods = "all";
  int reps = 100;
  std::optional<std::uint64_t> seed;
  int parallel = 1;
  int n_draws = 10000;
  int burn_in = 2000;
  std::string out = "study_results.csv";
  std::optional<std::string> replicates_out;
};

std::string cell_label(double mean, double sd) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.3f (%.3f)", mean, sd);
  return buf;
}

int run_simulate(const SimulateArgs& args) {
  std::vector<TruthSpec> truths;
  for (const auto& t : split_list(args.truth == "all" ? "hill,power,hill_downturn"
                                                      : args.truth)) {
    if (t == "hill") truths.push_back(TruthSpec::hill());
    else if (t == "power") truths.push_back(TruthSpec::power());
    else if (t == "hill_downturn") truths.push_back(TruthSpec::hill_downturn());
    else throw CLI::ValidationError("--truth", "unknown truth '" + t + "'");
  }
  std::vector<int> sizes;
  for (const auto& s : split_list(args.n_list)) sizes.push_back(std::stoi(s));
  std::vector<double> noises;
  for (const auto& s : split_list(args.sigma2_list)) noises.push_back(std::stod(s));
  std::vector<MethodId> methods;
  if (args.methods == "all") {
    methods = all_methods();
  } else {
    for (const auto& m : split_list(args.methods)) {
      const auto id = method_from_string(m);
      if (!id) throw CLI::ValidationError("--methods", "unknown method '" + m + "'");
      methods.push_back(*id);
    }
  }
  if (args.reps < 1) throw CLI::ValidationError("--reps", "must be >= 1");

  const std::uint64_t seed = ensure_seed(args.seed);
  std::vector<Scenario> scenarios;
  for (double s2 : noises)
    for (const auto& truth : truths)
      for (int n : sizes)
        for (MethodId m : methods)
          scenarios.push_back({truth, n, s2, m, args.reps, seed});

  StudyOptions options;
  options.n_draws = args.n_draws;
  options.burn_in = args.burn_in;
  options.parallelism = args.parallel;
  const auto results = run_study(scenarios, options);

  std::ofstream out(args.out);
  if (!out) throw parse_error("cannot write '" + args.out + "'");
  out << "sigma2,truth,n,method,n_rep,n_failed,mean_rmse,sd_rmse,mean_omega,summary\n";
  for (const auto& res : results) {
    out << format_double(res.scenario.sigma2) << "," << res.scenario.truth.name() << ","
        << res.scenario.n << "," << to_string(res.scenario.method) << "," << res.scenario.n_rep
        << "," << res.n_failed << "," << format_double(res.mean_rmse) << ","
        << format_double(res.sd_rmse) << ","
        << (std::isfinite(res.mean_omega) ? format_double(res.mean_omega) : "") << ",\""
        << cell_label(res.mean_rmse, res.sd_rmse) << "\"\n";
  }

  if (args.replicates_out) {
    std::ofstream rep_out(*args.replicates_out);
    if (!rep_out) throw parse_error("cannot write '" + *args.replicates_out + "'");
    rep_out << "sigma2,truth,n,method,replicate,rmse,omega_mean,ok,error\n";
    for (const auto& res : results)
      for (std::size_t r = 0; r < res.replicates.size(); ++r) {
        const auto& rep = res.replicates[r];
        rep_out << format_double(res.scenario.sigma2) << "," << res.scenario.truth.name() << ","
                << res.scenario.n << "," << to_string(res.scenario.method) << "," << r << ","
                << format_double(rep.rmse_value) << ","
                << (std::isfinite(rep.omega_mean) ? format_double(rep.omega_mean) : "") << ","
                << (rep.ok ? "1" : "0") << "," << rep.error << "\n";
      }
  }

  // pivoted view in the layout of the study tables: rows = methods,
  // columns = truth x n, one block per noise level
  for (double s2 : noises) {
    std::cout << "\nmean RMSE (sd), sigma2 = " << s2 << "\n";
    std::cout << "method";
    for (const auto& truth : truths)
      for (int n : sizes) std::cout << "\t" << truth.name() << "_n" << n;
    std::cout << "\n";
    for (MethodId m : methods) {
      std::cout << to_string(m);
      for (const auto& truth : truths)
        for (int n : sizes) {
          for (const auto& res : results)
            if (res.scenario.method == m && res.scenario.n == n &&
                res.scenario.sigma2 == s2 && res.scenario.truth.kind == truth.kind)
              std::cout << "\t" << cell_label(res.mean_rmse, res.sd_rmse);
        }
      std::cout << "\n";
    }
  }
  std::cout << "\nresults written to " << args.out << "\n";
  return exit_ok;
}

// ---------------------------------------------------------------------------
// summarize
// ---------------------------------------------------------------------------

struct SummarizeArgs {
  std::string draws;
  std::string out_dir = ".";
  std::optional<double> level;
  std::optional<int> grid_points;
  std::optional<std::string> grid_range;
};

int run_summarize(const SummarizeArgs& args) {
  Metadata meta;
  const FitResult fit = read_draws_csv(args.draws, meta);

  const double x_lo = std::strtod(meta.at("x_lo").c_str(), nullptr);
  const double x_hi = std::strtod(meta.at("x_hi").c_str(), nullptr);
  double grid_lo = x_lo, grid_hi = x_hi;
  int grid_n = static_cast<int>(std::strtol(meta.at("grid_n").c_str(), nullptr, 10));
  double level = std::strtod(meta.at("level").c_str(), nullptr);
  if (args.level) level = *args.level;
  if (args.grid_points) grid_n = *args.grid_points;
  if (args.grid_range) {
    const auto parts = split_list(*args.grid_range);
    if (parts.size() != 3)
      throw CLI::ValidationError("--grid-range", "expected LO,HI,POINTS");
    grid_lo = std::stod(parts[0]);
    grid_hi = std::stod(parts[1]);
    grid_n = std::stoi(parts[2]);
  }

  Eigen::VectorXd grid(grid_n);
  for (int i = 0; i < grid_n; ++i)
    grid[i] = grid_lo + (grid_hi - grid_lo) * i / (grid_n - 1);
  const Eigen::VectorXd grid_scaled = ((grid.array() - x_lo) / (x_hi - x_lo)).matrix();

  std::filesystem::create_directories(args.out_dir);
  PosteriorSummary summary = summarize(fit, grid_scaled, level);
  summary.grid = grid;
  write_summary_curve(args.out_dir + "/summary_curve.csv", summary);
  write_summary_params(args.out_dir + "/summary_params.csv", summary, fit.draws.acceptance);
  for (const auto& name : fit.draws.names)
    if (name.rfind("beta_", 0) != 0)
      write_trace(args.out_dir + "/trace_" + name + ".csv", name, fit.draws);
  std::cout << "summaries written to " << args.out_dir << "\n";
  return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian regression with non-linear functional shrinkage"};
  app.require_subcommand(1);
  // key=value config files mirror every flag, one [section] per subcommand;
  // explicit command-line flags override file values
  app.set_config("--config");

  FitArgs fit_args;
  auto* fit_cmd = app.add_subcommand("fit", "fit a two-column x,y file");
  fit_cmd->add_option("--input", fit_args.input, "input CSV with header x,y")->required();
  fit_cmd->add_option("--out", fit_args.out_dir, "output directory");
  fit_cmd->add_option("--method", fit_args.method,
                      "nlfs | nlfs_hc | bspline | pspline | param | param_hs");
  fit_cmd->add_option("--space", fit_args.space, "hill | power | hill+power");
  fit_cmd->add_option("--seed", fit_args.seed, "RNG seed (generated and printed if omitted)");
  fit_cmd->add_option("--draws", fit_args.n_draws, "total MCMC iterations");
  fit_cmd->add_option("--burn-in", fit_args.burn_in, "discarded iterations");
  fit_cmd->add_option("--grid", fit_args.grid_points, "curve summary grid size");
  fit_cmd->add_option("--level", fit_args.level, "credible level");
  fit_cmd->add_option("--knots", fit_args.knots, "internal spline knots");
  fit_cmd->add_option("--domain", fit_args.domain, "LO,HI rescale anchors in x units");
  fit_cmd->add_option("--theta1-prior", fit_args.theta1_prior, "M,V intercept prior");
  fit_cmd->add_option("--sigma2-prior", fit_args.sigma2_prior, "A,B inverse-gamma prior");
  fit_cmd->add_option("--theta3-prior", fit_args.theta3_prior,
                      "M,V half-maximal prior in original x units (hill)");
  fit_cmd->add_option("--theta4-moments", fit_args.theta4_moments,
                      "M,V target moments of the steepness prior (hill)");
  fit_cmd->add_option("--power-exponent-prior", fit_args.power_exponent_prior,
                      "M,V exponent prior (power)");
  fit_cmd->add_option("--tau2-bounds", fit_args.tau2_bounds, "LO,HI slice bounds");
  fit_cmd->add_option("--shrink-b", fit_args.shrink_b, "override b of the Beta(a,b) prior");
  fit_cmd->add_flag("--adaptive-proposals", fit_args.adaptive,
                    "window-variance MH proposals");
  fit_cmd->add_flag("--marginal-raw", fit_args.marginal_raw,
                    "theta marginal on raw y instead of y - theta1");

  SimulateArgs sim_args;
  auto* sim_cmd = app.add_subcommand("simulate", "run the replication study");
  sim_cmd->add_option("--truth", sim_args.truth, "hill,power,hill_downturn or all");
  sim_cmd->add_option("--n", sim_args.n_list, "comma list of sample sizes");
  sim_cmd->add_option("--sigma2", sim_args.sigma2_list, "comma list of noise variances");
  sim_cmd->add_option("--methods", sim_args.methods, "comma list of method ids or all");
  sim_cmd->add_option("--reps", sim_args.reps, "replicates per scenario")->required();
  sim_cmd->add_option("--seed", sim_args.seed, "base seed");
  sim_cmd->add_option("--parallel", sim_args.parallel, "worker threads");
  sim_cmd->add_option("--draws", sim_args.n_draws, "MCMC iterations per fit");
  sim_cmd->add_option("--burn-in", sim_args.burn_in, "discarded iterations");
  sim_cmd->add_option("--out", sim_args.out, "results CSV path");
  sim_cmd->add_option("--replicates", sim_args.replicates_out, "per-replicate CSV path");

  SummarizeArgs sum_args;
  auto* sum_cmd = app.add_subcommand("summarize", "recompute summaries from stored draws");
  sum_cmd->add_option("--draws", sum_args.draws, "draws.csv from a fit")->required();
  sum_cmd->add_option("--out", sum_args.out_dir, "output directory");
  sum_cmd->add_option("--level", sum_args.level, "credible level override");
  sum_cmd->add_option("--grid", sum_args.grid_points, "grid size override");
  sum_cmd->add_option("--grid-range", sum_args.grid_range, "LO,HI,POINTS override");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_usage;
  }

  try {
    if (fit_cmd->parsed()) return run_fit(fit_args);
    if (sim_cmd->parsed()) return run_simulate(sim_args);
    if (sum_cmd->parsed()) return run_summarize(sum_args);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return exit_usage;
  } catch (const parse_error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return exit_data;
  } catch (const numerical_error& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return exit_numerical;
  } catch (const std::invalid_argument& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return exit_data;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_data;
  }
  return exit_usage;
}
