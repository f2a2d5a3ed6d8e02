#include "ccofdma/cli.hpp"

#include "ccofdma/config.hpp"
#include "ccofdma/csv.hpp"
#include "ccofdma/experiments.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <fstream>
#include <iostream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

namespace ccofdma {

namespace {

constexpr const char* kSchemas = R"(CSV outputs (floats with 12 significant digits, written to --out):
  windows.csv      simulate, compare-fast; one row per window ordered by window_id
    window_id, window_seed, feasible, terminated_by, iterations, feasibility_iterations,
    objective_bps, slow_throughput_bps, fast_throughput_bps, slow_overhead, fast_overhead,
    slow_se, fast_se, ratio, fast_infeasible_slots, max_outage, outage_0 .. outage_{K-1}
    (se = bits/s/Hz/subcarrier after overhead; ratio = slow_se / fast_se, nan if infeasible)
  allocation.csv   solve; user, subcarrier, fraction (reduced mode: subcarrier = all)
  sweep.csv        sweep-eps; one row per epsilon
    window_id, eps, feasible, objective_bps, se, max_outage, outage_0 .. outage_{K-1}
  correlation.csv  corr-experiment; one row per (window, eps_design, user)
    window_id, eps_design, user, feasible, outage_independent, outage_correlated
  trace_<id>.csv   --trace; one row per query
    iter, kind_of_cut, objective, potential, n_rows
Every run also writes config.resolved, a config file that reproduces it.
Exit codes: 0 ok, 1 infeasible (feasibility), 2 config or usage error, 3 numerical failure.
Threads: CCP_OFDMA_THREADS caps the window pool.)";

struct Common {
  std::string config;
  std::string out = ".";
  std::uint64_t seed = 0;
  bool seed_set = false;
  double eps = 0.0;
  double quad_tol = 0.0;
  double rho_tol = 0.0;
  bool trace = false;
};

std::ofstream open_csv(const std::filesystem::path& path) {
  std::ofstream f(path);
  if (!f) throw ConfigError("", "cannot write " + path.string());
  return f;
}

void write_trace(const RunConfig& cfg, int window_id, const SolveReport& s) {
  auto f = open_csv(cfg.out_dir / ("trace_" + std::to_string(window_id) + ".csv"));
  f << "iter,kind_of_cut,objective,potential,n_rows\n";
  for (const auto& row : s.trace)
    f << row.iteration << ',' << to_string(row.kind) << ',' << format_csv(row.objective) << ','
      << format_csv(row.potential) << ',' << row.n_rows << '\n';
}

std::string outage_header(int k_users) {
  std::string h;
  for (int k = 0; k < k_users; ++k) h += ",outage_" + std::to_string(k);
  return h;
}

void append_outages(std::ostream& f, const std::vector<double>& outage, int k_users) {
  for (int k = 0; k < k_users; ++k)
    f << ',' << (static_cast<std::size_t>(k) < outage.size() ? format_csv(outage[static_cast<std::size_t>(k)]) : "nan");
}

double max_of(const std::vector<double>& v) {
  return v.empty() ? std::numeric_limits<double>::quiet_NaN() : *std::max_element(v.begin(), v.end());
}

// "a:b:n" -> n evenly spaced points; otherwise a comma-separated list.
std::vector<double> parse_grid(const std::string& text) {
  auto number = [&](const std::string& s) {
    double v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) throw CLI::ValidationError("--grid", "bad number '" + s + "'");
    return v;
  };
  std::vector<std::string> parts;
  const char sep = text.find(':') != std::string::npos ? ':' : ',';
  std::stringstream ss(text);
  for (std::string p; std::getline(ss, p, sep);) parts.push_back(p);
  std::vector<double> grid;
  if (sep == ':') {
    if (parts.size() != 3) throw CLI::ValidationError("--grid", "expected a:b:n");
    const double a = number(parts[0]), b = number(parts[1]);
    int n = 0;
    const auto [ptr, ec] = std::from_chars(parts[2].data(), parts[2].data() + parts[2].size(), n);
    if (ec != std::errc() || ptr != parts[2].data() + parts[2].size() || n < 1)
      throw CLI::ValidationError("--grid", "point count must be a positive integer");
    if (n == 1) return {a};
    for (int i = 0; i < n; ++i) grid.push_back(a + (b - a) * i / (n - 1));
  } else {
    for (const auto& p : parts) grid.push_back(number(p));
  }
  return grid;
}

RunConfig prepare(const Common& c) {
  RunConfig cfg = c.config.empty() ? parse_config("seed = 1\nsys.n_users = 4\nsys.n_subcarriers = 64\n", "<defaults>")
                                   : load_config(c.config);
  if (c.seed_set) {
    cfg.seed = c.seed;
    cfg.experiment.params.rng_seed = c.seed;
  }
  if (c.eps != 0.0) {
    if (!(c.eps > 0 && c.eps < 1)) throw ConfigError("users.outage_tolerance", "--eps must lie in (0,1)");
    cfg.experiment.outage_tolerance = c.eps;
  }
  if (c.quad_tol != 0.0) {
    if (!(c.quad_tol > 0)) throw ConfigError("ster.quad_rel_tol", "--quad-tol must be > 0");
    cfg.experiment.ster.quad_rel_tol = c.quad_tol;
  }
  if (c.rho_tol != 0.0) {
    if (!(c.rho_tol > 0)) throw ConfigError("ster.rho_rel_tol", "--rho-tol must be > 0");
    cfg.experiment.ster.rho_rel_tol = c.rho_tol;
  }
  cfg.out_dir = c.out;
  write_resolved_config(cfg);
  return cfg;
}

int run_solve(const RunConfig& cfg, int window, bool trace, std::ostream& out) {
  const ExperimentConfig& e = cfg.experiment;
  const auto users = window_profiles(window, cfg.seed, e, e.outage_tolerance);
  const SolveReport s = solve(users, e.params, e.ster, e.mode, e.solver);
  if (trace) write_trace(cfg, window, s);
  auto f = open_csv(cfg.out_dir / "allocation.csv");
  f << "user,subcarrier,fraction\n";
  for (int k = 0; k < e.params.n_users; ++k) {
    if (e.mode == AllocationMode::reduced) {
      f << k << ",all," << format_csv(s.best_point.x(k, 0)) << '\n';
      continue;
    }
    for (int n = 0; n < e.params.n_subcarriers; ++n) f << k << ',' << n << ',' << format_csv(s.best_point.x(k, n)) << '\n';
  }
  out << "window " << window << ": " << (s.feasible ? "feasible" : "infeasible") << ", " << to_string(s.terminated_by)
      << " after " << s.iterations << " iterations";
  if (s.feasible)
    out << ", objective " << format_csv(s.best_objective) << " bits/s ("
        << format_csv(spectral_efficiency(s.best_objective, e.params)) << " bits/s/Hz/subcarrier)";
  out << '\n';
  return kExitOk;
}

int run_feasibility(RunConfig cfg, int window, bool trace, std::ostream& out) {
  ExperimentConfig& e = cfg.experiment;
  e.solver.stop_when_feasible = true;
  const auto users = window_profiles(window, cfg.seed, e, e.outage_tolerance);
  const SolveReport s = solve(users, e.params, e.ster, e.mode, e.solver);
  if (trace) write_trace(cfg, window, s);
  out << "window " << window << ": " << (s.feasible ? "feasible" : "infeasible") << " after "
      << s.feasibility_iterations << " iterations\n";
  return s.feasible ? kExitOk : kExitInfeasible;
}

int run_simulate(RunConfig cfg, int windows, bool trace, bool compare, std::ostream& out) {
  ExperimentConfig& e = cfg.experiment;
  if (compare) e.fast_baseline = true;
  const auto reports = run_windows(windows, cfg.seed, e, default_thread_count());
  const int k_users = e.params.n_users;
  auto f = open_csv(cfg.out_dir / "windows.csv");
  f << "window_id,window_seed,feasible,terminated_by,iterations,feasibility_iterations,objective_bps,"
       "slow_throughput_bps,fast_throughput_bps,slow_overhead,fast_overhead,slow_se,fast_se,ratio,"
       "fast_infeasible_slots,max_outage"
    << outage_header(k_users) << '\n';
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const auto& r : reports) {
    const double slow_se = spectral_efficiency(r.slow_throughput * r.slow_overhead_factor, e.params);
    const double fast_se = e.fast_baseline ? spectral_efficiency(r.fast_throughput * r.fast_overhead_factor, e.params) : nan;
    const double ratio = r.feasible && fast_se > 0 ? slow_se / fast_se : nan;
    f << r.window_id << ',' << r.window_seed << ',' << (r.feasible ? 1 : 0) << ',' << to_string(r.solve.terminated_by)
      << ',' << r.solve.iterations << ',' << r.solve.feasibility_iterations << ','
      << format_csv(r.feasible ? r.solve.best_objective : nan) << ',' << format_csv(r.slow_throughput) << ','
      << format_csv(e.fast_baseline ? r.fast_throughput : nan) << ',' << format_csv(r.slow_overhead_factor) << ','
      << format_csv(r.fast_overhead_factor) << ',' << format_csv(slow_se) << ',' << format_csv(fast_se) << ','
      << format_csv(ratio) << ',' << r.fast_infeasible_slots << ',' << format_csv(max_of(r.per_user_outage));
    append_outages(f, r.per_user_outage, k_users);
    f << '\n';
    if (trace) write_trace(cfg, r.window_id, r.solve);
  }

  const ConvergenceStats st = convergence_stats(reports);
  out << st.feasible << " of " << st.reports << " windows feasible\n";
  if (st.feasible > 0) {
    double worst = 0;
    for (const auto& r : reports)
      if (r.feasible) worst = std::max(worst, max_of(r.per_user_outage));
    out << "iterations: mean " << format_csv(st.mean_iterations) << ", max " << st.max_iterations << '\n';
    out << "worst empirical outage " << format_csv(worst) << " (tolerance " << format_csv(e.outage_tolerance) << ")\n";
    if (e.fast_baseline)
      out << "slow/fast spectral efficiency ratio " << format_csv(efficiency_ratio(reports, true))
          << " (without overhead " << format_csv(efficiency_ratio(reports, false)) << ")\n";
  }
  out << "feasibility detection: mean " << format_csv(st.mean_feasibility_iterations) << " iterations\n";
  if (e.fast_baseline) {
    long long infeasible_slots = 0;
    for (const auto& r : reports) infeasible_slots += r.fast_infeasible_slots;
    out << "fast baseline: " << infeasible_slots
        << " slots with unattainable demand (throughput-only allocation, outage counted)\n";
  }
  return kExitOk;
}

int run_sweep(const RunConfig& cfg, int window, const std::vector<double>& grid, std::ostream& out) {
  const ExperimentConfig& e = cfg.experiment;
  const SweepReport rep = sweep_epsilon(window, cfg.seed, grid, e);
  const int k_users = e.params.n_users;
  auto f = open_csv(cfg.out_dir / "sweep.csv");
  f << "window_id,eps,feasible,objective_bps,se,max_outage" << outage_header(k_users) << '\n';
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const bool feas = rep.feasible_per_eps[i];
    f << window << ',' << format_csv(grid[i]) << ',' << (feas ? 1 : 0) << ','
      << format_csv(feas ? rep.objective_per_eps[i] : nan) << ','
      << format_csv(feas ? spectral_efficiency(rep.objective_per_eps[i], e.params) : nan) << ','
      << format_csv(feas ? max_of(rep.outage_per_eps[i]) : nan);
    append_outages(f, feas ? rep.outage_per_eps[i] : std::vector<double>{}, k_users);
    f << '\n';
  }
  out << rep.feasible_count << " of " << grid.size() << " epsilon values feasible; objective "
      << (rep.monotone ? "nondecreasing" : "NOT monotone") << " in epsilon\n";
  return kExitOk;
}

int run_corr(const RunConfig& cfg, int windows, const std::vector<double>& designs, double nominal,
             std::ostream& out) {
  const ExperimentConfig& e = cfg.experiment;
  auto f = open_csv(cfg.out_dir / "correlation.csv");
  f << "window_id,eps_design,user,feasible,outage_independent,outage_correlated\n";
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (double eps : designs) {
    if (!(eps > 0 && eps < 1)) throw ConfigError("", "--eps-design values must lie in (0,1)");
    // Rows are collected per window and written in id order.
    std::vector<CorrelationRow> rows(static_cast<std::size_t>(windows));
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex mu;
    auto worker = [&] {
      for (int id = next++; id < windows; id = next++) {
        try {
          rows[static_cast<std::size_t>(id)] = correlation_experiment(id, cfg.seed, e.delay_profile, eps, e);
        } catch (...) {
          std::lock_guard lock(mu);
          if (!failure) failure = std::current_exception();
        }
      }
    };
    {
      std::vector<std::jthread> pool;
      const int n = std::clamp(default_thread_count(), 1, std::max(windows, 1));
      for (int i = 0; i < n; ++i) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);

    int feasible = 0, above = 0;
    double worst = 0;
    for (const auto& r : rows) {
      feasible += r.feasible ? 1 : 0;
      for (int k = 0; k < e.params.n_users; ++k) {
        const auto uk = static_cast<std::size_t>(k);
        const double ind = r.feasible ? r.outage_independent[uk] : nan;
        const double cor = r.feasible ? r.outage_correlated[uk] : nan;
        f << r.window_id << ',' << format_csv(eps) << ',' << k << ',' << (r.feasible ? 1 : 0) << ','
          << format_csv(ind) << ',' << format_csv(cor) << '\n';
        if (r.feasible) {
          worst = std::max(worst, cor);
          if (cor > nominal) ++above;
        }
      }
    }
    out << "eps_design " << format_csv(eps) << ": " << feasible << " of " << windows << " windows feasible, " << above
        << " user-windows above " << format_csv(nominal) << " under correlation (worst "
        << format_csv(worst) << ")\n";
  }
  return kExitOk;
}

}  // namespace

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Slow adaptive OFDMA with chance-constrained subcarrier allocation", "ccp_ofdma"};
  app.footer(kSchemas);
  app.require_subcommand(1);

  Common c;
  auto add_common = [&c](CLI::App* sub) {
    sub->add_option("--config", c.config, "key = value configuration file (built-in defaults if omitted)");
    sub->add_option("--out", c.out, "output directory")->capture_default_str();
    sub->add_option_function<std::uint64_t>(
        "--seed", [&c](std::uint64_t s) { c.seed = s, c.seed_set = true; }, "override the master seed");
    sub->add_option("--eps", c.eps, "override users.outage_tolerance");
    sub->add_option("--quad-tol", c.quad_tol, "override ster.quad_rel_tol");
    sub->add_option("--rho-tol", c.rho_tol, "override ster.rho_rel_tol");
    sub->add_flag("--trace", c.trace, "write trace_<id>.csv per solved window");
  };

  int window = 0;
  int windows = 100;
  std::string grid_text = "0.05,0.1,0.2,0.3,0.5,0.7";
  std::vector<double> designs = {0.3, 0.1};
  double nominal = 0.3;

  auto* solve_cmd = app.add_subcommand("solve", "solve one window and write allocation.csv");
  auto* feas_cmd = app.add_subcommand("feasibility", "admission check for one window (exit 1 if infeasible)");
  auto* sim_cmd = app.add_subcommand("simulate", "run windows and write windows.csv");
  auto* cmp_cmd = app.add_subcommand("compare-fast", "simulate with the per-slot LP baseline forced on");
  auto* sweep_cmd = app.add_subcommand("sweep-eps", "re-solve one window over an epsilon grid, write sweep.csv");
  auto* corr_cmd = app.add_subcommand("corr-experiment", "outage under frequency-correlated fading, correlation.csv");
  for (auto* sub : {solve_cmd, feas_cmd, sim_cmd, cmp_cmd, sweep_cmd, corr_cmd}) {
    add_common(sub);
    sub->footer(kSchemas);
  }
  for (auto* sub : {solve_cmd, feas_cmd, sweep_cmd})
    sub->add_option("--window", window, "window id")->check(CLI::NonNegativeNumber)->capture_default_str();
  for (auto* sub : {sim_cmd, cmp_cmd, corr_cmd})
    sub->add_option("--windows", windows, "number of windows")->check(CLI::PositiveNumber)->capture_default_str();
  sweep_cmd->add_option("--grid", grid_text, "a:b:n or comma-separated list")->capture_default_str();
  corr_cmd->add_option("--eps-design", designs, "design tolerances")
      ->delimiter(',')
      ->capture_default_str();
  corr_cmd->add_option("--nominal", nominal, "tolerance the correlated outage is judged against")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    RunConfig cfg = prepare(c);
    if (solve_cmd->parsed()) return run_solve(cfg, window, c.trace, out);
    if (feas_cmd->parsed()) return run_feasibility(cfg, window, c.trace, out);
    if (sim_cmd->parsed()) return run_simulate(cfg, windows, c.trace, false, out);
    if (cmp_cmd->parsed()) return run_simulate(cfg, windows, c.trace, true, out);
    if (sweep_cmd->parsed()) return run_sweep(cfg, window, parse_grid(grid_text), out);
    if (corr_cmd->parsed()) return run_corr(cfg, windows, designs, nominal, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const CLI::ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericalFailure& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitConfig;
}

int dispatch(int argc, const char* const* argv) { return dispatch(argc, argv, std::cout, std::cerr); }

}  // namespace ccofdma
