#include "ccofdma/experiments.hpp"

#include "ccofdma/lp.hpp"
#include "ccofdma/rng.hpp"

#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>

namespace ccofdma {

void ExperimentConfig::validate() const {
  params.validate();
  geometry.validate();
  ster.validate();
  if (!(min_rate >= 0)) throw std::invalid_argument("min_rate must be >= 0");
  if (!(outage_tolerance > 0 && outage_tolerance < 1)) throw std::invalid_argument("outage_tolerance must lie in (0,1)");
  if (!(overhead_fraction >= 0 && overhead_fraction < 1)) throw std::invalid_argument("overhead_fraction must lie in [0,1)");
  if (eval_slots < 1 || corr_eval_slots < 1) throw std::invalid_argument("evaluation slot counts must be >= 1");
  if (!(solver.delta > 0)) throw std::invalid_argument("solver.delta must be > 0");
}

double slow_overhead_factor(const ExperimentConfig& cfg) {
  return 1.0 - cfg.overhead_fraction * cfg.params.slot_length / cfg.params.window_length;
}

double fast_overhead_factor(const ExperimentConfig& cfg) { return 1.0 - cfg.overhead_fraction; }

double spectral_efficiency(double throughput, const SystemParams& params) {
  return throughput / (params.n_subcarriers * params.bandwidth_per_subcarrier);
}

namespace {

// Aggregate rate sum_n x_{k,n} r_{k,n} of every user in one slot.
Eigen::VectorXd user_rates(const Allocation& alloc, const GainSample& gains, const SystemParams& params) {
  Eigen::VectorXd rates = Eigen::VectorXd::Zero(gains.rows());
  for (Eigen::Index k = 0; k < gains.rows(); ++k)
    for (Eigen::Index n = 0; n < gains.cols(); ++n)
      rates(k) += alloc.at(static_cast<int>(k), static_cast<int>(n)) * instantaneous_rate(gains(k, n), params);
  return rates;
}

template <typename Sampler>
std::vector<double> count_outage(const Allocation& alloc, std::span<const UserProfile> users,
                                 const SystemParams& params, int slots, Sampler&& sample) {
  std::vector<double> outage(users.size(), 0.0);
  for (int t = 0; t < slots; ++t) {
    const Eigen::VectorXd rates = user_rates(alloc, sample(), params);
    for (std::size_t k = 0; k < users.size(); ++k)
      if (rates(static_cast<Eigen::Index>(k)) < users[k].min_rate) outage[k] += 1.0;
  }
  for (double& o : outage) o /= slots;
  return outage;
}

std::vector<UserProfile> window_users(std::uint64_t window_seed, const ExperimentConfig& cfg, double eps) {
  Rng rng = make_stream(window_seed, Stream::profiles);
  return draw_user_profiles(cfg.geometry, cfg.params.n_users, rng, cfg.min_rate, eps);
}

}  // namespace

std::vector<UserProfile> window_profiles(int window_id, std::uint64_t master_seed, const ExperimentConfig& cfg,
                                         double eps) {
  return window_users(derive_seed(master_seed, static_cast<std::uint64_t>(window_id)), cfg, eps);
}

std::vector<double> empirical_outage(const Allocation& alloc, std::span<const UserProfile> users,
                                     const SystemParams& params, int slots, Rng& rng) {
  return count_outage(alloc, users, params, slots, [&] { return sample_gains(users, params, rng); });
}

std::vector<double> empirical_outage_correlated(const Allocation& alloc, std::span<const UserProfile> users,
                                                const SystemParams& params, const DelayProfile& profile, int slots,
                                                Rng& rng) {
  const CorrelatedChannel channel(profile, params.n_subcarriers);
  return count_outage(alloc, users, params, slots, [&] { return channel.sample(users, rng); });
}

WindowReport run_window(int window_id, std::uint64_t master_seed, const ExperimentConfig& cfg) {
  WindowReport rep;
  rep.window_id = window_id;
  rep.window_seed = derive_seed(master_seed, static_cast<std::uint64_t>(window_id));
  rep.users = window_users(rep.window_seed, cfg, cfg.outage_tolerance);
  rep.slow_overhead_factor = slow_overhead_factor(cfg);
  rep.fast_overhead_factor = fast_overhead_factor(cfg);
  rep.solve = solve(rep.users, cfg.params, cfg.ster, cfg.mode, cfg.solver);
  rep.feasible = rep.solve.feasible;

  const auto k_users = rep.users.size();
  if (rep.feasible) {
    Rng eval = make_stream(rep.window_seed, Stream::evaluation);
    rep.per_user_outage = empirical_outage(rep.solve.best_point, rep.users, cfg.params, cfg.eval_slots, eval);
  }

  // Both schemes see the same slots of the window.
  Rng slots = make_stream(rep.window_seed, Stream::window_slots);
  const int n_slots = cfg.params.slots_per_window();
  rep.fast_outage.assign(k_users, 0.0);
  double slow_sum = 0.0, fast_sum = 0.0;
  for (int t = 0; t < n_slots; ++t) {
    const GainSample gains = sample_gains(rep.users, cfg.params, slots);
    if (rep.feasible) slow_sum += user_rates(rep.solve.best_point, gains, cfg.params).sum();
    if (!cfg.fast_baseline) continue;
    LpSolution sol = simplex_solve(build_fast_lp(gains, rep.users, cfg.params));
    if (sol.status == LpStatus::infeasible) {
      // Demands unattainable in this slot: maximize throughput and count the shortfalls.
      ++rep.fast_infeasible_slots;
      sol = simplex_solve(build_fast_lp(gains, rep.users, cfg.params, false));
      if (sol.status != LpStatus::optimal) throw NumericalFailure("fast baseline: throughput LP " + to_string(sol.status));
      const Allocation a = Allocation::from_flat(sol.x, static_cast<int>(k_users), AllocationMode::full);
      const Eigen::VectorXd rates = user_rates(a, gains, cfg.params);
      for (std::size_t k = 0; k < k_users; ++k)
        if (rates(static_cast<Eigen::Index>(k)) < rep.users[k].min_rate) rep.fast_outage[k] += 1.0;
    } else if (sol.status != LpStatus::optimal) {
      throw NumericalFailure("fast baseline: slot LP " + to_string(sol.status));
    }
    fast_sum += sol.objective_value;
  }
  for (double& o : rep.fast_outage) o /= n_slots;
  rep.slow_throughput = slow_sum / n_slots;
  rep.fast_throughput = fast_sum / n_slots;
  return rep;
}

int default_thread_count() {
  if (const char* env = std::getenv("CCP_OFDMA_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

std::vector<WindowReport> run_windows(int count, std::uint64_t master_seed, const ExperimentConfig& cfg,
                                      int threads) {
  cfg.validate();
  std::vector<WindowReport> out(static_cast<std::size_t>(std::max(count, 0)));
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (int id = next++; id < count; id = next++) {
      try {
        out[static_cast<std::size_t>(id)] = run_window(id, master_seed, cfg);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int n_threads = std::clamp(threads, 1, std::max(count, 1));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

double efficiency_ratio(std::span<const WindowReport> reports, bool with_overhead) {
  double sum = 0.0;
  int used = 0;
  for (const auto& r : reports) {
    if (!r.feasible || !(r.fast_throughput > 0)) continue;
    const double slow = r.slow_throughput * (with_overhead ? r.slow_overhead_factor : 1.0);
    const double fast = r.fast_throughput * (with_overhead ? r.fast_overhead_factor : 1.0);
    sum += slow / fast;
    ++used;
  }
  if (used == 0) throw std::invalid_argument("efficiency_ratio: no feasible window");
  return sum / used;
}

SweepReport sweep_epsilon(int window_id, std::uint64_t master_seed, std::span<const double> grid,
                          const ExperimentConfig& cfg) {
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0 && grid[i] < 1)) throw std::invalid_argument("sweep_epsilon: grid must lie in (0,1)");
    if (i > 0 && !(grid[i] > grid[i - 1])) throw std::invalid_argument("sweep_epsilon: grid must be increasing");
  }
  SweepReport rep;
  rep.window_id = window_id;
  rep.epsilon_grid.assign(grid.begin(), grid.end());
  const std::uint64_t seed = derive_seed(master_seed, static_cast<std::uint64_t>(window_id));
  for (double eps : grid) {
    const auto users = window_users(seed, cfg, eps);
    const SolveReport s = solve(users, cfg.params, cfg.ster, cfg.mode, cfg.solver);
    rep.feasible_per_eps.push_back(s.feasible);
    rep.objective_per_eps.push_back(s.feasible ? s.best_objective : 0.0);
    if (s.feasible) {
      ++rep.feasible_count;
      Rng eval = make_stream(seed, Stream::evaluation);
      rep.outage_per_eps.push_back(empirical_outage(s.best_point, users, cfg.params, cfg.eval_slots, eval));
    } else {
      rep.outage_per_eps.emplace_back(users.size(), 0.0);
    }
  }
  for (std::size_t i = 1; i < rep.objective_per_eps.size(); ++i)
    if (rep.objective_per_eps[i] < rep.objective_per_eps[i - 1] - 1e-9) rep.monotone = false;
  return rep;
}

CorrelationRow correlation_experiment(int window_id, std::uint64_t master_seed, const DelayProfile& profile,
                                      double eps_design, const ExperimentConfig& cfg) {
  CorrelationRow row;
  row.window_id = window_id;
  row.eps_design = eps_design;
  const std::uint64_t seed = derive_seed(master_seed, static_cast<std::uint64_t>(window_id));
  const auto users = window_users(seed, cfg, eps_design);
  const SolveReport s = solve(users, cfg.params, cfg.ster, cfg.mode, cfg.solver);
  row.feasible = s.feasible;
  if (!s.feasible) return row;
  Rng indep = make_stream(seed, Stream::evaluation);
  row.outage_independent = empirical_outage(s.best_point, users, cfg.params, cfg.corr_eval_slots, indep);
  Rng corr = make_stream(seed, Stream::correlated);
  row.outage_correlated =
      empirical_outage_correlated(s.best_point, users, cfg.params, profile, cfg.corr_eval_slots, corr);
  return row;
}

ConvergenceStats convergence_stats(std::span<const WindowReport> reports) {
  if (reports.empty()) throw std::invalid_argument("convergence_stats: no reports");
  ConvergenceStats st;
  st.reports = static_cast<int>(reports.size());
  double it_sum = 0, fi_sum = 0, fi_feas_sum = 0;
  for (const auto& r : reports) {
    fi_sum += r.solve.feasibility_iterations;
    if (!r.feasible) continue;
    ++st.feasible;
    it_sum += r.solve.iterations;
    fi_feas_sum += r.solve.feasibility_iterations;
    st.max_iterations = std::max(st.max_iterations, r.solve.iterations);
  }
  st.mean_feasibility_iterations = fi_sum / st.reports;
  if (st.feasible > 0) {
    st.mean_iterations = it_sum / st.feasible;
    st.mean_feasibility_iterations_feasible = fi_feas_sum / st.feasible;
  }
  return st;
}

}  // namespace ccofdma
