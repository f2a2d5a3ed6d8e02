#pragma once

#include "ccofdma/accpm.hpp"
#include "ccofdma/bernstein.hpp"
#include "ccofdma/channel.hpp"
#include "ccofdma/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace ccofdma {

struct ExperimentConfig {
  SystemParams params;
  CellGeometry geometry;
  SterConfig ster;
  AccpmOptions solver;
  AllocationMode mode = AllocationMode::reduced;
  double min_rate = 20.0;          // q_k for every user [bits/s]
  double outage_tolerance = 0.1;   // epsilon_k for every user
  double overhead_fraction = 0.1;  // signaling cost of one allocation update, in slots
  int eval_slots = 100000;         // outage evaluation stream length
  int corr_eval_slots = 20000;     // evaluation length in the correlation experiment
  bool fast_baseline = true;       // solve the per-slot LP over the window
  DelayProfile delay_profile;      // correlated-channel experiment

  void validate() const;
};

struct WindowReport {
  int window_id = 0;
  std::uint64_t window_seed = 0;
  std::vector<UserProfile> users;
  SolveReport solve;
  bool feasible = false;
  std::vector<double> per_user_outage;  // empirical, over eval_slots
  double slow_throughput = 0.0;         // bits/s, mean over the window's slots, before overhead
  double fast_throughput = 0.0;         // bits/s, mean per-slot LP optimum, before overhead
  double slow_overhead_factor = 1.0;
  double fast_overhead_factor = 1.0;
  int fast_infeasible_slots = 0;        // slots where some demand was unattainable
  std::vector<double> fast_outage;      // per-user outage of the fast scheme over the window
};

/// (1 - overhead * T0 / T) for one update per window, (1 - overhead) for one
/// update per slot.
double slow_overhead_factor(const ExperimentConfig& cfg);
double fast_overhead_factor(const ExperimentConfig& cfg);

/// bits/s -> bits/s/Hz/subcarrier.
double spectral_efficiency(double throughput, const SystemParams& params);

/// Empirical per-user outage Pr{sum_n x_{k,n} r_{k,n} < q_k} over `slots`
/// i.i.d. Rayleigh slots.
std::vector<double> empirical_outage(const Allocation& alloc, std::span<const UserProfile> users,
                                     const SystemParams& params, int slots, Rng& rng);

/// Same, under frequency-correlated fading.
std::vector<double> empirical_outage_correlated(const Allocation& alloc, std::span<const UserProfile> users,
                                                const SystemParams& params, const DelayProfile& profile, int slots,
                                                Rng& rng);

/// The users of window `window_id`, all with outage tolerance `eps`.
std::vector<UserProfile> window_profiles(int window_id, std::uint64_t master_seed, const ExperimentConfig& cfg,
                                         double eps);

/// One adaptation window: draw users, solve, evaluate outage, and run the
/// fast baseline over the window's slots.
WindowReport run_window(int window_id, std::uint64_t master_seed, const ExperimentConfig& cfg);

/// Runs windows [0, count) on `threads` workers; results ordered by id.
std::vector<WindowReport> run_windows(int count, std::uint64_t master_seed, const ExperimentConfig& cfg,
                                      int threads = 1);

/// Mean over feasible windows of (slow * slow_factor) / (fast * fast_factor).
/// `with_overhead = false` drops the factors.
double efficiency_ratio(std::span<const WindowReport> reports, bool with_overhead = true);

struct SweepReport {
  int window_id = 0;
  std::vector<double> epsilon_grid;
  std::vector<double> objective_per_eps;               // bits/s, 0 when infeasible
  std::vector<std::vector<double>> outage_per_eps;     // per user
  std::vector<bool> feasible_per_eps;
  int feasible_count = 0;
  bool monotone = true;                                // objective nondecreasing in epsilon
};

/// Re-solves one window for every epsilon in the sorted grid.
SweepReport sweep_epsilon(int window_id, std::uint64_t master_seed, std::span<const double> grid,
                          const ExperimentConfig& cfg);

struct CorrelationRow {
  int window_id = 0;
  double eps_design = 0.0;
  bool feasible = false;
  std::vector<double> outage_independent;
  std::vector<double> outage_correlated;
};

/// Solves with the independence-based constraint at eps_design and measures
/// the outage under i.i.d. and under correlated fading.
CorrelationRow correlation_experiment(int window_id, std::uint64_t master_seed, const DelayProfile& profile,
                                      double eps_design, const ExperimentConfig& cfg);

struct ConvergenceStats {
  int reports = 0;
  int feasible = 0;
  double mean_iterations = 0.0;              // feasible windows
  int max_iterations = 0;                    // feasible windows
  double mean_feasibility_iterations = 0.0;  // all windows
  double mean_feasibility_iterations_feasible = 0.0;
};

ConvergenceStats convergence_stats(std::span<const WindowReport> reports);

/// Threads requested through CCP_OFDMA_THREADS, else hardware concurrency.
int default_thread_count();

}  // namespace ccofdma
