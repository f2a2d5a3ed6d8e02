#include "ccofdma/experiments.hpp"

#include <doctest.h>

using namespace ccofdma;

namespace {

ExperimentConfig small() {
  ExperimentConfig c;
  c.params.n_subcarriers = 16;
  c.params.window_length = 0.05;  // 50 slots
  c.min_rate = 5.0;
  c.eval_slots = 2000;
  c.corr_eval_slots = 500;
  return c;
}

}  // namespace

TEST_CASE("experiments: overhead factors") {
  const ExperimentConfig c;
  CHECK(slow_overhead_factor(c) == doctest::Approx(0.9999).epsilon(1e-15));
  CHECK(fast_overhead_factor(c) == doctest::Approx(0.9).epsilon(1e-15));
  CHECK(spectral_efficiency(640.0, c.params) == doctest::Approx(10.0));
}

TEST_CASE("experiments: efficiency ratio on hand-made reports") {
  WindowReport same;
  same.feasible = true;
  same.slow_throughput = same.fast_throughput = 100.0;
  same.slow_overhead_factor = 0.9999;
  same.fast_overhead_factor = 0.9;
  std::vector<WindowReport> reps{same};
  CHECK(efficiency_ratio(reps, false) == doctest::Approx(1.0));
  CHECK(efficiency_ratio(reps, true) > efficiency_ratio(reps, false));
  CHECK(efficiency_ratio(reps, true) == doctest::Approx(0.9999 / 0.9));

  WindowReport half = same;
  half.slow_throughput = 50.0;
  WindowReport skipped;
  skipped.feasible = false;
  reps = {same, half, skipped};
  CHECK(efficiency_ratio(reps, false) == doctest::Approx(0.75));
  const std::vector<WindowReport> none{skipped};
  CHECK_THROWS(efficiency_ratio(none));
}

TEST_CASE("experiments: convergence statistics aggregate solver counts") {
  WindowReport r;
  r.feasible = true;
  r.solve.iterations = 22;
  r.solve.feasibility_iterations = 7;
  std::vector<WindowReport> reps{r};
  ConvergenceStats s = convergence_stats(reps);
  CHECK(s.mean_iterations == 22.0);
  CHECK(s.max_iterations == 22);
  CHECK(s.mean_feasibility_iterations == 7.0);

  WindowReport bad;
  bad.feasible = false;
  bad.solve.iterations = 3;
  bad.solve.feasibility_iterations = 3;
  WindowReport r2 = r;
  r2.solve.iterations = 30;
  reps = {r, bad, r2};
  s = convergence_stats(reps);
  CHECK(s.reports == 3);
  CHECK(s.feasible == 2);
  CHECK(s.mean_iterations == 26.0);
  CHECK(s.max_iterations == 30);
  CHECK(s.mean_feasibility_iterations == doctest::Approx(17.0 / 3.0));
  CHECK(s.mean_feasibility_iterations_feasible == 7.0);
  CHECK_THROWS(convergence_stats(std::vector<WindowReport>{}));
}

TEST_CASE("experiments: windows are reproducible and independent of threading") {
  const ExperimentConfig c = small();
  const auto a = run_windows(4, 9, c, 1);
  const auto b = run_windows(4, 9, c, 3);
  REQUIRE(a.size() == 4);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].window_id == static_cast<int>(i));
    CHECK(a[i].window_seed == b[i].window_seed);
    CHECK(a[i].feasible == b[i].feasible);
    CHECK(a[i].slow_throughput == b[i].slow_throughput);
    CHECK(a[i].fast_throughput == b[i].fast_throughput);
    CHECK(a[i].per_user_outage == b[i].per_user_outage);
    CHECK(a[i].solve.iterations == b[i].solve.iterations);
  }
  // a window keeps its stream when the batch grows
  const WindowReport third = run_window(3, 9, c);
  CHECK(third.slow_throughput == a[3].slow_throughput);
}

TEST_CASE("experiments: window invariants") {
  const ExperimentConfig c = small();
  for (const auto& r : run_windows(3, 4, c)) {
    CHECK(r.slow_throughput >= 0.0);
    CHECK(r.fast_throughput >= 0.0);
    CHECK(r.slow_overhead_factor <= 1.0);
    CHECK(r.fast_overhead_factor <= 1.0);
    for (double o : r.per_user_outage) {
      CHECK(o >= 0.0);
      CHECK(o <= 1.0);
    }
    if (r.feasible && r.fast_infeasible_slots == 0) CHECK(r.fast_throughput >= r.slow_throughput);
    if (r.fast_infeasible_slots == 0)
      for (double o : r.fast_outage) CHECK(o == 0.0);
  }
}

TEST_CASE("experiments: sweep grid checks and monotone objective") {
  const ExperimentConfig c = small();
  const std::vector<double> bad{0.3, 0.1};
  CHECK_THROWS(sweep_epsilon(0, 1, bad, c));
  const std::vector<double> grid{0.05, 0.2, 0.5};
  const SweepReport s = sweep_epsilon(0, 1, grid, c);
  CHECK(s.objective_per_eps.size() == 3);
  CHECK(s.monotone);
  for (std::size_t i = 1; i < grid.size(); ++i) CHECK(s.objective_per_eps[i] >= s.objective_per_eps[i - 1] - 1e-9);
}

TEST_CASE("experiments: correlation rows carry both legs") {
  const ExperimentConfig c = small();
  for (int w = 0; w < 4; ++w) {
    const CorrelationRow r = correlation_experiment(w, 2, DelayProfile{}, 0.1, c);
    if (!r.feasible) continue;
    CHECK(r.outage_independent.size() == 4);
    CHECK(r.outage_correlated.size() == 4);
  }
}
