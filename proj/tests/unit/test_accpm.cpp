#include "ccofdma/accpm.hpp"
#include "ccofdma/channel.hpp"
#include "ccofdma/lp.hpp"

#include "../oracles.hpp"

#include <doctest.h>

#include <random>

using namespace ccofdma;

namespace {

PolytopeXd unit_box(int m) {
  Eigen::MatrixXd a(2 * m, m);
  a << Eigen::MatrixXd::Identity(m, m), -Eigen::MatrixXd::Identity(m, m);
  Eigen::VectorXd b(2 * m);
  b << Eigen::VectorXd::Ones(m), Eigen::VectorXd::Zero(m);
  return {a, b};
}

AccpmOptions tight() {
  AccpmOptions o;
  o.delta = 1e-7;
  o.objective_rel_tol = 1e-9;
  return o;
}

}  // namespace

TEST_CASE("accpm: base polytope and start point") {
  SystemParams p;
  p.n_users = 3;
  p.n_subcarriers = 5;
  const PolytopeXd full = base_polytope(p, AllocationMode::full);
  CHECK(full.dim() == 15);
  CHECK(full.rows() == 5 + 15);
  const PolytopeXd red = base_polytope(p, AllocationMode::reduced);
  CHECK(red.dim() == 3);
  CHECK(red.rows() == 1 + 3);
  CHECK((red.a.rowwise().norm().array() - 1.0).abs().maxCoeff() < 1e-15);
  CHECK(decision_size(p, AllocationMode::full) == 15);

  // e/(K+1) is interior, e/K touches the simplex face
  CHECK(red.slacks(Eigen::VectorXd::Constant(3, 0.25)).minCoeff() > 0.0);
  CHECK(red.slacks(Eigen::VectorXd::Constant(3, 1.0 / 3.0)).minCoeff() == doctest::Approx(0.0).epsilon(1e-15));
  const auto c = analytic_center(red, Eigen::VectorXd::Constant(3, 0.25));
  REQUIRE(c);
  CHECK((c->point.array() - 0.25).abs().maxCoeff() < 1e-10);
}

TEST_CASE("accpm: optimality cut geometry") {
  const Eigen::Vector2d x(0.2, 0.4), c(3.0, 4.0);
  const CutResponse r = optimality_cut(x, c);
  REQUIRE(r.normals.size() == 1);
  CHECK(r.normals[0].norm() == doctest::Approx(1.0));
  CHECK(r.offsets[0] == doctest::Approx(r.normals[0].dot(x)));
  CHECK(r.objective == doctest::Approx(2.2));
  // points with a better objective keep positive slack
  CHECK(r.offsets[0] - r.normals[0].dot(Eigen::Vector2d(0.3, 0.4)) > 0);
}

TEST_CASE("accpm: linear programs match the simplex") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> ua(0.0, 1.0), uc(0.1, 1.0);
  for (int trial = 0; trial < 5; ++trial) {
    const int m = 4;
    Eigen::MatrixXd a(3, m);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < m; ++j) a(i, j) = ua(rng);
    const Eigen::Vector3d b(0.8, 1.0, 1.2);
    Eigen::VectorXd c(m);
    for (int j = 0; j < m; ++j) c(j) = uc(rng);

    LinearProgram lp;
    lp.objective = c;
    lp.a_ub.resize(3 + m, m);
    lp.a_ub << a, Eigen::MatrixXd::Identity(m, m);
    lp.b_ub.resize(3 + m);
    lp.b_ub << b, Eigen::VectorXd::Ones(m);
    const LpSolution ref = simplex_solve(lp);
    REQUIRE(ref.status == LpStatus::optimal);

    oracle::LinearOracle o(a, b, c);
    const AccpmResult r = accpm_solve(unit_box(m), c, o, Eigen::VectorXd::Constant(m, 0.5), tight());
    REQUIRE(r.feasible);
    CHECK(r.best_objective == doctest::Approx(ref.objective_value).epsilon(1e-4));
    CHECK((a * r.best_x - b).maxCoeff() <= 0.0);
    // the best objective never decreases along the trace
    double last = -1e300;
    for (const auto& row : r.trace) {
      if (std::isnan(row.best_objective)) continue;
      CHECK(row.best_objective >= last);
      last = row.best_objective;
    }
  }
}

TEST_CASE("accpm: each cut shrinks the polytope it came from") {
  Eigen::MatrixXd a(1, 2);
  a << 1.0, 1.0;
  oracle::LinearOracle o(a, Eigen::VectorXd::Constant(1, 0.5), Eigen::Vector2d(1.0, 2.0));
  const AccpmResult r = accpm_solve(unit_box(2), Eigen::Vector2d(1.0, 2.0), o, Eigen::Vector2d(0.5, 0.5), tight());
  REQUIRE(r.feasible);
  CHECK(r.best_objective == doctest::Approx(1.0).epsilon(1e-5));
  for (std::size_t i = 1; i < r.trace.size(); ++i) {
    CHECK(r.trace[i].n_rows > r.trace[i - 1].n_rows);
    CHECK(r.trace[i].potential < r.trace[i - 1].potential);  // the polytope only loses volume
  }
}

TEST_CASE("accpm: an empty feasible set is certified") {
  Eigen::MatrixXd a(2, 2);
  a << 1.0, 0.0, -1.0, 0.0;
  oracle::LinearOracle o(a, Eigen::Vector2d(0.3, -0.6), Eigen::Vector2d(1.0, 1.0));  // x0 <= 0.3 and x0 >= 0.6
  const AccpmResult r = accpm_solve(unit_box(2), Eigen::Vector2d(1.0, 1.0), o, Eigen::Vector2d(0.5, 0.5));
  CHECK_FALSE(r.feasible);
  CHECK(r.terminated_by == Termination::infeasible);
  CHECK(r.feasibility_iterations <= 5);
}

TEST_CASE("accpm: a single user saturates its subcarriers") {
  SystemParams p;
  p.n_users = 1;
  p.n_subcarriers = 8;
  UserProfile u;
  u.avg_gain = 30.0 / p.snr_scale();
  u.min_rate = 5.0;
  const std::vector<UserProfile> users{u};
  AccpmOptions o;
  o.delta = 1e-5;
  o.objective_rel_tol = 1e-7;
  const SolveReport s = solve(users, p, {}, AllocationMode::reduced, o);
  REQUIRE(s.feasible);
  CHECK(s.best_point.x(0, 0) == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(s.best_objective == doctest::Approx(8.0 * expected_rate(u, p)).epsilon(1e-3));
  CHECK(s.terminated_by == Termination::converged);
}

TEST_CASE("accpm: solution of the chance-constrained problem satisfies every STC") {
  SystemParams p;
  p.n_users = 3;
  std::vector<UserProfile> users(3);
  const double snr[] = {5.0, 30.0, 300.0};
  for (int k = 0; k < 3; ++k) {
    users[k].avg_gain = snr[k] / p.snr_scale();
    users[k].min_rate = 20.0;
  }
  const SolveReport s = solve(users, p, {}, AllocationMode::reduced);
  REQUIRE(s.feasible);
  const SterResult ster = stc_feasibility(s.best_point, users, p);
  CHECK(ster.violated.empty());
  CHECK(s.best_point.x.sum() <= 1.0 + 1e-12);
  CHECK(s.best_point.x.minCoeff() >= 0.0);
  CHECK(s.iterations <= AccpmOptions{}.iteration_cap(3));

  AccpmOptions stop;
  stop.stop_when_feasible = true;
  const SolveReport quick = solve(users, p, {}, AllocationMode::reduced, stop);
  CHECK(quick.feasible);
  CHECK(quick.iterations == quick.feasibility_iterations);
}

TEST_CASE("accpm: impossible demand is reported infeasible") {
  SystemParams p;
  p.n_users = 2;
  std::vector<UserProfile> users(2);
  for (auto& u : users) {
    u.avg_gain = 1.0 / p.snr_scale();
    u.min_rate = 60.0;  // above 64 E{r} / 2 at 0 dB
  }
  const SolveReport s = solve(users, p, {}, AllocationMode::reduced);
  CHECK_FALSE(s.feasible);
  CHECK(s.terminated_by == Termination::infeasible);
}
