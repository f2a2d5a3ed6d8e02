#pragma once

#include "ccofdma/types.hpp"

#include <Eigen/Dense>

#include <span>
#include <string>

namespace ccofdma {

/// maximize c^T x  s.t.  A x <= b,  x >= lower_bounds.
struct LinearProgram {
  Eigen::VectorXd objective;
  Eigen::MatrixXd a_ub;
  Eigen::VectorXd b_ub;
  Eigen::VectorXd lower_bounds;  // empty means all zero

  Eigen::Index variables() const { return objective.size(); }
  void validate() const;
};

enum class LpStatus { optimal, infeasible, unbounded, numerical_failure };

std::string to_string(LpStatus s);

struct LpSolution {
  LpStatus status = LpStatus::numerical_failure;
  Eigen::VectorXd x;
  double objective_value = 0.0;
  Eigen::VectorXd duals;  // one multiplier >= 0 per row of a_ub
  int pivots = 0;
};

struct SimplexOptions {
  double tol = 1e-10;
  int max_pivots = 0;  // 0 picks 50 * (rows + columns)
};

/// Two-phase dense tableau primal simplex. Entering columns follow Dantzig's
/// rule; after a degenerate pivot the next choice falls back to Bland's rule,
/// which rules out cycling.
LpSolution simplex_solve(const LinearProgram& lp, const SimplexOptions& opt = {});

/// Per-slot fast-adaptation LP: maximize sum_{k,n} r_{k,n} x_{k,n} subject to
/// sum_n r_{k,n} x_{k,n} >= q_k and sum_k x_{k,n} <= 1, x >= 0, with the
/// user-major variable order. `with_rate_rows = false` drops the demand rows.
LinearProgram build_fast_lp(const GainSample& gains, std::span<const UserProfile> users, const SystemParams& params,
                            bool with_rate_rows = true);

}  // namespace ccofdma
