#pragma once

// Analytic-center cutting-plane method for
//
//   maximize c^T x  s.t.  x in X (convex, given by a separation oracle),
//                         x in X0 = {A0 x <= b0}.
//
// Each iteration queries the oracle at the analytic center of the current
// localization polytope and appends either feasibility cuts (one per
// violated constraint) or a single optimality cut, all through the query
// point and with unit normals.

#include "ccofdma/bernstein.hpp"
#include "ccofdma/polytope.hpp"
#include "ccofdma/types.hpp"

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ccofdma {

enum class CutKind { feasibility, optimality };

std::string to_string(CutKind k);

struct CutResponse {
  CutKind kind = CutKind::optimality;
  std::vector<Eigen::VectorXd> normals;  // unit length
  std::vector<double> offsets;           // normal . x_query
  // Offsets still valid for every feasible point; <= offsets. Feasibility
  // cuts only: normal . x <= normal . x_query - violation / |gradient|.
  std::vector<double> deep_offsets;
  std::vector<int> violated_users;
  double objective = 0.0;                // c^T x_query
};

/// Answers "is x feasible?" and returns the cuts through x.
class SeparationOracle {
 public:
  virtual ~SeparationOracle() = default;
  virtual CutResponse query(const Eigen::VectorXd& x) = 0;
};

/// Appends the rows of `cut` to `poly` (|violated| rows or one row).
void add_cut(PolytopeXd& poly, const CutResponse& cut);

/// The optimality cut of a linear objective c: (-c / |c|)^T (x - x_query) <= 0.
CutResponse optimality_cut(const Eigen::VectorXd& x_query, const Eigen::VectorXd& objective);

enum class Termination { converged, iteration_cap, infeasible, row_cap };

std::string to_string(Termination t);

struct AccpmOptions {
  double delta = 1e-2;              // center-step threshold
  double objective_rel_tol = 1e-3;  // stall threshold on the best objective
  int stall_window = 10;            // J feasible queries
  double cap_factor = 50.0;         // iteration cap C m log^2(1/delta)
  double center_tol = 1e-9;         // Newton decrement
  int row_cap_factor = 200;         // abort when rows exceed this times m
  bool certify_infeasibility = true;
  bool stop_when_feasible = false;  // admission check: stop at the first feasible query

  int iteration_cap(Eigen::Index m) const;
};

struct TraceRow {
  int iteration = 0;
  CutKind kind = CutKind::optimality;
  double objective = 0.0;       // c^T x at the query
  double best_objective = 0.0;  // best feasible so far (NaN before the first)
  double potential = 0.0;
  int n_rows = 0;
};

struct AccpmResult {
  Eigen::VectorXd best_x;
  double best_objective = 0.0;
  bool feasible = false;
  int iterations = 0;
  int feasibility_iterations = 0;  // query at which feasibility was settled either way
  std::vector<CutKind> cut_history;
  std::vector<TraceRow> trace;
  Termination terminated_by = Termination::iteration_cap;
};

/// Runs the cutting-plane loop from `base` with linear objective `objective`
/// (maximized). `start` must lie strictly inside `base`; the first query is
/// the analytic center of `base`.
AccpmResult accpm_solve(const PolytopeXd& base, const Eigen::VectorXd& objective, SeparationOracle& oracle,
                        const Eigen::VectorXd& start, const AccpmOptions& opt = {});

/// Strictly interior point of `poly` maximizing the smallest slack inside
/// [center - radius, center + radius]; nullopt when that slack is not positive.
std::optional<Eigen::VectorXd> chebyshev_point(const PolytopeXd& poly, const Eigen::VectorXd& center,
                                               double radius = 10.0);

// ---------------------------------------------------------------------------
// Slow adaptive OFDMA instance.

/// Full mode: N per-subcarrier simplex rows then N K nonnegativity rows over
/// the user-major vector. Reduced mode: one simplex row then K rows. Rows are
/// unit-normalized.
PolytopeXd base_polytope(const SystemParams& params, AllocationMode mode);

/// Number of decision variables in `mode`.
int decision_size(const SystemParams& params, AllocationMode mode);

/// Gradient of the expected throughput: E{r_k} per (k,n), or N E{r_k} per user
/// in reduced mode.
Eigen::VectorXd throughput_gradient(std::span<const UserProfile> users, const SystemParams& params,
                                    AllocationMode mode);

/// Feasibility cuts for the violated users or the optimality cut built from
/// `objective_gradient`.
CutResponse separation_oracle(const Eigen::VectorXd& x_query, std::span<const UserProfile> users,
                              const SystemParams& params, const SterConfig& cfg,
                              const Eigen::VectorXd& objective_gradient, AllocationMode mode,
                              double feasibility_tol = 1e-9);

class StcOracle : public SeparationOracle {
 public:
  StcOracle(std::vector<UserProfile> users, SystemParams params, SterConfig cfg, AllocationMode mode,
            double feasibility_tol = 1e-9);
  CutResponse query(const Eigen::VectorXd& x) override;
  const Eigen::VectorXd& objective() const { return objective_; }

 private:
  std::vector<UserProfile> users_;
  SystemParams params_;
  SterConfig cfg_;
  AllocationMode mode_;
  double feasibility_tol_;
  Eigen::VectorXd objective_;
};

struct SolveReport {
  Allocation best_point;
  double best_objective = 0.0;  // bits/s
  bool feasible = false;
  int iterations = 0;
  int feasibility_iterations = 0;
  std::vector<CutKind> cut_history;
  std::vector<TraceRow> trace;
  Termination terminated_by = Termination::iteration_cap;
};

/// Solves the Bernstein-approximated slow adaptive allocation problem.
SolveReport solve(std::span<const UserProfile> users, const SystemParams& params, const SterConfig& cfg,
                  AllocationMode mode, const AccpmOptions& opt = {});

}  // namespace ccofdma
