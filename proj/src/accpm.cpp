#include "ccofdma/accpm.hpp"

#include "ccofdma/channel.hpp"
#include "ccofdma/lp.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace ccofdma {

std::string to_string(CutKind k) { return k == CutKind::feasibility ? "feasibility" : "optimality"; }

std::string to_string(Termination t) {
  switch (t) {
    case Termination::converged: return "converged";
    case Termination::iteration_cap: return "iteration_cap";
    case Termination::infeasible: return "infeasible";
    case Termination::row_cap: return "row_cap";
  }
  return "unknown";
}

int AccpmOptions::iteration_cap(Eigen::Index m) const {
  const double l = std::log(1.0 / delta);
  return std::max(1, static_cast<int>(std::ceil(cap_factor * static_cast<double>(m) * l * l)));
}

void add_cut(PolytopeXd& poly, const CutResponse& cut) {
  for (std::size_t j = 0; j < cut.normals.size(); ++j) poly.add_row(cut.normals[j], cut.offsets[j]);
}

CutResponse optimality_cut(const Eigen::VectorXd& x_query, const Eigen::VectorXd& objective) {
  CutResponse r;
  r.kind = CutKind::optimality;
  const double norm = objective.norm();
  if (!(norm > 0)) throw std::invalid_argument("optimality_cut: zero objective gradient");
  Eigen::VectorXd normal = -objective / norm;
  r.offsets.push_back(normal.dot(x_query));
  r.normals.push_back(std::move(normal));
  r.objective = objective.dot(x_query);
  return r;
}

namespace {

// max tau s.t. a_i x + tau |a_i| <= b_i, -1 <= tau <= 1, x in center +- radius.
struct MinSlackPoint {
  Eigen::VectorXd x;
  double tau = -std::numeric_limits<double>::infinity();
};

MinSlackPoint max_min_slack(const PolytopeXd& poly, const Eigen::VectorXd& center, double radius) {
  const Eigen::Index m = poly.dim();
  const Eigen::Index rows = poly.rows();
  LinearProgram lp;
  lp.objective = Eigen::VectorXd::Zero(m + 1);
  lp.objective(m) = 1.0;
  lp.a_ub = Eigen::MatrixXd::Zero(rows + m + 1, m + 1);
  lp.b_ub.resize(rows + m + 1);
  lp.a_ub.topLeftCorner(rows, m) = poly.a;
  lp.a_ub.col(m).head(rows) = poly.a.rowwise().norm();
  lp.b_ub.head(rows) = poly.b;
  lp.a_ub.block(rows, 0, m, m).setIdentity();
  lp.b_ub.segment(rows, m) = center.array() + radius;
  lp.a_ub(rows + m, m) = 1.0;
  lp.b_ub(rows + m) = 1.0;
  lp.lower_bounds.resize(m + 1);
  lp.lower_bounds.head(m) = center.array() - radius;
  lp.lower_bounds(m) = -1.0;
  const LpSolution sol = simplex_solve(lp);
  MinSlackPoint out;
  if (sol.status == LpStatus::optimal) {
    out.x = sol.x.head(m);
    out.tau = sol.x(m);
  }
  return out;
}

}  // namespace

std::optional<Eigen::VectorXd> chebyshev_point(const PolytopeXd& poly, const Eigen::VectorXd& center,
                                               double radius) {
  const MinSlackPoint p = max_min_slack(poly, center, radius);
  if (!(p.tau > 1e-12)) return std::nullopt;
  return p.x;
}

AccpmResult accpm_solve(const PolytopeXd& base, const Eigen::VectorXd& objective, SeparationOracle& oracle,
                        const Eigen::VectorXd& start, const AccpmOptions& opt) {
  const Eigen::Index m = base.dim();
  if (objective.size() != m || start.size() != m) throw std::invalid_argument("accpm_solve: dimension mismatch");
  const int cap = opt.iteration_cap(m);
  const Eigen::Index row_cap = static_cast<Eigen::Index>(opt.row_cap_factor) * m;

  AccpmResult res;
  res.best_objective = -std::numeric_limits<double>::infinity();
  PolytopeXd poly = base;
  // Outer approximation from linearized constraints, used to certify infeasibility.
  PolytopeXd certificate = base;

  auto center = analytic_center(poly, start, opt.center_tol);
  if (!center) throw std::invalid_argument("accpm_solve: start is not strictly inside the base polytope");

  std::vector<double> feasible_bests;
  Eigen::VectorXd previous_query;
  for (int it = 1; it <= cap; ++it) {
    const Eigen::VectorXd x = center->point;
    const CutResponse cut = oracle.query(x);
    res.iterations = it;
    res.cut_history.push_back(cut.kind);

    const bool feasible = cut.kind == CutKind::optimality;
    if (feasible) {
      if (!res.feasible) res.feasibility_iterations = it;
      res.feasible = true;
      if (cut.objective > res.best_objective) {
        res.best_objective = cut.objective;
        res.best_x = x;
      }
      feasible_bests.push_back(res.best_objective);
    }
    res.trace.push_back({it, cut.kind, objective.dot(x),
                         res.feasible ? res.best_objective : std::numeric_limits<double>::quiet_NaN(),
                         center->potential, static_cast<int>(poly.rows())});
    if (feasible && opt.stop_when_feasible) {
      res.terminated_by = Termination::converged;
      return res;
    }

    if (feasible && previous_query.size() == m) {
      const auto f = feasible_bests.size();
      const auto window = static_cast<std::size_t>(opt.stall_window);
      if (f > window) {
        const double gain = feasible_bests[f - 1] - feasible_bests[f - 1 - window];
        const double scale = std::max(std::abs(res.best_objective), 1e-300);
        if (gain <= opt.objective_rel_tol * scale && (x - previous_query).norm() < opt.delta) {
          res.terminated_by = Termination::converged;
          return res;
        }
      }
    }
    previous_query = x;

    if (!feasible && !res.feasible && opt.certify_infeasibility) {
      for (std::size_t j = 0; j < cut.normals.size(); ++j) certificate.add_row(cut.normals[j], cut.deep_offsets[j]);
      if (max_min_slack(certificate, x, 10.0).tau < -1e-9) {
        res.feasibility_iterations = it;
        res.terminated_by = Termination::infeasible;
        return res;
      }
    }

    add_cut(poly, cut);
    if (poly.rows() > row_cap) {
      res.terminated_by = Termination::row_cap;
      return res;
    }

    auto restart = step_off_cuts(poly, x, static_cast<Eigen::Index>(cut.normals.size()));
    if (!restart) restart = chebyshev_point(poly, x);
    if (!restart) {
      // Localization polytope has no interior left.
      if (!res.feasible) res.feasibility_iterations = it;
      res.terminated_by = res.feasible ? Termination::converged : Termination::infeasible;
      return res;
    }
    center = analytic_center(poly, *restart, opt.center_tol);
    if (!center) throw NumericalFailure("accpm_solve: restart point left the polytope");
  }
  res.terminated_by = Termination::iteration_cap;
  if (!res.feasible) res.feasibility_iterations = res.iterations;
  return res;
}

PolytopeXd base_polytope(const SystemParams& params, AllocationMode mode) {
  const int k_users = params.n_users;
  const int n_sub = mode == AllocationMode::full ? params.n_subcarriers : 1;
  const int m = k_users * n_sub;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n_sub + m, m);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n_sub + m);
  for (int n = 0; n < n_sub; ++n) {
    for (int k = 0; k < k_users; ++k) a(n, k * n_sub + n) = 1.0;
    b(n) = 1.0;
  }
  a.bottomRows(m) = -Eigen::MatrixXd::Identity(m, m);
  PolytopeXd poly(std::move(a), std::move(b));
  poly.normalize_rows();
  return poly;
}

int decision_size(const SystemParams& params, AllocationMode mode) {
  return params.n_users * (mode == AllocationMode::full ? params.n_subcarriers : 1);
}

Eigen::VectorXd throughput_gradient(std::span<const UserProfile> users, const SystemParams& params,
                                    AllocationMode mode) {
  const auto k_users = static_cast<int>(users.size());
  const int cols = mode == AllocationMode::full ? params.n_subcarriers : 1;
  const double mult = mode == AllocationMode::full ? 1.0 : params.n_subcarriers;
  Eigen::VectorXd c(static_cast<Eigen::Index>(k_users) * cols);
  for (int k = 0; k < k_users; ++k) c.segment(k * cols, cols).setConstant(mult * expected_rate(users[k], params));
  return c;
}

CutResponse separation_oracle(const Eigen::VectorXd& x_query, std::span<const UserProfile> users,
                              const SystemParams& params, const SterConfig& cfg,
                              const Eigen::VectorXd& objective_gradient, AllocationMode mode,
                              double feasibility_tol) {
  const Allocation alloc = Allocation::from_flat(x_query, static_cast<int>(users.size()), mode);
  const SterResult ster = stc_feasibility(alloc, users, params, cfg, feasibility_tol);
  if (ster.violated.empty()) return optimality_cut(x_query, objective_gradient);

  CutResponse r;
  r.kind = CutKind::feasibility;
  r.objective = objective_gradient.dot(x_query);
  r.violated_users = ster.violated;
  for (std::size_t j = 0; j < ster.violated.size(); ++j) {
    const Eigen::VectorXd& u = ster.gradients[j];
    const double norm = u.norm();
    if (!(norm > 0)) throw NumericalFailure("separation_oracle: zero constraint gradient");
    Eigen::VectorXd normal = u / norm;
    const double offset = normal.dot(x_query);
    r.deep_offsets.push_back(offset - ster.per_user[static_cast<std::size_t>(ster.violated[j])].value / norm);
    r.offsets.push_back(offset);
    r.normals.push_back(std::move(normal));
  }
  return r;
}

StcOracle::StcOracle(std::vector<UserProfile> users, SystemParams params, SterConfig cfg, AllocationMode mode,
                     double feasibility_tol)
    : users_(std::move(users)),
      params_(params),
      cfg_(cfg),
      mode_(mode),
      feasibility_tol_(feasibility_tol),
      objective_(throughput_gradient(users_, params_, mode_)) {}

CutResponse StcOracle::query(const Eigen::VectorXd& x) {
  return separation_oracle(x, users_, params_, cfg_, objective_, mode_, feasibility_tol_);
}

SolveReport solve(std::span<const UserProfile> users, const SystemParams& params, const SterConfig& cfg,
                  AllocationMode mode, const AccpmOptions& opt) {
  params.validate();
  cfg.validate();
  if (static_cast<int>(users.size()) != params.n_users) throw std::invalid_argument("solve: user count != n_users");
  for (const auto& u : users) u.validate();
  if (!(opt.delta > 0)) throw std::invalid_argument("solve: delta must be > 0");

  StcOracle oracle({users.begin(), users.end()}, params, cfg, mode);
  const PolytopeXd base = base_polytope(params, mode);
  const int m = decision_size(params, mode);
  // e/(K+1) is interior; e/K sits on the simplex faces.
  const Eigen::VectorXd start = Eigen::VectorXd::Constant(m, 1.0 / (params.n_users + 1));
  const AccpmResult r = accpm_solve(base, oracle.objective(), oracle, start, opt);

  SolveReport rep;
  rep.feasible = r.feasible;
  rep.iterations = r.iterations;
  rep.feasibility_iterations = r.feasibility_iterations;
  rep.cut_history = r.cut_history;
  rep.trace = r.trace;
  rep.terminated_by = r.terminated_by;
  if (r.feasible) {
    rep.best_point = Allocation::from_flat(r.best_x, params.n_users, mode);
    rep.best_objective = r.best_objective;
  } else {
    rep.best_point.mode = mode;
    rep.best_point.x = Eigen::MatrixXd::Zero(params.n_users, mode == AllocationMode::full ? params.n_subcarriers : 1);
  }
  return rep;
}

}  // namespace ccofdma
