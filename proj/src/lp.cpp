#include "ccofdma/lp.hpp"

#include "ccofdma/channel.hpp"

#include <cmath>
#include <vector>

namespace ccofdma {

void LinearProgram::validate() const {
  if (objective.size() < 1) throw std::invalid_argument("LinearProgram: no variables");
  if (a_ub.cols() != objective.size() || a_ub.rows() != b_ub.size())
    throw std::invalid_argument("LinearProgram: dimension mismatch");
  if (lower_bounds.size() != 0 && lower_bounds.size() != objective.size())
    throw std::invalid_argument("LinearProgram: lower bound size mismatch");
  if (!objective.allFinite() || !a_ub.allFinite() || !b_ub.allFinite() || !lower_bounds.allFinite())
    throw std::invalid_argument("LinearProgram: non-finite data");
}

std::string to_string(LpStatus s) {
  switch (s) {
    case LpStatus::optimal: return "optimal";
    case LpStatus::infeasible: return "infeasible";
    case LpStatus::unbounded: return "unbounded";
    case LpStatus::numerical_failure: return "numerical_failure";
  }
  return "unknown";
}

namespace {

using Tableau = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

class Simplex {
 public:
  Simplex(Tableau t, std::vector<int> basis, int n_cols, double tol, int max_pivots)
      : t_(std::move(t)), basis_(std::move(basis)), n_cols_(n_cols), tol_(tol), max_pivots_(max_pivots) {}

  // Reduced costs live in the last row: d_j = c_j - c_B^T B^-1 A_j.
  void set_costs(const Eigen::VectorXd& c) {
    const Eigen::Index m = rows();
    t_.row(m).setZero();
    t_.row(m).head(n_cols_) = c.transpose();
    for (Eigen::Index i = 0; i < m; ++i) {
      const double cb = c(basis_[i]);
      if (cb != 0.0) t_.row(m) -= cb * t_.row(i);
    }
  }

  // Runs pivots over columns [0, allowed); returns optimal/unbounded/failure.
  LpStatus run(int allowed) {
    bool bland = false;
    const Eigen::Index m = rows();
    while (true) {
      int enter = -1;
      double best = tol_;
      for (int j = 0; j < allowed; ++j) {
        const double d = t_(m, j);
        if (d > best) {
          enter = j;
          if (bland) break;
          best = d;
        }
      }
      if (enter < 0) return LpStatus::optimal;

      int leave = -1;
      double ratio = 0.0;
      for (Eigen::Index i = 0; i < m; ++i) {
        const double a = t_(i, enter);
        if (a <= tol_) continue;
        const double r = std::max(0.0, t_(i, n_cols_)) / a;
        if (leave < 0 || r < ratio - 1e-12 || (r <= ratio + 1e-12 && basis_[i] < basis_[leave])) {
          leave = static_cast<int>(i);
          ratio = r;
        }
      }
      if (leave < 0) return LpStatus::unbounded;
      if (++pivots_ > max_pivots_) return LpStatus::numerical_failure;
      bland = ratio <= 1e-12;
      pivot(leave, enter);
    }
  }

  void pivot(Eigen::Index r, int q) {
    t_.row(r) /= t_(r, q);
    for (Eigen::Index i = 0; i < t_.rows(); ++i) {
      if (i == r) continue;
      const double f = t_(i, q);
      if (f != 0.0) t_.row(i) -= f * t_.row(r);
    }
    basis_[r] = q;
  }

  Eigen::Index rows() const { return t_.rows() - 1; }
  Tableau& tableau() { return t_; }
  std::vector<int>& basis() { return basis_; }
  int pivots() const { return pivots_; }

 private:
  Tableau t_;
  std::vector<int> basis_;
  int n_cols_;
  double tol_;
  int max_pivots_;
  int pivots_ = 0;
};

}  // namespace

LpSolution simplex_solve(const LinearProgram& lp, const SimplexOptions& opt) {
  lp.validate();
  const auto n = static_cast<int>(lp.variables());
  const auto m = static_cast<int>(lp.a_ub.rows());
  const Eigen::VectorXd lower = lp.lower_bounds.size() ? lp.lower_bounds : Eigen::VectorXd::Zero(n);
  const Eigen::VectorXd rhs = lp.b_ub - lp.a_ub * lower;

  std::vector<int> art_rows;
  for (int i = 0; i < m; ++i)
    if (rhs(i) < 0) art_rows.push_back(i);
  const int n_art = static_cast<int>(art_rows.size());
  // Columns: [structural y | slacks | artificials | rhs].
  const int art0 = n + m;
  const int n_cols = n + m + n_art;

  Tableau t = Tableau::Zero(m + 1, n_cols + 1);
  std::vector<int> basis(m);
  std::vector<double> row_sign(m, 1.0);
  for (int i = 0, a = 0; i < m; ++i) {
    const double sgn = rhs(i) < 0 ? -1.0 : 1.0;
    row_sign[i] = sgn;
    t.row(i).head(n) = sgn * lp.a_ub.row(i);
    t(i, n + i) = sgn;
    t(i, n_cols) = sgn * rhs(i);
    if (sgn < 0) {
      t(i, art0 + a) = 1.0;
      basis[i] = art0 + a++;
    } else {
      basis[i] = n + i;
    }
  }

  const int max_pivots = opt.max_pivots > 0 ? opt.max_pivots : 50 * (m + n_cols);
  Simplex sx(std::move(t), std::move(basis), n_cols, opt.tol, max_pivots);
  LpSolution sol;

  if (n_art > 0) {
    Eigen::VectorXd c1 = Eigen::VectorXd::Zero(n_cols);
    c1.tail(n_art).setConstant(-1.0);
    sx.set_costs(c1);
    const LpStatus s1 = sx.run(n_cols);
    sol.pivots = sx.pivots();
    if (s1 == LpStatus::numerical_failure) {
      sol.status = s1;
      return sol;
    }
    // Phase-one objective is -sum(artificials).
    const double infeas = sx.tableau()(m, n_cols);
    const double scale = 1.0 + rhs.cwiseAbs().maxCoeff();
    if (infeas > 1e-9 * scale) {
      sol.status = LpStatus::infeasible;
      return sol;
    }
    // Drive zero-level artificials out of the basis where possible.
    for (int i = 0; i < m; ++i) {
      if (sx.basis()[i] < art0) continue;
      for (int j = 0; j < art0; ++j) {
        if (std::abs(sx.tableau()(i, j)) > 1e-9) {
          sx.pivot(i, j);
          break;
        }
      }
    }
  }

  Eigen::VectorXd c2 = Eigen::VectorXd::Zero(n_cols);
  c2.head(n) = lp.objective;
  sx.set_costs(c2);
  const LpStatus s2 = sx.run(art0);
  sol.pivots = sx.pivots();
  sol.status = s2;
  if (s2 != LpStatus::optimal) return sol;

  Eigen::VectorXd y = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < m; ++i)
    if (sx.basis()[i] < n) y(sx.basis()[i]) = std::max(0.0, sx.tableau()(i, n_cols));
  sol.x = lower + y;
  sol.objective_value = lp.objective.dot(sol.x);
  sol.duals.resize(m);
  // The slack column of row i is B^-1 (sign_i e_i), so its reduced cost is -sign_i pi_i.
  for (int i = 0; i < m; ++i) sol.duals(i) = std::max(0.0, -row_sign[i] * sx.tableau()(m, n + i));
  return sol;
}

LinearProgram build_fast_lp(const GainSample& gains, std::span<const UserProfile> users, const SystemParams& params,
                            bool with_rate_rows) {
  const auto k_users = static_cast<int>(users.size());
  const int n_sub = static_cast<int>(gains.cols());
  if (gains.rows() != k_users) throw std::invalid_argument("build_fast_lp: gain rows != users");
  const int vars = k_users * n_sub;
  const int rate_rows = with_rate_rows ? k_users : 0;

  LinearProgram lp;
  lp.objective.resize(vars);
  lp.a_ub = Eigen::MatrixXd::Zero(rate_rows + n_sub, vars);
  lp.b_ub = Eigen::VectorXd::Zero(rate_rows + n_sub);
  for (int k = 0; k < k_users; ++k) {
    for (int n = 0; n < n_sub; ++n) {
      const double r = instantaneous_rate(gains(k, n), params);
      const int v = k * n_sub + n;
      lp.objective(v) = r;
      if (with_rate_rows) lp.a_ub(k, v) = -r;
      lp.a_ub(rate_rows + n, v) = 1.0;
    }
    if (with_rate_rows) lp.b_ub(k) = -users[k].min_rate;
  }
  lp.b_ub.tail(n_sub).setOnes();
  return lp;
}

}  // namespace ccofdma
