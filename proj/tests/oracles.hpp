#pragma once

// Independent reference computations shared by the unit and acceptance
// tests. None of them call into the code they check.

#include "ccofdma/accpm.hpp"
#include "ccofdma/lp.hpp"
#include "ccofdma/types.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <vector>

namespace oracle {

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
};

/// log E{exp(-x r / rho)}, r = W log2(1 + snr U), by plain sampling of U ~ Exp(1).
/// The standard error follows from the delta method on the log of the mean.
inline Estimate mc_lambda(double x, double rho, double snr, double bandwidth, long samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> ex(1.0);
  const double c = bandwidth * x / (rho * std::numbers::ln2);
  double mean = 0.0, m2 = 0.0;
  for (long i = 1; i <= samples; ++i) {
    const double w = std::pow(1.0 + snr * ex(rng), -c);
    const double d = w - mean;
    mean += d / static_cast<double>(i);
    m2 += d * (w - mean);
  }
  const double sd = std::sqrt(m2 / static_cast<double>(samples - 1));
  return {std::log(mean), sd / (std::sqrt(static_cast<double>(samples)) * mean)};
}

/// Trapezoid rule for E{(1 + snr U)^-c} after u = k (e^t - 1), which spreads
/// the knee at u ~ k = 1 / (snr (1 + c)) over many panels; u runs to 60.
inline double tilted_mass_reference(double snr, double c, int panels = 400000) {
  const double k = 1.0 / (snr * (1.0 + c));
  const double t_max = std::log1p(60.0 / k);
  const double h = t_max / panels;
  double acc = 0.0;
  for (int i = 0; i <= panels; ++i) {
    const double t = i * h;
    const double u = k * std::expm1(t);
    const double f = std::exp(-c * std::log1p(snr * u) - u) * k * std::exp(t);
    acc += (i == 0 || i == panels) ? 0.5 * f : f;
  }
  return acc * h;
}

/// min over a log-spaced rho grid, refined twice around the best node.
template <typename H>
double grid_min(H&& h, double lo = 1e-6, double hi = 1e6, int points = 600) {
  double a = std::log(lo), b = std::log(hi);
  double best = std::numeric_limits<double>::infinity();
  for (int pass = 0; pass < 3; ++pass) {
    double arg = a;
    for (int i = 0; i <= points; ++i) {
      const double t = a + (b - a) * i / points;
      const double v = h(std::exp(t));
      if (v < best) best = v, arg = t;
    }
    const double w = 2.0 * (b - a) / points;
    a = std::max(std::log(lo), arg - w);
    b = std::min(std::log(hi), arg + w);
  }
  return best;
}

/// Maximizes c^T x over {A x <= b, x >= lo} by solving every square subsystem
/// of active constraints. Returns nullopt when no vertex is feasible.
inline std::optional<double> vertex_enumeration(const ccofdma::LinearProgram& lp, double tol = 1e-9) {
  const Eigen::Index m = lp.objective.size();
  const Eigen::Index rows = lp.a_ub.rows();
  const Eigen::VectorXd lo = lp.lower_bounds.size() == m ? lp.lower_bounds : Eigen::VectorXd::Zero(m);
  Eigen::MatrixXd all(rows + m, m);
  Eigen::VectorXd rhs(rows + m);
  all.topRows(rows) = lp.a_ub;
  rhs.head(rows) = lp.b_ub;
  all.bottomRows(m) = -Eigen::MatrixXd::Identity(m, m);
  rhs.tail(m) = -lo;
  const Eigen::Index total = rows + m;

  std::optional<double> best;
  std::vector<int> pick(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) pick[static_cast<std::size_t>(i)] = static_cast<int>(i);
  for (;;) {
    Eigen::MatrixXd sq(m, m);
    Eigen::VectorXd r(m);
    for (Eigen::Index i = 0; i < m; ++i) {
      sq.row(i) = all.row(pick[static_cast<std::size_t>(i)]);
      r(i) = rhs(pick[static_cast<std::size_t>(i)]);
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(sq);
    if (lu.rank() == m) {
      const Eigen::VectorXd x = lu.solve(r);
      if (((all * x - rhs).array() <= tol).all()) {
        const double v = lp.objective.dot(x);
        if (!best || v > *best) best = v;
      }
    }
    // next combination
    Eigen::Index i = m - 1;
    while (i >= 0 && pick[static_cast<std::size_t>(i)] == total - m + i) --i;
    if (i < 0) break;
    ++pick[static_cast<std::size_t>(i)];
    for (Eigen::Index j = i + 1; j < m; ++j) pick[static_cast<std::size_t>(j)] = pick[static_cast<std::size_t>(j - 1)] + 1;
  }
  return best;
}

/// Linear oracle for A x <= b: one neutral cut per violated row, otherwise the
/// optimality cut of c.
class LinearOracle : public ccofdma::SeparationOracle {
 public:
  LinearOracle(Eigen::MatrixXd a, Eigen::VectorXd b, Eigen::VectorXd c)
      : a_(std::move(a)), b_(std::move(b)), c_(std::move(c)) {}

  ccofdma::CutResponse query(const Eigen::VectorXd& x) override {
    ccofdma::CutResponse r;
    const Eigen::VectorXd viol = a_ * x - b_;
    for (Eigen::Index i = 0; i < viol.size(); ++i) {
      if (viol(i) <= 0) continue;
      const double norm = a_.row(i).norm();
      Eigen::VectorXd normal = a_.row(i).transpose() / norm;
      r.offsets.push_back(normal.dot(x));
      r.deep_offsets.push_back(b_(i) / norm);
      r.normals.push_back(std::move(normal));
      r.violated_users.push_back(static_cast<int>(i));
    }
    r.objective = c_.dot(x);
    if (!r.normals.empty()) {
      r.kind = ccofdma::CutKind::feasibility;
      return r;
    }
    r.kind = ccofdma::CutKind::optimality;
    const double norm = c_.norm();
    Eigen::VectorXd normal = -c_ / norm;
    r.offsets.push_back(normal.dot(x));
    r.normals.push_back(std::move(normal));
    return r;
  }

 private:
  Eigen::MatrixXd a_;
  Eigen::VectorXd b_;
  Eigen::VectorXd c_;
};

/// Potential sum log(b - A x) maximized over a uniform grid of the box
/// [lo, hi]^3 with `steps` intervals per side. Returns the best grid node.
inline Eigen::Vector3d potential_grid_argmax(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, double lo,
                                             double hi, int steps) {
  Eigen::Vector3d best_x = Eigen::Vector3d::Constant(std::nan(""));
  double best = -std::numeric_limits<double>::infinity();
  const double h = (hi - lo) / steps;
  for (int i = 0; i <= steps; ++i)
    for (int j = 0; j <= steps; ++j)
      for (int k = 0; k <= steps; ++k) {
        const Eigen::Vector3d x(lo + i * h, lo + j * h, lo + k * h);
        const Eigen::VectorXd s = b - a * x;
        if ((s.array() <= 0).any()) continue;
        const double v = s.array().log().sum();
        if (v > best) best = v, best_x = x;
      }
  return best_x;
}

}  // namespace oracle
