#pragma once

// Localization polytopes {x : A x <= b} and their analytic centers.

#include "ccofdma/types.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <optional>

namespace ccofdma {

template <typename Scalar>
struct Polytope {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Matrix a;
  Vector b;

  Polytope() = default;
  Polytope(Matrix a_rows, Vector b_rows) : a(std::move(a_rows)), b(std::move(b_rows)) {}

  Eigen::Index rows() const { return a.rows(); }
  Eigen::Index dim() const { return a.cols(); }
  Vector slacks(const Vector& x) const { return b - a * x; }

  /// Appends normal^T x <= offset.
  void add_row(const Vector& normal, Scalar offset) {
    const Eigen::Index m = a.rows();
    a.conservativeResize(m + 1, Eigen::NoChange);
    b.conservativeResize(m + 1);
    a.row(m) = normal.transpose();
    b(m) = offset;
  }

  /// Scales every row of (A, b) to a unit-norm normal.
  void normalize_rows() {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      const Scalar norm = a.row(i).norm();
      if (norm > Scalar(0)) {
        a.row(i) /= norm;
        b(i) /= norm;
      }
    }
  }
};

using PolytopeXd = Polytope<double>;

template <typename Scalar>
struct CenterState {
  typename Polytope<Scalar>::Vector point;
  typename Polytope<Scalar>::Vector slacks;
  Scalar potential = 0;         // sum of log slacks
  Scalar newton_decrement = 0;
  int newton_steps = 0;
};

using CenterStateXd = CenterState<double>;

template <typename Scalar>
Scalar log_potential(const typename Polytope<Scalar>::Vector& slacks) {
  return slacks.array().log().sum();
}

/// Maximizes sum_i log(b_i - a_i^T x) by damped Newton steps from a strictly
/// interior `start`. Stops once the Newton decrement drops below `tol`.
/// Returns nullopt when `start` is not strictly interior. Throws
/// NumericalFailure when the Hessian is singular (unbounded polytope).
template <typename Scalar>
std::optional<CenterState<Scalar>> analytic_center(const Polytope<Scalar>& poly,
                                                   const typename Polytope<Scalar>::Vector& start,
                                                   Scalar tol = Scalar(1e-9), int max_steps = 200) {
  using Vector = typename Polytope<Scalar>::Vector;
  using Matrix = typename Polytope<Scalar>::Matrix;

  CenterState<Scalar> st;
  st.point = start;
  st.slacks = poly.slacks(start);
  if (!(st.slacks.array() > Scalar(0)).all()) return std::nullopt;
  st.potential = log_potential<Scalar>(st.slacks);

  for (st.newton_steps = 0; st.newton_steps < max_steps; ++st.newton_steps) {
    const Vector inv = st.slacks.cwiseInverse();
    const Vector grad = -poly.a.transpose() * inv;  // gradient of the potential
    const Matrix scaled = inv.asDiagonal() * poly.a;
    const Matrix hess = scaled.transpose() * scaled;
    const Eigen::LLT<Matrix> llt(hess);
    if (llt.info() != Eigen::Success) throw NumericalFailure("analytic_center: singular Hessian (unbounded polytope?)");
    const Vector dx = llt.solve(grad);
    const Scalar slope = grad.dot(dx);  // squared decrement, also the directional derivative
    const Scalar decrement = std::sqrt(std::max(Scalar(0), slope));
    st.newton_decrement = decrement;
    if (decrement < tol) return st;

    // Largest step keeping every slack positive.
    const Vector rate = poly.a * dx;
    Scalar t_max = std::numeric_limits<Scalar>::infinity();
    for (Eigen::Index i = 0; i < rate.size(); ++i)
      if (rate(i) > 0) t_max = std::min(t_max, st.slacks(i) / rate(i));
    Scalar t = std::min(Scalar(1), Scalar(0.99) * t_max);

    // Inside the quadratic-convergence region a full step is always safe.
    if (decrement < Scalar(0.25) && t == Scalar(1)) {
      st.point += dx;
      st.slacks = poly.slacks(st.point);
      st.potential = log_potential<Scalar>(st.slacks);
      continue;
    }

    // Armijo backtracking on the (concave) potential.
    for (int bt = 0; bt < 60; ++bt) {
      const Vector s_new = st.slacks - t * rate;
      if ((s_new.array() > Scalar(0)).all()) {
        const Scalar p_new = log_potential<Scalar>(s_new);
        if (p_new >= st.potential + Scalar(0.25) * t * slope) {
          st.point += t * dx;
          st.slacks = poly.slacks(st.point);
          st.potential = log_potential<Scalar>(st.slacks);
          break;
        }
      }
      t *= Scalar(0.5);
      if (bt == 59) return st;  // no ascent possible at working precision
    }
  }
  return st;
}

/// Moves a point that satisfies the old rows strictly and lies on the
/// `new_rows` trailing cut faces into the interior: it steps along the
/// negated sum of the new normals by half of the smallest old slack (less if
/// an old row would be crossed). Returns nullopt when that direction does not
/// enter every new cut.
template <typename Scalar>
std::optional<typename Polytope<Scalar>::Vector> step_off_cuts(const Polytope<Scalar>& poly,
                                                               const typename Polytope<Scalar>::Vector& point,
                                                               Eigen::Index new_rows) {
  using Vector = typename Polytope<Scalar>::Vector;
  const Eigen::Index old_rows = poly.rows() - new_rows;
  Vector dir = -poly.a.bottomRows(new_rows).colwise().sum().transpose();
  const Scalar norm = dir.norm();
  if (!(norm > 0)) return std::nullopt;
  dir /= norm;
  const Vector rate = poly.a * dir;
  if (!(rate.tail(new_rows).array() < Scalar(0)).all()) return std::nullopt;

  const Vector s = poly.slacks(point);
  const Scalar min_old = s.head(old_rows).minCoeff();
  if (!(min_old > 0)) return std::nullopt;
  Scalar t = Scalar(0.5) * min_old;
  for (Eigen::Index i = 0; i < old_rows; ++i)
    if (rate(i) > 0) t = std::min(t, Scalar(0.5) * s(i) / rate(i));
  Vector moved = point + t * dir;
  if (!(poly.slacks(moved).array() > Scalar(0)).all()) return std::nullopt;
  return moved;
}

}  // namespace ccofdma
