#pragma once

// Bernstein safe tractable approximation of the per-user rate chance
// constraint Pr{sum_n x_n r_n < q} <= eps under i.i.d. Rayleigh fading.
//
//   Lambda(x, rho) = log E{exp(-x r / rho)}
//   H(x, rho)      = q + rho * sum_n Lambda(x_n, rho) - rho * log(eps)
//   G(x)           = inf_{rho > 0} H(x, rho)
//
// G(x) <= 0 implies the chance constraint, and G is convex and
// nonincreasing in x. In reduced mode a row holds one fraction shared by
// all N subcarriers, so the sum collapses to N * Lambda(x, rho).

#include "ccofdma/types.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace ccofdma {

/// Numerical settings for evaluating the safe tractable constraint.
struct SterConfig {
  int quad_nodes = 60000;          // integrand evaluation budget per integral
  double quad_rel_tol = 1e-8;
  double rho_bracket_lo = 1e-6;
  double rho_expand_factor = 2.0;
  double rho_rel_tol = 1e-6;
  double rho_max = 1e6;

  void validate() const;
};

/// Fractions below this are exact zeros as far as Lambda is concerned.
inline constexpr double kFractionFloor = 1e-12;

struct SterEntry {
  double value = 0.0;          // G_k
  double minimizer_rho = 0.0;  // rho*
  bool at_boundary = false;    // no interior bracket; value is H at the best sampled rho
};

/// Per-user outcome of the feasibility check at one allocation.
struct SterResult {
  std::vector<SterEntry> per_user;
  std::vector<int> violated;                 // users with G_k > tolerance
  std::vector<Eigen::VectorXd> gradients;    // d G_k / d x over the flat allocation, one per violated user
};

/// Lambda(x_frac, rho): log of E{(1 + snr g)^(-W x / (rho ln 2))}. Always <= 0.
double cgf_lambda(double x_frac, double rho, const UserProfile& user, const SystemParams& params,
                  const SterConfig& cfg = {});

/// H for one user's row; `multiplicity` repeats every entry (N in reduced mode).
double bernstein_h(std::span<const double> x_row, double rho, const UserProfile& user,
                   const SystemParams& params, const SterConfig& cfg = {}, int multiplicity = 1);

/// G = inf over rho of H, by geometric bracketing then golden-section search
/// in log(rho).
SterEntry bernstein_g(std::span<const double> x_row, const UserProfile& user, const SystemParams& params,
                      const SterConfig& cfg = {}, int multiplicity = 1);

/// dH/dx at fixed rho (the gradient of G when rho = rho*). Each entry is
/// -(W / ln 2) E{ln(1+snr g) w} / E{w} with w the Lambda integrand, scaled by
/// `multiplicity`.
Eigen::VectorXd grad_h_x(std::span<const double> x_row, double rho, const UserProfile& user,
                         const SystemParams& params, const SterConfig& cfg = {}, int multiplicity = 1);

/// Evaluates G_k for every user and, for each violated user, the gradient in
/// the flat user-major allocation space.
SterResult stc_feasibility(const Allocation& alloc, std::span<const UserProfile> users,
                           const SystemParams& params, const SterConfig& cfg = {},
                           double feasibility_tol = 1e-9);

}  // namespace ccofdma
