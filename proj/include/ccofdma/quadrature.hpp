#pragma once

#include <functional>
#include <span>

namespace ccofdma::quad {

struct Options {
  double rel_tol = 1e-8;
  double abs_tol = 0.0;
  int max_evaluations = 60000;
};

struct Result {
  double value = 0.0;
  double error = 0.0;
  int evaluations = 0;
};

/// Globally adaptive Gauss-Kronrod (7/15) integration of f over the panels
/// delimited by the sorted `breakpoints` (at least two). The panel with the
/// largest error estimate is bisected until the summed estimate is below
/// max(abs_tol, rel_tol * |value|). Throws NumericalFailure when the
/// evaluation budget runs out or f returns a non-finite value.
Result integrate(const std::function<double(double)>& f, std::span<const double> breakpoints,
                 const Options& opt = {});

Result integrate(const std::function<double(double)>& f, double a, double b, const Options& opt = {});

}  // namespace ccofdma::quad
