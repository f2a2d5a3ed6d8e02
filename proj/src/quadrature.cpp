#include "ccofdma/quadrature.hpp"

#include "ccofdma/types.hpp"

#include <cmath>
#include <queue>
#include <sstream>
#include <vector>

namespace ccofdma::quad {
namespace {

constexpr double kNodes[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double kKronrod[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights pair with the odd-indexed Kronrod nodes.
constexpr double kGauss[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                              0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a, b, value, error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

double checked(const std::function<double(double)>& f, double x) {
  const double y = f(x);
  if (!std::isfinite(y)) {
    std::ostringstream os;
    os << "integrand not finite at " << x;
    throw NumericalFailure(os.str());
  }
  return y;
}

Panel gauss_kronrod(const std::function<double(double)>& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = checked(f, center);
  double kronrod = kKronrod[7] * fc;
  double gauss = kGauss[3] * fc;
  for (int i = 0; i < 7; ++i) {
    const double dx = half * kNodes[i];
    const double pair = checked(f, center - dx) + checked(f, center + dx);
    kronrod += kKronrod[i] * pair;
    if (i % 2 == 1) gauss += kGauss[i / 2] * pair;
  }
  return {a, b, kronrod * half, std::abs((kronrod - gauss) * half)};
}

}  // namespace

Result integrate(const std::function<double(double)>& f, std::span<const double> breakpoints,
                 const Options& opt) {
  if (breakpoints.size() < 2) throw std::invalid_argument("quad::integrate needs two breakpoints");
  std::priority_queue<Panel> panels;
  Result r;
  for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
    if (!(breakpoints[i] < breakpoints[i + 1])) continue;
    Panel p = gauss_kronrod(f, breakpoints[i], breakpoints[i + 1]);
    r.value += p.value;
    r.error += p.error;
    r.evaluations += 15;
    panels.push(p);
  }
  while (r.error > std::max(opt.abs_tol, opt.rel_tol * std::abs(r.value))) {
    if (r.evaluations + 30 > opt.max_evaluations || panels.empty()) {
      std::ostringstream os;
      os << "quadrature did not converge: value " << r.value << ", error " << r.error << " after "
         << r.evaluations << " evaluations";
      throw NumericalFailure(os.str());
    }
    const Panel worst = panels.top();
    panels.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(worst.a < mid && mid < worst.b)) {
      throw NumericalFailure("quadrature panel underflow");
    }
    const Panel left = gauss_kronrod(f, worst.a, mid);
    const Panel right = gauss_kronrod(f, mid, worst.b);
    r.evaluations += 30;
    r.value += left.value + right.value - worst.value;
    r.error += left.error + right.error - worst.error;
    panels.push(left);
    panels.push(right);
  }
  // Re-sum to drop the drift of the running updates.
  r.value = 0.0;
  r.error = 0.0;
  while (!panels.empty()) {
    r.value += panels.top().value;
    r.error += panels.top().error;
    panels.pop();
  }
  return r;
}

Result integrate(const std::function<double(double)>& f, double a, double b, const Options& opt) {
  const double pts[2] = {a, b};
  return integrate(f, std::span<const double>(pts, 2), opt);
}

}  // namespace ccofdma::quad
