#include "ccofdma/bernstein.hpp"

#include "ccofdma/channel.hpp"
#include "ccofdma/quadrature.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace ccofdma {

void SterConfig::validate() const {
  if (quad_nodes < 30) throw std::invalid_argument("SterConfig: quad_nodes must allow at least two panels");
  if (!(quad_rel_tol > 0) || !(rho_rel_tol > 0)) throw std::invalid_argument("SterConfig: tolerances must be > 0");
  if (!(rho_bracket_lo > 0) || !(rho_bracket_lo < rho_max))
    throw std::invalid_argument("SterConfig: need 0 < rho_bracket_lo < rho_max");
  if (!(rho_expand_factor > 1)) throw std::invalid_argument("SterConfig: rho_expand_factor must be > 1");
}

namespace {

double rate_exponent(double x_frac, double rho, const SystemParams& params) {
  return params.bandwidth_per_subcarrier * x_frac / (rho * std::numbers::ln2);
}

quad::Options quad_options(const SterConfig& cfg) {
  return {.rel_tol = cfg.quad_rel_tol, .abs_tol = 0.0, .max_evaluations = cfg.quad_nodes};
}

// E{(1 + snr U)^-c}, U ~ Exp(1), after the substitution u = g / sigma.
double tilted_mass(double snr, double c, const SterConfig& cfg) {
  const auto pts = detail::fading_breakpoints(snr, c);
  return quad::integrate([snr, c](double u) { return std::exp(-c * std::log1p(snr * u) - u); }, pts,
                         quad_options(cfg))
      .value;
}

}  // namespace

double cgf_lambda(double x_frac, double rho, const UserProfile& user, const SystemParams& params,
                  const SterConfig& cfg) {
  if (!(rho > 0)) throw std::invalid_argument("cgf_lambda: rho must be > 0");
  if (x_frac < 0) throw std::invalid_argument("cgf_lambda: x_frac must be >= 0");
  if (x_frac < kFractionFloor) return 0.0;
  const double snr = params.snr_scale() * user.avg_gain;
  const double mass = tilted_mass(snr, rate_exponent(x_frac, rho, params), cfg);
  if (!(mass > 0)) throw NumericalFailure("cgf_lambda: tilted mass underflowed");
  return std::min(0.0, std::log(mass));
}

double bernstein_h(std::span<const double> x_row, double rho, const UserProfile& user,
                   const SystemParams& params, const SterConfig& cfg, int multiplicity) {
  double sum = 0.0;
  for (double x : x_row) sum += cgf_lambda(x, rho, user, params, cfg);
  return user.min_rate + rho * multiplicity * sum - rho * std::log(user.outage_tolerance);
}

SterEntry bernstein_g(std::span<const double> x_row, const UserProfile& user, const SystemParams& params,
                      const SterConfig& cfg, int multiplicity) {
  auto h_at = [&](double log_rho) { return bernstein_h(x_row, std::exp(log_rho), user, params, cfg, multiplicity); };

  SterEntry best{std::numeric_limits<double>::infinity(), 0.0, false};
  auto eval = [&](double log_rho) {
    const double v = h_at(log_rho);
    if (v < best.value) {
      best.value = v;
      best.minimizer_rho = std::exp(log_rho);
    }
    return v;
  };

  const double step = std::log(cfg.rho_expand_factor);
  const double t_max = std::log(cfg.rho_max);
  double t0 = std::log(cfg.rho_bracket_lo), t1 = t0 + step, t2 = t1 + step;
  double h0 = eval(t0), h1 = eval(t1);
  if (h1 >= h0) {
    // H increases from the lower end: the infimum is approached as rho -> 0+.
    best.at_boundary = true;
    return best;
  }
  double h2 = eval(t2);
  while (h2 <= h1) {
    if (t2 + step > t_max) {
      best.at_boundary = true;
      return best;
    }
    t0 = t1;
    t1 = t2;
    h1 = h2;
    t2 += step;
    h2 = eval(t2);
  }

  // Golden section on [t0, t2] (log rho); width in log is relative width in rho.
  constexpr double kInvPhi = 0.6180339887498949;
  double a = t0, b = t2;
  double c = b - kInvPhi * (b - a), d = a + kInvPhi * (b - a);
  double hc = eval(c), hd = eval(d);
  while (b - a > cfg.rho_rel_tol) {
    if (hc < hd) {
      b = d;
      d = c;
      hd = hc;
      c = b - kInvPhi * (b - a);
      hc = eval(c);
    } else {
      a = c;
      c = d;
      hc = hd;
      d = a + kInvPhi * (b - a);
      hd = eval(d);
    }
  }
  return best;
}

Eigen::VectorXd grad_h_x(std::span<const double> x_row, double rho, const UserProfile& user,
                         const SystemParams& params, const SterConfig& cfg, int multiplicity) {
  if (!(rho > 0)) throw std::invalid_argument("grad_h_x: rho must be > 0");
  const double snr = params.snr_scale() * user.avg_gain;
  Eigen::VectorXd grad(static_cast<Eigen::Index>(x_row.size()));
  for (std::size_t n = 0; n < x_row.size(); ++n) {
    const double x = x_row[n] < kFractionFloor ? 0.0 : x_row[n];
    const double c = rate_exponent(x, rho, params);
    const auto pts = detail::fading_breakpoints(snr, c);
    const double mass = quad::integrate([snr, c](double u) { return std::exp(-c * std::log1p(snr * u) - u); },
                                        pts, quad_options(cfg))
                            .value;
    const double moment = quad::integrate(
                              [snr, c](double u) {
                                const double l = std::log1p(snr * u);
                                return l * std::exp(-c * l - u);
                              },
                              pts, quad_options(cfg))
                              .value;
    grad(static_cast<Eigen::Index>(n)) =
        -multiplicity * params.bandwidth_per_subcarrier / std::numbers::ln2 * moment / mass;
  }
  return grad;
}

SterResult stc_feasibility(const Allocation& alloc, std::span<const UserProfile> users,
                           const SystemParams& params, const SterConfig& cfg, double feasibility_tol) {
  const auto k_users = static_cast<int>(users.size());
  if (alloc.x.rows() != k_users) throw std::invalid_argument("stc_feasibility: allocation/user count mismatch");
  const int cols = static_cast<int>(alloc.x.cols());
  const int multiplicity = alloc.mode == AllocationMode::reduced ? params.n_subcarriers : 1;

  SterResult out;
  out.per_user.reserve(users.size());
  for (int k = 0; k < k_users; ++k) {
    const Eigen::VectorXd row = alloc.x.row(k).transpose();
    const std::span<const double> view(row.data(), static_cast<std::size_t>(row.size()));
    const SterEntry e = bernstein_g(view, users[k], params, cfg, multiplicity);
    out.per_user.push_back(e);
    if (e.value > feasibility_tol) {
      out.violated.push_back(k);
      Eigen::VectorXd g = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(k_users) * cols);
      g.segment(static_cast<Eigen::Index>(k) * cols, cols) =
          grad_h_x(view, e.minimizer_rho, users[k], params, cfg, multiplicity);
      out.gradients.push_back(std::move(g));
    }
  }
  return out;
}

}  // namespace ccofdma
