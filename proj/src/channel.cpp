#include "ccofdma/channel.hpp"

#include "ccofdma/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

namespace ccofdma {

int SystemParams::slots_per_window() const {
  return static_cast<int>(std::lround(window_length / slot_length));
}

void SystemParams::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("SystemParams: " + what); };
  if (n_subcarriers < 1) fail("n_subcarriers must be >= 1");
  if (n_users < 1) fail("n_users must be >= 1");
  if (!(bandwidth_per_subcarrier > 0)) fail("bandwidth must be > 0");
  if (!(tx_power_per_subcarrier > 0)) fail("tx power must be > 0");
  if (!(noise_psd > 0)) fail("noise_psd must be > 0");
  if (!(capacity_gap >= 1)) fail("capacity_gap must be >= 1");
  if (!(slot_length > 0)) fail("slot_length must be > 0");
  if (!(window_length >= slot_length)) fail("window_length must be >= slot_length");
  if (slots_per_window() < 1) fail("slots_per_window must be >= 1");
}

void UserProfile::validate() const {
  if (!(avg_gain > 0) || !std::isfinite(avg_gain)) throw std::invalid_argument("UserProfile: avg_gain must be > 0");
  if (!(min_rate >= 0)) throw std::invalid_argument("UserProfile: min_rate must be >= 0");
  if (!(outage_tolerance > 0 && outage_tolerance < 1))
    throw std::invalid_argument("UserProfile: outage_tolerance must lie in (0,1)");
}

void CellGeometry::validate() const {
  if (!(reference_distance > 0)) throw std::invalid_argument("CellGeometry: reference distance must be > 0");
  if (!(radius > reference_distance)) throw std::invalid_argument("CellGeometry: radius must exceed reference distance");
  if (!(path_loss_exponent > 0)) throw std::invalid_argument("CellGeometry: path-loss exponent must be > 0");
  if (!(shadowing_std_db >= 0)) throw std::invalid_argument("CellGeometry: shadowing std must be >= 0");
}

Eigen::VectorXd Allocation::flat() const {
  Eigen::VectorXd v(x.size());
  for (int k = 0; k < x.rows(); ++k)
    for (int n = 0; n < x.cols(); ++n) v(k * x.cols() + n) = x(k, n);
  return v;
}

Allocation Allocation::from_flat(const Eigen::VectorXd& v, int n_users, AllocationMode mode) {
  const int cols = static_cast<int>(v.size()) / n_users;
  if (cols * n_users != v.size()) throw std::invalid_argument("Allocation::from_flat: size mismatch");
  if (mode == AllocationMode::reduced && cols != 1)
    throw std::invalid_argument("Allocation::from_flat: reduced allocation has one column");
  Allocation a;
  a.mode = mode;
  a.x.resize(n_users, cols);
  for (int k = 0; k < n_users; ++k)
    for (int n = 0; n < cols; ++n) a.x(k, n) = v(k * cols + n);
  return a;
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

double capacity_gap_from_ber(double ber) {
  if (!(ber > 0 && ber < 0.2)) throw std::invalid_argument("BER must lie in (0, 0.2)");
  return -std::log(5.0 * ber) / 1.5;
}

double distance_quantile(const CellGeometry& geometry, double u) { return geometry.radius * std::sqrt(u); }

UserProfile user_at(const CellGeometry& geometry, double distance, double shadowing) {
  UserProfile u;
  u.distance = distance;
  u.shadowing = shadowing;
  u.avg_gain = std::pow(distance / geometry.reference_distance, -geometry.path_loss_exponent) * shadowing;
  return u;
}

double average_rx_power_db(const CellGeometry& geometry, double distance) {
  return geometry.ref_rx_power_db + linear_to_db(user_at(geometry, distance, 1.0).avg_gain);
}

std::vector<UserProfile> draw_user_profiles(const CellGeometry& geometry, int k, Rng& rng, double min_rate,
                                            double outage_tolerance) {
  geometry.validate();
  if (k < 1) throw std::invalid_argument("draw_user_profiles: k must be >= 1");
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::normal_distribution<double> shadow_db(0.0, geometry.shadowing_std_db);
  std::vector<UserProfile> users;
  users.reserve(k);
  for (int i = 0; i < k; ++i) {
    // 1 - U lies in (0, 1], so d is never zero.
    const double d = distance_quantile(geometry, 1.0 - unif(rng));
    const double s = geometry.shadowing_std_db > 0 ? db_to_linear(shadow_db(rng)) : 1.0;
    UserProfile u = user_at(geometry, d, s);
    u.min_rate = min_rate;
    u.outage_tolerance = outage_tolerance;
    users.push_back(u);
  }
  return users;
}

GainSample sample_gains(std::span<const UserProfile> users, const SystemParams& params, Rng& rng) {
  if (users.empty()) throw std::invalid_argument("sample_gains: no users");
  std::exponential_distribution<double> unit(1.0);
  GainSample g(static_cast<Eigen::Index>(users.size()), params.n_subcarriers);
  for (std::size_t k = 0; k < users.size(); ++k)
    for (int n = 0; n < params.n_subcarriers; ++n) g(k, n) = users[k].avg_gain * unit(rng);
  return g;
}

double instantaneous_rate(double gain, const SystemParams& params) {
  return params.bandwidth_per_subcarrier * std::log1p(params.snr_scale() * gain) / std::numbers::ln2;
}

namespace detail {
std::vector<double> fading_breakpoints(double snr, double exponent) {
  const double knee = 1.0 / (snr * (1.0 + std::max(exponent, 0.0)));
  const double floor = std::min(0.05, 0.01 * knee);
  std::vector<double> pts{0.0};
  std::vector<double> geometric;
  for (double u = kTruncation; u > floor && geometric.size() < 200; u *= 0.5) geometric.push_back(u);
  pts.insert(pts.end(), geometric.rbegin(), geometric.rend());
  return pts;
}
}  // namespace detail

double expected_rate(const UserProfile& user, const SystemParams& params, double rel_tol) {
  const double snr = params.snr_scale() * user.avg_gain;
  const auto pts = detail::fading_breakpoints(snr, 0.0);
  // E{ln(1 + snr U)}, U ~ Exp(1).
  const auto r = quad::integrate([snr](double u) { return std::log1p(snr * u) * std::exp(-u); }, pts,
                                 {.rel_tol = rel_tol, .abs_tol = 1e-300});
  return params.bandwidth_per_subcarrier * r.value / std::numbers::ln2;
}

double coherence_time(double carrier_freq, double speed) {
  if (!(carrier_freq > 0) || !(speed > 0)) throw std::invalid_argument("coherence_time: inputs must be > 0");
  return 9.0 * kSpeedOfLight / (16.0 * std::numbers::pi * carrier_freq * speed);
}

void DelayProfile::validate() const {
  if (taps < 1) throw std::invalid_argument("DelayProfile: taps must be >= 1");
  if (!(tap_spacing > 0)) throw std::invalid_argument("DelayProfile: tap spacing must be > 0");
  if (!(rms_delay > 0)) throw std::invalid_argument("DelayProfile: rms delay must be > 0");
}

double rms_delay_spread(std::span<const double> powers, double tap_spacing) {
  double total = 0, m1 = 0, m2 = 0;
  for (std::size_t l = 0; l < powers.size(); ++l) {
    const double tau = static_cast<double>(l) * tap_spacing;
    total += powers[l];
    m1 += powers[l] * tau;
    m2 += powers[l] * tau * tau;
  }
  m1 /= total;
  m2 /= total;
  return std::sqrt(std::max(0.0, m2 - m1 * m1));
}

namespace {
std::vector<double> geometric_powers(int taps, double ratio) {
  std::vector<double> p(taps);
  double w = 1.0, total = 0.0;
  for (int l = 0; l < taps; ++l) {
    p[l] = w;
    total += w;
    w *= ratio;
  }
  for (double& v : p) v /= total;
  return p;
}
}  // namespace

std::vector<double> DelayProfile::tap_powers() const {
  validate();
  if (taps == 1) return {1.0};
  // rms delay of P_l ~ r^l grows monotonically with r on (0, 1].
  const double widest = rms_delay_spread(geometric_powers(taps, 1.0), tap_spacing);
  if (rms_delay >= widest) {
    std::ostringstream os;
    os << "DelayProfile: rms delay " << rms_delay << " s unreachable with " << taps << " taps spaced "
       << tap_spacing << " s (max " << widest << " s)";
    throw std::invalid_argument(os.str());
  }
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    (rms_delay_spread(geometric_powers(taps, mid), tap_spacing) < rms_delay ? lo : hi) = mid;
  }
  return geometric_powers(taps, 0.5 * (lo + hi));
}

CorrelatedChannel::CorrelatedChannel(const DelayProfile& profile, int n_subcarriers)
    : n_subcarriers_(n_subcarriers), dft_(n_subcarriers, profile.taps) {
  const auto powers = profile.tap_powers();
  tap_std_.resize(powers.size());
  for (std::size_t l = 0; l < powers.size(); ++l) tap_std_[l] = std::sqrt(powers[l] / 2.0);
  // Subcarriers span 1 / tap_spacing, so subcarrier n sits at n / (N tap_spacing).
  for (int n = 0; n < n_subcarriers; ++n)
    for (int l = 0; l < profile.taps; ++l)
      dft_(n, l) = std::polar(1.0, -2.0 * std::numbers::pi * n * l / n_subcarriers);
}

GainSample CorrelatedChannel::sample(std::span<const UserProfile> users, Rng& rng) const {
  std::normal_distribution<double> normal(0.0, 1.0);
  const auto taps = static_cast<Eigen::Index>(tap_std_.size());
  GainSample g(static_cast<Eigen::Index>(users.size()), n_subcarriers_);
  Eigen::VectorXcd h(taps);
  for (std::size_t k = 0; k < users.size(); ++k) {
    const double scale = std::sqrt(users[k].avg_gain);
    for (Eigen::Index l = 0; l < taps; ++l) {
      const double re = normal(rng);
      const double im = normal(rng);
      h(l) = scale * tap_std_[l] * std::complex<double>(re, im);
    }
    g.row(static_cast<Eigen::Index>(k)) = (dft_ * h).cwiseAbs2().transpose();
  }
  return g;
}

GainSample sample_correlated_gains(std::span<const UserProfile> users, const SystemParams& params,
                                   const DelayProfile& profile, Rng& rng) {
  return CorrelatedChannel(profile, params.n_subcarriers).sample(users, rng);
}

}  // namespace ccofdma
