#pragma once

#include "ccofdma/rng.hpp"
#include "ccofdma/types.hpp"

#include <span>
#include <vector>

namespace ccofdma {

inline constexpr double kSpeedOfLight = 299792458.0;

/// Users dropped uniformly in the cell: d = R sqrt(U), 10 log10(s) ~ N(0, std),
/// sigma = (d / d0)^-gamma * s. Demand and tolerance are filled from the
/// arguments.
std::vector<UserProfile> draw_user_profiles(const CellGeometry& geometry, int k, Rng& rng,
                                            double min_rate = 0.0, double outage_tolerance = 0.1);

/// Inverse CDF of the distance density 2d / R^2: R sqrt(u).
double distance_quantile(const CellGeometry& geometry, double u);

/// Single user at distance d with shadowing s (linear).
UserProfile user_at(const CellGeometry& geometry, double distance, double shadowing);

/// Average received power in dB for a user at `distance` with unit shadowing.
double average_rx_power_db(const CellGeometry& geometry, double distance);

/// i.i.d. Rayleigh fading: g_{k,n} ~ Exp(mean sigma_k).
GainSample sample_gains(std::span<const UserProfile> users, const SystemParams& params, Rng& rng);

/// W log2(1 + p_t g / (Gamma N0)).
double instantaneous_rate(double gain, const SystemParams& params);

/// E{r} over the exponential gain of `user`.
double expected_rate(const UserProfile& user, const SystemParams& params, double rel_tol = 1e-10);

/// Coherence time 9c / (16 pi f_c v).
double coherence_time(double carrier_freq, double speed);

/// Exponentially decaying tap-delay line used for frequency-correlated gains.
struct DelayProfile {
  int taps = 32;
  double tap_spacing = 10e-9;   // [s]; the N subcarriers span 1 / tap_spacing
  double rms_delay = 37.79e-9;  // [s]

  void validate() const;
  /// Normalized tap powers (sum to one) whose rms delay equals rms_delay.
  /// A single tap is a flat channel and ignores rms_delay.
  std::vector<double> tap_powers() const;
};

/// RMS delay spread of a discrete power-delay profile.
double rms_delay_spread(std::span<const double> powers, double tap_spacing);

/// Gains from an L-tap channel per user: the squared magnitude of the tap
/// DFT at the N subcarriers. Tap powers sum to sigma_k so each marginal stays
/// exponential with mean sigma_k.
class CorrelatedChannel {
 public:
  CorrelatedChannel(const DelayProfile& profile, int n_subcarriers);
  GainSample sample(std::span<const UserProfile> users, Rng& rng) const;

 private:
  int n_subcarriers_;
  std::vector<double> tap_std_;          // per-tap std of each real/imag part (unit total power)
  Eigen::MatrixXcd dft_;                 // N x L
};

namespace detail {
/// Breakpoints on u in [0, 40] that resolve the knee of (1 + snr u)^-c at
/// u ~ 1 / (snr (1 + c)); the tail beyond u = 40 weighs less than e^-40.
std::vector<double> fading_breakpoints(double snr, double exponent);
inline constexpr double kTruncation = 40.0;
}  // namespace detail

GainSample sample_correlated_gains(std::span<const UserProfile> users, const SystemParams& params,
                                   const DelayProfile& profile, Rng& rng);

}  // namespace ccofdma
