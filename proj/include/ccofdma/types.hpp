#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace ccofdma {

/// Raised when an integral, line search or factorization fails to reach
/// its tolerance. Never swallowed inside the library.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Radio constants shared by every user in a cell. All powers are linear.
struct SystemParams {
  int n_subcarriers = 64;
  int n_users = 4;
  double bandwidth_per_subcarrier = 1.0;  // W [Hz]
  double tx_power_per_subcarrier = 1e9;   // p_t, linear
  double noise_psd = 1.0;                 // N0, linear
  double capacity_gap = 5.0673;           // Gamma >= 1
  double slot_length = 1e-3;              // T0 [s]
  double window_length = 1.0;             // T [s]
  std::uint64_t rng_seed = 1;

  int slots_per_window() const;
  /// p_t / (Gamma N0); multiplies the channel gain inside log2(1 + .).
  double snr_scale() const { return tx_power_per_subcarrier / (capacity_gap * noise_psd); }
  void validate() const;
};

/// Long-term statistics and QoS demand of one user.
struct UserProfile {
  double avg_gain = 1.0;           // sigma_k > 0
  double min_rate = 0.0;           // q_k [bits/s]
  double outage_tolerance = 0.1;   // epsilon_k in (0,1)
  double distance = 0.0;           // provenance only
  double shadowing = 1.0;          // provenance only

  void validate() const;
};

struct CellGeometry {
  double radius = 100.0;
  double reference_distance = 1.0;
  double path_loss_exponent = 4.0;
  double shadowing_std_db = 8.0;
  double ref_rx_power_db = 90.0;

  void validate() const;
};

/// K x N matrix of linear power gains g_{k,n} for one slot.
using GainSample = Eigen::MatrixXd;

enum class AllocationMode { full, reduced };

/// Airtime fractions. Full mode stores K x N, reduced mode K x 1 (the same
/// fraction on every subcarrier).
struct Allocation {
  Eigen::MatrixXd x;
  AllocationMode mode = AllocationMode::reduced;

  /// Per-user fraction on subcarrier n, regardless of mode.
  double at(int k, int n) const { return mode == AllocationMode::full ? x(k, n) : x(k, 0); }
  /// Flattened user-major decision vector [x_{1,1..N}, ..., x_{K,1..N}].
  Eigen::VectorXd flat() const;
  static Allocation from_flat(const Eigen::VectorXd& v, int n_users, AllocationMode mode);
};

double db_to_linear(double db);
double linear_to_db(double lin);
/// Gamma = -ln(5 BER) / 1.5.
double capacity_gap_from_ber(double ber);

}  // namespace ccofdma
