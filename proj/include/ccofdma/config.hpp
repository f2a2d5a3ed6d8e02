#pragma once

// Flat `key = value` run configuration with dotted namespaces. Lines
// starting with '#' are comments. Unknown keys are errors.
//
//   seed                      master RNG seed                        (required)
//   sys.n_users               K                                      (required)
//   sys.n_subcarriers         N                                      (required)
//   sys.bandwidth_hz          W per subcarrier                       [1]
//   sys.noise_psd             N0, linear                             [1]
//   sys.ber_target            capacity gap -ln(5 BER)/1.5            [1e-4]
//   sys.slot_ms               T0                                     [1]
//   sys.window_s              T                                      [1]
//   cell.radius_m             R                                      [100]
//   cell.ref_distance_m       d0                                     [1]
//   cell.path_loss_exp        gamma                                  [4]
//   cell.shadow_std_db        log-normal shadowing std               [8]
//   cell.ref_power_db         p_t at d0                              [90]
//   users.min_rate_bps        q_k                                    [20]
//   users.outage_tolerance    eps_k in (0,1)                         [0.1]
//   ster.quad_nodes           integrand evaluations per integral     [60000]
//   ster.quad_rel_tol                                                [1e-8]
//   ster.rho_lo, ster.rho_expand, ster.rho_rel_tol, ster.rho_max     [1e-6, 2, 1e-6, 1e6]
//   solver.mode               reduced | full                         [reduced]
//   solver.delta                                                     [1e-2]
//   solver.objective_rel_tol, solver.stall_window, solver.cap_factor,
//   solver.center_tol, solver.row_cap_factor
//   exp.overhead_fraction     signaling cost per update, in slots    [0.1]
//   exp.eval_slots            outage evaluation slots                [100000]
//   exp.corr_eval_slots                                              [20000]
//   exp.fast_baseline         true | false                           [true]
//   corr.taps, corr.tap_spacing_ns, corr.rms_delay_ns                [32, 10, 37.79]

#include "ccofdma/experiments.hpp"

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

namespace ccofdma {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& key, const std::string& message, int line = 0);
  const std::string& key() const { return key_; }
  int line() const { return line_; }

 private:
  std::string key_;
  int line_;
};

struct RunConfig {
  ExperimentConfig experiment;
  std::uint64_t seed = 1;
  double ber_target = 1e-4;
  std::filesystem::path out_dir = ".";
};

/// Parses and validates configuration text; `source` labels diagnostics.
RunConfig parse_config(const std::string& text, const std::string& source = "<config>");

RunConfig load_config(const std::filesystem::path& path);

/// Every key with its effective value, loadable by parse_config.
std::string resolved_config(const RunConfig& cfg);

/// Writes resolved_config to <out_dir>/config.resolved.
void write_resolved_config(const RunConfig& cfg);

}  // namespace ccofdma
