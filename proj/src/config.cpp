#include "ccofdma/config.hpp"

#include "ccofdma/csv.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace ccofdma {

ConfigError::ConfigError(const std::string& key, const std::string& message, int line)
    : std::runtime_error((line > 0 ? "line " + std::to_string(line) + ": " : std::string()) +
                         (key.empty() ? message : key + ": " + message)),
      key_(key),
      line_(line) {}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct Entry {
  std::string value;
  int line = 0;
};

class Reader {
 public:
  explicit Reader(std::map<std::string, Entry> entries) : entries_(std::move(entries)) {}

  double number(const std::string& key, double fallback) {
    const Entry* e = find(key);
    if (!e) return fallback;
    double v = 0;
    const auto* first = e->value.data();
    const auto* last = first + e->value.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) throw ConfigError(key, "expected a number, got '" + e->value + "'", e->line);
    return v;
  }

  long long integer(const std::string& key, long long fallback) {
    const Entry* e = find(key);
    if (!e) return fallback;
    long long v = 0;
    const auto* first = e->value.data();
    const auto* last = first + e->value.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) throw ConfigError(key, "expected an integer, got '" + e->value + "'", e->line);
    return v;
  }

  std::uint64_t unsigned_integer(const std::string& key) {
    const Entry* e = find(key);
    if (!e) throw ConfigError(key, "required key missing");
    std::uint64_t v = 0;
    const auto* first = e->value.data();
    const auto* last = first + e->value.size();
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) throw ConfigError(key, "expected an unsigned integer, got '" + e->value + "'", e->line);
    return v;
  }

  long long required_integer(const std::string& key) {
    if (!find(key)) throw ConfigError(key, "required key missing");
    return integer(key, 0);
  }

  std::string word(const std::string& key, const std::string& fallback) {
    const Entry* e = find(key);
    return e ? e->value : fallback;
  }

  int line(const std::string& key) const {
    const auto it = entries_.find(key);
    return it == entries_.end() ? 0 : it->second.line;
  }

 private:
  const Entry* find(const std::string& key) {
    const auto it = entries_.find(key);
    return it == entries_.end() ? nullptr : &it->second;
  }
  std::map<std::string, Entry> entries_;
};

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "seed",
      "sys.n_users", "sys.n_subcarriers", "sys.bandwidth_hz", "sys.noise_psd", "sys.ber_target", "sys.slot_ms",
      "sys.window_s",
      "cell.radius_m", "cell.ref_distance_m", "cell.path_loss_exp", "cell.shadow_std_db", "cell.ref_power_db",
      "users.min_rate_bps", "users.outage_tolerance",
      "ster.quad_nodes", "ster.quad_rel_tol", "ster.rho_lo", "ster.rho_expand", "ster.rho_rel_tol", "ster.rho_max",
      "solver.mode", "solver.delta", "solver.objective_rel_tol", "solver.stall_window", "solver.cap_factor",
      "solver.center_tol", "solver.row_cap_factor",
      "exp.overhead_fraction", "exp.eval_slots", "exp.corr_eval_slots", "exp.fast_baseline",
      "corr.taps", "corr.tap_spacing_ns", "corr.rms_delay_ns"};
  return keys;
}

// Runs `check` and re-labels an invalid_argument with the offending key.
void expect(bool ok, const std::string& key, const std::string& message, const Reader& r) {
  if (!ok) throw ConfigError(key, message, r.line(key));
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& source) {
  std::map<std::string, Entry> entries;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(raw.substr(0, raw.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("", source + ": expected 'key = value'", line_no);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!known_keys().contains(key)) throw ConfigError(key, "unknown key", line_no);
    if (entries.contains(key)) throw ConfigError(key, "duplicate key", line_no);
    if (value.empty()) throw ConfigError(key, "empty value", line_no);
    entries[key] = {value, line_no};
  }

  Reader r(std::move(entries));
  RunConfig cfg;
  ExperimentConfig& e = cfg.experiment;
  SystemParams& p = e.params;

  cfg.seed = r.unsigned_integer("seed");
  p.rng_seed = cfg.seed;
  p.n_users = static_cast<int>(r.required_integer("sys.n_users"));
  expect(p.n_users >= 1, "sys.n_users", "must be >= 1", r);
  p.n_subcarriers = static_cast<int>(r.required_integer("sys.n_subcarriers"));
  expect(p.n_subcarriers >= 1, "sys.n_subcarriers", "must be >= 1", r);
  p.bandwidth_per_subcarrier = r.number("sys.bandwidth_hz", 1.0);
  expect(p.bandwidth_per_subcarrier > 0, "sys.bandwidth_hz", "must be > 0", r);
  p.noise_psd = r.number("sys.noise_psd", 1.0);
  expect(p.noise_psd > 0, "sys.noise_psd", "must be > 0", r);
  cfg.ber_target = r.number("sys.ber_target", 1e-4);
  expect(cfg.ber_target > 0 && cfg.ber_target < 0.2, "sys.ber_target", "must lie in (0, 0.2)", r);
  p.capacity_gap = capacity_gap_from_ber(cfg.ber_target);
  p.slot_length = r.number("sys.slot_ms", 1.0) * 1e-3;
  expect(p.slot_length > 0, "sys.slot_ms", "must be > 0", r);
  p.window_length = r.number("sys.window_s", 1.0);
  expect(p.window_length >= p.slot_length, "sys.window_s", "must be at least one slot", r);

  CellGeometry& g = e.geometry;
  g.radius = r.number("cell.radius_m", 100.0);
  g.reference_distance = r.number("cell.ref_distance_m", 1.0);
  expect(g.reference_distance > 0, "cell.ref_distance_m", "must be > 0", r);
  expect(g.radius > g.reference_distance, "cell.radius_m", "must exceed cell.ref_distance_m", r);
  g.path_loss_exponent = r.number("cell.path_loss_exp", 4.0);
  expect(g.path_loss_exponent > 0, "cell.path_loss_exp", "must be > 0", r);
  g.shadowing_std_db = r.number("cell.shadow_std_db", 8.0);
  expect(g.shadowing_std_db >= 0, "cell.shadow_std_db", "must be >= 0", r);
  g.ref_rx_power_db = r.number("cell.ref_power_db", 90.0);
  p.tx_power_per_subcarrier = db_to_linear(g.ref_rx_power_db);

  e.min_rate = r.number("users.min_rate_bps", 20.0);
  expect(e.min_rate >= 0, "users.min_rate_bps", "must be >= 0", r);
  e.outage_tolerance = r.number("users.outage_tolerance", 0.1);
  expect(e.outage_tolerance > 0 && e.outage_tolerance < 1, "users.outage_tolerance", "must lie in (0,1)", r);

  SterConfig& s = e.ster;
  s.quad_nodes = static_cast<int>(r.integer("ster.quad_nodes", s.quad_nodes));
  expect(s.quad_nodes >= 30, "ster.quad_nodes", "must be >= 30", r);
  s.quad_rel_tol = r.number("ster.quad_rel_tol", s.quad_rel_tol);
  expect(s.quad_rel_tol > 0, "ster.quad_rel_tol", "must be > 0", r);
  s.rho_bracket_lo = r.number("ster.rho_lo", s.rho_bracket_lo);
  expect(s.rho_bracket_lo > 0, "ster.rho_lo", "must be > 0", r);
  s.rho_expand_factor = r.number("ster.rho_expand", s.rho_expand_factor);
  expect(s.rho_expand_factor > 1, "ster.rho_expand", "must be > 1", r);
  s.rho_rel_tol = r.number("ster.rho_rel_tol", s.rho_rel_tol);
  expect(s.rho_rel_tol > 0, "ster.rho_rel_tol", "must be > 0", r);
  s.rho_max = r.number("ster.rho_max", s.rho_max);
  expect(s.rho_max > s.rho_bracket_lo, "ster.rho_max", "must exceed ster.rho_lo", r);

  const std::string mode = r.word("solver.mode", "reduced");
  expect(mode == "reduced" || mode == "full", "solver.mode", "must be 'reduced' or 'full'", r);
  e.mode = mode == "full" ? AllocationMode::full : AllocationMode::reduced;
  AccpmOptions& o = e.solver;
  o.delta = r.number("solver.delta", o.delta);
  expect(o.delta > 0 && o.delta < 1, "solver.delta", "must lie in (0,1)", r);
  o.objective_rel_tol = r.number("solver.objective_rel_tol", o.objective_rel_tol);
  expect(o.objective_rel_tol > 0, "solver.objective_rel_tol", "must be > 0", r);
  o.stall_window = static_cast<int>(r.integer("solver.stall_window", o.stall_window));
  expect(o.stall_window >= 1, "solver.stall_window", "must be >= 1", r);
  o.cap_factor = r.number("solver.cap_factor", o.cap_factor);
  expect(o.cap_factor > 0, "solver.cap_factor", "must be > 0", r);
  o.center_tol = r.number("solver.center_tol", o.center_tol);
  expect(o.center_tol > 0, "solver.center_tol", "must be > 0", r);
  o.row_cap_factor = static_cast<int>(r.integer("solver.row_cap_factor", o.row_cap_factor));
  expect(o.row_cap_factor >= 2, "solver.row_cap_factor", "must be >= 2", r);

  e.overhead_fraction = r.number("exp.overhead_fraction", e.overhead_fraction);
  expect(e.overhead_fraction >= 0 && e.overhead_fraction < 1, "exp.overhead_fraction", "must lie in [0,1)", r);
  e.eval_slots = static_cast<int>(r.integer("exp.eval_slots", e.eval_slots));
  expect(e.eval_slots >= 1, "exp.eval_slots", "must be >= 1", r);
  e.corr_eval_slots = static_cast<int>(r.integer("exp.corr_eval_slots", e.corr_eval_slots));
  expect(e.corr_eval_slots >= 1, "exp.corr_eval_slots", "must be >= 1", r);
  const std::string fast = r.word("exp.fast_baseline", "true");
  expect(fast == "true" || fast == "false", "exp.fast_baseline", "must be true or false", r);
  e.fast_baseline = fast == "true";

  DelayProfile& d = e.delay_profile;
  d.taps = static_cast<int>(r.integer("corr.taps", d.taps));
  expect(d.taps >= 1, "corr.taps", "must be >= 1", r);
  d.tap_spacing = r.number("corr.tap_spacing_ns", d.tap_spacing * 1e9) * 1e-9;
  expect(d.tap_spacing > 0, "corr.tap_spacing_ns", "must be > 0", r);
  d.rms_delay = r.number("corr.rms_delay_ns", d.rms_delay * 1e9) * 1e-9;
  expect(d.rms_delay > 0, "corr.rms_delay_ns", "must be > 0", r);
  try {
    d.tap_powers();
  } catch (const std::invalid_argument& ex) {
    throw ConfigError("corr.rms_delay_ns", ex.what(), r.line("corr.rms_delay_ns"));
  }

  try {
    e.validate();
  } catch (const std::invalid_argument& ex) {
    throw ConfigError("", ex.what());
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot read config file " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path.string());
}

std::string resolved_config(const RunConfig& cfg) {
  const ExperimentConfig& e = cfg.experiment;
  const SystemParams& p = e.params;
  std::ostringstream os;
  auto put = [&os](const std::string& key, const std::string& value) { os << key << " = " << value << '\n'; };
  auto num = [](double v) { return format_exact(v); };
  os << "# resolved configuration; derived values are comments\n";
  put("seed", std::to_string(cfg.seed));
  put("sys.n_users", std::to_string(p.n_users));
  put("sys.n_subcarriers", std::to_string(p.n_subcarriers));
  put("sys.bandwidth_hz", num(p.bandwidth_per_subcarrier));
  put("sys.noise_psd", num(p.noise_psd));
  put("sys.ber_target", num(cfg.ber_target));
  os << "# capacity_gap = " << num(p.capacity_gap) << '\n';
  put("sys.slot_ms", num(p.slot_length * 1e3));
  put("sys.window_s", num(p.window_length));
  os << "# slots_per_window = " << p.slots_per_window() << '\n';
  put("cell.radius_m", num(e.geometry.radius));
  put("cell.ref_distance_m", num(e.geometry.reference_distance));
  put("cell.path_loss_exp", num(e.geometry.path_loss_exponent));
  put("cell.shadow_std_db", num(e.geometry.shadowing_std_db));
  put("cell.ref_power_db", num(e.geometry.ref_rx_power_db));
  os << "# tx_power_linear = " << num(p.tx_power_per_subcarrier) << '\n';
  put("users.min_rate_bps", num(e.min_rate));
  put("users.outage_tolerance", num(e.outage_tolerance));
  put("ster.quad_nodes", std::to_string(e.ster.quad_nodes));
  put("ster.quad_rel_tol", num(e.ster.quad_rel_tol));
  put("ster.rho_lo", num(e.ster.rho_bracket_lo));
  put("ster.rho_expand", num(e.ster.rho_expand_factor));
  put("ster.rho_rel_tol", num(e.ster.rho_rel_tol));
  put("ster.rho_max", num(e.ster.rho_max));
  put("solver.mode", e.mode == AllocationMode::full ? "full" : "reduced");
  put("solver.delta", num(e.solver.delta));
  put("solver.objective_rel_tol", num(e.solver.objective_rel_tol));
  put("solver.stall_window", std::to_string(e.solver.stall_window));
  put("solver.cap_factor", num(e.solver.cap_factor));
  put("solver.center_tol", num(e.solver.center_tol));
  put("solver.row_cap_factor", std::to_string(e.solver.row_cap_factor));
  put("exp.overhead_fraction", num(e.overhead_fraction));
  put("exp.eval_slots", std::to_string(e.eval_slots));
  put("exp.corr_eval_slots", std::to_string(e.corr_eval_slots));
  put("exp.fast_baseline", e.fast_baseline ? "true" : "false");
  put("corr.taps", std::to_string(e.delay_profile.taps));
  put("corr.tap_spacing_ns", num(e.delay_profile.tap_spacing * 1e9));
  put("corr.rms_delay_ns", num(e.delay_profile.rms_delay * 1e9));
  return os.str();
}

void write_resolved_config(const RunConfig& cfg) {
  std::filesystem::create_directories(cfg.out_dir);
  std::ofstream out(cfg.out_dir / "config.resolved");
  if (!out) throw ConfigError("", "cannot write " + (cfg.out_dir / "config.resolved").string());
  out << resolved_config(cfg);
}

}  // namespace ccofdma
