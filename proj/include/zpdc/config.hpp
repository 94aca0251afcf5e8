#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace zpdc {

/// Resolved run parameters. Defaults reproduce the stock demonstration
/// setup; every key can be set from the config file or --set overrides.
struct RunConfig {
  // grid.*
  int grid_pairs = 8;
  double grid_pump = 2.0;
  double grid_e_center = 1.0;
  double grid_o_center = 1.0;
  double grid_bandwidth = 0.2;
  std::string grid_kernel = "exact";  // exact | gaussian
  double grid_kernel_sigma = 0.0;

  // crystal.*
  double crystal_g = 0.05;
  double crystal_pump_re = 1.0;
  double crystal_pump_im = 0.0;
  double crystal_transit = 1.0;
  double crystal_ceiling = 0.1;

  // ensemble.*
  long ensemble_realizations = 100000;
  std::uint64_t ensemble_seed = 20260810;
  long ensemble_block = 4096;
  int workers = 1;

  // probe.*
  double probe_distance = 10.0;
  double probe_step = 5.0;
  int probe_samples = 214;
  double probe_tau = 0.0;

  // detector.*
  double detector_efficiency = 1.0;

  // correlate.*
  int correlate_points = 16;
  double correlate_tau_step = 2.0;
  int correlate_dump_fields = 0;  // write per-realization field samples (small R only)

  // detect.*
  std::string detect_window_sweep = "8,12,20,42";

  // bell.*
  std::string bell_engine = "clipped";  // gaussian | direct | clipped
  int bell_angles_per_side = 6;
  double bell_chsh_a = 0.0;
  double bell_chsh_a_prime = 0.78539816339744831;   // pi/4
  double bell_chsh_b = 1.1780972450961724;          // 3 pi/8
  double bell_chsh_b_prime = 0.39269908169872414;   // pi/8
  std::string bell_eta_values = "0.3,0.6,1.0";

  // scan.*
  std::string scan_parameter = "window";  // tau | window | angle
  std::string scan_values = "8,12,20,42";
};

struct Diagnostic {
  enum class Severity { Error, Warning };
  Severity severity = Severity::Error;
  std::string key;
  std::string message;
};

/// Parses the flat key = value format. Lines starting with '#' and blank
/// lines are ignored. Unknown keys and malformed values throw
/// std::runtime_error naming the offending key.
RunConfig parse_config_text(const std::string& text);
RunConfig load_config_file(const std::string& path);

/// Applies one "key=value" override; throws on unknown key or bad value.
void apply_override(RunConfig& config, const std::string& assignment);

/// Full validation without computation. Empty list means runnable
/// (warnings do not block).
std::vector<Diagnostic> validate(const RunConfig& config);

/// The resolved configuration in config-file syntax (re-runnable as-is).
std::string resolved_config_text(const RunConfig& config);

std::vector<double> parse_double_list(const std::string& csv, const std::string& key);
std::vector<int> parse_int_list(const std::string& csv, const std::string& key);

}  // namespace zpdc
