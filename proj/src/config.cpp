#include "zpdc/config.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>

#include "zpdc/csv.hpp"

namespace zpdc {

namespace {

struct Key {
  const char* name;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

double to_double(const std::string& v, const std::string& key) {
  errno = 0;
  char* end = nullptr;
  const double d = std::strtod(v.c_str(), &end);
  if (errno != 0 || end == v.c_str() || *end != '\0' || !std::isfinite(d))
    throw std::runtime_error("config key '" + key + "': not a finite number: '" + v + "'");
  return d;
}

long to_long(const std::string& v, const std::string& key) {
  errno = 0;
  char* end = nullptr;
  const long l = std::strtol(v.c_str(), &end, 10);
  if (errno != 0 || end == v.c_str() || *end != '\0')
    throw std::runtime_error("config key '" + key + "': not an integer: '" + v + "'");
  return l;
}

std::uint64_t to_u64(const std::string& v, const std::string& key) {
  errno = 0;
  char* end = nullptr;
  const unsigned long long u = std::strtoull(v.c_str(), &end, 10);
  if (errno != 0 || end == v.c_str() || *end != '\0')
    throw std::runtime_error("config key '" + key + "': not an unsigned integer: '" + v + "'");
  return u;
}

#define DOUBLE_KEY(name, field)                                              \
  Key{name, [](RunConfig& c, const std::string& v) { c.field = to_double(v, name); }, \
      [](const RunConfig& c) { return format_double(c.field); }}
#define LONG_KEY(name, field)                                                \
  Key{name, [](RunConfig& c, const std::string& v) { c.field = to_long(v, name); },   \
      [](const RunConfig& c) { return std::to_string(c.field); }}
#define INT_KEY(name, field)                                                 \
  Key{name,                                                                  \
      [](RunConfig& c, const std::string& v) {                               \
        c.field = static_cast<int>(to_long(v, name));                        \
      },                                                                     \
      [](const RunConfig& c) { return std::to_string(c.field); }}
#define STRING_KEY(name, field)                                              \
  Key{name, [](RunConfig& c, const std::string& v) { c.field = v; },         \
      [](const RunConfig& c) { return c.field; }}

const std::vector<Key>& key_table() {
  static const std::vector<Key> keys = {
      INT_KEY("grid.pairs_per_sector", grid_pairs),
      DOUBLE_KEY("grid.pump_frequency", grid_pump),
      DOUBLE_KEY("grid.e_center", grid_e_center),
      DOUBLE_KEY("grid.o_center", grid_o_center),
      DOUBLE_KEY("grid.bandwidth", grid_bandwidth),
      STRING_KEY("grid.kernel", grid_kernel),
      DOUBLE_KEY("grid.kernel_sigma", grid_kernel_sigma),
      DOUBLE_KEY("crystal.g", crystal_g),
      DOUBLE_KEY("crystal.pump_re", crystal_pump_re),
      DOUBLE_KEY("crystal.pump_im", crystal_pump_im),
      DOUBLE_KEY("crystal.transit_time", crystal_transit),
      DOUBLE_KEY("crystal.ceiling", crystal_ceiling),
      LONG_KEY("ensemble.realizations", ensemble_realizations),
      Key{"ensemble.seed",
          [](RunConfig& c, const std::string& v) { c.ensemble_seed = to_u64(v, "ensemble.seed"); },
          [](const RunConfig& c) { return std::to_string(c.ensemble_seed); }},
      LONG_KEY("ensemble.block", ensemble_block),
      INT_KEY("workers", workers),
      DOUBLE_KEY("probe.distance", probe_distance),
      DOUBLE_KEY("probe.step", probe_step),
      INT_KEY("probe.samples", probe_samples),
      DOUBLE_KEY("probe.tau", probe_tau),
      DOUBLE_KEY("detector.efficiency", detector_efficiency),
      INT_KEY("correlate.points", correlate_points),
      DOUBLE_KEY("correlate.tau_step", correlate_tau_step),
      INT_KEY("correlate.dump_fields", correlate_dump_fields),
      STRING_KEY("detect.window_sweep", detect_window_sweep),
      STRING_KEY("bell.engine", bell_engine),
      INT_KEY("bell.angles_per_side", bell_angles_per_side),
      DOUBLE_KEY("bell.chsh_a", bell_chsh_a),
      DOUBLE_KEY("bell.chsh_a_prime", bell_chsh_a_prime),
      DOUBLE_KEY("bell.chsh_b", bell_chsh_b),
      DOUBLE_KEY("bell.chsh_b_prime", bell_chsh_b_prime),
      STRING_KEY("bell.eta_values", bell_eta_values),
      STRING_KEY("scan.parameter", scan_parameter),
      STRING_KEY("scan.values", scan_values),
  };
  return keys;
}

#undef DOUBLE_KEY
#undef LONG_KEY
#undef INT_KEY
#undef STRING_KEY

const Key& find_key(const std::string& name) {
  for (const auto& k : key_table())
    if (name == k.name) return k;
  throw std::runtime_error("unknown config key '" + name + "'");
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
  RunConfig config;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config line " + std::to_string(lineno) +
                               ": expected key = value");
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    find_key(key).set(config, value);
  }
  return config;
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

void apply_override(RunConfig& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos)
    throw std::runtime_error("override must be key=value: '" + assignment + "'");
  find_key(trim(assignment.substr(0, eq))).set(config, trim(assignment.substr(eq + 1)));
}

std::vector<double> parse_double_list(const std::string& csv, const std::string& key) {
  std::vector<double> values;
  std::istringstream in(csv);
  std::string item;
  while (std::getline(in, item, ',')) {
    const std::string t = trim(item);
    if (!t.empty()) values.push_back(to_double(t, key));
  }
  if (values.empty()) throw std::runtime_error("config key '" + key + "': empty list");
  return values;
}

std::vector<int> parse_int_list(const std::string& csv, const std::string& key) {
  std::vector<int> values;
  for (double v : parse_double_list(csv, key)) values.push_back(static_cast<int>(v));
  return values;
}

std::vector<Diagnostic> validate(const RunConfig& c) {
  std::vector<Diagnostic> out;
  const auto error = [&](const std::string& key, const std::string& msg) {
    out.push_back({Diagnostic::Severity::Error, key, msg});
  };
  const auto warning = [&](const std::string& key, const std::string& msg) {
    out.push_back({Diagnostic::Severity::Warning, key, msg});
  };

  if (c.grid_pairs < 1) error("grid.pairs_per_sector", "must be at least 1");
  if (!(c.grid_pump > 0)) error("grid.pump_frequency", "must be positive");
  if (!(c.grid_e_center > 0)) error("grid.e_center", "must be positive");
  if (!(c.grid_o_center > 0)) error("grid.o_center", "must be positive");
  if (c.grid_e_center + c.grid_o_center != c.grid_pump)
    error("grid.e_center",
          "matching condition violated: e_center + o_center must equal pump_frequency");
  if (c.grid_bandwidth < 0 ||
      c.grid_bandwidth >= std::min(c.grid_e_center, c.grid_o_center))
    error("grid.bandwidth", "must be nonnegative and below both sector centers");
  if (c.grid_kernel != "exact" && c.grid_kernel != "gaussian")
    error("grid.kernel", "must be 'exact' or 'gaussian'");
  if (c.grid_kernel == "gaussian" && !(c.grid_kernel_sigma > 0))
    error("grid.kernel_sigma", "gaussian kernel requires a positive sigma");

  if (c.crystal_g < 0) error("crystal.g", "must be nonnegative");
  if (!(c.crystal_transit > 0)) error("crystal.transit_time", "must be positive");
  if (c.crystal_ceiling > 0.3)
    error("crystal.ceiling", "perturbative ceiling cannot exceed 0.3");
  const double strength =
      c.crystal_g * std::hypot(c.crystal_pump_re, c.crystal_pump_im);
  if (strength > c.crystal_ceiling)
    warning("crystal.g", "g|V| = " + format_double(strength) +
                             " exceeds the perturbative ceiling " +
                             format_double(c.crystal_ceiling) +
                             "; dropped third-order terms are no longer negligible");

  if (c.ensemble_realizations < 2) error("ensemble.realizations", "need at least 2");
  if (c.ensemble_block < 1) error("ensemble.block", "must be positive");
  if (c.workers < 1) error("workers", "must be at least 1");

  if (c.probe_distance < 0) error("probe.distance", "must be nonnegative");
  if (!(c.probe_step > 0)) error("probe.step", "must be positive");
  if (c.probe_samples < 1) error("probe.samples", "need at least one sample");
  if (!(c.detector_efficiency > 0) || c.detector_efficiency > 1)
    error("detector.efficiency", "must lie in (0, 1]");

  if (c.correlate_points < 1) error("correlate.points", "need at least one point");
  if (!(c.correlate_tau_step > 0)) error("correlate.tau_step", "must be positive");

  if (c.bell_engine != "gaussian" && c.bell_engine != "direct" && c.bell_engine != "clipped")
    error("bell.engine", "must be 'gaussian', 'direct' or 'clipped'");
  if (c.bell_angles_per_side < 2) error("bell.angles_per_side", "need at least 2");

  if (c.scan_parameter != "tau" && c.scan_parameter != "window" && c.scan_parameter != "angle")
    error("scan.parameter", "must be 'tau', 'window' or 'angle'");
  try {
    parse_int_list(c.detect_window_sweep, "detect.window_sweep");
    parse_double_list(c.bell_eta_values, "bell.eta_values");
    parse_double_list(c.scan_values, "scan.values");
  } catch (const std::exception& e) {
    error("lists", e.what());
  }
  return out;
}

std::string resolved_config_text(const RunConfig& config) {
  std::ostringstream out;
  for (const auto& k : key_table()) out << k.name << " = " << k.get(config) << "\n";
  return out.str();
}

}  // namespace zpdc
