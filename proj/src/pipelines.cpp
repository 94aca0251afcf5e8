#include "zpdc/pipelines.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "zpdc/bell.hpp"
#include "zpdc/correlation.hpp"
#include "zpdc/csv.hpp"
#include "zpdc/detection.hpp"
#include "zpdc/field.hpp"
#include "zpdc/vacuum.hpp"

namespace zpdc {

ModeGrid grid_from_config(const RunConfig& c) {
  return build_mode_grid(c.grid_pairs, c.grid_pump, c.grid_bandwidth, c.grid_e_center,
                         c.grid_o_center);
}

CrystalParams crystal_from_config(const RunConfig& c) {
  CrystalParams params;
  params.coupling = c.crystal_g;
  params.pump = {c.crystal_pump_re, c.crystal_pump_im};
  params.transit_time = c.crystal_transit;
  params.pump_frequency = c.grid_pump;
  params.perturbative_ceiling = c.crystal_ceiling;
  return params;
}

KernelParams kernel_from_config(const RunConfig& c) {
  KernelParams kernel;
  kernel.kind = c.grid_kernel == "gaussian" ? KernelParams::Kind::Gaussian
                                            : KernelParams::Kind::Exact;
  kernel.sigma = c.grid_kernel_sigma;
  return kernel;
}

std::string manifest_text(const RunConfig& config) {
  std::ostringstream out;
  out << "# run manifest\n";
  out << "version = " << kVersion << "\n";
  out << resolved_config_text(config);
  return out.str();
}

namespace {

void require_valid(const RunConfig& config) {
  for (const auto& d : validate(config))
    if (d.severity == Diagnostic::Severity::Error)
      throw std::runtime_error("invalid config: " + d.key + ": " + d.message);
}

HarnessOptions harness_options(const RunConfig& c) {
  HarnessOptions options;
  options.distance = c.probe_distance;
  options.time_step = c.probe_step;
  options.window_samples = c.probe_samples;
  options.tau = c.probe_tau;
  options.realizations = c.ensemble_realizations;
  options.seed = c.ensemble_seed;
  options.block = c.ensemble_block;
  options.workers = c.workers;
  return options;
}

FieldProbe detector_probe(const RunConfig& c, int beam, std::optional<double> angle,
                          int samples_override = 0) {
  FieldProbe probe;
  probe.beam = beam;
  probe.distance = c.probe_distance;
  probe.start = 0.0;
  probe.step = c.probe_step;
  probe.samples = samples_override > 0 ? samples_override : c.probe_samples;
  probe.polarizer = angle;
  return probe;
}

}  // namespace

PipelineResult run_dump_grid(const RunConfig& config) {
  require_valid(config);
  PipelineResult result;
  const ModeGrid grid = grid_from_config(config);
  std::ostringstream grid_csv;
  write_grid_csv(grid, grid_csv);
  result.files["grid.csv"] = grid_csv.str();

  const TransformMap map =
      build_transform_map(grid, crystal_from_config(config), kernel_from_config(config));
  std::ostringstream map_csv;
  write_map_csv(map, map_csv);
  result.files["map.csv"] = map_csv.str();
  result.messages.push_back("grid: " + std::to_string(grid.mode_count()) + " modes");
  return result;
}

PipelineResult run_correlate(const RunConfig& config) {
  require_valid(config);
  PipelineResult result;
  const ModeGrid grid = grid_from_config(config);
  const CrystalParams params = crystal_from_config(config);
  const KernelParams kernel = kernel_from_config(config);
  const AnalyticCorrelator analytic(grid, params, kernel);

  const VacuumEnsemble vac = sample_vacuum(grid, config.ensemble_realizations,
                                           config.ensemble_seed);
  const OutputEnsemble out = transform(vac, params, grid, kernel);

  const double t0 = 0.0;
  const std::vector<double> base{t0};
  const Eigen::VectorXcd field_e =
      assemble_field(out.amplitudes, grid, Sector::E, 0.0, base).col(0);

  std::ostringstream scan_csv;
  CsvWriter csv(scan_csv, {"tau", "mc_re", "mc_im", "stderr", "analytic_re", "analytic_im"});
  for (int i = 0; i < config.correlate_points; ++i) {
    const double tau = i * config.correlate_tau_step;
    const std::vector<double> shifted{t0 + tau};
    const Eigen::VectorXcd field_o =
        assemble_field(out.amplitudes, grid, Sector::O, 0.0, shifted).col(0);
    const CorrelationEstimate mc = mc_correlation(field_e, field_o, false);
    const std::complex<double> exact = analytic.cross(tau);
    csv.field(tau);
    csv.field(mc.value.real());
    csv.field(mc.value.imag());
    csv.field(mc.stderr);
    csv.field(exact.real());
    csv.field(exact.imag());
    csv.end_row();
  }
  result.files["correlate.csv"] = scan_csv.str();

  // The identities that must vanish: same-sector pair products, the
  // cross-sector combinations, and the e/o hermitian product.
  const double tau_mid = config.correlate_tau_step;
  const std::vector<double> mid{t0 + tau_mid};
  const Eigen::VectorXcd e_mid = assemble_field(out.amplitudes, grid, Sector::E, 0.0, mid).col(0);
  const Eigen::VectorXcd o_mid = assemble_field(out.amplitudes, grid, Sector::O, 0.0, mid).col(0);
  const Eigen::VectorXcd ep_mid =
      assemble_field(out.amplitudes, grid, Sector::EPrime, 0.0, mid).col(0);
  const Eigen::VectorXcd op_mid =
      assemble_field(out.amplitudes, grid, Sector::OPrime, 0.0, mid).col(0);

  std::ostringstream zero_csv;
  CsvWriter zcsv(zero_csv, {"name", "re", "im", "stderr"});
  const auto emit = [&](const std::string& name, const CorrelationEstimate& est) {
    zcsv.field(name);
    zcsv.field(est.value.real());
    zcsv.field(est.value.imag());
    zcsv.field(est.stderr);
    zcsv.end_row();
  };
  emit("e_e_pair", mc_correlation(field_e, e_mid, false));
  emit("e_o_hermitian", mc_correlation(field_e, o_mid, true));
  emit("e_eprime_pair", mc_correlation(field_e, ep_mid, false));
  emit("e_oprime_pair", mc_correlation(field_e, op_mid, false));
  result.files["zero_identities.csv"] = zero_csv.str();

  if (config.correlate_dump_fields) {
    if (config.ensemble_realizations > 4096)
      throw std::runtime_error(
          "correlate.dump_fields is a debugging aid; rerun with ensemble.realizations <= 4096");
    FieldProbe probe = detector_probe(config, 1, std::nullopt);
    const auto times = probe_times(probe);
    const Eigen::MatrixXcd field =
        assemble_field(out.amplitudes, grid, Sector::E, probe.distance, times);
    std::ostringstream field_csv;
    CsvWriter fcsv(field_csv, {"realization", "t", "re", "im"});
    for (Eigen::Index r = 0; r < field.rows(); ++r)
      for (Eigen::Index i = 0; i < field.cols(); ++i) {
        fcsv.field(static_cast<long>(r));
        fcsv.field(times[static_cast<std::size_t>(i)]);
        fcsv.field(field(r, i).real());
        fcsv.field(field(r, i).imag());
        fcsv.end_row();
      }
    result.files["fields.csv"] = field_csv.str();
  }

  result.messages.push_back("correlate: " + std::to_string(config.correlate_points) +
                            " tau points, R = " + std::to_string(config.ensemble_realizations));
  return result;
}

PipelineResult run_detect(const RunConfig& config) {
  require_valid(config);
  PipelineResult result;
  const ModeGrid grid = grid_from_config(config);
  const CrystalParams params = crystal_from_config(config);
  const KernelParams kernel = kernel_from_config(config);
  const AnalyticCorrelator analytic(grid, params, kernel);

  const VacuumEnsemble vac = sample_vacuum(grid, config.ensemble_realizations,
                                           config.ensemble_seed);
  const OutputEnsemble out = transform(vac, params, grid, kernel);

  // Window sweep of the detector-1 singles rates.
  std::ostringstream sweep_csv;
  CsvWriter csv(sweep_csv,
                {"parameter", "standard_rate", "clipped_rate", "stderr", "negative_fraction"});
  for (int samples : parse_int_list(config.detect_window_sweep, "detect.window_sweep")) {
    DetectorConfig det =
        make_detector(grid, detector_probe(config, 1, 0.0, samples), false);
    det.efficiency = config.detector_efficiency;
    DetectorConfig det_clip = det;
    det_clip.clip = true;
    const RateReport standard = singles_rate(out, grid, det);
    const RateReport clipped = singles_rate(out, grid, det_clip);
    csv.field(static_cast<double>(samples) * config.probe_step);
    csv.field(standard.rate);
    csv.field(clipped.rate);
    csv.field(standard.stderr);
    csv.field(standard.negative_window_fraction);
    csv.end_row();
  }
  result.files["detect.csv"] = sweep_csv.str();

  // Direct vs factorized joint rates over a tau scan.
  std::ostringstream joint_csv;
  CsvWriter jcsv(joint_csv, {"tau", "direct_standard", "direct_stderr", "gaussian"});
  DetectorConfig det1 = make_detector(grid, detector_probe(config, 1, 0.0), false);
  DetectorConfig det2 = make_detector(grid, detector_probe(config, 2, 0.0), false);
  det1.efficiency = det2.efficiency = config.detector_efficiency;
  for (int i = 0; i < 8; ++i) {
    const double tau = i * config.correlate_tau_step;
    const RateReport direct = joint_rate_direct(out, grid, det1, det2, tau);
    jcsv.field(tau);
    jcsv.field(direct.rate);
    jcsv.field(direct.stderr);
    jcsv.field(joint_rate_gaussian(analytic, det1, det2, tau));
    jcsv.end_row();
  }
  result.files["joint.csv"] = joint_csv.str();
  result.messages.push_back("detect: window sweep " + config.detect_window_sweep);
  return result;
}

PipelineResult run_bell(const RunConfig& config) {
  require_valid(config);
  PipelineResult result;
  BellHarness harness(grid_from_config(config), crystal_from_config(config),
                      kernel_from_config(config), harness_options(config));

  const CoincidenceEngine engine = config.bell_engine == "gaussian"
                                       ? CoincidenceEngine::Gaussian
                                   : config.bell_engine == "direct" ? CoincidenceEngine::Direct
                                                                    : CoincidenceEngine::Clipped;

  std::vector<AnglePair> angles;
  const int per_side = config.bell_angles_per_side;
  const double step = std::numbers::pi / per_side;
  for (int i = 0; i < per_side; ++i)
    for (int j = 0; j < per_side; ++j) angles.push_back({i * step, j * step});

  const AngleScan scan = harness.coincidence_scan(angles, engine);
  std::ostringstream scan_csv;
  CsvWriter csv(scan_csv, {"phi1", "phi2", "rate", "stderr", "fit", "residual"});
  for (const auto& p : scan.points) {
    csv.field(p.angles.phi1);
    csv.field(p.angles.phi2);
    csv.field(p.rate);
    csv.field(p.stderr);
    csv.field(p.fitted);
    csv.field(p.residual);
    csv.end_row();
  }
  result.files["bell_scan.csv"] = scan_csv.str();

  const BellReport chsh = harness.chsh(config.bell_chsh_a, config.bell_chsh_a_prime,
                                       config.bell_chsh_b, config.bell_chsh_b_prime, engine);

  std::ostringstream report;
  report << "engine = " << engine_label(engine) << "\n";
  report << "realizations = " << config.ensemble_realizations << "\n";
  report << "seed = " << config.ensemble_seed << "\n";
  report << "fit.amplitude = " << format_double(scan.fit.amplitude) << "\n";
  report << "fit.offset = " << format_double(scan.fit.offset) << "\n";
  report << "fit.visibility = " << format_double(scan.fit.visibility) << "\n";
  report << "fit.max_relative_residual = " << format_double(scan.fit.max_relative_residual)
         << "\n";
  report << "fit.max_residual_over_stderr = "
         << format_double(scan.fit.max_residual_over_stderr) << "\n";
  report << "chsh.angles = " << format_double(config.bell_chsh_a) << ","
         << format_double(config.bell_chsh_a_prime) << "," << format_double(config.bell_chsh_b)
         << "," << format_double(config.bell_chsh_b_prime) << "\n";
  report << "chsh.s = " << format_double(chsh.s_chsh) << "\n";
  report << "chsh.s_stderr = " << format_double(chsh.s_stderr) << "\n";

  for (double eta : parse_double_list(config.bell_eta_values, "bell.eta_values")) {
    const BellReport ch = harness.clauser_horne(config.bell_chsh_a, config.bell_chsh_a_prime,
                                                config.bell_chsh_b, config.bell_chsh_b_prime,
                                                engine, eta);
    char eta_buf[24];
    std::snprintf(eta_buf, sizeof eta_buf, "%g", eta);
    const std::string tag = std::string("ch.eta_") + eta_buf;
    report << tag << ".genuine = " << format_double(ch.genuine_ch) << "\n";
    report << tag << ".genuine_violated = " << (ch.genuine_violated ? 1 : 0) << "\n";
    report << tag << ".homogeneous = " << format_double(ch.homogeneous_ch) << "\n";
    report << tag << ".homogeneous_violated = " << (ch.homogeneous_violated ? 1 : 0) << "\n";
    report << tag << ".dark_singles_1 = " << format_double(ch.dark_singles_1) << "\n";
    report << tag << ".dark_singles_2 = " << format_double(ch.dark_singles_2) << "\n";
  }
  result.files["bell_report.txt"] = report.str();
  result.messages.push_back("bell: engine " + std::string(engine_label(engine)) +
                            ", visibility " + format_double(scan.fit.visibility));
  return result;
}

PipelineResult run_scan(const RunConfig& config) {
  require_valid(config);
  PipelineResult result;
  const ModeGrid grid = grid_from_config(config);
  const CrystalParams params = crystal_from_config(config);
  const KernelParams kernel = kernel_from_config(config);
  const VacuumEnsemble vac = sample_vacuum(grid, config.ensemble_realizations,
                                           config.ensemble_seed);
  const OutputEnsemble out = transform(vac, params, grid, kernel);
  const std::vector<double> values = parse_double_list(config.scan_values, "scan.values");

  std::ostringstream scan_csv;
  CsvWriter csv(scan_csv,
                {"parameter", "standard_rate", "clipped_rate", "stderr", "negative_fraction"});
  for (double value : values) {
    RateReport standard, clipped;
    if (config.scan_parameter == "window") {
      const int samples = std::max(1, static_cast<int>(std::lround(value)));
      DetectorConfig det = make_detector(grid, detector_probe(config, 1, 0.0, samples), false);
      DetectorConfig det_clip = det;
      det_clip.clip = true;
      standard = singles_rate(out, grid, det);
      clipped = singles_rate(out, grid, det_clip);
    } else if (config.scan_parameter == "angle") {
      DetectorConfig det = make_detector(grid, detector_probe(config, 1, value), false);
      DetectorConfig det_clip = det;
      det_clip.clip = true;
      standard = singles_rate(out, grid, det);
      clipped = singles_rate(out, grid, det_clip);
    } else {  // tau
      DetectorConfig det1 = make_detector(grid, detector_probe(config, 1, 0.0), false);
      DetectorConfig det2 = make_detector(grid, detector_probe(config, 2, 0.0), false);
      DetectorConfig det1c = det1, det2c = det2;
      det1c.clip = det2c.clip = true;
      standard = joint_rate_direct(out, grid, det1, det2, value);
      clipped = joint_rate_direct(out, grid, det1c, det2c, value);
    }
    csv.field(value);
    csv.field(standard.rate);
    csv.field(clipped.rate);
    csv.field(standard.stderr);
    csv.field(standard.negative_window_fraction);
    csv.end_row();
  }
  result.files["scan.csv"] = scan_csv.str();
  result.messages.push_back("scan: parameter " + config.scan_parameter);
  return result;
}

}  // namespace zpdc
