#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "zpdc/correlation.hpp"
#include "zpdc/crystal.hpp"
#include "zpdc/detection.hpp"
#include "zpdc/mode_grid.hpp"

namespace zpdc {

enum class CoincidenceEngine { Gaussian, Direct, Clipped };

const char* engine_label(CoincidenceEngine e);

struct AnglePair {
  double phi1 = 0.0;
  double phi2 = 0.0;
};

struct ScanPoint {
  AnglePair angles;
  double rate = 0.0;        // scan observable: coincidence excess over accidentals
  double stderr = 0.0;      // 0 for the gaussian engine
  double raw = 0.0;         // plain mean of response products (MC engines)
  double accidental = 0.0;  // product of singles means
  double fitted = 0.0;
  double residual = 0.0;
};

struct SinSqFit {
  double amplitude = 0.0;  // K in offset + K sin^2(phi1 + phi2)
  double offset = 0.0;
  double visibility = 0.0;  // (max - min) / (max + min) of the fitted curve
  double max_relative_residual = 0.0;     // max |residual| / K
  double max_residual_over_stderr = 0.0;  // MC engines only
};

struct AngleScan {
  std::vector<ScanPoint> points;
  SinSqFit fit;
};

struct BellReport {
  double s_chsh = 0.0;
  double s_stderr = 0.0;
  double homogeneous_ch = 0.0;
  double genuine_ch = 0.0;
  double genuine_stderr = 0.0;
  bool homogeneous_violated = false;
  bool genuine_violated = false;
  double efficiency = 1.0;
  double dark_singles_1 = 0.0;  // clipped-minus-standard singles, detector 1
  double dark_singles_2 = 0.0;
};

struct LhvCheck {
  double identity_discrepancy = 0.0;  // joint clipped rate vs product mean; 0 by construction
  double shuffled_excess = 0.0;       // coincidence excess after realignment; ~0
  double shuffled_stderr = 0.0;
};

struct HarnessOptions {
  double distance = 10.0;
  double time_step = 5.0;
  int window_samples = 214;
  double tau = 0.0;  // detector-2 window offset
  long realizations = 100000;
  std::uint64_t seed = 0;
  long block = 4096;
  int workers = 1;
};

/// Polarizer sweeps and inequality arithmetic over one shared ensemble.
///
/// Monte Carlo engines (Direct, Clipped) report scan and correlator rates as
/// the coincidence excess over accidentals, cov(S1,S2), estimated with a
/// vacuum control variate: the same realizations are pushed through the
/// detectors with the coupling off and the (zero-mean) covariance of those
/// control responses is subtracted. Raw mean-of-product rates and the
/// accidental floor stay available per point, and the genuine Clauser-Horne
/// test uses the raw absolute rates only.
class BellHarness {
public:
  BellHarness(ModeGrid grid, CrystalParams params, KernelParams kernel, HarnessOptions options);

  AngleScan coincidence_scan(std::span<const AnglePair> angles, CoincidenceEngine engine);

  /// Correlators E(x,y) = [P(x,y) + P(xp,yp) - P(x,yp) - P(xp,y)] / (sum of
  /// the four), with xp = x + pi/2; S = |E(a,b) - E(a,b') + E(a',b) + E(a',b')|.
  BellReport chsh(double a, double ap, double b, double bp, CoincidenceEngine engine);

  /// Genuine Clauser-Horne from absolute per-window rates scaled by eta;
  /// homogeneous variant from coincidence measurements only (open-port rates
  /// stand in for removed polarizers). Violation flags are value > 0.
  BellReport clauser_horne(double a, double ap, double b, double bp, CoincidenceEngine engine,
                           double eta);

  LhvCheck lhv_decomposition_check(double phi1, double phi2);

  /// Per-setting pieces, exposed for tests and reports.
  struct PairRates {
    double raw = 0.0;
    double accidental = 0.0;
    double corrected = 0.0;
    double stderr = 0.0;
  };
  PairRates mc_pair_rates(std::optional<double> phi1, std::optional<double> phi2, bool clipped);
  double gaussian_rate(std::optional<double> phi1, std::optional<double> phi2);
  RateReport singles(int detector, std::optional<double> angle, bool clipped);

  const HarnessOptions& options() const { return options_; }
  const AnalyticCorrelator& analytic() const { return analytic_; }

private:
  struct ResponseTable {
    std::vector<std::optional<double>> settings;
    Eigen::MatrixXd standard, clipped;        // R x K, transformed ensemble
    Eigen::MatrixXd vac_standard, vac_clipped;  // R x K, vacuum controls
  };

  int ensure_setting(int detector, std::optional<double> angle);
  void compute_pending();
  Eigen::VectorXd column(int detector, std::optional<double> angle, bool clipped,
                         bool control);

  ModeGrid grid_;
  CrystalParams params_;
  KernelParams kernel_;
  HarnessOptions options_;
  AnalyticCorrelator analytic_;
  TransformMap map_;
  ResponseTable det_[2];
  std::vector<std::pair<int, int>> pending_;  // (detector, column)
};

}  // namespace zpdc
