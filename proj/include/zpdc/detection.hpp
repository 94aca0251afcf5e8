#pragma once

#include <Eigen/Dense>

#include "zpdc/correlation.hpp"
#include "zpdc/crystal.hpp"
#include "zpdc/field.hpp"
#include "zpdc/mode_grid.hpp"

namespace zpdc {

/// One detector: a probe, its analytic vacuum reference level, the response
/// rule (standard vs clipped), and a linear efficiency.
struct DetectorConfig {
  FieldProbe probe;
  double vacuum_intensity = 0.0;
  bool clip = false;
  double efficiency = 1.0;
};

/// Builds a detector with the vacuum reference evaluated for the probe.
DetectorConfig make_detector(const ModeGrid& grid, FieldProbe probe, bool clip);

/// Pointwise squared modulus.
Eigen::MatrixXd intensity(const Eigen::MatrixXcd& field);

/// Mean zeropoint intensity behind the probe's polarizer: the mode sum
/// sum_k w_k^2 / 2 weighted by cos^2 / sin^2 of the polarizer angle across
/// the beam's two sectors (both at weight 1 for an open port). Independent
/// of time and of the crystal coupling.
double vacuum_reference(const ModeGrid& grid, const FieldProbe& probe);

struct RateReport {
  double rate = 0.0;
  double stderr = 0.0;
  double negative_window_fraction = 0.0;
  double dark_excess = 0.0;  // clipped mean minus standard mean
  double accidental = 0.0;   // joint only: product of the two singles means
  double corrected = 0.0;    // joint only: rate minus accidental
  long n_samples = 0;
};

/// Per-realization window responses of one detector:
/// standard_r = (1/T) integral (I_r - I0) dt over the probe window (Riemann
/// sum on the probe grid), clipped_r = max(standard_r, 0).
struct WindowResponses {
  Eigen::VectorXd standard;
  Eigen::VectorXd clipped;
};

WindowResponses window_responses(const Eigen::MatrixXcd& amplitudes, const ModeGrid& grid,
                                 const DetectorConfig& det, double time_offset = 0.0);

/// Singles rate. rate follows the detector's response rule; the report also
/// carries the negative-window fraction and the clipped-minus-standard
/// excess (the dark contribution), which is nonnegative realization by
/// realization.
RateReport singles_rate(const OutputEnsemble& out, const ModeGrid& grid,
                        const DetectorConfig& det);

/// Joint rate: the mean over realizations of the product of the two local
/// window responses, detector 2 offset by tau. `accidental` is the product
/// of the two singles means (what statistically independent detectors would
/// give) and `corrected` the coincidence excess over it.
RateReport joint_rate_direct(const OutputEnsemble& out, const ModeGrid& grid,
                             const DetectorConfig& det1, const DetectorConfig& det2,
                             double tau);

/// Gaussian-moment coincidence rate: the polarization-summed squared pair
/// correlations integrated over the two windows,
///   (1/N^2) sum_{i,j} sum_{ll'} |<F_l(r1,t_i) F_l'(r2,s_j+tau)>|^2,
/// evaluated from the analytic engine. Deterministic.
double joint_rate_gaussian(const AnalyticCorrelator& analytic, const DetectorConfig& det1,
                           const DetectorConfig& det2, double tau);

}  // namespace zpdc
