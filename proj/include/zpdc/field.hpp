#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "zpdc/mode_grid.hpp"

namespace zpdc {

/// Space-time probe: a detector position on one beam axis and a uniform
/// grid of sample times. `polarizer` empty means an open (unpolarized) port.
struct FieldProbe {
  int beam = 1;           // 1 or 2
  double distance = 0.0;  // from the crystal center, c = 1
  double start = 0.0;
  double step = 1.0;
  int samples = 1;
  std::optional<double> polarizer;  // projection angle from the e axis
};

std::vector<double> probe_times(const FieldProbe& probe);

/// Sector content of a beam: beam 1 carries (E, OPrime), beam 2 (EPrime, O).
std::pair<Sector, Sector> beam_sectors(int beam);

/// Slowly-varying analytic signal for one sector at distance r along the
/// beam axis, per realization (rows) over the sample times (columns):
///   F(r,t) = i sum_k w_k a_k e^{i w_k r} e^{i (w_sec - w_k) t}.
Eigen::MatrixXcd assemble_field(const Eigen::MatrixXcd& amplitudes, const ModeGrid& grid,
                                Sector sector, double distance,
                                std::span<const double> times);

/// Free propagation over `distance`: a delayed, phase-rotated copy,
///   out(t) = in(t - distance) e^{i w_beam distance}.
/// The delay must land on the sample grid (no interpolation); the first
/// delay-steps samples, for which no input exists, are zero. Throws when the
/// delay is not grid-representable.
Eigen::MatrixXcd propagate(const Eigen::MatrixXcd& series, double distance,
                           double beam_frequency, double step);

/// Two-component beam field at a probe; e_axis is the extraordinary-side
/// component, o_axis the ordinary-side one.
struct BeamField {
  Eigen::MatrixXcd e_axis;
  Eigen::MatrixXcd o_axis;
};

BeamField assemble_beam(const Eigen::MatrixXcd& amplitudes, const ModeGrid& grid, int beam,
                        double distance, std::span<const double> times);

/// Scalar field behind a polarizer at `angle` from the e axis:
/// cos(angle) e_axis + sin(angle) o_axis.
Eigen::MatrixXcd polarize(const BeamField& field, double angle);

}  // namespace zpdc
