#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <span>

#include "zpdc/mode_grid.hpp"

namespace zpdc {

/// Zeropoint amplitudes: one row per realization, one column per grid mode.
/// Each entry is complex Gaussian with mean 0 and <|alpha|^2> = 1/2, i.e.
/// real and imaginary parts independently N(0, 1/4). Immutable by convention
/// once sampled.
struct VacuumEnsemble {
  Eigen::MatrixXcd amplitudes;
  std::uint64_t seed = 0;
  int grid_modes = 0;
};

/// Draws the ensemble. Each realization r is generated from
/// realization_seed(seed, r), so disjoint realization ranges can be produced
/// in any order (or in parallel) with bit-identical results.
VacuumEnsemble sample_vacuum(const ModeGrid& grid, long n_realizations, std::uint64_t seed);

/// One realization row, identical to row `index` of a batch run.
Eigen::VectorXcd sample_vacuum_realization(const ModeGrid& grid, std::uint64_t seed, long index);

/// Multiplies mode column m by exp(-i phases[m]). The vacuum distribution is
/// invariant under this map.
VacuumEnsemble phase_shift_vacuum(const VacuumEnsemble& ensemble, std::span<const double> phases);

/// Binary dump: 32-byte header (magic "ZPDCVAC1", u64 realizations, u64 modes,
/// u64 seed), then row-major float64 little-endian interleaved re/im.
void write_ensemble(const VacuumEnsemble& ensemble, std::ostream& os);
VacuumEnsemble read_ensemble(std::istream& is);

}  // namespace zpdc
