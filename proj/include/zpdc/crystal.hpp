#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <iosfwd>

#include "zpdc/mode_grid.hpp"
#include "zpdc/vacuum.hpp"

namespace zpdc {

struct CrystalParams {
  double coupling = 0.0;                  // g = g' * transit_time, dimensionless
  std::complex<double> pump{1.0, 0.0};    // pump amplitude V
  double transit_time = 1.0;              // crystal crossing time
  double pump_frequency = 2.0;            // must match the grid's
  double perturbative_ceiling = 0.1;      // warn above this; 0.3 is the hard cap

  double pump_strength() const { return coupling * std::abs(pump); }  // g|V|
  bool within_ceiling() const { return pump_strength() <= perturbative_ceiling; }
};

/// Precomputed single-pass crystal map. Acts on a realization row as
///   out = direct * alpha + conjugated * conj(alpha),
/// real-linear in (alpha, conj alpha). direct is I plus the second-order
/// self term; conjugated carries the first-order pair coupling.
struct TransformMap {
  Eigen::MatrixXcd direct;
  Eigen::MatrixXcd conjugated;
};

TransformMap build_transform_map(const ModeGrid& grid, const CrystalParams& params,
                                 const KernelParams& kernel = {});

/// Applies the map to realization rows (R x M in, R x M out).
Eigen::MatrixXcd apply_map(const TransformMap& map, const Eigen::MatrixXcd& rows);

struct OutputEnsemble {
  Eigen::MatrixXcd amplitudes;
  CrystalParams params;
  std::uint64_t source_seed = 0;
};

/// Transforms a vacuum ensemble. With coupling 0 the output equals the input
/// bit for bit.
OutputEnsemble transform(const VacuumEnsemble& vac, const CrystalParams& params,
                         const ModeGrid& grid, const KernelParams& kernel = {});

/// First-order coupling operator: beta over `destination` from the conjugate
/// of the opposite-sector amplitudes,
///   beta_k = sum_k' f(k,k') u[(dt/2)(w_p - w_k - w_k')] conj(a_k').
/// The g V prefactor is applied by the map, not here.
Eigen::VectorXcd pair_coupling(const Eigen::VectorXcd& opposite, const ModeGrid& grid,
                               const CrystalParams& params, const KernelParams& kernel = {},
                               Sector destination = Sector::E);

/// Second-order self operator: gamma over `destination` from same-sector
/// amplitudes via the double sum over the opposite sector,
///   gamma_k = sum_{k',k''} f(k,k') f(k',k'') u[(dt/2)(w_k' + w_k'' - w_p)]
///             u[(dt/2)(w_k'' - w_k)] a_k''.
/// The g^2 |V|^2 prefactor is applied by the map, not here.
Eigen::VectorXcd second_order_coupling(const Eigen::VectorXcd& same, const ModeGrid& grid,
                                       const CrystalParams& params,
                                       const KernelParams& kernel = {},
                                       Sector destination = Sector::E);

/// <out_k out_l> over the vacuum distribution: (A B^T + B A^T) / 2.
Eigen::MatrixXcd pair_moment(const TransformMap& map);

/// <out_k conj(out_l)>: (A A^+ + B B^+) / 2. Subtract I/2 for the excess
/// over the incoming vacuum.
Eigen::MatrixXcd hermitian_moment(const TransformMap& map);

/// CSV dump of nonzero map entries: row,col,re,im,conjugate_flag.
void write_map_csv(const TransformMap& map, std::ostream& os);

}  // namespace zpdc
