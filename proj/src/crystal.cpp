#include "zpdc/crystal.hpp"

#include <ostream>
#include <stdexcept>

#include "zpdc/csv.hpp"

namespace zpdc {

namespace {

// Structure matrices shared by the map and the bare operators:
// G[k][k'] couples destination k to conj of opposite-sector k',
// J[k][k''] is the second-order same-sector term. Built per sector pair.
struct CouplingBlocks {
  Eigen::MatrixXcd first_order;   // M x M, rows dest, cols opposite sector
  Eigen::MatrixXcd second_order;  // M x M, rows dest, cols same sector
};

CouplingBlocks build_blocks(const ModeGrid& grid, const KernelParams& kernel,
                            double transit, double pump) {
  const int M = grid.mode_count();
  CouplingBlocks blocks;
  blocks.first_order = Eigen::MatrixXcd::Zero(M, M);
  blocks.second_order = Eigen::MatrixXcd::Zero(M, M);
  const double half = transit / 2;
  const auto& modes = grid.modes();

  const auto fill_sector_pair = [&](Sector dst, Sector opp) {
    const int d0 = grid.sector_begin(dst), o0 = grid.sector_begin(opp);
    const int n = grid.sector_size();
    for (int a = 0; a < n; ++a) {
      const int k = d0 + a;
      for (int b = 0; b < n; ++b) {
        const int kp = o0 + b;
        const double f = phase_match_weight(modes[k], modes[kp], kernel);
        if (f == 0.0) continue;
        blocks.first_order(k, kp) +=
            f * sinc_phase(half * (pump - modes[k].frequency - modes[kp].frequency));
        for (int c = 0; c < n; ++c) {
          const int kpp = d0 + c;
          const double f2 = phase_match_weight(modes[kp], modes[kpp], kernel);
          if (f2 == 0.0) continue;
          blocks.second_order(k, kpp) +=
              f * f2 *
              sinc_phase(half * (modes[kp].frequency + modes[kpp].frequency - pump)) *
              sinc_phase(half * (modes[kpp].frequency - modes[k].frequency));
        }
      }
    }
  };
  fill_sector_pair(Sector::E, Sector::O);
  fill_sector_pair(Sector::O, Sector::E);
  fill_sector_pair(Sector::EPrime, Sector::OPrime);
  fill_sector_pair(Sector::OPrime, Sector::EPrime);
  return blocks;
}

}  // namespace

TransformMap build_transform_map(const ModeGrid& grid, const CrystalParams& params,
                                 const KernelParams& kernel) {
  if (!(params.transit_time > 0)) throw std::invalid_argument("transit_time must be positive");
  if (params.pump_frequency != grid.pump_frequency())
    throw std::invalid_argument("crystal pump frequency does not match the grid");
  const auto blocks = build_blocks(grid, kernel, params.transit_time, params.pump_frequency);
  const double g = params.coupling;
  const std::complex<double> gV = g * params.pump;
  const double g2V2 = g * g * std::norm(params.pump);
  TransformMap map;
  map.direct = Eigen::MatrixXcd::Identity(grid.mode_count(), grid.mode_count()) +
               g2V2 * blocks.second_order;
  map.conjugated = gV * blocks.first_order;
  return map;
}

Eigen::MatrixXcd apply_map(const TransformMap& map, const Eigen::MatrixXcd& rows) {
  if (rows.cols() != map.direct.rows())
    throw std::invalid_argument("mode count mismatch between map and amplitudes");
  return rows * map.direct.transpose() + rows.conjugate() * map.conjugated.transpose();
}

OutputEnsemble transform(const VacuumEnsemble& vac, const CrystalParams& params,
                         const ModeGrid& grid, const KernelParams& kernel) {
  if (vac.amplitudes.cols() != grid.mode_count())
    throw std::invalid_argument("ensemble does not match the grid");
  OutputEnsemble out;
  out.params = params;
  out.source_seed = vac.seed;
  if (params.coupling == 0.0) {
    out.amplitudes = vac.amplitudes;  // identity, bit-exact
    return out;
  }
  out.amplitudes = apply_map(build_transform_map(grid, params, kernel), vac.amplitudes);
  return out;
}

Eigen::VectorXcd pair_coupling(const Eigen::VectorXcd& opposite, const ModeGrid& grid,
                               const CrystalParams& params, const KernelParams& kernel,
                               Sector destination) {
  if (opposite.size() != grid.sector_size())
    throw std::invalid_argument("amplitude count does not match the sector size");
  const auto blocks = build_blocks(grid, kernel, params.transit_time, params.pump_frequency);
  const Sector opp = destination == Sector::E        ? Sector::O
                     : destination == Sector::O      ? Sector::E
                     : destination == Sector::EPrime ? Sector::OPrime
                                                     : Sector::EPrime;
  const int d0 = grid.sector_begin(destination), o0 = grid.sector_begin(opp);
  const int n = grid.sector_size();
  return blocks.first_order.block(d0, o0, n, n) * opposite.conjugate();
}

Eigen::VectorXcd second_order_coupling(const Eigen::VectorXcd& same, const ModeGrid& grid,
                                       const CrystalParams& params, const KernelParams& kernel,
                                       Sector destination) {
  if (same.size() != grid.sector_size())
    throw std::invalid_argument("amplitude count does not match the sector size");
  const auto blocks = build_blocks(grid, kernel, params.transit_time, params.pump_frequency);
  const int d0 = grid.sector_begin(destination);
  const int n = grid.sector_size();
  return blocks.second_order.block(d0, d0, n, n) * same;
}

Eigen::MatrixXcd pair_moment(const TransformMap& map) {
  return 0.5 * (map.direct * map.conjugated.transpose() +
                map.conjugated * map.direct.transpose());
}

Eigen::MatrixXcd hermitian_moment(const TransformMap& map) {
  return 0.5 * (map.direct * map.direct.adjoint() +
                map.conjugated * map.conjugated.adjoint());
}

void write_map_csv(const TransformMap& map, std::ostream& os) {
  CsvWriter csv(os, {"row", "col", "re", "im", "conjugate_flag"});
  const auto dump = [&](const Eigen::MatrixXcd& m, long flag) {
    for (Eigen::Index r = 0; r < m.rows(); ++r)
      for (Eigen::Index c = 0; c < m.cols(); ++c)
        if (m(r, c) != std::complex<double>(0.0, 0.0)) {
          csv.field(static_cast<long>(r));
          csv.field(static_cast<long>(c));
          csv.field(m(r, c).real());
          csv.field(m(r, c).imag());
          csv.field(flag);
          csv.end_row();
        }
  };
  dump(map.direct, 0);
  dump(map.conjugated, 1);
}

}  // namespace zpdc
