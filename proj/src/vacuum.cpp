#include "zpdc/vacuum.hpp"

#include <cmath>
#include <cstring>
#include <istream>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "zpdc/rng.hpp"

namespace zpdc {

std::pair<double, double> standard_normal_pair(SplitMix64& gen) {
  const double u1 = gen.next_unit_positive();
  const double u2 = gen.next_unit();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * std::numbers::pi * u2;
  return {r * std::cos(a), r * std::sin(a)};
}

namespace {
Eigen::RowVectorXcd make_realization(int modes, std::uint64_t sub_seed) {
  Eigen::RowVectorXcd row(modes);
  SplitMix64 gen(sub_seed);
  for (Eigen::Index m = 0; m < row.size(); ++m) {
    const auto [z0, z1] = standard_normal_pair(gen);
    row[m] = std::complex<double>(0.5 * z0, 0.5 * z1);  // component sd 1/2
  }
  return row;
}
}  // namespace

VacuumEnsemble sample_vacuum(const ModeGrid& grid, long n_realizations, std::uint64_t seed) {
  if (n_realizations < 1) throw std::invalid_argument("n_realizations must be at least 1");
  VacuumEnsemble ens;
  ens.seed = seed;
  ens.grid_modes = grid.mode_count();
  ens.amplitudes.resize(n_realizations, grid.mode_count());
  for (long r = 0; r < n_realizations; ++r)
    ens.amplitudes.row(r) =
        make_realization(grid.mode_count(), realization_seed(seed, static_cast<std::uint64_t>(r)));
  return ens;
}

Eigen::VectorXcd sample_vacuum_realization(const ModeGrid& grid, std::uint64_t seed, long index) {
  return make_realization(grid.mode_count(),
                          realization_seed(seed, static_cast<std::uint64_t>(index)))
      .transpose();
}

VacuumEnsemble phase_shift_vacuum(const VacuumEnsemble& ensemble, std::span<const double> phases) {
  if (static_cast<int>(phases.size()) != ensemble.amplitudes.cols())
    throw std::invalid_argument("phase count must match mode count");
  VacuumEnsemble out = ensemble;
  for (Eigen::Index m = 0; m < out.amplitudes.cols(); ++m) {
    const std::complex<double> rot = std::exp(std::complex<double>(0.0, -phases[static_cast<std::size_t>(m)]));
    out.amplitudes.col(m) *= rot;
  }
  return out;
}

namespace {
constexpr char kMagic[8] = {'Z', 'P', 'D', 'C', 'V', 'A', 'C', '1'};

void put_u64(std::ostream& os, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t get_u64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}
}  // namespace

void write_ensemble(const VacuumEnsemble& ensemble, std::ostream& os) {
  os.write(kMagic, 8);
  put_u64(os, static_cast<std::uint64_t>(ensemble.amplitudes.rows()));
  put_u64(os, static_cast<std::uint64_t>(ensemble.amplitudes.cols()));
  put_u64(os, ensemble.seed);
  for (Eigen::Index r = 0; r < ensemble.amplitudes.rows(); ++r)
    for (Eigen::Index m = 0; m < ensemble.amplitudes.cols(); ++m) {
      const auto z = ensemble.amplitudes(r, m);
      const double re = z.real(), im = z.imag();
      os.write(reinterpret_cast<const char*>(&re), 8);
      os.write(reinterpret_cast<const char*>(&im), 8);
    }
  if (!os) throw std::runtime_error("ensemble write failed");
}

VacuumEnsemble read_ensemble(std::istream& is) {
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kMagic, 8) != 0)
    throw std::runtime_error("not an ensemble dump (bad magic)");
  VacuumEnsemble ens;
  const auto rows = get_u64(is);
  const auto cols = get_u64(is);
  ens.seed = get_u64(is);
  ens.grid_modes = static_cast<int>(cols);
  ens.amplitudes.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (Eigen::Index r = 0; r < ens.amplitudes.rows(); ++r)
    for (Eigen::Index m = 0; m < ens.amplitudes.cols(); ++m) {
      double re = 0, im = 0;
      is.read(reinterpret_cast<char*>(&re), 8);
      is.read(reinterpret_cast<char*>(&im), 8);
      ens.amplitudes(r, m) = {re, im};
    }
  if (!is) throw std::runtime_error("truncated ensemble dump");
  return ens;
}

}  // namespace zpdc
