#include "zpdc/field.hpp"

#include <cmath>
#include <stdexcept>

namespace zpdc {

std::vector<double> probe_times(const FieldProbe& probe) {
  if (probe.samples < 1) throw std::invalid_argument("probe needs at least one sample");
  if (!(probe.step > 0) && probe.samples > 1)
    throw std::invalid_argument("probe step must be positive");
  std::vector<double> t(static_cast<std::size_t>(probe.samples));
  for (int i = 0; i < probe.samples; ++i) t[static_cast<std::size_t>(i)] = probe.start + i * probe.step;
  return t;
}

std::pair<Sector, Sector> beam_sectors(int beam) {
  if (beam == 1) return {Sector::E, Sector::OPrime};
  if (beam == 2) return {Sector::EPrime, Sector::O};
  throw std::invalid_argument("beam must be 1 or 2");
}

Eigen::MatrixXcd assemble_field(const Eigen::MatrixXcd& amplitudes, const ModeGrid& grid,
                                Sector sector, double distance,
                                std::span<const double> times) {
  if (amplitudes.cols() != grid.mode_count())
    throw std::invalid_argument("amplitudes do not match the grid");
  const int begin = grid.sector_begin(sector);
  const int n = grid.sector_size();
  const double center = grid.center(sector);

  Eigen::MatrixXcd phases(n, static_cast<Eigen::Index>(times.size()));
  for (int k = 0; k < n; ++k) {
    const auto& mode = grid.mode(begin + k);
    const std::complex<double> spatial =
        std::complex<double>(0.0, mode.weight) *
        std::exp(std::complex<double>(0.0, mode.frequency * distance));
    const double slow = center - mode.frequency;
    for (std::size_t i = 0; i < times.size(); ++i)
      phases(k, static_cast<Eigen::Index>(i)) =
          spatial * std::exp(std::complex<double>(0.0, slow * times[i]));
  }
  return amplitudes.middleCols(begin, n) * phases;
}

Eigen::MatrixXcd propagate(const Eigen::MatrixXcd& series, double distance,
                           double beam_frequency, double step) {
  if (distance < 0) throw std::invalid_argument("propagation distance must be nonnegative");
  if (!(step > 0)) throw std::invalid_argument("sample step must be positive");
  const double raw = distance / step;
  const auto steps = static_cast<Eigen::Index>(std::llround(raw));
  if (std::abs(raw - static_cast<double>(steps)) > 1e-9)
    throw std::invalid_argument("delay is not representable on the sample grid");
  const std::complex<double> rot =
      std::exp(std::complex<double>(0.0, beam_frequency * distance));
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(series.rows(), series.cols());
  if (steps < series.cols())
    out.rightCols(series.cols() - steps) = rot * series.leftCols(series.cols() - steps);
  return out;
}

BeamField assemble_beam(const Eigen::MatrixXcd& amplitudes, const ModeGrid& grid, int beam,
                        double distance, std::span<const double> times) {
  const auto [e_sec, o_sec] = beam_sectors(beam);
  return {assemble_field(amplitudes, grid, e_sec, distance, times),
          assemble_field(amplitudes, grid, o_sec, distance, times)};
}

Eigen::MatrixXcd polarize(const BeamField& field, double angle) {
  return std::cos(angle) * field.e_axis + std::sin(angle) * field.o_axis;
}

}  // namespace zpdc
