#include "zpdc/mode_grid.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include "zpdc/csv.hpp"

namespace zpdc {

const char* sector_label(Sector s) {
  switch (s) {
    case Sector::E: return "e";
    case Sector::O: return "o";
    case Sector::EPrime: return "e'";
    case Sector::OPrime: return "o'";
  }
  return "?";
}

bool conjugate_sectors(Sector a, Sector b) {
  return (a == Sector::E && b == Sector::O) || (a == Sector::O && b == Sector::E) ||
         (a == Sector::EPrime && b == Sector::OPrime) ||
         (a == Sector::OPrime && b == Sector::EPrime);
}

std::span<const ModePair> ModeGrid::pairs(int sector_pair) const {
  const auto n = static_cast<std::size_t>(pairs_per_sector_);
  if (sector_pair == 0) return {pairs_.data(), n};
  if (sector_pair == 1) return {pairs_.data() + n, n};
  throw std::invalid_argument("sector_pair must be 0 or 1");
}

ModeGrid build_mode_grid(int pairs_per_sector, double pump_frequency,
                         double bandwidth, double e_center, double o_center) {
  if (pairs_per_sector < 1)
    throw std::invalid_argument("pairs_per_sector must be at least 1");
  if (!(pump_frequency > 0) || !(e_center > 0) || !(o_center > 0))
    throw std::invalid_argument("frequencies must be positive");
  if (e_center + o_center != pump_frequency)
    throw std::invalid_argument(
        "matching condition violated: e_center + o_center must equal pump_frequency");
  if (bandwidth < 0 || bandwidth >= std::min(e_center, o_center))
    throw std::invalid_argument("bandwidth must be nonnegative and below both sector centers");

  const int n = pairs_per_sector;
  std::vector<double> detunings(static_cast<std::size_t>(n), 0.0);
  if (n > 1) {
    for (int m = 0; m < n; ++m)
      detunings[static_cast<std::size_t>(m)] =
          -bandwidth / 2 + bandwidth * static_cast<double>(m) / (n - 1);
  }

  ModeGrid grid;
  grid.pump_frequency_ = pump_frequency;
  grid.bandwidth_ = bandwidth;
  grid.pairs_per_sector_ = n;
  grid.centers_ = {e_center, o_center, e_center, o_center};
  grid.modes_.reserve(static_cast<std::size_t>(4 * n));

  // Sector order: E, O, E', O'. The ordinary frequency is derived from its
  // partner so the pair sum hits the pump exactly; detunings are stored as
  // the exact +/- grid values (the designated-pair predicate relies on that).
  const auto push_sector = [&](Sector s) {
    for (int m = 0; m < n; ++m) {
      const double d = detunings[static_cast<std::size_t>(m)];
      ModeDescriptor mode;
      mode.sector = s;
      if (s == Sector::E || s == Sector::EPrime) {
        mode.frequency = e_center + d;
        mode.detuning = d;
      } else {
        mode.frequency = pump_frequency - (e_center + d);
        mode.detuning = -d;
      }
      mode.weight = std::sqrt(mode.frequency / 2);
      grid.modes_.push_back(mode);
    }
  };
  for (Sector s : all_sectors) push_sector(s);

  for (int m = 0; m < n; ++m) grid.pairs_.push_back({m, n + m});
  for (int m = 0; m < n; ++m) grid.pairs_.push_back({2 * n + m, 3 * n + m});
  return grid;
}

std::complex<double> sinc_phase(double x) {
  if (x == 0.0) return {1.0, 0.0};
  return (std::sin(x) / x) * std::exp(std::complex<double>(0.0, x));
}

double phase_match_weight(const ModeDescriptor& a, const ModeDescriptor& b,
                          const KernelParams& kernel) {
  if (a.sector == b.sector)
    throw std::invalid_argument("phase_match_weight: modes from the same sector");
  if (!conjugate_sectors(a.sector, b.sector)) return 0.0;
  switch (kernel.kind) {
    case KernelParams::Kind::Exact:
      return a.detuning == -b.detuning ? 1.0 : 0.0;
    case KernelParams::Kind::Gaussian: {
      if (!(kernel.sigma > 0))
        throw std::invalid_argument("gaussian kernel requires sigma > 0");
      const double mismatch = a.detuning + b.detuning;
      return std::exp(-mismatch * mismatch / (2 * kernel.sigma * kernel.sigma));
    }
  }
  return 0.0;
}

void write_grid_csv(const ModeGrid& grid, std::ostream& os) {
  CsvWriter csv(os, {"sector", "index", "frequency", "detuning", "weight"});
  const auto& modes = grid.modes();
  for (std::size_t i = 0; i < modes.size(); ++i) {
    const auto& m = modes[i];
    csv.field(sector_label(m.sector));
    csv.field(static_cast<long>(i));
    csv.field(m.frequency);
    csv.field(m.detuning);
    csv.field(m.weight);
    csv.end_row();
  }
}

}  // namespace zpdc
