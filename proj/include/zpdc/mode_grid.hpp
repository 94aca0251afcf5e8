#pragma once

#include <array>
#include <complex>
#include <iosfwd>
#include <span>
#include <vector>

namespace zpdc {

/// Cone-intersection sector of a mode. The two outgoing beams mix the
/// sectors as beam 1 = (E, OPrime) and beam 2 = (EPrime, O); conjugate
/// pairing couples E with O and EPrime with OPrime.
enum class Sector { E = 0, O = 1, EPrime = 2, OPrime = 3 };

inline constexpr std::array<Sector, 4> all_sectors{Sector::E, Sector::O,
                                                   Sector::EPrime, Sector::OPrime};

const char* sector_label(Sector s);

/// True when the two sectors form a conjugate-coupled pair (E/O or E'/O').
bool conjugate_sectors(Sector a, Sector b);

struct ModeDescriptor {
  Sector sector{Sector::E};
  double frequency = 0.0;  // angular frequency, natural units (hbar = c = L = 1)
  double detuning = 0.0;   // frequency minus the sector center
  double weight = 0.0;     // sqrt(frequency / 2), the per-mode field normalization
};

/// One conjugate pair: indices into the flat mode list.
struct ModePair {
  int e_index = 0;
  int o_index = 0;
};

/// Phase-matching kernel. Exact: indicator of the designated conjugate
/// pairing. Gaussian: exp(-mismatch^2 / 2 sigma^2) over the pair frequency
/// mismatch, for broadened matching.
struct KernelParams {
  enum class Kind { Exact, Gaussian };
  Kind kind = Kind::Exact;
  double sigma = 0.0;
};

/// Discrete mode set for the four beam sectors. Immutable once built;
/// safe to share across threads.
class ModeGrid {
public:
  ModeGrid() = default;

  const std::vector<ModeDescriptor>& modes() const { return modes_; }
  int mode_count() const { return static_cast<int>(modes_.size()); }
  double pump_frequency() const { return pump_frequency_; }
  double bandwidth() const { return bandwidth_; }
  int pairs_per_sector() const { return pairs_per_sector_; }

  /// Mean frequency of a sector (the slowly-varying carrier).
  double center(Sector s) const { return centers_[static_cast<int>(s)]; }

  int sector_begin(Sector s) const { return pairs_per_sector_ * static_cast<int>(s); }
  int sector_size() const { return pairs_per_sector_; }

  const ModeDescriptor& mode(int index) const { return modes_[static_cast<std::size_t>(index)]; }

  /// Conjugate pairs for sector pair 0 (E,O) or 1 (EPrime,OPrime).
  std::span<const ModePair> pairs(int sector_pair) const;
  std::span<const ModePair> all_pairs() const { return pairs_; }

private:
  friend ModeGrid build_mode_grid(int, double, double, double, double);

  std::vector<ModeDescriptor> modes_;
  std::vector<ModePair> pairs_;
  std::array<double, 4> centers_{};
  double pump_frequency_ = 0.0;
  double bandwidth_ = 0.0;
  int pairs_per_sector_ = 0;
};

/// Builds the four-sector grid. Detunings are uniformly spaced over
/// [-bandwidth/2, +bandwidth/2]; the ordinary partner of each extraordinary
/// mode is placed at pump_frequency - frequency so every pair sums to the
/// pump exactly. Throws std::invalid_argument on violated preconditions
/// (e_center + o_center must equal pump_frequency, frequencies positive,
/// bandwidth below both centers).
ModeGrid build_mode_grid(int pairs_per_sector, double pump_frequency,
                         double bandwidth, double e_center, double o_center);

/// (sin x / x) e^{ix}; the finite-interaction-time matching envelope.
/// Exactly 1 at x = 0.
std::complex<double> sinc_phase(double x);

/// Dimensionless symmetric matching weight f for two modes from conjugate
/// sectors. Cross-sector combinations (for example E with OPrime) weigh 0;
/// same-sector arguments are rejected with std::invalid_argument.
double phase_match_weight(const ModeDescriptor& a, const ModeDescriptor& b,
                          const KernelParams& kernel = {});

/// CSV dump: sector,index,frequency,detuning,weight.
void write_grid_csv(const ModeGrid& grid, std::ostream& os);

}  // namespace zpdc
