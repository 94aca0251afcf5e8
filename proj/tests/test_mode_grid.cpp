#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <set>
#include <sstream>
#include <tuple>

#include "zpdc/mode_grid.hpp"

using namespace zpdc;

TEST_CASE("degenerate single-pair grid has one mode per sector summing to the pump") {
  const ModeGrid grid = build_mode_grid(1, 2.0, 0.0, 1.0, 1.0);
  CHECK(grid.mode_count() == 4);
  for (int sp = 0; sp < 2; ++sp)
    for (const auto& pair : grid.pairs(sp))
      CHECK(grid.mode(pair.e_index).frequency + grid.mode(pair.o_index).frequency == 2.0);
}

TEST_CASE("three-pair grid lays out the detuning comb") {
  const ModeGrid grid = build_mode_grid(3, 2.0, 0.2, 1.0, 1.0);
  const double expected_e[] = {0.9, 1.0, 1.1};
  const double expected_o[] = {1.1, 1.0, 0.9};
  for (int m = 0; m < 3; ++m) {
    CHECK(grid.mode(grid.sector_begin(Sector::E) + m).frequency ==
          doctest::Approx(expected_e[m]).epsilon(1e-15));
    CHECK(grid.mode(grid.sector_begin(Sector::O) + m).frequency ==
          doctest::Approx(expected_o[m]).epsilon(1e-15));
  }
}

TEST_CASE("pair sums hit the pump to machine precision for assorted shapes") {
  for (const auto& [n, pump, bw, e0] :
       {std::tuple{2, 2.0, 0.3, 1.0}, {5, 3.0, 0.5, 1.3}, {8, 2.0, 0.2, 1.0},
        {7, 1.0, 0.05, 0.4}}) {
    const ModeGrid grid = build_mode_grid(n, pump, bw, e0, pump - e0);
    for (const auto& pair : grid.all_pairs()) {
      const double sum = grid.mode(pair.e_index).frequency + grid.mode(pair.o_index).frequency;
      CHECK(std::abs(sum - pump) <= 4e-16 * pump);
    }
  }
}

TEST_CASE("sectors partition the mode list") {
  const ModeGrid grid = build_mode_grid(4, 2.0, 0.2, 1.0, 1.0);
  std::set<int> seen;
  for (Sector s : all_sectors) {
    for (int k = 0; k < grid.sector_size(); ++k) {
      const int index = grid.sector_begin(s) + k;
      CHECK(grid.mode(index).sector == s);
      CHECK(seen.insert(index).second);
    }
  }
  CHECK(static_cast<int>(seen.size()) == grid.mode_count());
}

TEST_CASE("grid construction rejects bad inputs") {
  CHECK_THROWS(build_mode_grid(0, 2.0, 0.2, 1.0, 1.0));
  CHECK_THROWS(build_mode_grid(3, 2.0, 0.2, 1.1, 1.0));  // centers don't sum to the pump
  CHECK_THROWS(build_mode_grid(3, 2.0, 1.5, 1.0, 1.0));  // bandwidth too wide
  CHECK_THROWS(build_mode_grid(3, -2.0, 0.2, -1.0, -1.0));
}

TEST_CASE("sinc phase envelope") {
  CHECK(sinc_phase(0.0) == std::complex<double>(1.0, 0.0));
  CHECK(std::abs(sinc_phase(std::numbers::pi)) < 1e-15);
  const auto quarter = sinc_phase(std::numbers::pi / 2);
  CHECK(quarter.real() == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(quarter.imag() == doctest::Approx(0.6366197723675814).epsilon(1e-12));

  for (double x : {-20.0, -3.2, -0.7, 0.1, 1.0, 7.5, 40.0}) {
    CHECK(std::abs(sinc_phase(x)) <= 1.0 + 1e-15);
    const auto mirrored = sinc_phase(-x);
    CHECK(mirrored.real() == doctest::Approx(std::conj(sinc_phase(x)).real()).epsilon(1e-14));
    CHECK(mirrored.imag() == doctest::Approx(std::conj(sinc_phase(x)).imag()).epsilon(1e-14));
  }
}

TEST_CASE("matching weight: designated pairs, cross-sector zeros, symmetry") {
  const ModeGrid grid = build_mode_grid(4, 2.0, 0.2, 1.0, 1.0);
  for (const auto& pair : grid.all_pairs())
    CHECK(phase_match_weight(grid.mode(pair.e_index), grid.mode(pair.o_index)) == 1.0);

  // Non-designated combination within the conjugate sectors.
  const auto& e0 = grid.mode(grid.sector_begin(Sector::E));
  const auto& o1 = grid.mode(grid.sector_begin(Sector::O) + 1);
  CHECK(phase_match_weight(e0, o1) == 0.0);

  // Cross-sector combinations weigh zero.
  const auto& oprime = grid.mode(grid.sector_begin(Sector::OPrime));
  CHECK(phase_match_weight(e0, oprime) == 0.0);

  // Same sector is rejected.
  const auto& e1 = grid.mode(grid.sector_begin(Sector::E) + 1);
  CHECK_THROWS(phase_match_weight(e0, e1));

  KernelParams gauss{KernelParams::Kind::Gaussian, 0.05};
  for (const auto& pair : grid.all_pairs()) {
    for (const auto& other : grid.all_pairs()) {
      const auto& a = grid.mode(pair.e_index);
      const auto& b = grid.mode(other.o_index);
      if (a.sector == b.sector) continue;
      CHECK(phase_match_weight(a, b, gauss) == phase_match_weight(b, a, gauss));
      CHECK(phase_match_weight(a, b) == phase_match_weight(b, a));
    }
  }
}

TEST_CASE("gaussian kernel broadens but keeps designated pairs at weight 1") {
  const ModeGrid grid = build_mode_grid(3, 2.0, 0.2, 1.0, 1.0);
  KernelParams gauss{KernelParams::Kind::Gaussian, 0.1};
  const auto& e0 = grid.mode(grid.sector_begin(Sector::E));
  const auto& o0 = grid.mode(grid.sector_begin(Sector::O));
  const auto& o1 = grid.mode(grid.sector_begin(Sector::O) + 1);
  CHECK(phase_match_weight(e0, o0, gauss) == 1.0);
  const double mismatch = e0.detuning + o1.detuning;
  CHECK(phase_match_weight(e0, o1, gauss) ==
        doctest::Approx(std::exp(-mismatch * mismatch / (2 * 0.1 * 0.1))));
  CHECK_THROWS(phase_match_weight(e0, o1, KernelParams{KernelParams::Kind::Gaussian, 0.0}));
}

TEST_CASE("weights follow sqrt(frequency / 2)") {
  const ModeGrid grid = build_mode_grid(3, 4.0, 0.4, 2.0, 2.0);
  for (const auto& m : grid.modes()) {
    CHECK(m.weight == doctest::Approx(std::sqrt(m.frequency / 2)).epsilon(1e-15));
    CHECK(m.weight > 0);
  }
}

TEST_CASE("grid CSV dump has the documented columns") {
  const ModeGrid grid = build_mode_grid(2, 2.0, 0.2, 1.0, 1.0);
  std::ostringstream os;
  write_grid_csv(grid, os);
  std::istringstream lines(os.str());
  std::string header;
  std::getline(lines, header);
  CHECK(header == "sector,index,frequency,detuning,weight");
  int rows = 0;
  for (std::string line; std::getline(lines, line);) ++rows;
  CHECK(rows == grid.mode_count());
}
