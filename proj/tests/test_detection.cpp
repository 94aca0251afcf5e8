#include <doctest.h>

#include <cmath>
#include <vector>

#include "zpdc/detection.hpp"
#include "zpdc/vacuum.hpp"

using namespace zpdc;

namespace {

CrystalParams crystal(double g) {
  CrystalParams p;
  p.coupling = g;
  p.pump_frequency = 2.0;
  return p;
}

FieldProbe probe(int beam, std::optional<double> angle, int samples = 64, double step = 5.0) {
  FieldProbe pr;
  pr.beam = beam;
  pr.distance = 0.0;
  pr.step = step;
  pr.samples = samples;
  pr.polarizer = angle;
  return pr;
}

}  // namespace

TEST_CASE("intensity is the pointwise squared modulus") {
  Eigen::MatrixXcd f(1, 3);
  f(0, 0) = {0.0, 0.0};
  f(0, 1) = std::exp(std::complex<double>(0.0, 1.234));
  f(0, 2) = {3.0, -4.0};
  const Eigen::MatrixXd i = intensity(f);
  CHECK(i(0, 0) == 0.0);
  CHECK(i(0, 1) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(i(0, 2) == doctest::Approx(25.0).epsilon(1e-15));
  CHECK((intensity(2.0 * f)(0, 2)) == doctest::Approx(100.0).epsilon(1e-15));
}

TEST_CASE("vacuum reference: single pair at weight one, angle splits, coupling independence") {
  // One mode per sector at the pump's half frequency 2 gives w = 1.
  const ModeGrid grid = build_mode_grid(1, 4.0, 0.0, 2.0, 2.0);
  CHECK(vacuum_reference(grid, probe(1, 0.0)) == doctest::Approx(0.5).epsilon(1e-15));

  const ModeGrid wide = build_mode_grid(3, 2.0, 0.2, 1.0, 1.0);
  for (double phi : {0.0, 0.4, 1.0}) {
    const double split = vacuum_reference(wide, probe(1, phi)) +
                         vacuum_reference(wide, probe(1, phi + std::numbers::pi / 2));
    CHECK(split == doctest::Approx(vacuum_reference(wide, probe(1, std::nullopt))).epsilon(1e-13));
  }
  // The reference is a grid property; the coupling never enters.
  const auto det_weak = make_detector(wide, probe(2, 0.3), false);
  CHECK(det_weak.vacuum_intensity == vacuum_reference(wide, probe(2, 0.3)));
}

TEST_CASE("vacuum singles: standard rate vanishes, clipped rate is half the mean modulus") {
  const ModeGrid grid = build_mode_grid(2, 2.0, 0.2, 1.0, 1.0);
  const long R = 100000;
  const auto vac = sample_vacuum(grid, R, 1001);
  OutputEnsemble out;
  out.amplitudes = vac.amplitudes;  // coupling off

  const auto det = make_detector(grid, probe(1, 0.0), false);
  const RateReport standard = singles_rate(out, grid, det);
  CHECK(std::abs(standard.rate) < 3 * standard.stderr);

  auto det_clip = det;
  det_clip.clip = true;
  const RateReport clipped = singles_rate(out, grid, det_clip);
  CHECK(clipped.rate > 0);

  // {x}_+ = (x + |x|) / 2 realization by realization, so over the vacuum the
  // clipped mean equals half the mean modulus exactly.
  const WindowResponses resp = window_responses(out.amplitudes, grid, det);
  const double half_abs = 0.5 * resp.standard.cwiseAbs().mean() + 0.5 * resp.standard.mean();
  CHECK(clipped.rate == doctest::Approx(half_abs).epsilon(1e-12));
}

TEST_CASE("clipping bounds hold pointwise") {
  const ModeGrid grid = build_mode_grid(2, 2.0, 0.2, 1.0, 1.0);
  const auto out = transform(sample_vacuum(grid, 20000, 4242), crystal(0.05), grid);
  const auto det = make_detector(grid, probe(1, 0.7), false);
  const WindowResponses resp = window_responses(out.amplitudes, grid, det);
  for (Eigen::Index r = 0; r < resp.standard.size(); ++r) {
    const double w = resp.standard[r], c = resp.clipped[r];
    CHECK(c >= w);
    CHECK(c >= 0.0);
    CHECK(c <= std::abs(w));
    CHECK(c - w == std::max(-w, 0.0));  // {x}+ - x = {-x}+
  }
}

TEST_CASE("dark excess is nonnegative and the singles report carries it") {
  const ModeGrid grid = build_mode_grid(2, 2.0, 0.2, 1.0, 1.0);
  const auto out = transform(sample_vacuum(grid, 20000, 31337), crystal(0.05), grid);
  const auto det = make_detector(grid, probe(1, 0.0), true);
  const RateReport report = singles_rate(out, grid, det);
  CHECK(report.dark_excess >= 0);
  CHECK(report.rate >= 0);
  CHECK(report.n_samples == 20000);
}

TEST_CASE("joint rates: vacuum standard vanishes, clipped is nonnegative") {
  const ModeGrid grid = build_mode_grid(2, 2.0, 0.2, 1.0, 1.0);
  const long R = 50000;
  const auto vac = sample_vacuum(grid, R, 606);
  OutputEnsemble out;
  out.amplitudes = vac.amplitudes;

  const auto det1 = make_detector(grid, probe(1, 0.2), false);
  const auto det2 = make_detector(grid, probe(2, 0.9), false);
  const RateReport standard = joint_rate_direct(out, grid, det1, det2, 0.0);
  CHECK(std::abs(standard.rate) < 3 * standard.stderr);

  auto det1c = det1, det2c = det2;
  det1c.clip = det2c.clip = true;
  const RateReport clipped = joint_rate_direct(out, grid, det1c, det2c, 0.0);
  CHECK(clipped.rate >= 0);
  CHECK(clipped.accidental >= 0);
}

TEST_CASE("direct standard joint rate agrees with the factorized rule") {
  const ModeGrid grid = build_mode_grid(2, 2.0, 0.2, 1.0, 1.0);
  const auto params = crystal(0.05);
  const AnalyticCorrelator analytic(grid, params);
  const long R = 100000;
  const auto out = transform(sample_vacuum(grid, R, 20260401), params, grid);

  const auto det1 = make_detector(grid, probe(1, 0.3, 100), false);
  const auto det2 = make_detector(grid, probe(2, 0.9, 100), false);
  for (double tau : {0.0, 10.0, 45.0}) {
    const RateReport direct = joint_rate_direct(out, grid, det1, det2, tau);
    const double factorized = joint_rate_gaussian(analytic, det1, det2, tau);
    CHECK(std::abs(direct.rate - factorized) < 5 * direct.stderr);
  }
}

TEST_CASE("factorized joint rate: zero at no coupling, quadratic in the pump power") {
  const ModeGrid grid = build_mode_grid(2, 2.0, 0.2, 1.0, 1.0);
  const auto det1 = make_detector(grid, probe(1, 0.3, 32), false);
  const auto det2 = make_detector(grid, probe(2, 0.9, 32), false);
  CHECK(joint_rate_gaussian(AnalyticCorrelator(grid, crystal(0.0)), det1, det2, 0.0) == 0.0);

  // Leading order is |g V|^2; the exact-pairing closed form carries the
  // (1 + g^2 |V|^2)^2 dressing of the map.
  const double g = 0.03;
  const double r1 = joint_rate_gaussian(AnalyticCorrelator(grid, crystal(g)), det1, det2, 0.0);
  const double r2 =
      joint_rate_gaussian(AnalyticCorrelator(grid, crystal(2 * g)), det1, det2, 0.0);
  const double expected =
      4 * std::pow((1 + 4 * g * g) / (1 + g * g), 2);
  CHECK(r2 / r1 == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("negative-window fraction shrinks as the window grows") {
  // The sweep stays below the comb revival time, where the window still
  // averages beats away and the fraction falls well beyond the Monte Carlo
  // noise; past saturation consecutive estimates differ only by noise.
  const ModeGrid grid = build_mode_grid(8, 2.0, 0.2, 1.0, 1.0);
  const long R = 60000;
  const auto out = transform(sample_vacuum(grid, R, 20260810), crystal(0.05), grid);
  std::vector<double> fractions;
  for (int samples : {8, 12, 20, 42}) {
    const auto det = make_detector(grid, probe(1, 0.0, samples), false);
    fractions.push_back(singles_rate(out, grid, det).negative_window_fraction);
  }
  for (std::size_t i = 1; i < fractions.size(); ++i) CHECK(fractions[i] <= fractions[i - 1]);
}

TEST_CASE("a single long window time-average matches the ensemble mean") {
  const ModeGrid grid = build_mode_grid(8, 2.0, 0.2, 1.0, 1.0);
  const auto params = crystal(0.05);
  // Duration 10^3 / bandwidth = 5000, on the probe step 5.
  const int samples = 1000;
  const auto det = make_detector(grid, probe(1, 0.0, samples), false);

  const long R = 2000;
  const auto out = transform(sample_vacuum(grid, R, 11011), params, grid);
  const WindowResponses resp = window_responses(out.amplitudes, grid, det);

  // Time average of one member vs the ensemble mean of the same statistic;
  // the tolerance is the ensemble scatter of single-member time averages.
  const double ensemble_mean = resp.standard.mean();
  const double scatter = std::sqrt(
      (resp.standard.array() - ensemble_mean).square().sum() / (R - 1.0));
  CHECK(std::abs(resp.standard[0] - ensemble_mean) < 5 * scatter);

  // And the ensemble mean itself sits on the analytic excess.
  const AnalyticCorrelator analytic(grid, params);
  double excess = 0.0;
  {
    const auto [es, os] = beam_sectors(1);
    excess = analytic.hermitian_correlation(es, 0, 0, es, 0, 0, true).real();
  }
  CHECK(std::abs(ensemble_mean - excess) <
        5 * scatter / std::sqrt(static_cast<double>(R)));
}

TEST_CASE("probe validation") {
  const ModeGrid grid = build_mode_grid(2, 2.0, 0.2, 1.0, 1.0);
  FieldProbe bad = probe(1, 0.0);
  bad.samples = 0;
  CHECK_THROWS(probe_times(bad));
  bad.samples = 4;
  bad.step = -1.0;
  CHECK_THROWS(probe_times(bad));
}
