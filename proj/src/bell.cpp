#include "zpdc/bell.hpp"

#include <atomic>
#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <thread>

#include "zpdc/rng.hpp"
#include "zpdc/vacuum.hpp"

namespace zpdc {

const char* engine_label(CoincidenceEngine e) {
  switch (e) {
    case CoincidenceEngine::Gaussian: return "gaussian";
    case CoincidenceEngine::Direct: return "direct";
    case CoincidenceEngine::Clipped: return "clipped";
  }
  return "?";
}

namespace {

bool same_setting(const std::optional<double>& a, const std::optional<double>& b) {
  if (a.has_value() != b.has_value()) return false;
  return !a.has_value() || *a == *b;
}

double mean(const Eigen::VectorXd& v) { return v.mean(); }

double stderr_of_mean(const Eigen::VectorXd& v) {
  const auto n = static_cast<double>(v.size());
  const double m = v.mean();
  return std::sqrt((v.array() - m).square().sum() / (n - 1) / n);
}

void run_blocks(long total, long block, int workers,
                const std::function<void(long, long)>& body) {
  std::vector<std::pair<long, long>> ranges;
  for (long r0 = 0; r0 < total; r0 += block) ranges.emplace_back(r0, std::min(total, r0 + block));
  if (workers <= 1) {
    for (auto [r0, r1] : ranges) body(r0, r1);
    return;
  }
  std::atomic<std::size_t> cursor{0};
  std::vector<std::thread> pool;
  const int count = std::min<int>(workers, static_cast<int>(ranges.size()));
  pool.reserve(static_cast<std::size_t>(count));
  for (int w = 0; w < count; ++w)
    pool.emplace_back([&] {
      for (;;) {
        const std::size_t i = cursor.fetch_add(1);
        if (i >= ranges.size()) return;
        body(ranges[i].first, ranges[i].second);
      }
    });
  for (auto& t : pool) t.join();
}

}  // namespace

BellHarness::BellHarness(ModeGrid grid, CrystalParams params, KernelParams kernel,
                         HarnessOptions options)
    : grid_(std::move(grid)),
      params_(params),
      kernel_(kernel),
      options_(options),
      analytic_(grid_, params_, kernel_),
      map_(build_transform_map(grid_, params_, kernel_)) {
  if (options_.realizations < 2) throw std::invalid_argument("need at least two realizations");
  for (auto& table : det_) {
    table.standard.resize(options_.realizations, 0);
    table.clipped.resize(options_.realizations, 0);
    table.vac_standard.resize(options_.realizations, 0);
    table.vac_clipped.resize(options_.realizations, 0);
  }
}

int BellHarness::ensure_setting(int detector, std::optional<double> angle) {
  auto& table = det_[detector - 1];
  for (std::size_t i = 0; i < table.settings.size(); ++i)
    if (same_setting(table.settings[i], angle)) return static_cast<int>(i);
  table.settings.push_back(angle);
  const int col = static_cast<int>(table.settings.size()) - 1;
  const auto grow = [&](Eigen::MatrixXd& m) {
    m.conservativeResize(Eigen::NoChange, col + 1);
    m.col(col).setZero();
  };
  grow(table.standard);
  grow(table.clipped);
  grow(table.vac_standard);
  grow(table.vac_clipped);
  pending_.emplace_back(detector, col);
  return col;
}

void BellHarness::compute_pending() {
  if (pending_.empty()) return;
  std::vector<std::pair<int, int>> work;
  work.swap(pending_);

  // Vacuum references per pending setting.
  std::vector<double> i0(work.size());
  std::vector<std::optional<double>> angles(work.size());
  for (std::size_t i = 0; i < work.size(); ++i) {
    const auto [detector, col] = work[i];
    angles[i] = det_[detector - 1].settings[static_cast<std::size_t>(col)];
    FieldProbe probe;
    probe.beam = detector;
    probe.polarizer = angles[i];
    i0[i] = vacuum_reference(grid_, probe);
  }

  std::vector<double> times1(static_cast<std::size_t>(options_.window_samples));
  std::vector<double> times2(times1.size());
  for (std::size_t i = 0; i < times1.size(); ++i) {
    times1[i] = static_cast<double>(i) * options_.time_step;
    times2[i] = times1[i] + options_.tau;
  }

  run_blocks(options_.realizations, options_.block, options_.workers, [&](long r0, long r1) {
    const long rows = r1 - r0;
    Eigen::MatrixXcd vac(rows, grid_.mode_count());
    for (long r = 0; r < rows; ++r)
      vac.row(r) = sample_vacuum_realization(grid_, options_.seed, r0 + r).transpose();
    const Eigen::MatrixXcd out = apply_map(map_, vac);

    for (int source = 0; source < 2; ++source) {
      const Eigen::MatrixXcd& amps = source == 0 ? out : vac;
      for (int detector = 1; detector <= 2; ++detector) {
        bool needed = false;
        for (auto [d, c] : work) needed |= (d == detector);
        if (!needed) continue;
        const auto& times = detector == 1 ? times1 : times2;
        const BeamField beam =
            assemble_beam(amps, grid_, detector, options_.distance, times);
        for (std::size_t i = 0; i < work.size(); ++i) {
          const auto [d, col] = work[i];
          if (d != detector) continue;
          Eigen::MatrixXd window;
          if (angles[i])
            window = intensity(polarize(beam, *angles[i]));
          else
            window = intensity(beam.e_axis) + intensity(beam.o_axis);
          const Eigen::VectorXd w = window.rowwise().mean().array() - i0[i];
          auto& table = det_[d - 1];
          auto& std_m = source == 0 ? table.standard : table.vac_standard;
          auto& clip_m = source == 0 ? table.clipped : table.vac_clipped;
          std_m.col(col).segment(r0, rows) = w;
          clip_m.col(col).segment(r0, rows) = w.cwiseMax(0.0);
        }
      }
    }
  });
}

Eigen::VectorXd BellHarness::column(int detector, std::optional<double> angle, bool clipped,
                                    bool control) {
  const int col = ensure_setting(detector, angle);
  compute_pending();
  auto& table = det_[detector - 1];
  if (control) return clipped ? table.vac_clipped.col(col) : table.vac_standard.col(col);
  return clipped ? table.clipped.col(col) : table.standard.col(col);
}

BellHarness::PairRates BellHarness::mc_pair_rates(std::optional<double> phi1,
                                                  std::optional<double> phi2, bool clipped) {
  const Eigen::VectorXd x = column(1, phi1, clipped, false);
  const Eigen::VectorXd y = column(2, phi2, clipped, false);
  const Eigen::VectorXd vx = column(1, phi1, clipped, true);
  const Eigen::VectorXd vy = column(2, phi2, clipped, true);
  const double mx = mean(x), my = mean(y), mvx = mean(vx), mvy = mean(vy);
  const Eigen::ArrayXd resid =
      (x.array() - mx) * (y.array() - my) - (vx.array() - mvx) * (vy.array() - mvy);
  PairRates rates;
  // Plain sequential sum: the decomposition check re-accumulates this product
  // mean realization by realization and must land on the identical value.
  double raw_sum = 0.0;
  for (Eigen::Index r = 0; r < x.size(); ++r) raw_sum += x[r] * y[r];
  rates.raw = raw_sum / static_cast<double>(x.size());
  rates.accidental = mx * my;
  rates.corrected = resid.mean();
  const auto n = static_cast<double>(x.size());
  rates.stderr = std::sqrt((resid - resid.mean()).square().sum() / (n - 1) / n);
  return rates;
}

double BellHarness::gaussian_rate(std::optional<double> phi1, std::optional<double> phi2) {
  FieldProbe p1, p2;
  p1.beam = 1;
  p1.distance = options_.distance;
  p1.step = options_.time_step;
  p1.samples = options_.window_samples;
  p1.polarizer = phi1;
  p2 = p1;
  p2.beam = 2;
  p2.polarizer = phi2;
  return joint_rate_gaussian(analytic_, make_detector(grid_, p1, false),
                             make_detector(grid_, p2, false), options_.tau);
}

RateReport BellHarness::singles(int detector, std::optional<double> angle, bool clipped) {
  const Eigen::VectorXd std_col = column(detector, angle, false, false);
  const Eigen::VectorXd clip_col = column(detector, angle, true, false);
  const Eigen::VectorXd& active = clipped ? clip_col : std_col;
  RateReport report;
  report.rate = mean(active);
  report.stderr = stderr_of_mean(active);
  report.negative_window_fraction =
      static_cast<double>((std_col.array() < 0.0).count()) / static_cast<double>(std_col.size());
  report.dark_excess = mean(clip_col) - mean(std_col);
  report.n_samples = static_cast<long>(active.size());
  return report;
}

AngleScan BellHarness::coincidence_scan(std::span<const AnglePair> angles,
                                        CoincidenceEngine engine) {
  if (angles.empty()) throw std::invalid_argument("empty angle list");
  AngleScan scan;
  scan.points.reserve(angles.size());
  for (const auto& pair : angles) {
    ScanPoint point;
    point.angles = pair;
    if (engine == CoincidenceEngine::Gaussian) {
      point.rate = gaussian_rate(pair.phi1, pair.phi2);
      point.raw = point.rate;
    } else {
      const PairRates rates =
          mc_pair_rates(pair.phi1, pair.phi2, engine == CoincidenceEngine::Clipped);
      point.rate = rates.corrected;
      point.stderr = rates.stderr;
      point.raw = rates.raw;
      point.accidental = rates.accidental;
    }
    scan.points.push_back(point);
  }

  // Least squares for rate = offset + K sin^2(phi1 + phi2).
  const auto n = static_cast<double>(scan.points.size());
  double sum_s = 0, sum_ss = 0, sum_y = 0, sum_sy = 0;
  for (const auto& p : scan.points) {
    const double s = std::pow(std::sin(p.angles.phi1 + p.angles.phi2), 2);
    sum_s += s;
    sum_ss += s * s;
    sum_y += p.rate;
    sum_sy += s * p.rate;
  }
  const double det = n * sum_ss - sum_s * sum_s;
  if (std::abs(det) < 1e-12 * n * std::max(sum_ss, 1.0))
    throw std::invalid_argument("degenerate angle set: sin^2 of the sums does not vary");
  scan.fit.amplitude = (n * sum_sy - sum_s * sum_y) / det;
  scan.fit.offset = (sum_ss * sum_y - sum_s * sum_sy) / det;
  scan.fit.visibility = scan.fit.amplitude / (scan.fit.amplitude + 2 * scan.fit.offset);
  for (auto& p : scan.points) {
    const double s = std::pow(std::sin(p.angles.phi1 + p.angles.phi2), 2);
    p.fitted = scan.fit.offset + scan.fit.amplitude * s;
    p.residual = p.rate - p.fitted;
    scan.fit.max_relative_residual =
        std::max(scan.fit.max_relative_residual,
                 std::abs(p.residual) / std::max(std::abs(scan.fit.amplitude), 1e-300));
    if (p.stderr > 0)
      scan.fit.max_residual_over_stderr =
          std::max(scan.fit.max_residual_over_stderr, std::abs(p.residual) / p.stderr);
  }
  return scan;
}

namespace {

constexpr double half_pi = std::numbers::pi / 2;

/// Per-block sums of x (optionally elementwise-multiplied by y), for
/// leave-one-block-out jackknives over additive statistics.
Eigen::VectorXd block_dot(const Eigen::VectorXd& x, const Eigen::VectorXd& y, long block) {
  const long n = x.size();
  const long nb = (n + block - 1) / block;
  Eigen::VectorXd sums(nb);
  for (long b = 0; b < nb; ++b) {
    const long r0 = b * block, len = std::min(block, n - r0);
    sums[b] = x.segment(r0, len).dot(y.segment(r0, len));
  }
  return sums;
}

Eigen::VectorXd block_sum(const Eigen::VectorXd& x, long block) {
  return block_dot(x, Eigen::VectorXd::Ones(x.size()), block);
}

double jackknife_stderr_from_totals(const std::vector<Eigen::VectorXd>& block_sums,
                                    const std::vector<long>& block_counts,
                                    const std::function<double(std::span<const double>, double)>& stat) {
  const auto nb = static_cast<long>(block_counts.size());
  const auto k = block_sums.size();
  std::vector<double> totals(k, 0.0);
  long total_count = 0;
  for (std::size_t i = 0; i < k; ++i) totals[i] = block_sums[i].sum();
  for (long b = 0; b < nb; ++b) total_count += block_counts[static_cast<std::size_t>(b)];

  std::vector<double> values(static_cast<std::size_t>(nb));
  std::vector<double> loo(k);
  for (long b = 0; b < nb; ++b) {
    for (std::size_t i = 0; i < k; ++i) loo[i] = totals[i] - block_sums[i][b];
    values[static_cast<std::size_t>(b)] =
        stat(loo, static_cast<double>(total_count - block_counts[static_cast<std::size_t>(b)]));
  }
  double m = 0;
  for (double v : values) m += v;
  m /= static_cast<double>(nb);
  double ss = 0;
  for (double v : values) ss += (v - m) * (v - m);
  return std::sqrt(ss * static_cast<double>(nb - 1) / static_cast<double>(nb));
}

}  // namespace

BellReport BellHarness::chsh(double a, double ap, double b, double bp,
                             CoincidenceEngine engine) {
  BellReport report;
  const double set1[2] = {a, ap};
  const double set2[2] = {b, bp};

  if (engine == CoincidenceEngine::Gaussian) {
    const auto correlator = [&](double x, double y) {
      const double pp = gaussian_rate(x, y);
      const double qq = gaussian_rate(x + half_pi, y + half_pi);
      const double pq = gaussian_rate(x, y + half_pi);
      const double qp = gaussian_rate(x + half_pi, y);
      return (pp + qq - pq - qp) / (pp + qq + pq + qp);
    };
    report.s_chsh = std::abs(correlator(a, b) - correlator(a, bp) + correlator(ap, b) +
                             correlator(ap, bp));
    return report;
  }

  const bool clipped = engine == CoincidenceEngine::Clipped;
  // Columns for the eight orientations; the correlator consumes the
  // control-corrected coincidence excesses.
  std::vector<Eigen::VectorXd> x(4), y(4), vx(4), vy(4);
  for (int i = 0; i < 2; ++i) {
    x[2 * i] = column(1, set1[i], clipped, false);
    x[2 * i + 1] = column(1, set1[i] + half_pi, clipped, false);
    vx[2 * i] = column(1, set1[i], clipped, true);
    vx[2 * i + 1] = column(1, set1[i] + half_pi, clipped, true);
    y[2 * i] = column(2, set2[i], clipped, false);
    y[2 * i + 1] = column(2, set2[i] + half_pi, clipped, false);
    vy[2 * i] = column(2, set2[i], clipped, true);
    vy[2 * i + 1] = column(2, set2[i] + half_pi, clipped, true);
  }

  const long block = options_.block;
  const long R = options_.realizations;
  std::vector<Eigen::VectorXd> sums;
  std::vector<long> counts;
  for (long r0 = 0; r0 < R; r0 += block) counts.push_back(std::min(block, R - r0));
  // Features per (i,j) in {a,a'} x {b,b'} and orientation combo (s,t):
  // products x*y and controls vx*vy, plus singles of every column.
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int s = 0; s < 2; ++s)
        for (int t = 0; t < 2; ++t) {
          sums.push_back(block_dot(x[2 * i + s], y[2 * j + t], block));
          sums.push_back(block_dot(vx[2 * i + s], vy[2 * j + t], block));
        }
  for (int i = 0; i < 4; ++i) sums.push_back(block_sum(x[static_cast<std::size_t>(i)], block));
  for (int j = 0; j < 4; ++j) sums.push_back(block_sum(y[static_cast<std::size_t>(j)], block));
  for (int i = 0; i < 4; ++i) sums.push_back(block_sum(vx[static_cast<std::size_t>(i)], block));
  for (int j = 0; j < 4; ++j) sums.push_back(block_sum(vy[static_cast<std::size_t>(j)], block));

  const auto s_stat = [&](std::span<const double> f, double count) {
    // f layout mirrors the push order above.
    const auto corrected = [&](int i, int j, int s, int t) {
      const std::size_t base = 2 * static_cast<std::size_t>(((i * 2 + j) * 2 + s) * 2 + t);
      const std::size_t singles = 32;
      const double mx = f[singles + static_cast<std::size_t>(2 * i + s)] / count;
      const double my = f[singles + 4 + static_cast<std::size_t>(2 * j + t)] / count;
      const double mvx = f[singles + 8 + static_cast<std::size_t>(2 * i + s)] / count;
      const double mvy = f[singles + 12 + static_cast<std::size_t>(2 * j + t)] / count;
      return (f[base] / count - mx * my) - (f[base + 1] / count - mvx * mvy);
    };
    const auto correlator = [&](int i, int j) {
      const double pp = corrected(i, j, 0, 0);
      const double qq = corrected(i, j, 1, 1);
      const double pq = corrected(i, j, 0, 1);
      const double qp = corrected(i, j, 1, 0);
      return (pp + qq - pq - qp) / (pp + qq + pq + qp);
    };
    return std::abs(correlator(0, 0) - correlator(0, 1) + correlator(1, 0) + correlator(1, 1));
  };

  std::vector<double> totals(sums.size());
  for (std::size_t i = 0; i < sums.size(); ++i) totals[i] = sums[i].sum();
  report.s_chsh = s_stat(totals, static_cast<double>(R));
  report.s_stderr = jackknife_stderr_from_totals(sums, counts, s_stat);
  return report;
}

BellReport BellHarness::clauser_horne(double a, double ap, double b, double bp,
                                      CoincidenceEngine engine, double eta) {
  BellReport report;
  report.efficiency = eta;

  const auto coincidence = [&](double x, double y) {
    if (engine == CoincidenceEngine::Gaussian) return gaussian_rate(x, y);
    return mc_pair_rates(x, y, engine == CoincidenceEngine::Clipped).corrected;
  };
  const auto open_coincidence = [&](std::optional<double> x, std::optional<double> y) {
    if (engine == CoincidenceEngine::Gaussian) return gaussian_rate(x, y);
    return mc_pair_rates(x, y, engine == CoincidenceEngine::Clipped).corrected;
  };

  // Homogeneous variant: coincidence excesses only, polarizer-removed rates
  // from the open ports.
  report.homogeneous_ch = coincidence(a, b) - coincidence(a, bp) + coincidence(ap, b) +
                          coincidence(ap, bp) - open_coincidence(ap, std::nullopt) -
                          open_coincidence(std::nullopt, b);
  report.homogeneous_violated = report.homogeneous_ch > 0;

  // Genuine variant: absolute per-window rates scaled by eta.
  if (engine == CoincidenceEngine::Gaussian) {
    // Analytic coincidences carry no accidental floor; singles are the mean
    // excess intensities.
    FieldProbe p1;
    p1.beam = 1;
    p1.distance = options_.distance;
    p1.samples = 1;
    p1.polarizer = ap;
    FieldProbe p2 = p1;
    p2.beam = 2;
    p2.polarizer = b;
    const auto excess = [&](const FieldProbe& p) {
      const auto [es, os] = beam_sectors(p.beam);
      const double c = std::cos(*p.polarizer), s = std::sin(*p.polarizer);
      const double ee = analytic_.hermitian_correlation(es, 0, 0, es, 0, 0, true).real();
      const double oo = analytic_.hermitian_correlation(os, 0, 0, os, 0, 0, true).real();
      return c * c * ee + s * s * oo;
    };
    report.genuine_ch = eta * eta *
                            (gaussian_rate(a, b) - gaussian_rate(a, bp) +
                             gaussian_rate(ap, b) + gaussian_rate(ap, bp)) -
                        eta * excess(p1) - eta * excess(p2);
  } else {
    const bool clipped = engine == CoincidenceEngine::Clipped;
    const auto raw = [&](double x, double y) { return mc_pair_rates(x, y, clipped).raw; };
    const RateReport s1 = singles(1, ap, clipped);
    const RateReport s2 = singles(2, b, clipped);
    report.genuine_ch = eta * eta * (raw(a, b) - raw(a, bp) + raw(ap, b) + raw(ap, bp)) -
                        eta * s1.rate - eta * s2.rate;
    report.genuine_stderr =
        std::sqrt(std::pow(eta, 4) * (std::pow(mc_pair_rates(a, b, clipped).stderr, 2)) +
                  eta * eta * (s1.stderr * s1.stderr + s2.stderr * s2.stderr));
    report.dark_singles_1 = s1.dark_excess;
    report.dark_singles_2 = s2.dark_excess;
  }
  report.genuine_violated = report.genuine_ch > 0;
  return report;
}

LhvCheck BellHarness::lhv_decomposition_check(double phi1, double phi2) {
  LhvCheck check;
  const Eigen::VectorXd x = column(1, phi1, true, false);
  const Eigen::VectorXd y = column(2, phi2, true, false);
  const double joint = mc_pair_rates(phi1, phi2, true).raw;
  // The same product mean, accumulated independently realization by
  // realization: the joint rate must be literally this factored form.
  double acc = 0.0;
  for (Eigen::Index r = 0; r < x.size(); ++r) acc += x[r] * y[r];
  acc /= static_cast<double>(x.size());
  check.identity_discrepancy = std::abs(joint - acc);

  // Realigning detector 2 across realizations must destroy the coincidence
  // excess: only the accidental floor survives.
  Eigen::VectorXd y_shift(y.size());
  y_shift.head(y.size() - 1) = y.tail(y.size() - 1);
  y_shift[y.size() - 1] = y[0];
  const double mx = x.mean(), my = y_shift.mean();
  const Eigen::ArrayXd resid = (x.array() - mx) * (y_shift.array() - my);
  check.shuffled_excess = resid.mean();
  const auto n = static_cast<double>(x.size());
  check.shuffled_stderr = std::sqrt((resid - resid.mean()).square().sum() / (n - 1) / n);
  return check;
}

}  // namespace zpdc
