#include "zpdc/detection.hpp"

#include <cmath>
#include <stdexcept>

namespace zpdc {

DetectorConfig make_detector(const ModeGrid& grid, FieldProbe probe, bool clip) {
  DetectorConfig det;
  det.vacuum_intensity = vacuum_reference(grid, probe);
  det.probe = std::move(probe);
  det.clip = clip;
  return det;
}

Eigen::MatrixXd intensity(const Eigen::MatrixXcd& field) { return field.cwiseAbs2(); }

double vacuum_reference(const ModeGrid& grid, const FieldProbe& probe) {
  const auto [e_sec, o_sec] = beam_sectors(probe.beam);
  const auto sector_sum = [&](Sector s) {
    double sum = 0.0;
    const int begin = grid.sector_begin(s);
    for (int k = 0; k < grid.sector_size(); ++k) {
      const double w = grid.mode(begin + k).weight;
      sum += w * w / 2;
    }
    return sum;
  };
  if (!probe.polarizer) return sector_sum(e_sec) + sector_sum(o_sec);
  const double c = std::cos(*probe.polarizer), s = std::sin(*probe.polarizer);
  return c * c * sector_sum(e_sec) + s * s * sector_sum(o_sec);
}

WindowResponses window_responses(const Eigen::MatrixXcd& amplitudes, const ModeGrid& grid,
                                 const DetectorConfig& det, double time_offset) {
  FieldProbe probe = det.probe;
  probe.start += time_offset;
  const auto times = probe_times(probe);
  const BeamField beam = assemble_beam(amplitudes, grid, probe.beam, probe.distance, times);
  Eigen::MatrixXd window;
  if (probe.polarizer)
    window = intensity(polarize(beam, *probe.polarizer));
  else
    window = intensity(beam.e_axis) + intensity(beam.o_axis);
  WindowResponses resp;
  resp.standard = window.rowwise().mean().array() - det.vacuum_intensity;
  resp.clipped = resp.standard.cwiseMax(0.0);
  return resp;
}

namespace {

double mean_of(const Eigen::VectorXd& v) { return v.mean(); }

double stderr_of(const Eigen::VectorXd& v) {
  const auto n = static_cast<double>(v.size());
  if (n < 2) return 0.0;
  const double m = v.mean();
  const double var = (v.array() - m).square().sum() / (n - 1);
  return std::sqrt(var / n);
}

double negative_fraction(const Eigen::VectorXd& standard) {
  return static_cast<double>((standard.array() < 0.0).count()) /
         static_cast<double>(standard.size());
}

}  // namespace

RateReport singles_rate(const OutputEnsemble& out, const ModeGrid& grid,
                        const DetectorConfig& det) {
  const WindowResponses resp = window_responses(out.amplitudes, grid, det);
  const Eigen::VectorXd& active = det.clip ? resp.clipped : resp.standard;
  RateReport report;
  report.rate = det.efficiency * mean_of(active);
  report.stderr = det.efficiency * stderr_of(active);
  report.negative_window_fraction = negative_fraction(resp.standard);
  report.dark_excess = mean_of(resp.clipped) - mean_of(resp.standard);
  report.n_samples = static_cast<long>(active.size());
  return report;
}

RateReport joint_rate_direct(const OutputEnsemble& out, const ModeGrid& grid,
                             const DetectorConfig& det1, const DetectorConfig& det2,
                             double tau) {
  const WindowResponses r1 = window_responses(out.amplitudes, grid, det1);
  const WindowResponses r2 = window_responses(out.amplitudes, grid, det2, tau);
  if (r1.standard.size() != r2.standard.size())
    throw std::invalid_argument("mismatched realization counts");
  const Eigen::VectorXd& a = det1.clip ? r1.clipped : r1.standard;
  const Eigen::VectorXd& b = det2.clip ? r2.clipped : r2.standard;
  const double eff = det1.efficiency * det2.efficiency;
  const Eigen::VectorXd prod = a.cwiseProduct(b);
  RateReport report;
  report.rate = eff * mean_of(prod);
  report.stderr = eff * stderr_of(prod);
  report.accidental = eff * mean_of(a) * mean_of(b);
  report.corrected = report.rate - report.accidental;
  report.negative_window_fraction =
      0.5 * (negative_fraction(r1.standard) + negative_fraction(r2.standard));
  report.dark_excess =
      eff * (mean_of(r1.clipped.cwiseProduct(r2.clipped)) -
             mean_of(r1.standard.cwiseProduct(r2.standard)));
  report.n_samples = static_cast<long>(prod.size());
  return report;
}

double joint_rate_gaussian(const AnalyticCorrelator& analytic, const DetectorConfig& det1,
                           const DetectorConfig& det2, double tau) {
  const auto t1 = probe_times(det1.probe);
  FieldProbe probe2 = det2.probe;
  probe2.start += tau;
  const auto t2 = probe_times(probe2);

  // Effective component lists: a polarizer makes one coherent combination,
  // an open port sums the two axis intensities separately.
  using Component = std::vector<std::pair<Sector, double>>;
  const auto components = [&](const FieldProbe& probe) {
    const auto [e_sec, o_sec] = beam_sectors(probe.beam);
    std::vector<Component> list;
    if (probe.polarizer)
      list.push_back({{e_sec, std::cos(*probe.polarizer)}, {o_sec, std::sin(*probe.polarizer)}});
    else {
      list.push_back({{e_sec, 1.0}});
      list.push_back({{o_sec, 1.0}});
    }
    return list;
  };

  const double norm = static_cast<double>(t1.size()) * static_cast<double>(t2.size());
  double total = 0.0;
  for (const auto& comp1 : components(det1.probe))
    for (const auto& comp2 : components(probe2)) {
      Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(t1.size()),
                                                  static_cast<Eigen::Index>(t2.size()));
      for (const auto& [sa, ca] : comp1)
        for (const auto& [sb, cb] : comp2)
          c += (ca * cb) * analytic.pair_correlation_matrix(sa, det1.probe.distance, t1, sb,
                                                            probe2.distance, t2);
      total += c.cwiseAbs2().sum() / norm;
    }
  return det1.efficiency * det2.efficiency * total;
}

}  // namespace zpdc
