#include "zpdc/correlation.hpp"

#include <cmath>
#include <stdexcept>

namespace zpdc {

AnalyticCorrelator::AnalyticCorrelator(const ModeGrid& grid, const CrystalParams& params,
                                       const KernelParams& kernel)
    : grid_(grid),
      params_(params),
      map_(build_transform_map(grid, params, kernel)),
      pair_(pair_moment(map_)),
      hermitian_(hermitian_moment(map_)) {}

namespace {
std::complex<double> phase(double x) { return std::exp(std::complex<double>(0.0, x)); }
}  // namespace

std::complex<double> AnalyticCorrelator::pair_correlation(Sector a, double ra, double ta,
                                                          Sector b, double rb,
                                                          double tb) const {
  const int a0 = grid_.sector_begin(a), b0 = grid_.sector_begin(b);
  const int n = grid_.sector_size();
  const double ca = grid_.center(a), cb = grid_.center(b);
  std::complex<double> sum{0.0, 0.0};
  for (int i = 0; i < n; ++i) {
    const auto& mk = grid_.mode(a0 + i);
    for (int j = 0; j < n; ++j) {
      const auto& ml = grid_.mode(b0 + j);
      const std::complex<double> moment = pair_(a0 + i, b0 + j);
      if (moment == std::complex<double>(0.0, 0.0)) continue;
      sum += mk.weight * ml.weight * moment *
             phase(mk.frequency * ra + ml.frequency * rb + (ca - mk.frequency) * ta +
                   (cb - ml.frequency) * tb);
    }
  }
  return -sum;  // the two i prefactors of the field sums
}

std::complex<double> AnalyticCorrelator::hermitian_correlation(Sector a, double ra, double ta,
                                                               Sector b, double rb, double tb,
                                                               bool subtract_vacuum) const {
  const int a0 = grid_.sector_begin(a), b0 = grid_.sector_begin(b);
  const int n = grid_.sector_size();
  const double ca = grid_.center(a), cb = grid_.center(b);
  std::complex<double> sum{0.0, 0.0};
  for (int i = 0; i < n; ++i) {
    const auto& mk = grid_.mode(a0 + i);
    for (int j = 0; j < n; ++j) {
      const auto& ml = grid_.mode(b0 + j);
      std::complex<double> moment = hermitian_(a0 + i, b0 + j);
      if (subtract_vacuum && a == b && i == j) moment -= 0.5;
      if (moment == std::complex<double>(0.0, 0.0)) continue;
      sum += mk.weight * ml.weight * moment *
             phase(mk.frequency * ra - ml.frequency * rb + (ca - mk.frequency) * ta -
                   (cb - ml.frequency) * tb);
    }
  }
  return sum;  // i * conj(i) = 1
}

Eigen::MatrixXcd AnalyticCorrelator::pair_correlation_matrix(
    Sector a, double ra, std::span<const double> times_a, Sector b, double rb,
    std::span<const double> times_b) const {
  const int a0 = grid_.sector_begin(a), b0 = grid_.sector_begin(b);
  const int n = grid_.sector_size();
  const auto mode_factors = [&](Sector s, int begin, double r,
                                std::span<const double> times) {
    Eigen::MatrixXcd u(static_cast<Eigen::Index>(times.size()), n);
    const double center = grid_.center(s);
    for (int k = 0; k < n; ++k) {
      const auto& mode = grid_.mode(begin + k);
      const std::complex<double> fixed =
          std::complex<double>(0.0, mode.weight) *
          phase(mode.frequency * r);
      const double slow = center - mode.frequency;
      for (std::size_t i = 0; i < times.size(); ++i)
        u(static_cast<Eigen::Index>(i), k) = fixed * phase(slow * times[i]);
    }
    return u;
  };
  const Eigen::MatrixXcd ua = mode_factors(a, a0, ra, times_a);
  const Eigen::MatrixXcd ub = mode_factors(b, b0, rb, times_b);
  return ua * pair_.block(a0, b0, n, n) * ub.transpose();
}

std::complex<double> AnalyticCorrelator::cross(double tau) const {
  return pair_correlation(Sector::E, 0.0, 0.0, Sector::O, 0.0, tau);
}

std::complex<double> AnalyticCorrelator::autocorrelation(Sector sector, double tau) const {
  return hermitian_correlation(sector, 0.0, 0.0, sector, 0.0, tau, true);
}

double AnalyticCorrelator::coherence_time(Sector sector) const {
  const double peak = std::abs(autocorrelation(sector, 0.0));
  if (peak == 0.0) throw std::runtime_error("coherence_time undefined for zero coupling");
  const double target = peak / std::exp(1.0);
  const double bw = grid_.bandwidth();
  const double step = bw > 0 ? 0.01 / bw : 0.01;
  const double limit = bw > 0 ? 1e4 / bw : 1e4;
  for (double tau = step; tau < limit; tau += step)
    if (std::abs(autocorrelation(sector, tau)) < target) return tau;
  throw std::runtime_error("coherence time not found within the scan range");
}

CorrelationEstimate mc_correlation(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b,
                                   bool conjugate_b) {
  if (a.size() != b.size())
    throw std::invalid_argument("mismatched realization counts");
  const Eigen::Index n = a.size();
  if (n < 2) throw std::invalid_argument("need at least two realizations");
  Eigen::VectorXcd prod = conjugate_b ? a.cwiseProduct(b.conjugate()).eval()
                                      : a.cwiseProduct(b).eval();
  const std::complex<double> mean = prod.mean();
  double var = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) var += std::norm(prod[i] - mean);
  const double stderr = std::sqrt(var / (static_cast<double>(n) * (static_cast<double>(n) - 1)));
  return {mean, stderr, static_cast<long>(n), CorrelationEstimate::Kind::MonteCarlo};
}

}  // namespace zpdc
