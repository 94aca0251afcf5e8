#pragma once

#include <Eigen/Dense>
#include <complex>
#include <span>

#include "zpdc/crystal.hpp"
#include "zpdc/mode_grid.hpp"

namespace zpdc {

struct CorrelationEstimate {
  enum class Kind { MonteCarlo, Analytic };
  std::complex<double> value{0.0, 0.0};
  double stderr = 0.0;  // 0 for analytic values
  long n_samples = 0;
  Kind kind = Kind::MonteCarlo;
};

/// Exact second-moment engine for the transformed field. All correlation
/// functions reduce to mode sums over the precomputed map moments with
/// <a conj(a)> = 1/2 per incoming mode.
class AnalyticCorrelator {
public:
  AnalyticCorrelator(const ModeGrid& grid, const CrystalParams& params,
                     const KernelParams& kernel = {});

  /// <F_a(ra,ta) F_b(rb,tb)> for the transformed ensemble.
  std::complex<double> pair_correlation(Sector a, double ra, double ta, Sector b, double rb,
                                        double tb) const;

  /// <F_a(ra,ta) conj(F_b(rb,tb))>, optionally with the incoming-vacuum
  /// contribution removed.
  std::complex<double> hermitian_correlation(Sector a, double ra, double ta, Sector b,
                                             double rb, double tb,
                                             bool subtract_vacuum) const;

  /// pair_correlation evaluated on two time grids at once (rows: times_a,
  /// cols: times_b), assembled as a matrix product for speed.
  Eigen::MatrixXcd pair_correlation_matrix(Sector a, double ra, std::span<const double> times_a,
                                           Sector b, double rb,
                                           std::span<const double> times_b) const;

  /// Cross-correlation <F_E(0,0) F_O(0,tau)>; the g V nu(tau) envelope.
  std::complex<double> cross(double tau) const;

  /// Excess autocorrelation <F(0,0) conj(F(0,tau))> minus the vacuum term;
  /// the g^2 |V|^2 mu(tau) envelope.
  std::complex<double> autocorrelation(Sector sector, double tau) const;

  /// First tau (on a fine scan) where |mu| drops below 1/e of |mu(0)|.
  double coherence_time(Sector sector) const;

  const TransformMap& map() const { return map_; }
  const Eigen::MatrixXcd& pair_moments() const { return pair_; }
  const Eigen::MatrixXcd& hermitian_moments() const { return hermitian_; }
  const ModeGrid& grid() const { return grid_; }
  const CrystalParams& params() const { return params_; }

private:
  ModeGrid grid_;
  CrystalParams params_;
  TransformMap map_;
  Eigen::MatrixXcd pair_;       // <out out^T>
  Eigen::MatrixXcd hermitian_;  // <out out^+>
};

/// Monte Carlo mean of a_r * b_r (or a_r * conj(b_r)) over realizations,
/// with a jackknife standard error. For a plain mean the leave-one-out
/// algebra collapses to the classic s / sqrt(R) formula, which is what is
/// evaluated; the reported stderr combines both complex components.
CorrelationEstimate mc_correlation(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b,
                                   bool conjugate_b);

}  // namespace zpdc
