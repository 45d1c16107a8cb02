#pragma once

// Kernel-side representations: Riesz potentials R_alpha extracted from the
// heat semigroup, singular kernels |x|^{-Q-alpha} for the principal-value
// form of the fractional power, and group convolution on the lattice.

#include <Eigen/Dense>

#include <iosfwd>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "hfrac/lattice.hpp"
#include "hfrac/spectral.hpp"

namespace hfrac {

enum class KernelKind { riesz, singular, geometric };
enum class Normalization { analytic_surrogate, heat_extracted, calibrated };

struct KernelSpec {
  KernelKind kind = KernelKind::riesz;
  double alpha = 1.0;
  int n = 1;
  Normalization normalization = Normalization::analytic_surrogate;
  double constant = 1.0;

  /// Exponent of the gauge: alpha - Q (riesz, geometric) or -Q - alpha (singular).
  double exponent() const;
  void validate() const;
};

/// constant * gauge(p)^exponent. Throws at the identity.
double analytic_kernel(const KernelSpec& spec, const GroupPoint& p);

struct KernelTable {
  LatticePtr lattice;
  Eigen::VectorXd values;  ///< one value per node; origin entry per PV policy
  /// Constant added to a mean-zero kernel (zero-mode renormalization); 0 if none.
  double offset = 0.0;
  KernelSpec spec;
};

/// Heat-extracted Riesz kernel: (1/Gamma(alpha/2)) int t^{alpha/2-1} h(t, x) dt
/// with the zero mode projected out, then shifted by a constant so its
/// minimum over nodes is 0. Convolution with it equals L^{-alpha/2} on
/// mean-zero functions and preserves positivity.
KernelTable riesz_kernel_from_heat(const SpectralDecomposition& decomp, double alpha, const HeatQuadrature& quad);

/// Singular kernel read off L^{alpha/2}: K(x) = -(L^{alpha/2} delta_0)(x) for
/// x != 0, K(0) = 0. Its PV sum reproduces L^{alpha/2} exactly.
KernelTable singular_kernel_from_heat(const SpectralDecomposition& decomp, double alpha);

/// sum over lattice images of |gamma x|^{-Q-alpha}, summed over a gauge ball
/// of radius cutoff_periods * M h plus the continuum tail beyond it. Origin is 0.
/// cutoff_periods <= 0 selects 8 for n = 1 and 2 otherwise.
KernelTable periodized_singular_kernel(LatticePtr lattice, double alpha, double constant = 1.0,
                                       double cutoff_periods = 0.0);

/// Analytic kernel evaluated at the wrap-aware gauge of each node (origin 0).
KernelTable analytic_kernel_table(LatticePtr lattice, const KernelSpec& spec);

/// Lebesgue measure of the unit Koranyi ball in H^n.
double koranyi_ball_volume(int n);

/// C(x, y) = K(y^{-1} x) * cell_volume.
Eigen::MatrixXd convolution_matrix(const KernelTable& kernel);

/// (u * K)(x) = sum_y u(y) K(y^{-1} x) cell_volume.
Eigen::VectorXd group_convolve(const Lattice& lattice, const Eigen::VectorXd& u, const KernelTable& kernel);
GridFunction group_convolve(const GridFunction& u, const KernelTable& kernel);

/// The PV operator (S u)(x) = constant * sum_{y != x} (u(x) - u(y)) K(y^{-1} x) vol.
struct SingularOperator {
  KernelTable kernel;  ///< unscaled kernel
  double constant = 1.0;
  Eigen::MatrixXd matrix;

  Eigen::VectorXd apply(const Eigen::VectorXd& u) const { return matrix * u; }
  SingularOperator scaled(double new_constant) const;
};

SingularOperator make_singular_operator(KernelTable kernel, double constant = 1.0);

/// PV sum with the periodized analytic kernel; alpha in (0, 2).
GridFunction singular_frac_apply(const GridFunction& u, double alpha, double constant);

struct CalibrationResult {
  double constant = 0.0;
  /// sqrt(sum ||c S u - L^{alpha/2} u||^2 / sum ||L^{alpha/2} u||^2) over the corpus.
  double residual = 0.0;
};

/// Least-squares scalar fit of the unit-constant PV operator to L^{alpha/2}.
CalibrationResult calibrate_singular_constant(const SpectralDecomposition& decomp, const SingularOperator& unit,
                                              std::span<const Eigen::VectorXd> corpus);
CalibrationResult calibrate_singular_constant(const SpectralDecomposition& decomp, double alpha,
                                              std::span<const Eigen::VectorXd> corpus);

/// Cache of Riesz potential operators R_sigma f = f * R_sigma (dense matrices
/// built from heat-extracted kernels). Order 0 is the identity. Thread-safe.
class RieszFamily {
 public:
  RieszFamily(const SpectralDecomposition& decomp, HeatQuadrature quad);
  explicit RieszFamily(const SpectralDecomposition& decomp);

  const Eigen::MatrixXd& matrix(double order) const;
  Eigen::VectorXd apply(double order, const Eigen::VectorXd& f) const;
  const SpectralDecomposition& decomposition() const { return *decomp_; }
  int Q() const { return decomp_->lattice->Q(); }

 private:
  const SpectralDecomposition* decomp_;
  HeatQuadrature quad_;
  mutable std::mutex mutex_;
  mutable std::map<double, std::unique_ptr<Eigen::MatrixXd>> cache_;
};

/// CSV: node,gauge,kernel.
void write_kernel_csv(std::ostream& out, const KernelTable& kernel);

}  // namespace hfrac
