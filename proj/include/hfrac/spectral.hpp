#pragma once

// Functional calculus of the discrete sub-Laplacian through a dense
// symmetric eigendecomposition, plus the heat-semigroup quadrature route
// used as an independent check of fractional powers.

#include <Eigen/Dense>

#include <iosfwd>

#include "hfrac/lattice.hpp"

namespace hfrac {

struct SpectralDecomposition {
  Eigen::VectorXd eigenvalues;   ///< ascending
  Eigen::MatrixXd eigenvectors;  ///< orthonormal columns
  double zero_mode_tolerance = 1e-10;
  LatticePtr lattice;  ///< may be null for decompositions of raw matrices

  Eigen::Index size() const { return eigenvalues.size(); }
  bool is_zero_mode(Eigen::Index i) const { return std::abs(eigenvalues[i]) <= zero_mode_tolerance; }
  /// Smallest eigenvalue above the zero-mode tolerance.
  double spectral_gap() const;
};

/// Throws UsageError if the matrix is not symmetric.
SpectralDecomposition decompose(const Eigen::MatrixXd& matrix, LatticePtr lattice = nullptr);
SpectralDecomposition decompose(const SubLaplacianOperator& op);

enum class ZeroModePolicy { project_out, keep_zero };
enum class PowerRoute { eigen, heat_integral };

struct FractionalPowerSpec {
  double s = 0.0;
  ZeroModePolicy zero_mode = ZeroModePolicy::project_out;
  PowerRoute route = PowerRoute::eigen;
};

/// Eigenvalue-wise multiplier lambda_i^s (0^s := 0 under project-out; under
/// keep-zero 0^0 = 1 and 0^s = 0 for s > 0).
Eigen::VectorXd power_multiplier(const SpectralDecomposition& decomp, const FractionalPowerSpec& spec);

Eigen::VectorXd apply_multiplier(const SpectralDecomposition& decomp, const Eigen::VectorXd& multiplier,
                                 const Eigen::VectorXd& u);
Eigen::MatrixXd multiplier_matrix(const SpectralDecomposition& decomp, const Eigen::VectorXd& multiplier);

Eigen::VectorXd frac_power_apply(const SpectralDecomposition& decomp, const FractionalPowerSpec& spec,
                                 const Eigen::VectorXd& u);
GridFunction frac_power_apply(const SpectralDecomposition& decomp, const FractionalPowerSpec& spec,
                              const GridFunction& u);
/// Dense matrix of L^s (eigen route), for repeated application.
Eigen::MatrixXd frac_power_matrix(const SpectralDecomposition& decomp, const FractionalPowerSpec& spec);

/// e^{-tL} u.
Eigen::VectorXd heat_apply(const SpectralDecomposition& decomp, double t, const Eigen::VectorXd& u);
GridFunction heat_apply(const SpectralDecomposition& decomp, double t, const GridFunction& u);

/// Log-uniform trapezoidal rule on [t_min, t_max] for integrals in dt.
struct HeatQuadrature {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
  double t_min = 1e-6;
  double t_max = 1.0;

  static HeatQuadrature log_uniform(double t_min, double t_max, int count);
  /// t_max = 20 / spectral gap, 400 nodes by default.
  static HeatQuadrature for_spectrum(const SpectralDecomposition& decomp, int count = 400, double t_min = 1e-6);
};

/// Quadrature of int_0^inf t^{p-1} e^{-t lambda} dt (= Gamma(p) lambda^{-p})
/// with an analytic head on (0, t_min] and a tail beyond t_max that decays at
/// the rate of the spectral gap.
double heat_moment(double lambda, double p, const HeatQuadrature& quad, double gap);

/// (1/Gamma(alpha/2)) int_0^inf t^{alpha/2-1} e^{-tL} u dt on mean-zero u.
Eigen::VectorXd heat_integral_negative_power(const SpectralDecomposition& decomp, double alpha,
                                             const HeatQuadrature& quad, const Eigen::VectorXd& u);
GridFunction heat_integral_negative_power(const SpectralDecomposition& decomp, double alpha,
                                          const HeatQuadrature& quad, const GridFunction& u);

struct PositivePowerResult {
  Eigen::VectorXd values;
  /// Least-squares factor c with values ~= c L^{alpha/2} u.
  double normalization_ratio = 0.0;
  /// ||values - c L^{alpha/2} u|| / ||values||.
  double ratio_residual = 0.0;
};

/// (1/Gamma(alpha/2)) int_0^inf t^{k-alpha/2-1} L^k e^{-tL} u dt, for integer
/// k > alpha/2. This equals Gamma(k - alpha/2)/Gamma(alpha/2) L^{alpha/2} u;
/// the factor is measured against the eigen route and reported.
PositivePowerResult heat_integral_positive_power(const SpectralDecomposition& decomp, double alpha, int k,
                                                 const HeatQuadrature& quad, const Eigen::VectorXd& u);

/// Gamma(k - alpha/2) / Gamma(alpha/2).
double positive_power_normalization(double alpha, int k);

void write_eigenvalues_csv(std::ostream& out, const SpectralDecomposition& decomp);

}  // namespace hfrac
