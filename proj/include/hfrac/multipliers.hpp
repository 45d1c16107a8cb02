#pragma once

// Scalar spectral multipliers of the two fractional operators on H^n, indexed
// by the Laguerre level k and the central frequency lambda, and the lattice
// realization of the geometric operator as a calibrated PV sum.

#include <Eigen/Dense>

#include <iosfwd>
#include <span>

#include "hfrac/kernels.hpp"
#include "hfrac/lattice.hpp"

namespace hfrac {

struct MultiplierPoint {
  int k = 0;
  double lambda = 1.0;
  double alpha = 1.0;
  int n = 1;

  void validate() const;
};

/// ((2k+n)|lambda|)^{alpha/2}.
double multiplier_A(const MultiplierPoint& pt);

/// (2|lambda|)^{alpha/2} Gamma((2k+n)/2 + (2+alpha)/4) / Gamma((2k+n)/2 + (2-alpha)/4).
double multiplier_A_tilde(const MultiplierPoint& pt);

/// ML_alpha as a PV operator with the periodized geometric kernel and the
/// given constant. alpha in (0, 2).
SingularOperator geometric_operator(LatticePtr lattice, double alpha, double constant);
/// Same, with the constant fitted to L^{alpha/2} over the corpus.
SingularOperator calibrated_geometric_operator(const SpectralDecomposition& decomp, double alpha,
                                               std::span<const Eigen::VectorXd> calibration_corpus);

GridFunction geometric_frac_apply(const GridFunction& u, double alpha, double constant);

/// ML(uv) - u ML v - v ML u, evaluated as the equivalent bilinear kernel sum.
Eigen::VectorXd h_alpha_geometric(const SingularOperator& op, const Eigen::VectorXd& u, const Eigen::VectorXd& v);
GridFunction h_alpha_geometric(const GridFunction& u, const GridFunction& v, double alpha, double constant);

struct MultiplierRow {
  int k = 0;
  double lambda = 0.0;
  double alpha = 0.0;
  double A = 0.0;
  double A_tilde = 0.0;
  double ratio() const { return A_tilde / A; }
};

std::vector<MultiplierRow> multiplier_table(int n, double alpha, int kmax, std::span<const double> lambdas);

/// CSV: k,lambda,alpha,A,A_tilde,ratio.
void write_multiplier_csv(std::ostream& out, std::span<const MultiplierRow> rows);

}  // namespace hfrac
