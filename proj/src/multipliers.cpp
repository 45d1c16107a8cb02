#include "hfrac/multipliers.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <iomanip>
#include <ostream>

#include "hfrac/commutators.hpp"

namespace hfrac {

void MultiplierPoint::validate() const {
  require(n >= 1, "multiplier: n must be >= 1");
  require(k >= 0, "multiplier: k must be >= 0");
  require(lambda != 0.0 && std::isfinite(lambda), "multiplier: lambda must be nonzero");
  require(alpha > 0.0 && alpha < 2 * n + 2, "multiplier: alpha must lie in (0, Q)");
}

double multiplier_A(const MultiplierPoint& pt) {
  pt.validate();
  return std::pow((2.0 * pt.k + pt.n) * std::abs(pt.lambda), pt.alpha / 2.0);
}

double multiplier_A_tilde(const MultiplierPoint& pt) {
  pt.validate();
  const double z = (2.0 * pt.k + pt.n) / 2.0;
  const double ratio = boost::math::tgamma_ratio(z + (2.0 + pt.alpha) / 4.0, z + (2.0 - pt.alpha) / 4.0);
  return std::pow(2.0 * std::abs(pt.lambda), pt.alpha / 2.0) * ratio;
}

SingularOperator geometric_operator(LatticePtr lattice, double alpha, double constant) {
  require(alpha > 0.0 && alpha < 2.0, "geometric operator: alpha must lie in (0, 2)");
  SingularOperator op = make_singular_operator(periodized_singular_kernel(std::move(lattice), alpha), constant);
  op.kernel.spec.kind = KernelKind::geometric;
  return op;
}

SingularOperator calibrated_geometric_operator(const SpectralDecomposition& decomp, double alpha,
                                               std::span<const Eigen::VectorXd> calibration_corpus) {
  require(decomp.lattice != nullptr, "calibrated_geometric_operator: decomposition has no lattice");
  SingularOperator unit = geometric_operator(decomp.lattice, alpha, 1.0);
  const CalibrationResult fit = calibrate_singular_constant(decomp, unit, calibration_corpus);
  SingularOperator op = unit.scaled(fit.constant);
  op.kernel.spec.normalization = Normalization::calibrated;
  op.kernel.spec.constant = fit.constant;
  return op;
}

GridFunction geometric_frac_apply(const GridFunction& u, double alpha, double constant) {
  require(alpha > 0.0 && alpha < 2.0, "geometric operator: alpha must lie in (0, 2)");
  return singular_frac_apply(u, alpha, constant);
}

Eigen::VectorXd h_alpha_geometric(const SingularOperator& op, const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  // The rearranged bilinear sum: exact zero on constants, exact u <-> v symmetry.
  return h_alpha_bilinear(op, u, v);
}

GridFunction h_alpha_geometric(const GridFunction& u, const GridFunction& v, double alpha, double constant) {
  require_same_lattice(*u.lattice, *v.lattice, "h_alpha_geometric");
  const SingularOperator op = geometric_operator(u.lattice, alpha, constant);
  return {u.lattice, h_alpha_geometric(op, u.values, v.values)};
}

std::vector<MultiplierRow> multiplier_table(int n, double alpha, int kmax, std::span<const double> lambdas) {
  require(kmax >= 0, "multiplier_table: kmax must be >= 0");
  require(!lambdas.empty(), "multiplier_table: at least one lambda is required");
  std::vector<MultiplierRow> rows;
  for (double lambda : lambdas) {
    for (int k = 0; k <= kmax; ++k) {
      const MultiplierPoint pt{k, lambda, alpha, n};
      rows.push_back({k, lambda, alpha, multiplier_A(pt), multiplier_A_tilde(pt)});
    }
  }
  return rows;
}

void write_multiplier_csv(std::ostream& out, std::span<const MultiplierRow> rows) {
  out << "k,lambda,alpha,A,A_tilde,ratio\n" << std::setprecision(17);
  for (const MultiplierRow& r : rows) {
    out << r.k << ',' << r.lambda << ',' << r.alpha << ',' << r.A << ',' << r.A_tilde << ',' << r.ratio() << '\n';
  }
}

}  // namespace hfrac
