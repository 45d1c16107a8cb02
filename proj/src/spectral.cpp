#include "hfrac/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>

namespace hfrac {

double SpectralDecomposition::spectral_gap() const {
  for (Eigen::Index i = 0; i < size(); ++i) {
    if (eigenvalues[i] > zero_mode_tolerance) return eigenvalues[i];
  }
  throw UsageError("spectral_gap: no eigenvalue above the zero-mode tolerance");
}

SpectralDecomposition decompose(const Eigen::MatrixXd& matrix, LatticePtr lattice) {
  require(matrix.rows() == matrix.cols() && matrix.rows() > 0, "decompose: matrix must be square and nonempty");
  const double scale = std::max(1.0, matrix.cwiseAbs().maxCoeff());
  require((matrix - matrix.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale, "decompose: matrix is not symmetric");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(matrix);
  if (solver.info() != Eigen::Success) throw std::runtime_error("decompose: eigensolver did not converge");

  SpectralDecomposition out;
  out.eigenvalues = solver.eigenvalues();
  out.eigenvectors = solver.eigenvectors();
  out.lattice = std::move(lattice);
  // Fix the sign of each eigenvector so the decomposition is reproducible:
  // the largest-magnitude entry is positive.
  for (Eigen::Index j = 0; j < out.eigenvectors.cols(); ++j) {
    Eigen::Index arg = 0;
    out.eigenvectors.col(j).cwiseAbs().maxCoeff(&arg);
    if (out.eigenvectors(arg, j) < 0.0) out.eigenvectors.col(j) *= -1.0;
  }
  return out;
}

SpectralDecomposition decompose(const SubLaplacianOperator& op) {
  return decompose(Eigen::MatrixXd(op.matrix), op.lattice);
}

Eigen::VectorXd power_multiplier(const SpectralDecomposition& decomp, const FractionalPowerSpec& spec) {
  require(std::isfinite(spec.s), "fractional power: exponent must be finite");
  require(!(spec.s < 0.0 && spec.zero_mode == ZeroModePolicy::keep_zero),
          "fractional power: negative exponent requires the project-out zero-mode policy");
  Eigen::VectorXd m(decomp.size());
  for (Eigen::Index i = 0; i < decomp.size(); ++i) {
    if (decomp.is_zero_mode(i)) {
      m[i] = (spec.zero_mode == ZeroModePolicy::keep_zero && spec.s == 0.0) ? 1.0 : 0.0;
      continue;
    }
    require(decomp.eigenvalues[i] > 0.0, "fractional power: operator has a negative eigenvalue");
    m[i] = std::pow(decomp.eigenvalues[i], spec.s);
  }
  return m;
}

Eigen::VectorXd apply_multiplier(const SpectralDecomposition& decomp, const Eigen::VectorXd& multiplier,
                                 const Eigen::VectorXd& u) {
  require(u.size() == decomp.size(), "apply_multiplier: size mismatch");
  const Eigen::VectorXd coeffs = decomp.eigenvectors.transpose() * u;
  return decomp.eigenvectors * multiplier.cwiseProduct(coeffs);
}

Eigen::MatrixXd multiplier_matrix(const SpectralDecomposition& decomp, const Eigen::VectorXd& multiplier) {
  return decomp.eigenvectors * multiplier.asDiagonal() * decomp.eigenvectors.transpose();
}

namespace {

void require_mean_zero(const Eigen::VectorXd& u, const char* what) {
  const double scale = u.cwiseAbs().sum();
  require(std::abs(u.sum()) <= 1e-9 * scale + 1e-300,
          std::string(what) + ": input must be mean-zero (the zero mode diverges)");
}

double quadrature_sigma_check(const SpectralDecomposition& decomp, double alpha) {
  const int Q = decomp.lattice ? decomp.lattice->Q() : std::numeric_limits<int>::max();
  require(alpha > 0.0 && alpha < Q, "heat integral: alpha must lie in (0, Q)");
  return alpha / 2.0;
}

}  // namespace

Eigen::VectorXd frac_power_apply(const SpectralDecomposition& decomp, const FractionalPowerSpec& spec,
                                 const Eigen::VectorXd& u) {
  if (spec.route == PowerRoute::heat_integral && spec.s != 0.0) {
    const HeatQuadrature quad = HeatQuadrature::for_spectrum(decomp);
    if (spec.s < 0.0) return heat_integral_negative_power(decomp, -2.0 * spec.s, quad, u);
    const int k = static_cast<int>(std::floor(spec.s)) + 1;
    const PositivePowerResult r = heat_integral_positive_power(decomp, 2.0 * spec.s, k, quad, u);
    return r.values / positive_power_normalization(2.0 * spec.s, k);
  }
  return apply_multiplier(decomp, power_multiplier(decomp, spec), u);
}

GridFunction frac_power_apply(const SpectralDecomposition& decomp, const FractionalPowerSpec& spec,
                              const GridFunction& u) {
  return {u.lattice, frac_power_apply(decomp, spec, u.values)};
}

Eigen::MatrixXd frac_power_matrix(const SpectralDecomposition& decomp, const FractionalPowerSpec& spec) {
  return multiplier_matrix(decomp, power_multiplier(decomp, spec));
}

Eigen::VectorXd heat_apply(const SpectralDecomposition& decomp, double t, const Eigen::VectorXd& u) {
  require(t >= 0.0 && std::isfinite(t), "heat_apply: t must be >= 0");
  const Eigen::VectorXd m = (-t * decomp.eigenvalues.array()).exp().matrix();
  Eigen::VectorXd m_fixed = m;
  // The zero mode is exactly conserved.
  for (Eigen::Index i = 0; i < decomp.size(); ++i) {
    if (decomp.is_zero_mode(i)) m_fixed[i] = 1.0;
  }
  return apply_multiplier(decomp, m_fixed, u);
}

GridFunction heat_apply(const SpectralDecomposition& decomp, double t, const GridFunction& u) {
  return {u.lattice, heat_apply(decomp, t, u.values)};
}

HeatQuadrature HeatQuadrature::log_uniform(double t_min, double t_max, int count) {
  require(t_min > 0.0 && t_max > t_min, "HeatQuadrature: need 0 < t_min < t_max");
  require(count >= 2, "HeatQuadrature: need at least two nodes");
  HeatQuadrature q;
  q.t_min = t_min;
  q.t_max = t_max;
  q.nodes.resize(count);
  q.weights.resize(count);
  const double a = std::log(t_min);
  const double step = (std::log(t_max) - a) / (count - 1);
  for (int k = 0; k < count; ++k) {
    const double t = std::exp(a + step * k);
    q.nodes[k] = t;
    q.weights[k] = step * t * ((k == 0 || k == count - 1) ? 0.5 : 1.0);
  }
  return q;
}

HeatQuadrature HeatQuadrature::for_spectrum(const SpectralDecomposition& decomp, int count, double t_min) {
  return log_uniform(t_min, 20.0 / decomp.spectral_gap(), count);
}

double heat_moment(double lambda, double p, const HeatQuadrature& quad, double gap) {
  double sum = 0.0;
  for (Eigen::Index k = 0; k < quad.nodes.size(); ++k) {
    const double t = quad.nodes[k];
    sum += quad.weights[k] * std::pow(t, p - 1.0) * std::exp(-t * lambda);
  }
  const double tm = quad.t_min;
  sum += std::pow(tm, p) / p - lambda * std::pow(tm, p + 1.0) / (p + 1.0);
  // Beyond t_max the slowest decay is the gap: e^{-tL}u ~ e^{-(t-T) gap} e^{-TL}u.
  const double T = quad.t_max;
  sum += std::exp(-T * (lambda - gap)) * std::pow(gap, -p) * boost::math::tgamma(p, gap * T);
  return sum;
}

Eigen::VectorXd heat_integral_negative_power(const SpectralDecomposition& decomp, double alpha,
                                             const HeatQuadrature& quad, const Eigen::VectorXd& u) {
  const double sigma = quadrature_sigma_check(decomp, alpha);
  require_mean_zero(u, "heat_integral_negative_power");
  const double gap = decomp.spectral_gap();
  const double inv_gamma = 1.0 / std::tgamma(sigma);
  Eigen::VectorXd m(decomp.size());
  for (Eigen::Index i = 0; i < decomp.size(); ++i) {
    m[i] = decomp.is_zero_mode(i) ? 0.0 : inv_gamma * heat_moment(decomp.eigenvalues[i], sigma, quad, gap);
  }
  return apply_multiplier(decomp, m, u);
}

GridFunction heat_integral_negative_power(const SpectralDecomposition& decomp, double alpha,
                                          const HeatQuadrature& quad, const GridFunction& u) {
  return {u.lattice, heat_integral_negative_power(decomp, alpha, quad, u.values)};
}

PositivePowerResult heat_integral_positive_power(const SpectralDecomposition& decomp, double alpha, int k,
                                                 const HeatQuadrature& quad, const Eigen::VectorXd& u) {
  require(alpha > 0.0, "heat_integral_positive_power: alpha must be > 0");
  require(k >= 1 && k > alpha / 2.0, "heat_integral_positive_power: need integer k > alpha/2");
  const double sigma = alpha / 2.0;
  const double gap = decomp.spectral_gap();
  const double inv_gamma = 1.0 / std::tgamma(sigma);
  Eigen::VectorXd m(decomp.size());
  for (Eigen::Index i = 0; i < decomp.size(); ++i) {
    const double lambda = decomp.eigenvalues[i];
    m[i] = decomp.is_zero_mode(i) ? 0.0
                                  : inv_gamma * std::pow(lambda, k) * heat_moment(lambda, k - sigma, quad, gap);
  }
  PositivePowerResult out;
  out.values = apply_multiplier(decomp, m, u);
  const Eigen::VectorXd reference = frac_power_apply(decomp, {sigma, ZeroModePolicy::project_out}, u);
  const double ref_norm2 = reference.squaredNorm();
  out.normalization_ratio = ref_norm2 > 0.0 ? out.values.dot(reference) / ref_norm2 : 0.0;
  const double norm = out.values.norm();
  out.ratio_residual = norm > 0.0 ? (out.values - out.normalization_ratio * reference).norm() / norm : 0.0;
  return out;
}

double positive_power_normalization(double alpha, int k) {
  return boost::math::tgamma_ratio(k - alpha / 2.0, alpha / 2.0);
}

void write_eigenvalues_csv(std::ostream& out, const SpectralDecomposition& decomp) {
  out << "index,eigenvalue\n" << std::setprecision(17);
  for (Eigen::Index i = 0; i < decomp.size(); ++i) out << i << ',' << decomp.eigenvalues[i] << '\n';
}

}  // namespace hfrac
