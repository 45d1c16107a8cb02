#pragma once

// Fractional Leibniz defects and commutators on the lattice, and the
// positive majorants they are compared against.

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <vector>

#include "hfrac/kernels.hpp"
#include "hfrac/lattice.hpp"
#include "hfrac/spectral.hpp"

namespace hfrac {

/// P(uv) - u Pv - v Pu for any linear operator P given as a matrix.
template <typename Derived>
Eigen::VectorXd three_commutator(const Eigen::MatrixBase<Derived>& P, const Eigen::VectorXd& u,
                                 const Eigen::VectorXd& v) {
  const Eigen::VectorXd uv = u.cwiseProduct(v);
  const Eigen::VectorXd cross = u.cwiseProduct(P * v) + v.cwiseProduct(P * u);
  return P * uv - cross;
}

/// One majorant term R_outer( R_s1 |a| . R_s2 |b| ). Order 0 means identity.
struct RieszTerm {
  double s1 = 0.0;
  double s2 = 0.0;
  double outer = 0.0;
};

struct EstimateInstance {
  double alpha = 0.8;
  double tau1 = 0.8;
  double tau2 = 0.8;
  double epsilon = 0.1;
  /// (s_{j,1}, s_{j,2}); outer order is the defect.
  std::vector<std::pair<double, double>> terms;

  double defect(std::size_t j) const;
  /// Hypotheses on (alpha, tau1, tau2, epsilon) only.
  void validate_parameters(int Q) const;
  /// Parameters and every term; the message names the violated inequality.
  void validate(int Q) const;
  std::vector<RieszTerm> riesz_terms() const;
};

struct TTerm {
  double s1 = 0.0;
  double s2 = 0.0;
  double st1 = 0.0;
  double st2 = 0.0;
};

struct TInstance {
  double tau = 0.9;
  double beta = 0.3;
  double delta = 0.2;
  double epsilon = 0.1;
  std::vector<TTerm> terms;

  void validate_parameters() const;
  void validate() const;
};

/// Admissible 3-commutator instance: delta_1 on a 5-point grid of its
/// interval, delta_2 at the midpoint of its interval, three term patterns per
/// grid point. At most `count` terms (deterministic subsample by seed when the
/// grid yields more). For alpha >= 2 the cap min(tau_i, 1) on delta_i is lifted.
EstimateInstance generate_instance(double alpha, double tau1, double tau2, double epsilon, int Q, int count = 25,
                                   std::uint64_t seed = 0);

/// s_{j,1} and s~_{j,1} on 5-point grids of (0, S) and (0, min(eps, S)),
/// S = tau - beta - delta.
TInstance generate_t_instance(double tau, double beta, double delta, double epsilon);

/// H_alpha through the spectral power L^{alpha/2}.
GridFunction h_alpha_operator(const GridFunction& u, const GridFunction& v, double alpha,
                              const SpectralDecomposition& decomp);

/// sum_{y != x} (u(x)-u(y)) (v(x)-v(y)) S(x, y), which equals the three-commutator
/// of the PV operator S exactly (S(x,y) = -c K(y^{-1}x) vol off the diagonal).
Eigen::VectorXd h_alpha_bilinear(const SingularOperator& op, const Eigen::VectorXd& u, const Eigen::VectorXd& v);
/// Periodized singular kernel with the given constant, alpha in (0, 2).
GridFunction h_alpha_bilinear(const GridFunction& u, const GridFunction& v, double alpha, double constant);

/// Precomputed spectral powers for repeated T evaluations.
struct TOperators {
  Eigen::MatrixXd neg_tau;      ///< L^{-tau/2}, zero mode projected out
  Eigen::MatrixXd beta_delta;   ///< L^{(beta+delta)/2}
  Eigen::MatrixXd beta;         ///< L^{beta/2}
  Eigen::MatrixXd delta;        ///< L^{delta/2}

  static TOperators build(const SpectralDecomposition& decomp, double tau, double beta, double delta);
};

/// L^{-tau/2}u . L^{(beta+delta)/2} v - L^{beta/2}( L^{-tau/2}u . L^{delta/2} v ).
Eigen::VectorXd t_commutator(const TOperators& ops, const Eigen::VectorXd& u, const Eigen::VectorXd& v);
GridFunction t_commutator(const GridFunction& u, const GridFunction& v, const TInstance& inst,
                          const SpectralDecomposition& decomp);

/// sum_j R_outer( R_s1 |a| . R_s2 |b| ). Orders must lie in [0, Q).
Eigen::VectorXd rhs_terms(const RieszFamily& riesz, std::span<const RieszTerm> terms, const Eigen::VectorXd& a,
                          const Eigen::VectorXd& b);
Eigen::VectorXd rhs_theorem_1_1(const RieszFamily& riesz, const EstimateInstance& inst, const Eigen::VectorXd& a,
                                const Eigen::VectorXd& b);

enum class InnerOrder { s_tilde_2, s_tilde_1 };

/// sum_j [ R_s1|u| . R_s2|v| + R_st1( |v| . R_inner|u| ) ] with inner order
/// s~_{j,2} by default or s~_{j,1} when requested.
Eigen::VectorXd rhs_theorem_1_2(const RieszFamily& riesz, const TInstance& inst, const Eigen::VectorXd& u,
                                const Eigen::VectorXd& v, InnerOrder inner = InnerOrder::s_tilde_2);

/// L(uv) - u Lv - v Lu + 2 sum_k D_k u . D_k v on the periodic lattice.
GridFunction integer_leibniz_defect(const GridFunction& u, const GridFunction& v);

}  // namespace hfrac
