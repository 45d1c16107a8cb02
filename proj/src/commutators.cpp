#include "hfrac/commutators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

namespace hfrac {

namespace {

constexpr double kOrderSlack = 1e-12;

std::vector<double> interior_grid(double lo, double hi, int points = 5) {
  std::vector<double> out;
  for (int i = 1; i <= points; ++i) out.push_back(lo + (hi - lo) * i / (points + 1));
  return out;
}

void require_mean_zero(const Eigen::VectorXd& u, const char* what) {
  const double scale = u.cwiseAbs().sum();
  require(std::abs(u.sum()) <= 1e-9 * scale, std::string(what) + ": argument of a negative power must be mean-zero");
}

}  // namespace

double EstimateInstance::defect(std::size_t j) const {
  const double d = tau1 + tau2 - terms.at(j).first - terms.at(j).second - alpha;
  return std::abs(d) <= kOrderSlack ? 0.0 : d;
}

void EstimateInstance::validate_parameters(int Q) const {
  require(alpha > 0.0 && alpha < Q, "instance violates 0 < alpha < Q");
  require(epsilon > 0.0, "instance violates epsilon > 0");
  const double lo = std::max(0.0, alpha - 1.0);
  require(tau1 > lo, "instance violates tau1 > max(0, alpha-1)");
  require(tau2 > lo, "instance violates tau2 > max(0, alpha-1)");
  require(tau1 <= alpha, "instance violates tau1 <= alpha");
  require(tau2 <= alpha, "instance violates tau2 <= alpha");
  require(tau1 + tau2 > alpha, "instance violates tau1+tau2 > alpha");
}

void EstimateInstance::validate(int Q) const {
  validate_parameters(Q);
  require(!terms.empty(), "instance has no terms");
  for (std::size_t j = 0; j < terms.size(); ++j) {
    const auto [s1, s2] = terms[j];
    require(s1 > 0.0 && s1 < tau1, "instance term " + std::to_string(j) + " violates s_{j,1} in (0, tau1)");
    require(s2 > 0.0 && s2 < tau2, "instance term " + std::to_string(j) + " violates s_{j,2} in (0, tau2)");
    const double d = defect(j);
    require(d >= 0.0 && d < epsilon,
            "instance term " + std::to_string(j) + " violates tau1+tau2-s1-s2-alpha in [0, epsilon)");
  }
}

std::vector<RieszTerm> EstimateInstance::riesz_terms() const {
  std::vector<RieszTerm> out;
  for (std::size_t j = 0; j < terms.size(); ++j) out.push_back({terms[j].first, terms[j].second, defect(j)});
  return out;
}

void TInstance::validate_parameters() const {
  require(tau > 0.0, "instance violates tau > 0");
  require(beta >= 0.0, "instance violates beta >= 0");
  require(delta >= 0.0, "instance violates delta >= 0");
  require(beta + delta < std::min(tau, 1.0), "instance violates beta+delta < min(tau,1)");
  require(epsilon > 0.0, "instance violates epsilon > 0");
}

void TInstance::validate() const {
  validate_parameters();
  require(!terms.empty(), "instance has no terms");
  const double S = tau - beta - delta;
  for (std::size_t j = 0; j < terms.size(); ++j) {
    const TTerm& t = terms[j];
    const std::string tag = "instance term " + std::to_string(j) + " violates ";
    require(t.s1 > 0.0 && t.st1 > 0.0, tag + "s_{j,1}, s~_{j,1} > 0");
    require(t.s2 > 0.0 && t.s2 < tau && t.st2 > 0.0 && t.st2 < tau, tag + "s_{j,2}, s~_{j,2} in (0, tau)");
    require(std::abs(t.s1 + t.s2 - S) <= kOrderSlack && std::abs(t.st1 + t.st2 - S) <= kOrderSlack,
            tag + "s_{j,1}+s_{j,2} = s~_{j,1}+s~_{j,2} = tau-beta-delta");
    require(t.st1 < epsilon, tag + "s~_{j,1} < epsilon");
  }
}

EstimateInstance generate_instance(double alpha, double tau1, double tau2, double epsilon, int Q, int count,
                                   std::uint64_t seed) {
  EstimateInstance inst{alpha, tau1, tau2, epsilon, {}};
  inst.validate_parameters(Q);
  require(count >= 1, "generate_instance: count must be >= 1");
  const double cap1 = alpha < 2.0 ? std::min(tau1, 1.0) : tau1;
  const double cap2 = alpha < 2.0 ? std::min(tau2, 1.0) : tau2;
  const double lo1 = std::max(0.0, alpha - cap2);
  require(lo1 < cap1, "generate_instance: infeasible, needs max(0, alpha - min(tau2,1)) < min(tau1,1)");

  for (double d1 : interior_grid(lo1, cap1)) {
    const double lo2 = std::max(0.0, alpha - d1);
    const double hi2 = std::min(cap2, alpha + epsilon - d1);
    if (hi2 <= lo2) continue;
    const double d2 = 0.5 * (lo2 + hi2);
    const std::pair<double, double> patterns[] = {
        {tau1 - d1, tau2 + d1 - alpha}, {tau1 + d2 - alpha, tau2 - d2}, {tau1 - d1, tau2 - d2}};
    for (const auto& [s1, s2] : patterns) {
      const double d = tau1 + tau2 - s1 - s2 - alpha;
      if (!(s1 > 0.0 && s1 < tau1 && s2 > 0.0 && s2 < tau2 && d > -kOrderSlack && d < epsilon)) continue;
      const bool seen = std::any_of(inst.terms.begin(), inst.terms.end(), [&](const auto& t) {
        return std::abs(t.first - s1) <= kOrderSlack && std::abs(t.second - s2) <= kOrderSlack;
      });
      if (!seen) inst.terms.emplace_back(s1, s2);
    }
  }
  require(!inst.terms.empty(), "generate_instance: infeasible, no admissible (s_{j,1}, s_{j,2}) on the grid");

  if (inst.terms.size() > static_cast<std::size_t>(count)) {
    std::vector<std::size_t> order(inst.terms.size());
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    order.resize(static_cast<std::size_t>(count));
    std::sort(order.begin(), order.end());
    std::vector<std::pair<double, double>> kept;
    for (std::size_t i : order) kept.push_back(inst.terms[i]);
    inst.terms = std::move(kept);
  }
  inst.validate(Q);
  return inst;
}

TInstance generate_t_instance(double tau, double beta, double delta, double epsilon) {
  TInstance inst{tau, beta, delta, epsilon, {}};
  inst.validate_parameters();
  const double S = tau - beta - delta;
  const std::vector<double> s1 = interior_grid(0.0, S);
  const std::vector<double> st1 = interior_grid(0.0, std::min(epsilon, S));
  for (std::size_t j = 0; j < s1.size(); ++j) inst.terms.push_back({s1[j], S - s1[j], st1[j], S - st1[j]});
  inst.validate();
  return inst;
}

GridFunction h_alpha_operator(const GridFunction& u, const GridFunction& v, double alpha,
                              const SpectralDecomposition& decomp) {
  require_same_lattice(*u.lattice, *v.lattice, "h_alpha_operator");
  require(alpha > 0.0 && alpha < u.lattice->Q(), "h_alpha_operator: alpha must lie in (0, Q)");
  const FractionalPowerSpec spec{alpha / 2.0, ZeroModePolicy::keep_zero};
  const Eigen::VectorXd uv = u.values.cwiseProduct(v.values);
  // a - (b + c) rather than a - b - c keeps the result bitwise symmetric in (u, v).
  const Eigen::VectorXd cross = u.values.cwiseProduct(frac_power_apply(decomp, spec, v.values)) +
                                v.values.cwiseProduct(frac_power_apply(decomp, spec, u.values));
  return {u.lattice, frac_power_apply(decomp, spec, uv) - cross};
}

Eigen::VectorXd h_alpha_bilinear(const SingularOperator& op, const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  const Eigen::Index N = op.matrix.rows();
  require(u.size() == N && v.size() == N, "h_alpha_bilinear: size mismatch");
  Eigen::VectorXd out(N);
#pragma omp parallel for schedule(static)
  for (Eigen::Index x = 0; x < N; ++x) {
    double acc = 0.0;
    for (Eigen::Index y = 0; y < N; ++y) {
      if (y == x) continue;
      acc += (u[x] - u[y]) * (v[x] - v[y]) * op.matrix(x, y);
    }
    out[x] = acc;
  }
  return out;
}

GridFunction h_alpha_bilinear(const GridFunction& u, const GridFunction& v, double alpha, double constant) {
  require_same_lattice(*u.lattice, *v.lattice, "h_alpha_bilinear");
  require(alpha > 0.0 && alpha < 2.0, "h_alpha_bilinear: alpha must lie in (0, 2)");
  const SingularOperator op = make_singular_operator(periodized_singular_kernel(u.lattice, alpha), constant);
  return {u.lattice, h_alpha_bilinear(op, u.values, v.values)};
}

TOperators TOperators::build(const SpectralDecomposition& decomp, double tau, double beta, double delta) {
  TOperators ops;
  ops.neg_tau = frac_power_matrix(decomp, {-tau / 2.0, ZeroModePolicy::project_out});
  ops.beta_delta = frac_power_matrix(decomp, {(beta + delta) / 2.0, ZeroModePolicy::keep_zero});
  ops.beta = beta == 0.0 ? Eigen::MatrixXd::Identity(decomp.size(), decomp.size())
                         : frac_power_matrix(decomp, {beta / 2.0, ZeroModePolicy::keep_zero});
  ops.delta = frac_power_matrix(decomp, {delta / 2.0, ZeroModePolicy::keep_zero});
  return ops;
}

Eigen::VectorXd t_commutator(const TOperators& ops, const Eigen::VectorXd& u, const Eigen::VectorXd& v) {
  const Eigen::VectorXd w = ops.neg_tau * u;
  Eigen::VectorXd out = w.cwiseProduct(ops.beta_delta * v);
  out.noalias() -= ops.beta * w.cwiseProduct(ops.delta * v);
  return out;
}

GridFunction t_commutator(const GridFunction& u, const GridFunction& v, const TInstance& inst,
                          const SpectralDecomposition& decomp) {
  require_same_lattice(*u.lattice, *v.lattice, "t_commutator");
  inst.validate_parameters();
  require_mean_zero(u.values, "t_commutator");
  const TOperators ops = TOperators::build(decomp, inst.tau, inst.beta, inst.delta);
  return {u.lattice, t_commutator(ops, u.values, v.values)};
}

Eigen::VectorXd rhs_terms(const RieszFamily& riesz, std::span<const RieszTerm> terms, const Eigen::VectorXd& a,
                          const Eigen::VectorXd& b) {
  const Eigen::VectorXd abs_a = a.cwiseAbs();
  const Eigen::VectorXd abs_b = b.cwiseAbs();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(a.size());
  for (const RieszTerm& t : terms) {
    const Eigen::VectorXd inner = riesz.apply(t.s1, abs_a).cwiseProduct(riesz.apply(t.s2, abs_b));
    out += riesz.apply(t.outer, inner);
  }
  return out;
}

Eigen::VectorXd rhs_theorem_1_1(const RieszFamily& riesz, const EstimateInstance& inst, const Eigen::VectorXd& a,
                                const Eigen::VectorXd& b) {
  inst.validate(riesz.Q());
  const std::vector<RieszTerm> terms = inst.riesz_terms();
  return rhs_terms(riesz, terms, a, b);
}

Eigen::VectorXd rhs_theorem_1_2(const RieszFamily& riesz, const TInstance& inst, const Eigen::VectorXd& u,
                                const Eigen::VectorXd& v, InnerOrder inner) {
  inst.validate();
  const Eigen::VectorXd abs_u = u.cwiseAbs();
  const Eigen::VectorXd abs_v = v.cwiseAbs();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(u.size());
  for (const TTerm& t : inst.terms) {
    out += riesz.apply(t.s1, abs_u).cwiseProduct(riesz.apply(t.s2, abs_v));
    const double order = inner == InnerOrder::s_tilde_2 ? t.st2 : t.st1;
    out += riesz.apply(t.st1, abs_v.cwiseProduct(riesz.apply(order, abs_u)));
  }
  return out;
}

GridFunction integer_leibniz_defect(const GridFunction& u, const GridFunction& v) {
  require_same_lattice(*u.lattice, *v.lattice, "integer_leibniz_defect");
  // With L = sum_k D_k^T D_k the defect is, node by node,
  //   sum_k (d+u d+v - d-u d-v) / h^2,  d+-w = w(x s_k^{+-1}) - w(x),
  // which vanishes exactly for constant u or v.
  const Lattice& lat = *u.lattice;
  const double inv_h2 = 1.0 / (lat.h() * lat.h());
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(lat.size()));
  for (int k = 0; k < 2 * lat.n(); ++k) {
    const std::size_t g = lat.generator(k);
    const std::size_t g_inv = lat.inverse(g);
    for (std::size_t x = 0; x < lat.size(); ++x) {
      const auto i = static_cast<Eigen::Index>(x);
      const auto fwd = static_cast<Eigen::Index>(lat.multiply(x, g));
      const auto bwd = static_cast<Eigen::Index>(lat.multiply(x, g_inv));
      const double plus = (u.values[fwd] - u.values[i]) * (v.values[fwd] - v.values[i]);
      const double minus = (u.values[bwd] - u.values[i]) * (v.values[bwd] - v.values[i]);
      out[i] += (plus - minus) * inv_h2;
    }
  }
  return {u.lattice, std::move(out)};
}

}  // namespace hfrac
