#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "hfrac/commutators.hpp"
#include "hfrac/multipliers.hpp"

using namespace hfrac;

TEST_CASE("multiplier A") {
  CHECK(multiplier_A({0, 1.0, 2.0, 1}) == 1.0);
  CHECK(multiplier_A({3, 2.5, 2.0, 1}) == doctest::Approx(7 * 2.5).epsilon(1e-15));
  CHECK(multiplier_A({3, -2.5, 1.3, 2}) == multiplier_A({3, 2.5, 1.3, 2}));
  CHECK_THROWS_AS(multiplier_A({0, 0.0, 1.0, 1}), UsageError);
  CHECK_THROWS_AS(multiplier_A({-1, 1.0, 1.0, 1}), UsageError);
  CHECK_THROWS_AS(multiplier_A({0, 1.0, 0.0, 1}), UsageError);
  CHECK_THROWS_AS(multiplier_A({0, 1.0, 4.0, 1}), UsageError);
}

TEST_CASE("multiplier A tilde") {
  for (int n : {1, 2}) {
    for (double lambda : {-4.0, -1.0, -0.5, 0.5, 1.0, 4.0}) {
      for (int k = 0; k <= 50; ++k) {
        const double exact = (2.0 * k + n) * std::abs(lambda);
        CHECK(std::abs(multiplier_A_tilde({k, lambda, 2.0, n}) - exact) <= 1e-12 * exact);
      }
    }
  }
  const MultiplierPoint far{10000, 1.0, 1.0, 1};
  CHECK(std::abs(multiplier_A_tilde(far) / multiplier_A(far) - 1.0) <= 0.01);
  CHECK_THROWS_AS(multiplier_A_tilde({0, 0.0, 1.0, 1}), UsageError);
}

TEST_CASE("multiplier positivity and monotonicity") {
  for (double alpha : {0.3, 1.0, 1.7}) {
    for (int n : {1, 2}) {
      for (double lambda : {0.25, 1.0, 3.0}) {
        for (int k = 0; k < 30; ++k) {
          const MultiplierPoint p{k, lambda, alpha, n}, q{k + 1, lambda, alpha, n}, r{k, 2 * lambda, alpha, n};
          CHECK(multiplier_A(p) > 0.0);
          CHECK(multiplier_A_tilde(p) > 0.0);
          CHECK(multiplier_A(q) > multiplier_A(p));
          CHECK(multiplier_A_tilde(q) > multiplier_A_tilde(p));
          CHECK(multiplier_A(r) > multiplier_A(p));
          CHECK(multiplier_A_tilde(r) > multiplier_A_tilde(p));
        }
      }
    }
  }
}

TEST_CASE("multiplier table and csv") {
  const double lambdas[] = {0.5, -1.0};
  const auto rows = multiplier_table(1, 1.0, 3, lambdas);
  CHECK(rows.size() == 8u);
  CHECK(rows[0].k == 0);
  CHECK(rows[4].lambda == -1.0);
  CHECK(rows[2].ratio() == doctest::Approx(rows[2].A_tilde / rows[2].A));
  std::ostringstream out;
  write_multiplier_csv(out, rows);
  CHECK(out.str().rfind("k,lambda,alpha,A,A_tilde,ratio\n", 0) == 0);
  std::size_t lines = 0;
  for (char c : out.str()) lines += c == '\n';
  CHECK(lines == 9u);
  CHECK_THROWS_AS(multiplier_table(1, 1.0, -1, lambdas), UsageError);
}

namespace {

Eigen::VectorXd smooth(const SpectralDecomposition& d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Eigen::VectorXd u(d.size());
  for (auto& x : u) x = g(rng);
  return heat_apply(d, 0.3, Eigen::VectorXd(u.array() - u.mean()));
}

}  // namespace

TEST_CASE("geometric operator") {
  const auto lat = Lattice::build(1, 4);
  const GridFunction c = GridFunction::constant(lat, 3.0);
  CHECK(geometric_frac_apply(c, 1.0, 2.0).values.cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(geometric_frac_apply(c, 2.0, 1.0), UsageError);
  CHECK_THROWS_AS(geometric_frac_apply(c, 0.0, 1.0), UsageError);

  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  Eigen::VectorXd u(lat->size()), v(lat->size());
  for (auto& x : u) x = g(rng);
  for (auto& x : v) x = g(rng);
  const GridFunction gu(lat, u), gv(lat, v);
  CHECK(geometric_frac_apply(GridFunction(lat, 2.0 * u), 1.0, 0.8).values ==
        2.0 * geometric_frac_apply(gu, 1.0, 0.8).values);

  const GridFunction H = h_alpha_geometric(gu, gv, 1.2, 0.9);
  CHECK(H.values == h_alpha_geometric(gv, gu, 1.2, 0.9).values);
  CHECK(h_alpha_geometric(gu, c, 1.2, 0.9).values.cwiseAbs().maxCoeff() == 0.0);
  // Three operator applications and the bilinear sum are the same finite sum.
  const SingularOperator op = geometric_operator(lat, 1.2, 0.9);
  const Eigen::VectorXd three = three_commutator(op.matrix, u, v);
  CHECK((three - H.values).norm() <= 1e-12 * H.values.norm());
  CHECK_THROWS_AS(h_alpha_geometric(gu, gv, 2.5, 1.0), UsageError);
}

TEST_CASE("calibrated geometric operator near alpha = 2") {
  const auto lat = Lattice::build(1, 6);
  const SpectralDecomposition d = decompose(assemble_sublaplacian(lat));
  std::vector<Eigen::VectorXd> cal, held;
  for (int i = 0; i < 20; ++i) cal.push_back(smooth(d, 1000 + i));
  for (int i = 0; i < 40; ++i) held.push_back(smooth(d, 2000 + i));
  const SingularOperator op = calibrated_geometric_operator(d, 1.9, cal);
  CHECK(op.constant > 0.0);
  CHECK(op.kernel.spec.normalization == Normalization::calibrated);
  double err = 0.0, norm = 0.0;
  for (const auto& u : held) {
    const Eigen::VectorXd p = frac_power_apply(d, {0.95}, u);
    err += (op.apply(u) - p).squaredNorm();
    norm += p.squaredNorm();
  }
  MESSAGE("held-out relative L2 error " << std::sqrt(err / norm));
  CHECK(std::sqrt(err / norm) <= 0.15);
}
