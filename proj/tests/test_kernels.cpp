#include <doctest.h>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "hfrac/kernels.hpp"

using namespace hfrac;

namespace {

struct Fixture {
  LatticePtr lat;
  SpectralDecomposition decomp;
  HeatQuadrature quad;

  explicit Fixture(int M = 4)
      : lat(Lattice::build(1, M)), decomp(decompose(assemble_sublaplacian(lat))), quad(HeatQuadrature::for_spectrum(decomp)) {}

  Eigen::VectorXd random_mean_zero(std::uint64_t seed) const {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    Eigen::VectorXd u(decomp.size());
    for (auto& x : u) x = g(rng);
    return u.array() - u.mean();
  }
  /// Heat-smoothed noise, for cross-route comparisons that are meaningful only on smooth inputs.
  std::vector<Eigen::VectorXd> smooth_corpus(std::uint64_t seed, int count) const {
    std::vector<Eigen::VectorXd> out;
    for (int i = 0; i < count; ++i) out.push_back(heat_apply(decomp, 0.3, random_mean_zero(seed * 1000 + i)));
    return out;
  }
};

double rel(const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return (a - b).norm() / b.norm(); }

}  // namespace

TEST_CASE("kernel spec") {
  KernelSpec s;
  s.kind = KernelKind::singular;
  s.alpha = 1.0;
  CHECK(s.exponent() == -5.0);
  s.alpha = 2.0;
  CHECK_THROWS_AS(s.validate(), UsageError);
  s.kind = KernelKind::riesz;
  CHECK(s.exponent() == -2.0);
  CHECK_NOTHROW(s.validate());
  s.alpha = 4.0;
  CHECK_THROWS_AS(s.validate(), UsageError);
  s.alpha = 0.0;
  CHECK_THROWS_AS(s.validate(), UsageError);
}

TEST_CASE("analytic kernel") {
  KernelSpec s{KernelKind::riesz, 1.0, 1, Normalization::analytic_surrogate, 1.0};
  CHECK(analytic_kernel(s, make_point(1, 0, 0)) == 1.0);
  CHECK(analytic_kernel(s, make_point(0, 0, 0.25)) == doctest::Approx(1.0));
  CHECK_THROWS_AS(analytic_kernel(s, GroupPoint::identity(1)), UsageError);
  const GroupPoint p = make_point(0.3, -0.8, 0.45);
  for (double alpha : {0.5, 1.0, 3.0}) {
    s.alpha = alpha;
    for (double lambda : {2.0, 0.5}) {
      const double scaled = analytic_kernel(s, dilate(lambda, p));
      CHECK(scaled == doctest::Approx(std::pow(lambda, alpha - 4) * analytic_kernel(s, p)).epsilon(1e-14));
    }
    CHECK(analytic_kernel(s, group_inv(p)) == doctest::Approx(analytic_kernel(s, p)).epsilon(1e-12));
  }
  KernelSpec sing{KernelKind::singular, 1.0, 1, Normalization::analytic_surrogate, 1.0};
  CHECK(analytic_kernel(sing, p) == doctest::Approx(std::pow(gauge(p), -5.0)).epsilon(1e-14));
}

TEST_CASE("heat-extracted Riesz kernels") {
  const Fixture f;
  const KernelTable R1 = riesz_kernel_from_heat(f.decomp, 1.0, f.quad);
  CHECK(R1.values.allFinite());
  CHECK(R1.values.minCoeff() == doctest::Approx(0.0));
  CHECK(R1.offset > 0.0);
  for (std::size_t i = 0; i < f.lat->size(); ++i) {
    CHECK(R1.values[static_cast<Eigen::Index>(f.lat->inverse(i))] ==
          doctest::Approx(R1.values[static_cast<Eigen::Index>(i)]).epsilon(1e-9));
  }
  CHECK_THROWS_AS(riesz_kernel_from_heat(f.decomp, 0.0, f.quad), UsageError);
  CHECK_THROWS_AS(riesz_kernel_from_heat(f.decomp, 4.0, f.quad), UsageError);

  SUBCASE("convolution matches the spectral route") {
    const Eigen::VectorXd u = f.random_mean_zero(1);
    for (double alpha : {0.5, 1.0, 1.5}) {
      const KernelTable K = riesz_kernel_from_heat(f.decomp, alpha, f.quad);
      const Eigen::VectorXd conv = group_convolve(*f.lat, u, K);
      CHECK(rel(conv, frac_power_apply(f.decomp, {-alpha / 2}, u)) <= 1e-5);
    }
  }
  SUBCASE("semigroup") {
    const Eigen::VectorXd u = f.random_mean_zero(2);
    for (auto [a, b] : {std::pair{1.0, 1.0}, std::pair{0.5, 1.5}}) {
      const KernelTable Ka = riesz_kernel_from_heat(f.decomp, a, f.quad);
      const KernelTable Kb = riesz_kernel_from_heat(f.decomp, b, f.quad);
      const KernelTable Kab = riesz_kernel_from_heat(f.decomp, a + b, f.quad);
      const Eigen::VectorXd lhs = group_convolve(*f.lat, group_convolve(*f.lat, u, Ka), Kb);
      CHECK(rel(lhs, group_convolve(*f.lat, u, Kab)) <= 1e-5);
    }
  }
  SUBCASE("fundamental solution") {
    const Eigen::VectorXd u = f.random_mean_zero(3);
    const KernelTable R2 = riesz_kernel_from_heat(f.decomp, 2.0, f.quad);
    const Eigen::MatrixXd L(assemble_sublaplacian(f.lat).matrix);
    CHECK(rel(L * group_convolve(*f.lat, u, R2), u) <= 1e-5);
  }
  SUBCASE("decay along rays up to the half period") {
    // The discrete kernel is not a function of the gauge alone, so monotone
    // decay is checked along fixed directions, stopping before wrap images.
    const Fixture g(8);
    const KernelTable K = riesz_kernel_from_heat(g.decomp, 1.0, g.quad);
    const int half = g.lat->M() / 2;
    const double h = g.lat->h(), ht = g.lat->h_t();
    const std::vector<std::vector<GroupPoint>> rays = [&] {
      std::vector<std::vector<GroupPoint>> r(4);
      for (int k = 0; k <= half; ++k) {
        r[0].push_back(make_point(k * h, 0, 0));
        r[1].push_back(make_point(0, k * h, 0));
        if (k % 2 == 0) r[2].push_back(make_point(k * h, k * h, 0));  // parity
      }
      for (int c = 0; c <= g.lat->vertical_period() / 2; c += 2) r[3].push_back(make_point(0, 0, c * ht));
      return r;
    }();
    for (const auto& ray : rays) {
      for (std::size_t i = 1; i < ray.size(); ++i) {
        const double prev = K.values[static_cast<Eigen::Index>(g.lat->wrap(ray[i - 1]))];
        const double cur = K.values[static_cast<Eigen::Index>(g.lat->wrap(ray[i]))];
        CHECK(cur <= prev);
      }
    }
  }
}

TEST_CASE("group convolution") {
  const Fixture f;
  const KernelTable K = riesz_kernel_from_heat(f.decomp, 1.0, f.quad);
  const GridFunction d = GridFunction::delta(f.lat, f.lat->origin());
  CHECK(rel(group_convolve(d, K).values, K.values) <= 1e-14);

  const Eigen::VectorXd u = f.random_mean_zero(4);
  const Eigen::VectorXd Ku = group_convolve(*f.lat, u, K);
  for (std::size_t g : {std::size_t{1}, std::size_t{17}, std::size_t{42}}) {
    Eigen::VectorXd ug(u.size()), Kug(u.size());
    for (std::size_t x = 0; x < f.lat->size(); ++x) {
      ug[static_cast<Eigen::Index>(x)] = u[static_cast<Eigen::Index>(f.lat->multiply(g, x))];
      Kug[static_cast<Eigen::Index>(x)] = Ku[static_cast<Eigen::Index>(f.lat->multiply(g, x))];
    }
    CHECK((group_convolve(*f.lat, ug, K) - Kug).cwiseAbs().maxCoeff() <= 1e-12 * Ku.cwiseAbs().maxCoeff());
  }
  const Eigen::MatrixXd C = convolution_matrix(K);
  CHECK(rel(C * u, Ku) <= 1e-13);

  const auto other = Lattice::build(1, 6);
  CHECK_THROWS_AS(group_convolve(GridFunction::zeros(other), K), UsageError);
}

TEST_CASE("singular operator") {
  const Fixture f;
  SUBCASE("heat-extracted kernel reproduces L^{alpha/2}") {
    const SingularOperator S = make_singular_operator(singular_kernel_from_heat(f.decomp, 1.0));
    const Eigen::VectorXd u = f.random_mean_zero(5);
    CHECK(rel(S.apply(u), frac_power_apply(f.decomp, {0.5}, u)) <= 1e-9);
  }
  SUBCASE("constants and self-adjointness") {
    for (double alpha : {0.5, 1.0, 1.5}) {
      const GridFunction c = GridFunction::constant(f.lat, 2.5);
      CHECK(singular_frac_apply(c, alpha, 1.0).values.cwiseAbs().maxCoeff() == 0.0);
      const SingularOperator S = make_singular_operator(periodized_singular_kernel(f.lat, alpha));
      CHECK((S.matrix - S.matrix.transpose()).cwiseAbs().maxCoeff() <= 1e-9 * S.matrix.cwiseAbs().maxCoeff());
      const Eigen::VectorXd u = f.random_mean_zero(6), v = f.random_mean_zero(7);
      const double a = S.apply(u).dot(v), b = u.dot(S.apply(v));
      CHECK(std::abs(a - b) <= 1e-9 * std::abs(a));
    }
    CHECK_THROWS_AS(singular_frac_apply(GridFunction::zeros(f.lat), 2.0, 1.0), UsageError);
  }
  SUBCASE("sign on a bump") {
    const GridFunction bump = GridFunction::delta(f.lat, f.lat->origin());
    for (double c : {1.0, -2.0}) {
      const GridFunction out = singular_frac_apply(bump, 1.0, c);
      const std::size_t far = f.lat->wrap(make_point(2 * f.lat->h(), 2 * f.lat->h(), 0));
      CHECK(out.values[0] * c > 0.0);
      CHECK(out.values[static_cast<Eigen::Index>(far)] * c < 0.0);
    }
  }
  SUBCASE("direct PV sum matches the matrix form") {
    const Eigen::VectorXd u = f.random_mean_zero(9);
    const SingularOperator S = make_singular_operator(periodized_singular_kernel(f.lat, 1.2), 0.7);
    CHECK(rel(singular_frac_apply(GridFunction(f.lat, u), 1.2, 0.7).values, S.apply(u)) <= 1e-12);
  }
  SUBCASE("scaled") {
    const SingularOperator S = make_singular_operator(periodized_singular_kernel(f.lat, 1.0));
    const SingularOperator T = S.scaled(3.0);
    CHECK(T.constant == 3.0);
    CHECK((T.matrix - 3.0 * S.matrix).cwiseAbs().maxCoeff() <= 1e-12 * T.matrix.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("calibration") {
  const Fixture f;
  const std::vector<Eigen::VectorXd> corpus = f.smooth_corpus(1, 10);
  const CalibrationResult base = calibrate_singular_constant(f.decomp, 1.0, corpus);
  CHECK(base.constant > 0.0);
  std::vector<Eigen::VectorXd> scaled;
  for (const auto& u : corpus) scaled.push_back(10.0 * u);
  const CalibrationResult big = calibrate_singular_constant(f.decomp, 1.0, scaled);
  CHECK(std::abs(big.constant - base.constant) <= 1e-12 * base.constant);
  CHECK(std::abs(big.residual - base.residual) <= 1e-12);

  const CalibrationResult near2 = calibrate_singular_constant(f.decomp, 1.9, corpus);
  CHECK(std::isfinite(near2.constant));
  CHECK(near2.constant > 0.0);

  CHECK_THROWS_AS(calibrate_singular_constant(f.decomp, 1.0, std::vector<Eigen::VectorXd>{}), UsageError);

  SUBCASE("eigenvector corpus: residual equals the least-squares optimum") {
    std::vector<Eigen::VectorXd> eig;
    for (Eigen::Index i = 1; i <= 8; ++i) eig.push_back(f.decomp.eigenvectors.col(i));
    const SingularOperator S = make_singular_operator(periodized_singular_kernel(f.lat, 1.0));
    const CalibrationResult r = calibrate_singular_constant(f.decomp, S, eig);
    double best = INFINITY;
    for (double c = 0.9 * r.constant; c <= 1.1 * r.constant; c += 0.002 * r.constant) {
      double err = 0.0, norm = 0.0;
      for (const auto& u : eig) {
        const Eigen::VectorXd p = frac_power_apply(f.decomp, {0.5}, u);
        err += (c * S.apply(u) - p).squaredNorm();
        norm += p.squaredNorm();
      }
      best = std::min(best, std::sqrt(err / norm));
    }
    CHECK(r.residual <= best + 1e-12);
  }
  SUBCASE("held-out agreement at M = 6, alpha = 1") {
    const Fixture g(6);
    const SingularOperator S = make_singular_operator(periodized_singular_kernel(g.lat, 1.0));
    const CalibrationResult r = calibrate_singular_constant(g.decomp, S, g.smooth_corpus(1, 20));
    double err = 0.0, norm = 0.0;
    for (const auto& u : g.smooth_corpus(2, 40)) {
      const Eigen::VectorXd p = frac_power_apply(g.decomp, {0.5}, u);
      err += (r.constant * S.apply(u) - p).squaredNorm();
      norm += p.squaredNorm();
    }
    MESSAGE("held-out relative L2 error " << std::sqrt(err / norm));
    CHECK(std::sqrt(err / norm) <= 0.05);
  }
}

TEST_CASE("Riesz family") {
  const Fixture f;
  const RieszFamily family(f.decomp, f.quad);
  const Eigen::VectorXd u = f.random_mean_zero(8);
  CHECK(rel(family.apply(0.0, u), u) <= 1e-15);
  CHECK(&family.matrix(1.0) == &family.matrix(1.0));
  CHECK(rel(family.apply(1.0, u), frac_power_apply(f.decomp, {-0.5}, u)) <= 1e-5);
  CHECK_THROWS_AS(family.matrix(4.0), UsageError);
  CHECK_THROWS_AS(family.matrix(-0.5), UsageError);
  // Constants are mapped to constants (kernel mass times the function).
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(f.decomp.size());
  const Eigen::VectorXd r = family.apply(1.0, ones);
  CHECK((r.array() - r.mean()).abs().maxCoeff() <= 1e-10 * std::abs(r.mean()));
  CHECK(r.mean() > 0.0);
}

TEST_CASE("kernel csv") {
  const Fixture f;
  std::ostringstream out;
  write_kernel_csv(out, riesz_kernel_from_heat(f.decomp, 1.0, f.quad));
  CHECK(out.str().rfind("node,gauge,kernel\n", 0) == 0);
}
