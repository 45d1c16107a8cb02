#include <doctest.h>

#include <random>

#include "hfrac/group.hpp"

using namespace hfrac;

namespace {

GroupPoint random_point(std::mt19937_64& rng, int n = 1) { return sample_point(n, rng); }

bool near(const GroupPoint& a, const GroupPoint& b, double tol) {
  return (a.z - b.z).cwiseAbs().maxCoeff() <= tol && std::abs(a.t - b.t) <= tol;
}

}  // namespace

TEST_CASE("group law matches the polarized convention") {
  const GroupPoint e = GroupPoint::identity(1);
  const GroupPoint p = make_point(0.3, -1.2, 2.5);
  CHECK(group_mul(e, p) == p);
  CHECK(group_mul(p, e) == p);
  CHECK(group_mul(make_point(1, 0, 0), make_point(0, 1, 0)) == make_point(1, 1, 0.5));
  CHECK(group_mul(make_point(0, 1, 0), make_point(1, 0, 0)) == make_point(1, 1, -0.5));
}

TEST_CASE("group_mul rejects mismatched dimensions") {
  CHECK_THROWS_AS(group_mul(GroupPoint::identity(1), GroupPoint::identity(2)), UsageError);
}

TEST_CASE("inverse is negation") {
  CHECK(group_inv(GroupPoint::identity(1)) == GroupPoint::identity(1));
  CHECK(group_inv(make_point(1, 2, 3)) == make_point(-1, -2, -3));
  std::mt19937_64 rng(5);
  for (int i = 0; i < 100; ++i) {
    const GroupPoint p = random_point(rng, 2);
    CHECK(group_mul(group_inv(p), p).is_identity());
    CHECK(group_mul(p, group_inv(p)).is_identity());
  }
}

TEST_CASE("associativity") {
  // Dyadic rationals: every product is exact.
  const GroupPoint a = make_point(0.5, -1.25, 3.0), b = make_point(2.0, 0.75, -1.5), c = make_point(-0.25, 4.0, 0.5);
  CHECK(group_mul(group_mul(a, b), c) == group_mul(a, group_mul(b, c)));
  std::mt19937_64 rng(11);
  for (int i = 0; i < 200; ++i) {
    const GroupPoint p = random_point(rng), q = random_point(rng), r = random_point(rng);
    CHECK(near(group_mul(group_mul(p, q), r), group_mul(p, group_mul(q, r)), 1e-12));
  }
}

TEST_CASE("dilations") {
  const GroupPoint p = make_point(0.4, 1.7, -0.9);
  CHECK(dilate(1.0, p) == p);
  CHECK(dilate(2.0, make_point(1, 1, 1)) == make_point(2, 2, 4));
  CHECK_THROWS_AS(dilate(0.0, p), UsageError);
  CHECK_THROWS_AS(dilate(-1.0, p), UsageError);
  // Powers of two keep the automorphism identity exact.
  std::mt19937_64 rng(3);
  for (double lambda : {2.0, 0.5, 4.0}) {
    for (int i = 0; i < 50; ++i) {
      const GroupPoint a = random_point(rng), b = random_point(rng);
      CHECK(dilate(lambda, group_mul(a, b)) == group_mul(dilate(lambda, a), dilate(lambda, b)));
    }
  }
}

TEST_CASE("Koranyi gauge") {
  CHECK(gauge(GroupPoint::identity(1)) == 0.0);
  CHECK(gauge(make_point(1, 0, 0)) == 1.0);
  CHECK(gauge(make_point(0, 0, 1)) == doctest::Approx(2.0).epsilon(1e-15));
  std::mt19937_64 rng(17);
  for (int i = 0; i < 200; ++i) {
    const GroupPoint p = random_point(rng, 1 + i % 2);
    CHECK(gauge(group_inv(p)) == gauge(p));
    for (double lambda : {2.0, 0.5, 3.7}) {
      CHECK(std::abs(gauge(dilate(lambda, p)) - lambda * gauge(p)) <= 1e-12 * lambda * gauge(p));
    }
  }
}

TEST_CASE("homogeneous dimension") {
  CHECK(homogeneous_dimension(1) == 4);
  CHECK(homogeneous_dimension(3) == 8);
  CHECK_THROWS_AS(HomogeneityParams::heisenberg(0), UsageError);
}

TEST_CASE("quasi-distance constants") {
  SUBCASE("identity samples are uninformative") {
    std::vector<std::pair<GroupPoint, GroupPoint>> pairs(10, {GroupPoint::identity(1), GroupPoint::identity(1)});
    const QuasiDistanceConstants q = quasi_distance_constants(pairs);
    CHECK_FALSE(q.informative);
    CHECK(q.c == 0.5);
    CHECK(q.C == 2.0);
  }
  SUBCASE("seeded estimate") {
    const QuasiDistanceConstants a = estimate_quasi_distance_constants(1, 10000, 42);
    const QuasiDistanceConstants b = estimate_quasi_distance_constants(1, 10000, 42);
    CHECK(a.informative);
    CHECK(a.c > 0.0);
    CHECK(a.c < 1.0);
    CHECK(a.C > 1.0);
    CHECK(a.c_empirical == b.c_empirical);
    CHECK(a.C_empirical == b.C_empirical);
  }
  SUBCASE("doubling samples never tightens the extrema") {
    for (std::size_t count : {500u, 1000u, 2000u, 4000u}) {
      const auto small = estimate_quasi_distance_constants(1, count, 9);
      const auto large = estimate_quasi_distance_constants(1, 2 * count, 9);
      CHECK(large.c_empirical <= small.c_empirical);
      CHECK(large.C_empirical >= small.C_empirical);
    }
  }
  SUBCASE("stabilizes under refinement") {
    const auto a = estimate_quasi_distance_constants(1, 10000, 1);
    const auto b = estimate_quasi_distance_constants(1, 40000, 1);
    CHECK(std::abs(a.c - b.c) <= 0.05 * a.c);
    CHECK(std::abs(a.C - b.C) <= 0.05 * a.C);
  }
}

TEST_CASE("homogeneous increment") {
  const GroupPoint x = make_point(0.6, -0.3, 0.2);
  CHECK(increment_terms(x, GroupPoint::identity(1), 1.0).ratio() == 0.0);

  const GroupPoint u = make_point(1, 0, 0);
  const GroupPoint y = make_point(-0.5, 0.5, 0.25);
  const IncrementTerms t = increment_terms(u, y, 1.0);
  CHECK(t.denominator == doctest::Approx(gauge(y)));
  CHECK(t.numerator == doctest::Approx(std::abs(gauge(group_mul(u, y)) - 1.0)));

  const IncrementReport rep = check_homogeneous_increment(1.0, 20000, 7);
  CHECK(rep.accepted > 1000);
  CHECK(std::isfinite(rep.sup_ratio));
  CHECK(rep.sup_ratio <= 1.0 + 1e-12);  // the Cygan norm is 1-Lipschitz for right translations
  CHECK(rep.stable);
}
