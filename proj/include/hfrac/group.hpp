#pragma once

// Arithmetic of the Heisenberg group H^n in polarized coordinates:
//   (z, t) . (z', t') = (z + z', t + t' + omega(z, z') / 2),
//   omega(z, z') = sum_i (x_i y'_i - y_i x'_i),
// with z = (x_1..x_n, y_1..y_n).

#include <Eigen/Core>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <utility>

#include "hfrac/errors.hpp"

namespace hfrac {

template <typename Scalar>
struct BasicGroupPoint {
  using Horizontal = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Horizontal z;
  Scalar t{0};

  BasicGroupPoint() = default;
  BasicGroupPoint(Horizontal horizontal, Scalar vertical) : z(std::move(horizontal)), t(vertical) {}

  static BasicGroupPoint identity(int n) { return {Horizontal::Zero(2 * n), Scalar(0)}; }

  int n() const { return static_cast<int>(z.size() / 2); }
  auto x() const { return z.head(n()); }
  auto y() const { return z.tail(n()); }

  bool is_finite() const { return z.allFinite() && std::isfinite(t); }
  bool is_identity() const { return t == Scalar(0) && (z.array() == Scalar(0)).all(); }

  friend bool operator==(const BasicGroupPoint& a, const BasicGroupPoint& b) {
    return a.t == b.t && a.z.size() == b.z.size() && a.z == b.z;
  }
};

using GroupPoint = BasicGroupPoint<double>;

/// n=1 convenience constructor.
inline GroupPoint make_point(double x, double y, double t) {
  GroupPoint p = GroupPoint::identity(1);
  p.z << x, y;
  p.t = t;
  return p;
}

struct HomogeneityParams {
  int n = 1;
  int Q = 4;

  static HomogeneityParams heisenberg(int n) {
    require(n >= 1, "group parameter n must be >= 1");
    return {n, 2 * n + 2};
  }
};

inline int homogeneous_dimension(int n) { return HomogeneityParams::heisenberg(n).Q; }

template <typename Scalar>
Scalar symplectic_form(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& z1,
                       const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& z2) {
  const Eigen::Index n = z1.size() / 2;
  return z1.head(n).dot(z2.tail(n)) - z1.tail(n).dot(z2.head(n));
}

template <typename Scalar>
BasicGroupPoint<Scalar> group_mul(const BasicGroupPoint<Scalar>& p, const BasicGroupPoint<Scalar>& q) {
  require(p.z.size() == q.z.size() && p.z.size() % 2 == 0 && p.z.size() > 0,
          "group_mul: dimension mismatch");
  return {p.z + q.z, p.t + q.t + Scalar(0.5) * symplectic_form<Scalar>(p.z, q.z)};
}

template <typename Scalar>
BasicGroupPoint<Scalar> group_inv(const BasicGroupPoint<Scalar>& p) {
  return {-p.z, -p.t};
}

/// Anisotropic dilation (z, t) -> (lambda z, lambda^2 t); a group automorphism.
template <typename Scalar>
BasicGroupPoint<Scalar> dilate(Scalar lambda, const BasicGroupPoint<Scalar>& p) {
  require(lambda > Scalar(0), "dilate: lambda must be > 0");
  return {lambda * p.z, lambda * lambda * p.t};
}

/// Koranyi gauge (|z|^4 + 16 t^2)^{1/4}. The factor 16 matches the polarized
/// law, making this the Cygan-Koranyi norm (symmetric, 1-homogeneous).
template <typename Scalar>
Scalar gauge(const BasicGroupPoint<Scalar>& p) {
  using std::sqrt;
  const Scalar r2 = p.z.squaredNorm();
  return sqrt(sqrt(r2 * r2 + Scalar(16) * p.t * p.t));
}

/// Draws z ~ N(0, I), t ~ N(0, 1).
GroupPoint sample_point(int n, std::mt19937_64& rng);

struct QuasiDistanceConstants {
  double c = 0.5;  ///< lower constant, clamped below 1
  double C = 2.0;  ///< upper constant, clamped above 1
  double c_empirical = 0.0;  ///< raw inf of |yx| / ||x|-|y|| (NaN if no pair informed it)
  double C_empirical = 0.0;  ///< raw sup of |yx| / (|x|+|y|)
  std::size_t lower_samples = 0;
  std::size_t upper_samples = 0;
  bool informative = false;  ///< false -> defaults (0.5, 2) were returned
};

/// Tightest (c, C) with c ||x|-|y|| <= |yx| <= C (|x|+|y|) over the given pairs.
/// Degenerate pairs (|x| = |y| for the lower bound, x = y = 0 for the upper)
/// are skipped.
QuasiDistanceConstants quasi_distance_constants(std::span<const std::pair<GroupPoint, GroupPoint>> pairs);

/// Seeded version. Pairs are drawn sequentially from one stream, so the sample
/// for count k is a prefix of the sample for count 2k.
QuasiDistanceConstants estimate_quasi_distance_constants(int n, std::size_t sample_count, std::uint64_t seed);

/// Numerator |f(xy) - f(x)| and denominator max{|xy|^(l-1), |x|^(l-1)} |y| of the
/// homogeneous-increment ratio for f = gauge^l.
struct IncrementTerms {
  double numerator = 0.0;
  double denominator = 0.0;
  double band_ratio = 1.0;  ///< |xy| / |x|

  double ratio() const { return denominator > 0.0 ? numerator / denominator : 0.0; }
};

IncrementTerms increment_terms(const GroupPoint& x, const GroupPoint& y, double lambda_exponent);

struct IncrementReport {
  double lambda_exponent = 1.0;
  double sup_ratio = 0.0;       ///< over all accepted samples
  double half_sup_ratio = 0.0;  ///< over the first half of the draws
  std::size_t accepted = 0;
  std::size_t drawn = 0;
  bool stable = true;  ///< false if the sup more than doubles from half to full sample
};

/// Empirical constant of the homogeneous-increment inequality over pairs with
/// |xy| / |x| in [1/2, 2].
IncrementReport check_homogeneous_increment(double lambda_exponent, std::size_t sample_count,
                                            std::uint64_t seed, int n = 1);

}  // namespace hfrac
