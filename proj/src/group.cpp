#include "hfrac/group.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace hfrac {

GroupPoint sample_point(int n, std::mt19937_64& rng) {
  require(n >= 1, "sample_point: n must be >= 1");
  std::normal_distribution<double> normal(0.0, 1.0);
  GroupPoint p = GroupPoint::identity(n);
  for (Eigen::Index i = 0; i < p.z.size(); ++i) p.z[i] = normal(rng);
  p.t = normal(rng);
  return p;
}

QuasiDistanceConstants quasi_distance_constants(std::span<const std::pair<GroupPoint, GroupPoint>> pairs) {
  QuasiDistanceConstants out;
  double lower = std::numeric_limits<double>::infinity();
  double upper = 0.0;
  for (const auto& [x, y] : pairs) {
    const double gx = gauge(x);
    const double gy = gauge(y);
    const double gyx = gauge(group_mul(y, x));
    const double gap = std::abs(gx - gy);
    if (gap > 1e-12 * (gx + gy)) {
      lower = std::min(lower, gyx / gap);
      ++out.lower_samples;
    }
    if (gx + gy > 0.0) {
      upper = std::max(upper, gyx / (gx + gy));
      ++out.upper_samples;
    }
  }
  out.c_empirical = out.lower_samples > 0 ? lower : std::numeric_limits<double>::quiet_NaN();
  out.C_empirical = out.upper_samples > 0 ? upper : std::numeric_limits<double>::quiet_NaN();
  out.informative = out.lower_samples > 0 && out.upper_samples > 0;
  // c < 1 < C is assumed without loss of generality; keep the tightest such pair.
  out.c = out.lower_samples > 0 ? std::min(lower, std::nextafter(1.0, 0.0)) : 0.5;
  out.C = out.upper_samples > 0 ? std::max(upper, std::nextafter(1.0, 2.0)) : 2.0;
  return out;
}

QuasiDistanceConstants estimate_quasi_distance_constants(int n, std::size_t sample_count, std::uint64_t seed) {
  require(sample_count >= 1, "estimate_quasi_distance_constants: sample_count must be >= 1");
  std::mt19937_64 rng(seed);
  std::vector<std::pair<GroupPoint, GroupPoint>> pairs;
  pairs.reserve(sample_count);
  for (std::size_t i = 0; i < sample_count; ++i) {
    GroupPoint x = sample_point(n, rng);
    GroupPoint y = sample_point(n, rng);
    pairs.emplace_back(std::move(x), std::move(y));
  }
  return quasi_distance_constants(pairs);
}

IncrementTerms increment_terms(const GroupPoint& x, const GroupPoint& y, double lambda_exponent) {
  const double gx = gauge(x);
  const double gxy = gauge(group_mul(x, y));
  const double gy = gauge(y);
  IncrementTerms terms;
  terms.band_ratio = gx > 0.0 ? gxy / gx : std::numeric_limits<double>::infinity();
  terms.numerator = std::abs(std::pow(gxy, lambda_exponent) - std::pow(gx, lambda_exponent));
  const double e = lambda_exponent - 1.0;
  terms.denominator = std::max(std::pow(gxy, e), std::pow(gx, e)) * gy;
  return terms;
}

IncrementReport check_homogeneous_increment(double lambda_exponent, std::size_t sample_count,
                                            std::uint64_t seed, int n) {
  require(sample_count >= 1, "check_homogeneous_increment: sample_count must be >= 1");
  IncrementReport report;
  report.lambda_exponent = lambda_exponent;
  report.drawn = sample_count;
  std::mt19937_64 rng(seed);
  const std::size_t half = (sample_count + 1) / 2;
  for (std::size_t i = 0; i < sample_count; ++i) {
    const GroupPoint x = sample_point(n, rng);
    const GroupPoint y = sample_point(n, rng);
    const IncrementTerms terms = increment_terms(x, y, lambda_exponent);
    if (!(terms.band_ratio >= 0.5 && terms.band_ratio <= 2.0) || terms.denominator <= 0.0) continue;
    ++report.accepted;
    report.sup_ratio = std::max(report.sup_ratio, terms.ratio());
    if (i < half) report.half_sup_ratio = report.sup_ratio;
  }
  report.stable = std::isfinite(report.sup_ratio) && report.sup_ratio <= 2.0 * report.half_sup_ratio + 1e-12;
  return report;
}

}  // namespace hfrac
