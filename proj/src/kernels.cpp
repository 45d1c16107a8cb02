#include "hfrac/kernels.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>
#include <string>

namespace hfrac {

double KernelSpec::exponent() const {
  const int Q = 2 * n + 2;
  return kind == KernelKind::singular ? -Q - alpha : alpha - Q;
}

void KernelSpec::validate() const {
  require(n >= 1, "KernelSpec: n must be >= 1");
  const int Q = 2 * n + 2;
  if (kind == KernelKind::singular) {
    require(alpha > 0.0 && alpha < 2.0, "KernelSpec: singular kernels need alpha in (0, 2)");
  } else {
    require(alpha > 0.0 && alpha < Q, "KernelSpec: riesz/geometric kernels need alpha in (0, Q)");
  }
}

double analytic_kernel(const KernelSpec& spec, const GroupPoint& p) {
  spec.validate();
  require(p.n() == spec.n, "analytic_kernel: dimension mismatch");
  require(!p.is_identity(), "analytic_kernel: undefined at the identity (principal value is handled by callers)");
  return spec.constant * std::pow(gauge(p), spec.exponent());
}

namespace {

std::vector<std::size_t> inverse_table(const Lattice& lattice) {
  std::vector<std::size_t> inv(lattice.size());
  for (std::size_t i = 0; i < lattice.size(); ++i) inv[i] = lattice.inverse(i);
  return inv;
}

}  // namespace

KernelTable riesz_kernel_from_heat(const SpectralDecomposition& decomp, double alpha, const HeatQuadrature& quad) {
  require(decomp.lattice != nullptr, "riesz_kernel_from_heat: decomposition has no lattice");
  const Lattice& lattice = *decomp.lattice;
  require(alpha > 0.0 && alpha < lattice.Q(), "riesz_kernel_from_heat: alpha must lie in (0, Q)");
  const double sigma = alpha / 2.0;
  const double gap = decomp.spectral_gap();
  const double inv_gamma = 1.0 / std::tgamma(sigma);
  Eigen::VectorXd m(decomp.size());
  for (Eigen::Index i = 0; i < decomp.size(); ++i) {
    m[i] = decomp.is_zero_mode(i) ? 0.0 : inv_gamma * heat_moment(decomp.eigenvalues[i], sigma, quad, gap);
  }
  // h(t, .) = e^{-tL} delta_0 / vol; integrate the time weights spectrally.
  Eigen::VectorXd delta = Eigen::VectorXd::Zero(decomp.size());
  delta[static_cast<Eigen::Index>(lattice.origin())] = 1.0;
  Eigen::VectorXd values = apply_multiplier(decomp, m, delta) / lattice.cell_volume();

  KernelTable out;
  out.lattice = decomp.lattice;
  out.offset = -values.minCoeff();
  out.values = values.array() + out.offset;
  out.spec = {KernelKind::riesz, alpha, lattice.n(), Normalization::heat_extracted, 1.0};
  return out;
}

KernelTable singular_kernel_from_heat(const SpectralDecomposition& decomp, double alpha) {
  require(decomp.lattice != nullptr, "singular_kernel_from_heat: decomposition has no lattice");
  require(alpha > 0.0 && alpha < 2.0, "singular_kernel_from_heat: alpha must lie in (0, 2)");
  const Lattice& lattice = *decomp.lattice;
  Eigen::VectorXd delta = Eigen::VectorXd::Zero(decomp.size());
  delta[static_cast<Eigen::Index>(lattice.origin())] = 1.0;
  Eigen::VectorXd values =
      -frac_power_apply(decomp, {alpha / 2.0, ZeroModePolicy::keep_zero}, delta) / lattice.cell_volume();
  values[static_cast<Eigen::Index>(lattice.origin())] = 0.0;
  KernelTable out;
  out.lattice = decomp.lattice;
  out.values = std::move(values);
  out.spec = {KernelKind::singular, alpha, lattice.n(), Normalization::heat_extracted, 1.0};
  return out;
}

double koranyi_ball_volume(int n) {
  // int_{|z|<1} sqrt(1 - |z|^4) / 2 dz in R^{2n}.
  return std::pow(std::numbers::pi, n) * std::beta(n / 2.0, 1.5) / (4.0 * std::tgamma(static_cast<double>(n)));
}

KernelTable periodized_singular_kernel(LatticePtr lattice, double alpha, double constant, double cutoff_periods) {
  require(lattice != nullptr, "periodized_singular_kernel: null lattice");
  require(alpha > 0.0 && alpha < 2.0, "periodized_singular_kernel: alpha must lie in (0, 2)");
  const int n = lattice->n();
  const int Q = lattice->Q();
  const std::int64_t M = lattice->M();
  const std::int64_t period = lattice->vertical_period();
  const double h = lattice->h();
  const double ht = lattice->h_t();
  if (cutoff_periods <= 0.0) cutoff_periods = n == 1 ? 8.0 : 2.0;
  const double R = cutoff_periods * static_cast<double>(M) * h;
  const double R4 = R * R * R * R;
  const auto I = static_cast<std::int64_t>(std::ceil(cutoff_periods)) + 1;
  const double power = -(Q + alpha) / 4.0;  // g^{-Q-alpha} = (r^4 + 16 t^2)^{power}

  const int shifts = 2 * n;
  std::size_t combos = 1;
  for (int s = 0; s < shifts; ++s) combos *= static_cast<std::size_t>(2 * I + 1);

  Eigen::VectorXd values = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(lattice->size()));
  std::vector<std::int64_t> shift(shifts);
  for (std::size_t index = 1; index < lattice->size(); ++index) {
    const auto c = lattice->coords(index);
    double sum = 0.0;
    for (std::size_t combo = 0; combo < combos; ++combo) {
      std::size_t rest = combo;
      for (int s = 0; s < shifts; ++s) {
        shift[s] = static_cast<std::int64_t>(rest % (2 * I + 1)) - I;
        rest /= static_cast<std::size_t>(2 * I + 1);
      }
      double r2 = 0.0;
      std::int64_t base = c[2 * n];
      for (int i = 0; i < n; ++i) {
        const std::int64_t A = c[i] + M * shift[i];
        const std::int64_t B = c[n + i] + M * shift[n + i];
        r2 += static_cast<double>(A * A + B * B);
        base += M * (shift[i] * c[n + i] - shift[n + i] * c[i]);
      }
      r2 *= h * h;
      const double r4 = r2 * r2;
      if (r4 > R4) continue;
      const double tc = std::sqrt(R4 - r4) / 4.0 / ht;
      const auto m_lo = static_cast<std::int64_t>(std::ceil((-tc - static_cast<double>(base)) / period));
      const auto m_hi = static_cast<std::int64_t>(std::floor((tc - static_cast<double>(base)) / period));
      for (std::int64_t m = m_lo; m <= m_hi; ++m) {
        const double t = static_cast<double>(base + m * period) * ht;
        const double q = r4 + 16.0 * t * t;
        if (q > 0.0) sum += std::pow(q, power);
      }
    }
    values[static_cast<Eigen::Index>(index)] = sum;
  }
  // Images beyond the cutoff: continuum integral of |y|^{-Q-alpha} over
  // |y| > R, spread over the quotient volume.
  const double covolume = static_cast<double>(lattice->size()) * lattice->cell_volume();
  const double tail = Q * koranyi_ball_volume(n) * std::pow(R, -alpha) / (alpha * covolume);
  for (Eigen::Index i = 1; i < values.size(); ++i) values[i] = constant * (values[i] + tail);

  KernelTable out;
  out.lattice = std::move(lattice);
  out.values = std::move(values);
  out.spec = {KernelKind::singular, alpha, n, Normalization::analytic_surrogate, constant};
  return out;
}

KernelTable analytic_kernel_table(LatticePtr lattice, const KernelSpec& spec) {
  require(lattice != nullptr, "analytic_kernel_table: null lattice");
  spec.validate();
  require(spec.n == lattice->n(), "analytic_kernel_table: dimension mismatch");
  Eigen::VectorXd values(static_cast<Eigen::Index>(lattice->size()));
  for (std::size_t i = 0; i < lattice->size(); ++i) {
    values[static_cast<Eigen::Index>(i)] =
        i == lattice->origin() ? 0.0 : spec.constant * std::pow(lattice->wrapped_gauge(i), spec.exponent());
  }
  KernelTable out;
  out.lattice = std::move(lattice);
  out.values = std::move(values);
  out.spec = spec;
  return out;
}

Eigen::MatrixXd convolution_matrix(const KernelTable& kernel) {
  const Lattice& lattice = *kernel.lattice;
  const auto N = static_cast<Eigen::Index>(lattice.size());
  const std::vector<std::size_t> inv = inverse_table(lattice);
  const double vol = lattice.cell_volume();
  Eigen::MatrixXd C(N, N);
#pragma omp parallel for schedule(static)
  for (Eigen::Index y = 0; y < N; ++y) {
    for (Eigen::Index x = 0; x < N; ++x) {
      C(x, y) = kernel.values[static_cast<Eigen::Index>(lattice.multiply(inv[static_cast<std::size_t>(y)],
                                                                         static_cast<std::size_t>(x)))] *
                vol;
    }
  }
  return C;
}

Eigen::VectorXd group_convolve(const Lattice& lattice, const Eigen::VectorXd& u, const KernelTable& kernel) {
  require_same_lattice(lattice, *kernel.lattice, "group_convolve");
  require(static_cast<std::size_t>(u.size()) == lattice.size(), "group_convolve: size mismatch");
  const auto N = static_cast<Eigen::Index>(lattice.size());
  const std::vector<std::size_t> inv = inverse_table(lattice);
  const double vol = lattice.cell_volume();
  Eigen::VectorXd out(N);
  // Each output node is reduced in a fixed order by one thread.
#pragma omp parallel for schedule(static)
  for (Eigen::Index x = 0; x < N; ++x) {
    double acc = 0.0;
    for (Eigen::Index y = 0; y < N; ++y) {
      if (u[y] == 0.0) continue;
      acc += u[y] * kernel.values[static_cast<Eigen::Index>(
                        lattice.multiply(inv[static_cast<std::size_t>(y)], static_cast<std::size_t>(x)))];
    }
    out[x] = acc * vol;
  }
  return out;
}

GridFunction group_convolve(const GridFunction& u, const KernelTable& kernel) {
  return {u.lattice, group_convolve(*u.lattice, u.values, kernel)};
}

SingularOperator SingularOperator::scaled(double new_constant) const {
  SingularOperator out;
  out.kernel = kernel;
  out.constant = new_constant;
  out.matrix = constant != 0.0 ? Eigen::MatrixXd(matrix * (new_constant / constant)) : Eigen::MatrixXd(matrix);
  return out;
}

SingularOperator make_singular_operator(KernelTable kernel, double constant) {
  kernel.values[static_cast<Eigen::Index>(kernel.lattice->origin())] = 0.0;
  SingularOperator op;
  const Eigen::MatrixXd C = convolution_matrix(kernel);
  op.matrix = constant * (Eigen::MatrixXd(C.rowwise().sum().asDiagonal()) - C);
  op.kernel = std::move(kernel);
  op.constant = constant;
  return op;
}

GridFunction singular_frac_apply(const GridFunction& u, double alpha, double constant) {
  require(alpha > 0.0 && alpha < 2.0, "singular_frac_apply: alpha must lie in (0, 2)");
  const KernelTable kernel = periodized_singular_kernel(u.lattice, alpha);
  const Lattice& lat = *u.lattice;
  const auto N = static_cast<std::ptrdiff_t>(lat.size());
  const double scale = constant * lat.cell_volume();
  Eigen::VectorXd out(N);
  // Differences are formed before weighting, so constants map to exactly 0.
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t x = 0; x < N; ++x) {
    double acc = 0.0;
    for (std::ptrdiff_t y = 0; y < N; ++y) {
      if (y == x) continue;
      const std::size_t rel = lat.multiply(lat.inverse(static_cast<std::size_t>(y)), static_cast<std::size_t>(x));
      acc += (u.values[x] - u.values[y]) * kernel.values[static_cast<Eigen::Index>(rel)];
    }
    out[x] = scale * acc;
  }
  return {u.lattice, std::move(out)};
}

CalibrationResult calibrate_singular_constant(const SpectralDecomposition& decomp, const SingularOperator& unit,
                                              std::span<const Eigen::VectorXd> corpus) {
  require(!corpus.empty(), "calibrate_singular_constant: empty corpus");
  const double alpha = unit.kernel.spec.alpha;
  const Eigen::MatrixXd P = frac_power_matrix(decomp, {alpha / 2.0, ZeroModePolicy::keep_zero});
  double sp = 0.0, ss = 0.0, pp = 0.0;
  std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>> images;
  images.reserve(corpus.size());
  for (const Eigen::VectorXd& u : corpus) {
    Eigen::VectorXd s = unit.apply(u) / unit.constant;
    Eigen::VectorXd p = P * u;
    sp += s.dot(p);
    ss += s.squaredNorm();
    pp += p.squaredNorm();
    images.emplace_back(std::move(s), std::move(p));
  }
  require(ss > 0.0 && pp > 0.0, "calibrate_singular_constant: corpus is trivial (all constant)");
  CalibrationResult out;
  out.constant = sp / ss;
  double err = 0.0;
  for (const auto& [s, p] : images) err += (out.constant * s - p).squaredNorm();
  out.residual = std::sqrt(err / pp);
  return out;
}

CalibrationResult calibrate_singular_constant(const SpectralDecomposition& decomp, double alpha,
                                              std::span<const Eigen::VectorXd> corpus) {
  require(decomp.lattice != nullptr, "calibrate_singular_constant: decomposition has no lattice");
  return calibrate_singular_constant(decomp, make_singular_operator(periodized_singular_kernel(decomp.lattice, alpha)),
                                     corpus);
}

RieszFamily::RieszFamily(const SpectralDecomposition& decomp, HeatQuadrature quad)
    : decomp_(&decomp), quad_(std::move(quad)) {
  require(decomp.lattice != nullptr, "RieszFamily: decomposition has no lattice");
}

RieszFamily::RieszFamily(const SpectralDecomposition& decomp)
    : RieszFamily(decomp, HeatQuadrature::for_spectrum(decomp)) {}

const Eigen::MatrixXd& RieszFamily::matrix(double order) const {
  require(order > 0.0 && order < Q(), "Riesz potential order must lie in (0, Q), got " + std::to_string(order));
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = cache_.find(order);
  if (it == cache_.end()) {
    auto C = std::make_unique<Eigen::MatrixXd>(convolution_matrix(riesz_kernel_from_heat(*decomp_, order, quad_)));
    it = cache_.emplace(order, std::move(C)).first;
  }
  return *it->second;
}

Eigen::VectorXd RieszFamily::apply(double order, const Eigen::VectorXd& f) const {
  if (std::abs(order) <= 1e-12) return f;
  return matrix(order) * f;
}

void write_kernel_csv(std::ostream& out, const KernelTable& kernel) {
  out << "node,gauge,kernel\n" << std::setprecision(17);
  for (std::size_t i = 0; i < kernel.lattice->size(); ++i) {
    out << i << ',' << kernel.lattice->wrapped_gauge(i) << ',' << kernel.values[static_cast<Eigen::Index>(i)] << '\n';
  }
}

}  // namespace hfrac
