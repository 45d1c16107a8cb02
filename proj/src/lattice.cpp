#include "hfrac/lattice.hpp"

#include <Eigen/SparseCore>

#include <array>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>
#include <string>

namespace hfrac {
namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t m) {
  std::int64_t q = a / m;
  if ((a % m != 0) && ((a < 0) != (m < 0))) --q;
  return q;
}

std::int64_t positive_mod(std::int64_t a, std::int64_t m) {
  const std::int64_t r = a % m;
  return r < 0 ? r + m : r;
}

}  // namespace

Lattice::Lattice(int n, int M, double h) : n_(n), M_(M), h_(h) {
  std::size_t horizontal = 1;
  for (int i = 0; i < 2 * n; ++i) horizontal *= static_cast<std::size_t>(M);
  size_ = horizontal * static_cast<std::size_t>(M);

  const int cc = coord_count();
  coords_.resize(size_ * static_cast<std::size_t>(cc));
  for (std::size_t hi = 0; hi < horizontal; ++hi) {
    std::vector<std::int32_t> ab(2 * n);
    std::size_t rest = hi;
    for (int k = 2 * n - 1; k >= 0; --k) {
      ab[k] = static_cast<std::int32_t>(rest % M);
      rest /= M;
    }
    int parity = 0;
    for (int i = 0; i < n; ++i) parity ^= (ab[i] * ab[n + i]) & 1;
    for (int level = 0; level < M; ++level) {
      const std::size_t index = hi * M + level;
      std::int32_t* dst = coords_.data() + index * cc;
      for (int k = 0; k < 2 * n; ++k) dst[k] = ab[k];
      dst[2 * n] = 2 * level + parity;
    }
  }

  // Wrap-aware gauge: minimum over the representatives (a + M i, b + M j,
  // c + M sum(i b - j a) + 2M m) with i, j in {-1, 0, 1}^n.
  gauge_table_.resize(static_cast<Eigen::Index>(size_));
  const int shifts = 2 * n;
  std::size_t combos = 1;
  for (int s = 0; s < shifts; ++s) combos *= 3;
  const std::int64_t period = 2 * M;
  for (std::size_t index = 0; index < size_; ++index) {
    const auto c = coords(index);
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t combo = 0; combo < combos; ++combo) {
      std::size_t rest = combo;
      std::vector<std::int64_t> shift(shifts);
      for (int s = 0; s < shifts; ++s) {
        shift[s] = static_cast<std::int64_t>(rest % 3) - 1;
        rest /= 3;
      }
      double r2 = 0.0;
      std::int64_t vertical = c[2 * n];
      for (int i = 0; i < n; ++i) {
        const std::int64_t A = c[i] + M * shift[i];
        const std::int64_t B = c[n + i] + M * shift[n + i];
        r2 += static_cast<double>(A * A + B * B);
        vertical += M * (shift[i] * c[n + i] - shift[n + i] * c[i]);
      }
      r2 *= h_ * h_;
      const std::int64_t base = positive_mod(vertical, period);
      for (std::int64_t m = -1; m <= 0; ++m) {
        const double t = static_cast<double>(base + m * period) * h_t();
        best = std::min(best, std::sqrt(std::sqrt(r2 * r2 + 16.0 * t * t)));
      }
    }
    gauge_table_[static_cast<Eigen::Index>(index)] = best;
  }
}

LatticePtr Lattice::build(int n, int M, double h) {
  require(n >= 1, "n must be >= 1");
  require(M >= 4 && M % 2 == 0, "M must be even and >= 4");
  require(h > 0.0 && std::isfinite(h), "h must be > 0");
  return LatticePtr(new Lattice(n, M, h));
}

LatticePtr Lattice::build(int n, int M) {
  require(M > 0, "M must be even and >= 4");
  return build(n, M, 2.0 * std::numbers::pi / M);
}

double Lattice::cell_volume() const { return std::pow(h_, 2 * n_) * h_t(); }

GroupPoint Lattice::point(std::size_t index) const {
  const auto c = coords(index);
  GroupPoint p = GroupPoint::identity(n_);
  for (int k = 0; k < 2 * n_; ++k) p.z[k] = h_ * c[k];
  p.t = h_t() * c[2 * n_];
  return p;
}

std::size_t Lattice::index_of(std::span<const std::int64_t> canonical) const {
  std::size_t hi = 0;
  for (int k = 0; k < 2 * n_; ++k) hi = hi * M_ + static_cast<std::size_t>(canonical[k]);
  return hi * M_ + static_cast<std::size_t>(canonical[2 * n_] >> 1);
}

std::size_t Lattice::wrap(std::span<const std::int64_t> p) const {
  require(static_cast<int>(p.size()) == coord_count(), "wrap: dimension mismatch");
  std::array<std::int64_t, 16> small{};
  std::vector<std::int64_t> large;
  std::int64_t* canonical = small.data();
  if (coord_count() > static_cast<int>(small.size())) {
    large.resize(coord_count());
    canonical = large.data();
  }
  const std::int64_t M = M_;
  std::int64_t parity = 0;
  std::int64_t correction = 0;
  for (int i = 0; i < n_; ++i) {
    parity += p[i] * p[n_ + i];
    const std::int64_t qi = floor_div(p[i], M);
    const std::int64_t qj = floor_div(p[n_ + i], M);
    canonical[i] = p[i] - M * qi;
    canonical[n_ + i] = p[n_ + i] - M * qj;
    correction += qi * canonical[n_ + i] - qj * canonical[i];
  }
  require(positive_mod(p[2 * n_] - parity, 2) == 0, "wrap: point is not on the lattice (parity)");
  canonical[2 * n_] = positive_mod(p[2 * n_] - M * correction, 2 * M);
  return index_of({canonical, static_cast<std::size_t>(coord_count())});
}

std::size_t Lattice::wrap(const GroupPoint& p) const {
  require(p.n() == n_, "wrap: dimension mismatch");
  std::vector<std::int64_t> integer(coord_count());
  auto snap = [](double value, double unit) {
    const double scaled = value / unit;
    const double rounded = std::round(scaled);
    require(std::abs(scaled - rounded) <= 1e-9 * std::max(1.0, std::abs(scaled)),
            "wrap: point is not on the lattice");
    return static_cast<std::int64_t>(rounded);
  };
  for (int k = 0; k < 2 * n_; ++k) integer[k] = snap(p.z[k], h_);
  integer[2 * n_] = snap(p.t, h_t());
  return wrap(integer);
}

std::size_t Lattice::multiply(std::size_t i, std::size_t j) const {
  const auto a = coords(i);
  const auto b = coords(j);
  std::array<std::int64_t, 16> small{};
  std::vector<std::int64_t> large;
  std::int64_t* out = small.data();
  if (coord_count() > static_cast<int>(small.size())) {
    large.resize(coord_count());
    out = large.data();
  }
  std::int64_t vertical = static_cast<std::int64_t>(a[2 * n_]) + b[2 * n_];
  for (int k = 0; k < n_; ++k) {
    out[k] = static_cast<std::int64_t>(a[k]) + b[k];
    out[n_ + k] = static_cast<std::int64_t>(a[n_ + k]) + b[n_ + k];
    vertical += static_cast<std::int64_t>(a[k]) * b[n_ + k] - static_cast<std::int64_t>(a[n_ + k]) * b[k];
  }
  out[2 * n_] = vertical;
  return wrap(std::span<const std::int64_t>(out, static_cast<std::size_t>(coord_count())));
}

std::size_t Lattice::inverse(std::size_t i) const {
  const auto a = coords(i);
  std::vector<std::int64_t> out(coord_count());
  for (int k = 0; k < coord_count(); ++k) out[k] = -static_cast<std::int64_t>(a[k]);
  return wrap(out);
}

std::size_t Lattice::generator(int k) const {
  require(k >= 0 && k < 2 * n_, "generator: index out of range");
  std::vector<std::int64_t> g(coord_count(), 0);
  g[k] = 1;
  return wrap(g);
}

nlohmann::json to_json(const Lattice& lattice) {
  return {{"n", lattice.n()},
          {"M", lattice.M()},
          {"M_t", lattice.vertical_period()},
          {"vertical_levels", lattice.vertical_levels()},
          {"h", lattice.h()},
          {"h_t", lattice.h_t()},
          {"N", lattice.size()},
          {"cell_volume", lattice.cell_volume()},
          {"Q", lattice.Q()}};
}

void require_same_lattice(const Lattice& a, const Lattice& b, const char* what) {
  require(a.same_shape(b), std::string(what) + ": lattice mismatch");
}

GridFunction::GridFunction(LatticePtr lat, Eigen::VectorXd v) : lattice(std::move(lat)), values(std::move(v)) {
  require(lattice != nullptr, "GridFunction: null lattice");
  require(static_cast<std::size_t>(values.size()) == lattice->size(), "GridFunction: size does not match lattice");
  require(values.allFinite(), "GridFunction: values must be finite");
}

GridFunction GridFunction::zeros(LatticePtr lat) {
  const auto n = static_cast<Eigen::Index>(lat->size());
  return {std::move(lat), Eigen::VectorXd::Zero(n)};
}

GridFunction GridFunction::constant(LatticePtr lat, double value) {
  const auto n = static_cast<Eigen::Index>(lat->size());
  return {std::move(lat), Eigen::VectorXd::Constant(n, value)};
}

GridFunction GridFunction::delta(LatticePtr lat, std::size_t index) {
  GridFunction out = zeros(lat);
  out.values[static_cast<Eigen::Index>(index)] = 1.0 / lat->cell_volume();
  return out;
}

GridFunction GridFunction::sample(LatticePtr lat, const std::function<double(const GroupPoint&)>& f) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(lat->size()));
  for (std::size_t i = 0; i < lat->size(); ++i) v[static_cast<Eigen::Index>(i)] = f(lat->point(i));
  return {std::move(lat), std::move(v)};
}

GridFunction GridFunction::mean_removed() const {
  return {lattice, (values.array() - values.mean()).matrix()};
}

GridFunction SubLaplacianOperator::apply(const GridFunction& u) const {
  require_same_lattice(*lattice, *u.lattice, "SubLaplacianOperator::apply");
  return {u.lattice, matrix * u.values};
}

namespace {

// True if the step x -> x s_k leaves the canonical box (i.e. required wrapping).
bool step_wraps(const Lattice& lattice, std::size_t x, int k) {
  const int n = lattice.n();
  const auto c = lattice.coords(x);
  if (c[k] + 1 >= lattice.M()) return true;
  // (a,b,c)(e_i,0,0) shifts c by -b_i; (a,b,c)(0,e_i,0) shifts c by +a_i.
  const int shift = k < n ? -c[n + k] : c[k - n];
  const int vertical = c[2 * n] + shift;
  return vertical < 0 || vertical >= lattice.vertical_period();
}

}  // namespace

Eigen::SparseMatrix<double> difference_operator(const Lattice& lattice, int k, Boundary boundary) {
  const auto N = static_cast<Eigen::Index>(lattice.size());
  const std::size_t g = lattice.generator(k);
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(2 * lattice.size());
  const double inv_h = 1.0 / lattice.h();
  for (std::size_t x = 0; x < lattice.size(); ++x) {
    const auto row = static_cast<Eigen::Index>(x);
    triplets.emplace_back(row, row, -inv_h);
    if (boundary == Boundary::dirichlet && step_wraps(lattice, x, k)) continue;
    triplets.emplace_back(row, static_cast<Eigen::Index>(lattice.multiply(x, g)), inv_h);
  }
  Eigen::SparseMatrix<double> D(N, N);
  D.setFromTriplets(triplets.begin(), triplets.end());
  return D;
}

SubLaplacianOperator assemble_sublaplacian(LatticePtr lattice, Boundary boundary) {
  require(lattice != nullptr, "assemble_sublaplacian: null lattice");
  const auto N = static_cast<Eigen::Index>(lattice->size());
  // Integer stencil first, scaled once at the end, so L = L^T holds bitwise.
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(4 * lattice->size() * 2 * lattice->n());
  for (int k = 0; k < 2 * lattice->n(); ++k) {
    const std::size_t g = lattice->generator(k);
    for (std::size_t x = 0; x < lattice->size(); ++x) {
      const auto xi = static_cast<Eigen::Index>(x);
      triplets.emplace_back(xi, xi, 1.0);
      if (boundary == Boundary::dirichlet && step_wraps(*lattice, x, k)) continue;
      const auto yi = static_cast<Eigen::Index>(lattice->multiply(x, g));
      triplets.emplace_back(yi, yi, 1.0);
      triplets.emplace_back(xi, yi, -1.0);
      triplets.emplace_back(yi, xi, -1.0);
    }
  }
  SubLaplacianOperator op;
  op.lattice = lattice;
  op.boundary = boundary;
  op.matrix.resize(N, N);
  op.matrix.setFromTriplets(triplets.begin(), triplets.end());
  op.matrix *= 1.0 / (lattice->h() * lattice->h());
  op.matrix.makeCompressed();
  return op;
}

std::vector<GridFunction> horizontal_gradient(const GridFunction& u) {
  const Lattice& lattice = *u.lattice;
  std::vector<GridFunction> out;
  out.reserve(2 * lattice.n());
  const double inv_h = 1.0 / lattice.h();
  for (int k = 0; k < 2 * lattice.n(); ++k) {
    const std::size_t g = lattice.generator(k);
    Eigen::VectorXd d(u.values.size());
    for (std::size_t x = 0; x < lattice.size(); ++x) {
      const auto xi = static_cast<Eigen::Index>(x);
      d[xi] = (u.values[static_cast<Eigen::Index>(lattice.multiply(x, g))] - u.values[xi]) * inv_h;
    }
    out.emplace_back(u.lattice, std::move(d));
  }
  return out;
}

void write_coo(std::ostream& out, const SubLaplacianOperator& op) {
  out << std::setprecision(17);
  for (int col = 0; col < op.matrix.outerSize(); ++col) {
    for (Eigen::SparseMatrix<double>::InnerIterator it(op.matrix, col); it; ++it) {
      out << it.row() << ' ' << it.col() << ' ' << it.value() << '\n';
    }
  }
}

}  // namespace hfrac
