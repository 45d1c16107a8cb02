#pragma once

// Finite quotient of the discrete Heisenberg group used as the computational
// domain. Nodes are the points (a h, b h, c h_t) with a, b in Z^n, c in Z,
// h_t = h^2/2 and c = sum_i a_i b_i (mod 2) -- the subgroup generated by the
// horizontal steps. The quotient is by the normal subgroup generated by
// (M h e_i, 0), (0, M h e_i) and the central element (0, 0, 2M h_t), which
// leaves a finite group of order M^{2n} * M on which left translations and
// group convolutions are exact.

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <nlohmann/json.hpp>

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

#include "hfrac/group.hpp"

namespace hfrac {

class Lattice;
using LatticePtr = std::shared_ptr<const Lattice>;

class Lattice {
 public:
  /// Requires n >= 1, M >= 4 even, h > 0.
  static LatticePtr build(int n, int M, double h);
  /// Horizontal period 2 pi (h = 2 pi / M).
  static LatticePtr build(int n, int M);

  int n() const { return n_; }
  int M() const { return M_; }
  int Q() const { return 2 * n_ + 2; }
  /// Vertical period in units of h_t (the central element (0,0,M_t) is trivial).
  int vertical_period() const { return 2 * M_; }
  /// Distinct vertical levels above each horizontal site.
  int vertical_levels() const { return M_; }
  double h() const { return h_; }
  double h_t() const { return h_ * h_ / 2.0; }
  double cell_volume() const;
  std::size_t size() const { return size_; }
  /// Number of integer coordinates per node (2n + 1).
  int coord_count() const { return 2 * n_ + 1; }

  /// Canonical integer coordinates (a_1..a_n, b_1..b_n, c) of a node with
  /// a, b in [0, M) and c in [0, 2M).
  std::span<const std::int32_t> coords(std::size_t index) const {
    return {coords_.data() + index * static_cast<std::size_t>(coord_count()),
            static_cast<std::size_t>(coord_count())};
  }
  GroupPoint point(std::size_t index) const;

  /// Reduces an arbitrary integer point of the discrete group modulo the
  /// periodic subgroup. Throws UsageError if the parity constraint fails.
  std::size_t wrap(std::span<const std::int64_t> integer_point) const;
  /// Same for a real point; coordinates must be integer multiples of (h, h_t)
  /// up to 1e-9 relative.
  std::size_t wrap(const GroupPoint& p) const;

  std::size_t origin() const { return 0; }
  std::size_t multiply(std::size_t i, std::size_t j) const;
  std::size_t inverse(std::size_t i) const;
  /// Node of the k-th horizontal generator: X_1..X_n for k < n, Y_1..Y_n after.
  std::size_t generator(int k) const;

  /// Smallest gauge over all representatives of the node (wrap-aware gauge).
  double wrapped_gauge(std::size_t index) const { return gauge_table_[static_cast<Eigen::Index>(index)]; }
  const Eigen::VectorXd& gauge_table() const { return gauge_table_; }

  bool same_shape(const Lattice& other) const {
    return n_ == other.n_ && M_ == other.M_ && h_ == other.h_;
  }

 private:
  Lattice(int n, int M, double h);
  std::size_t index_of(std::span<const std::int64_t> canonical) const;

  int n_;
  int M_;
  double h_;
  std::size_t size_;
  std::vector<std::int32_t> coords_;
  Eigen::VectorXd gauge_table_;
};

nlohmann::json to_json(const Lattice& lattice);

void require_same_lattice(const Lattice& a, const Lattice& b, const char* what);

/// Real-valued samples on a lattice.
struct GridFunction {
  LatticePtr lattice;
  Eigen::VectorXd values;

  GridFunction() = default;
  GridFunction(LatticePtr lat, Eigen::VectorXd v);

  static GridFunction zeros(LatticePtr lat);
  static GridFunction constant(LatticePtr lat, double value);
  /// Unit-mass delta: 1 / cell_volume at the node, so that its L^1 norm is 1.
  static GridFunction delta(LatticePtr lat, std::size_t index);
  static GridFunction sample(LatticePtr lat, const std::function<double(const GroupPoint&)>& f);

  std::size_t size() const { return static_cast<std::size_t>(values.size()); }
  double mean() const { return values.mean(); }
  GridFunction mean_removed() const;
};

enum class Boundary { periodic, dirichlet };

struct SubLaplacianOperator {
  LatticePtr lattice;
  Boundary boundary = Boundary::periodic;
  /// Positive semidefinite, L = sum_k D_k^T D_k.
  Eigen::SparseMatrix<double> matrix;

  Eigen::VectorXd apply(const Eigen::VectorXd& u) const { return matrix * u; }
  GridFunction apply(const GridFunction& u) const;
};

/// Forward difference along the k-th left-invariant horizontal field,
/// (D_k u)(x) = (u(x s_k) - u(x)) / h, realized as exact right translation.
/// With Boundary::dirichlet steps that leave the canonical box are dropped
/// (the neighbour value is treated as zero).
Eigen::SparseMatrix<double> difference_operator(const Lattice& lattice, int k,
                                                Boundary boundary = Boundary::periodic);

SubLaplacianOperator assemble_sublaplacian(LatticePtr lattice, Boundary boundary = Boundary::periodic);

/// The 2n forward differences X_1..X_n, Y_1..Y_n used by the periodic operator.
std::vector<GridFunction> horizontal_gradient(const GridFunction& u);

/// Coordinate-list dump: one "row col value" line per stored entry.
void write_coo(std::ostream& out, const SubLaplacianOperator& op);

}  // namespace hfrac
