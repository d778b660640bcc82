#pragma once

// DD/SDD cone machinery in "exploded" 2×2 block coordinates.
//
// A BlockSet holds one symmetric 2×2 block M_{i,j} per pair i<j, stored as the
// stacked coordinate vector m = [m_{0,1}, m_{0,2}, ..., m_{N-2,N-1}] with
// m_{i,j} = (x, y, z) = (M(1,1), M(2,2), M(1,2)). Ψ scatters every block onto
// rows/columns {i, j} of an N×N matrix and sums the results.

#include <Eigen/Core>
#include <cmath>
#include <utility>
#include <vector>

#include "ddsdp/errors.hpp"
#include "ddsdp/symmat.hpp"

namespace ddsdp {

enum class ConeKind { kDD, kSDD };

inline const char* to_string(ConeKind kind) { return kind == ConeKind::kDD ? "dd" : "sdd"; }

/// Blocks at or below this margin count as boundary points.
inline constexpr double kInteriorTolerance = 1e-14;

inline Eigen::Index pair_count(Eigen::Index n) { return n * (n - 1) / 2; }

/// Position of pair (i, j), i < j, in lexicographic pair order.
inline Eigen::Index pair_index(Eigen::Index i, Eigen::Index j, Eigen::Index n) {
  return i * n - i * (i + 1) / 2 + (j - i - 1);
}

/// All pairs (i, j), i < j, in lexicographic order.
inline std::vector<std::pair<Eigen::Index, Eigen::Index>> pair_list(Eigen::Index n) {
  std::vector<std::pair<Eigen::Index, Eigen::Index>> pairs;
  pairs.reserve(static_cast<std::size_t>(pair_count(n)));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  return pairs;
}

template <typename Scalar>
class BlockSet {
 public:
  using Block = Eigen::Matrix<Scalar, 2, 2>;

  explicit BlockSet(Eigen::Index order)
      : order_(order), coords_(Vector<Scalar>::Zero(3 * pair_count(order))) {
    if (order < 2) throw DimensionMismatch("BlockSet: order must be at least 2");
  }
  BlockSet(Eigen::Index order, Vector<Scalar> coords) : order_(order), coords_(std::move(coords)) {
    if (order < 2) throw DimensionMismatch("BlockSet: order must be at least 2");
    if (coords_.size() != 3 * pair_count(order))
      throw DimensionMismatch("BlockSet: coordinate vector has the wrong length");
  }

  Eigen::Index order() const { return order_; }
  Eigen::Index block_count() const { return pair_count(order_); }
  const Vector<Scalar>& coords() const { return coords_; }
  Vector<Scalar>& coords() { return coords_; }

  Block block(Eigen::Index k) const {
    Block b;
    b << coords_(3 * k), coords_(3 * k + 2), coords_(3 * k + 2), coords_(3 * k + 1);
    return b;
  }
  void set_block(Eigen::Index k, const Block& b) {
    coords_(3 * k) = b(0, 0);
    coords_(3 * k + 1) = b(1, 1);
    coords_(3 * k + 2) = b(0, 1);
  }

 private:
  Eigen::Index order_;
  Vector<Scalar> coords_;
};

template <typename Scalar>
SymMatrix<Scalar> psi_assemble(const BlockSet<Scalar>& blocks) {
  const Eigen::Index n = blocks.order();
  const auto& m = blocks.coords();
  SymMatrix<Scalar> y = SymMatrix<Scalar>::Zero(n, n);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j, ++k) {
      y(i, i) += m(3 * k);
      y(j, j) += m(3 * k + 1);
      y(i, j) += m(3 * k + 2);
      y(j, i) += m(3 * k + 2);
    }
  }
  return y;
}

/// Every block equal to I₂/(N−1), so that Ψ of the set is the identity.
template <typename Scalar = double>
BlockSet<Scalar> identity_blocks(Eigen::Index n) {
  BlockSet<Scalar> blocks(n);
  const Scalar d = Scalar(1) / Scalar(n - 1);
  for (Eigen::Index k = 0; k < blocks.block_count(); ++k) {
    blocks.coords()(3 * k) = d;
    blocks.coords()(3 * k + 1) = d;
  }
  return blocks;
}

/// Row-wise diagonal dominance with slack ≥ −tol.
template <typename Derived>
bool is_dd(const Eigen::MatrixBase<Derived>& y, typename Derived::Scalar tol) {
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    const auto off = y.row(i).cwiseAbs().sum() - std::abs(y(i, i));
    if (y(i, i) - off < -tol) return false;
  }
  return true;
}

/// Comparison matrix: |diagonal| on the diagonal, −|entry| elsewhere.
template <typename Derived>
SymMatrix<typename Derived::Scalar> comparison_matrix(const Eigen::MatrixBase<Derived>& y) {
  SymMatrix<typename Derived::Scalar> m = -y.cwiseAbs();
  m.diagonal() = y.diagonal().cwiseAbs();
  return m;
}

/// SDD iff the diagonal is nonnegative and the comparison matrix is PSD
/// (H-matrix characterization).
template <typename Derived>
bool is_sdd(const Eigen::MatrixBase<Derived>& y, typename Derived::Scalar tol) {
  if ((y.diagonal().array() < -tol).any()) return false;
  return is_psd(comparison_matrix(y), tol);
}

namespace detail {

template <typename Scalar>
void check_interior(Scalar x, Scalar y, Scalar z, ConeKind kind, Eigen::Index k) {
  const Scalar az = std::abs(z);
  const bool ok = kind == ConeKind::kDD
                      ? (x - az > kInteriorTolerance && y - az > kInteriorTolerance)
                      : (x > kInteriorTolerance && y > kInteriorTolerance &&
                         x * y - z * z > kInteriorTolerance);
  if (!ok || !std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z))
    throw BoundaryReached(k);
}

}  // namespace detail

/// True iff every block lies strictly inside its 2×2 cone.
template <typename Scalar>
bool is_interior(const BlockSet<Scalar>& blocks, ConeKind kind) {
  const auto& m = blocks.coords();
  for (Eigen::Index k = 0; k < blocks.block_count(); ++k) {
    try {
      detail::check_interior(m(3 * k), m(3 * k + 1), m(3 * k + 2), kind, k);
    } catch (const BoundaryReached&) {
      return false;
    }
  }
  return true;
}

/// Logarithmic barrier value:
///   DD:  ½ Σ [log(x² − z²) + log(y² − z²)]
///   SDD: Σ log(xy − z²)
template <typename Scalar>
Scalar phi(const BlockSet<Scalar>& blocks, ConeKind kind) {
  const auto& m = blocks.coords();
  Scalar total = 0;
  for (Eigen::Index k = 0; k < blocks.block_count(); ++k) {
    const Scalar x = m(3 * k), y = m(3 * k + 1), z = m(3 * k + 2);
    detail::check_interior(x, y, z, kind, k);
    if (kind == ConeKind::kDD) {
      // (x − z)(x + z) keeps precision when x ≈ |z|.
      total += Scalar(0.5) * (std::log((x - z) * (x + z)) + std::log((y - z) * (y + z)));
    } else {
      total += std::log(x * y - z * z);
    }
  }
  return total;
}

template <typename Scalar>
Vector<Scalar> phi_gradient(const BlockSet<Scalar>& blocks, ConeKind kind) {
  const auto& m = blocks.coords();
  Vector<Scalar> g(m.size());
  for (Eigen::Index k = 0; k < blocks.block_count(); ++k) {
    const Scalar x = m(3 * k), y = m(3 * k + 1), z = m(3 * k + 2);
    detail::check_interior(x, y, z, kind, k);
    if (kind == ConeKind::kDD) {
      const Scalar dx = (x - z) * (x + z), dy = (y - z) * (y + z);
      g(3 * k) = x / dx;
      g(3 * k + 1) = y / dy;
      g(3 * k + 2) = -z / dx - z / dy;
    } else {
      const Scalar d = x * y - z * z;
      g(3 * k) = y / d;
      g(3 * k + 1) = x / d;
      g(3 * k + 2) = Scalar(-2) * z / d;
    }
  }
  return g;
}

/// Block-diagonal Hessian, one dense 3×3 block per pair.
template <typename Scalar>
using BlockHessian = std::vector<Eigen::Matrix<Scalar, 3, 3>>;

/// ∇²φ per pair. These blocks are negative definite on the interior; Newton
/// solvers work with their negation.
template <typename Scalar>
BlockHessian<Scalar> phi_hessian(const BlockSet<Scalar>& blocks, ConeKind kind) {
  const auto& m = blocks.coords();
  BlockHessian<Scalar> hess(static_cast<std::size_t>(blocks.block_count()));
  for (Eigen::Index k = 0; k < blocks.block_count(); ++k) {
    const Scalar x = m(3 * k), y = m(3 * k + 1), z = m(3 * k + 2);
    detail::check_interior(x, y, z, kind, k);
    auto& h = hess[static_cast<std::size_t>(k)];
    if (kind == ConeKind::kDD) {
      const Scalar dx = (x - z) * (x + z), dy = (y - z) * (y + z);
      const Scalar dx2 = dx * dx, dy2 = dy * dy;
      const Scalar hxx = (-x * x - z * z) / dx2;
      const Scalar hyy = (-y * y - z * z) / dy2;
      h << hxx, 0, 2 * x * z / dx2,  //
          0, hyy, 2 * y * z / dy2,   //
          2 * x * z / dx2, 2 * y * z / dy2, hxx + hyy;
    } else {
      const Scalar d = x * y - z * z;
      const Scalar d2 = d * d;
      h << -y * y / d2, -z * z / d2, 2 * y * z / d2,  //
          -z * z / d2, -x * x / d2, 2 * x * z / d2,   //
          2 * y * z / d2, 2 * x * z / d2, -2 * (x * y + z * z) / d2;
    }
  }
  return hess;
}

/// h(Y) = (N−1) log|Y| − N(N−1) log(N−1).
template <typename Derived>
typename Derived::Scalar h_value(const Eigen::MatrixBase<Derived>& y) {
  using Scalar = typename Derived::Scalar;
  const Scalar n = static_cast<Scalar>(y.rows());
  const auto u = cholesky(y, Scalar(0));
  return (n - 1) * log_det(u) - n * (n - 1) * std::log(n - 1);
}

/// Partition of the edges of K_N (N even) into N−1 perfect matchings.
struct EdgeColoring {
  Eigen::Index order = 0;
  std::vector<std::vector<std::pair<Eigen::Index, Eigen::Index>>> rounds;
};

/// Round-robin (circle method): vertex N−1 stays fixed, the others rotate.
EdgeColoring edge_coloring(Eigen::Index n);

/// N−1 parts Z_k = Ψ(blocks of round k); Σ Z_k = Ψ(blocks).
template <typename Scalar>
struct SddDecomposition {
  std::vector<SymMatrix<Scalar>> parts;
};

template <typename Scalar>
SddDecomposition<Scalar> sdd_decompose(const BlockSet<Scalar>& blocks) {
  const Eigen::Index n = blocks.order();
  const EdgeColoring coloring = edge_coloring(n);
  const auto& m = blocks.coords();
  SddDecomposition<Scalar> out;
  out.parts.reserve(coloring.rounds.size());
  for (const auto& round : coloring.rounds) {
    SymMatrix<Scalar> z = SymMatrix<Scalar>::Zero(n, n);
    for (const auto& [i, j] : round) {
      const Eigen::Index k = pair_index(i, j, n);
      detail::check_interior(m(3 * k), m(3 * k + 1), m(3 * k + 2), ConeKind::kSDD, k);
      z(i, i) += m(3 * k);
      z(j, j) += m(3 * k + 1);
      z(i, j) += m(3 * k + 2);
      z(j, i) += m(3 * k + 2);
    }
    out.parts.push_back(std::move(z));
  }
  return out;
}

/// Coordinate-space row of the linear functional m ↦ Tr(Gᵀ Ψ(m)).
template <typename Derived>
Vector<typename Derived::Scalar> psi_adjoint(const Eigen::MatrixBase<Derived>& g) {
  const Eigen::Index n = g.rows();
  Vector<typename Derived::Scalar> row(3 * pair_count(n));
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j, ++k) {
      row(3 * k) = g(i, i);
      row(3 * k + 1) = g(j, j);
      row(3 * k + 2) = g(i, j) + g(j, i);
    }
  }
  return row;
}

}  // namespace ddsdp
