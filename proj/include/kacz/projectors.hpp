#pragma once

#include <kacz/types.hpp>

#include <optional>

namespace kacz {

/// n selected rows of a parent matrix.
class RowSubset {
 public:
  /// Rows `indices` of A. Indices must be strictly increasing, in [0, M),
  /// with 1 <= n <= N; throws InvalidArgument otherwise.
  RowSubset(const Matrix& A, IndexSet indices);

  /// A subset given directly by its rows (indices become 0..n-1). Allows
  /// repeated or dependent rows, which are otherwise impossible to select.
  static RowSubset from_rows(Matrix rows);

  const IndexSet& indices() const { return indices_; }
  const Matrix& rows() const { return rows_; }
  Index size() const { return rows_.rows(); }
  Index dim() const { return rows_.cols(); }

  /// The same rows with row `s` removed (n >= 2).
  RowSubset without(Index s) const;

 private:
  RowSubset() = default;

  IndexSet indices_;
  Matrix rows_;
};

struct SubsetGeometry {
  Matrix gram;       ///< G_n = A_n A_n^T
  double v_sq = 0;   ///< det G_n, exactly 0 when rank < n
  Index rank = 0;    ///< numerical rank of A_n
  /// sin^2 of the angle between a_s and the span of the other rows; filled
  /// by subset_geometry(S, true) on independent subsets with n >= 2.
  std::optional<Vector> sin_sq_angles;
};

/// Gram matrix, squared volume and rank of S. The volume is the product of
/// squared diagonal entries of R in a column-pivoted QR of A_n^T; squared
/// diagonals at or below n eps max_k R_kk^2 count as zero.
SubsetGeometry subset_geometry(const RowSubset& S, bool with_angles = false);

/// P_n = A_n^T G_n^-1 A_n. Throws DependentSubset when rank < n.
Matrix orthogonal_projector(const RowSubset& S);

/// adj(G) with G adj(G) = det(G) I. Cofactors for n <= 3; det * inverse or,
/// for (near) singular input, the eigen-complement form for larger n.
Matrix adjugate(const Matrix& G);

/// Q_n = A_n^T adj(G_n) A_n; equals v_sq P_n, and vanishes on dependent rows.
Matrix quasi_projector(const RowSubset& S);

/// sum_s (1 / sin^2 theta_s) P_1^s (I - P_{n-1}^{-s}), the leave-one-out
/// expansion of P_n. Needs n >= 2 and an independent subset.
Matrix recursive_projector(const RowSubset& S);

/// Solves G_n c = rhs through the Cholesky factor of G_n. Throws
/// DependentSubset if the geometry is rank deficient.
Vector gram_solve(const SubsetGeometry& geometry, const Vector& rhs);

/// (I - P_n) r by a Cholesky solve against G_n, never forming P_n.
Vector apply_rejection(const RowSubset& S, const Vector& r);

}  // namespace kacz
