#include <kacz/projectors.hpp>

#include <kacz/errors.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace kacz {

namespace {
constexpr double kEps = std::numeric_limits<double>::epsilon();

void require_independent(const SubsetGeometry& g, Index n) {
  if (g.rank < n)
    throw DependentSubset("row subset of size " + std::to_string(n) + " has numerical rank " +
                          std::to_string(g.rank));
}
}  // namespace

RowSubset::RowSubset(const Matrix& A, IndexSet indices) : indices_(std::move(indices)) {
  const Index n = static_cast<Index>(indices_.size());
  if (n < 1 || n > A.cols())
    throw InvalidArgument("subset size " + std::to_string(n) + " outside [1, " +
                          std::to_string(A.cols()) + "]");
  for (std::size_t k = 0; k < indices_.size(); ++k) {
    if (indices_[k] < 0 || indices_[k] >= A.rows())
      throw InvalidArgument("row index " + std::to_string(indices_[k]) + " out of range");
    if (k > 0 && indices_[k] <= indices_[k - 1])
      throw InvalidArgument("subset indices must be strictly increasing");
  }
  rows_.resize(n, A.cols());
  for (Index k = 0; k < n; ++k) rows_.row(k) = A.row(indices_[static_cast<std::size_t>(k)]);
}

RowSubset RowSubset::from_rows(Matrix rows) {
  if (rows.rows() < 1 || rows.rows() > rows.cols())
    throw InvalidArgument("subset size " + std::to_string(rows.rows()) + " outside [1, " +
                          std::to_string(rows.cols()) + "]");
  RowSubset S;
  S.indices_.resize(static_cast<std::size_t>(rows.rows()));
  std::iota(S.indices_.begin(), S.indices_.end(), Index{0});
  S.rows_ = std::move(rows);
  return S;
}

RowSubset RowSubset::without(Index s) const {
  const Index n = size();
  if (n < 2 || s < 0 || s >= n) throw InvalidArgument("cannot drop row " + std::to_string(s));
  RowSubset out;
  out.rows_.resize(n - 1, dim());
  for (Index k = 0, r = 0; k < n; ++k) {
    if (k == s) continue;
    out.rows_.row(r++) = rows_.row(k);
    out.indices_.push_back(indices_[static_cast<std::size_t>(k)]);
  }
  return out;
}

SubsetGeometry subset_geometry(const RowSubset& S, bool with_angles) {
  const Matrix& An = S.rows();
  const Index n = S.size();
  SubsetGeometry g;
  g.gram = An * An.transpose();
  g.gram = 0.5 * (g.gram + g.gram.transpose());

  Eigen::ColPivHouseholderQR<Matrix> qr(An.transpose());
  const Matrix& R = qr.matrixQR();
  double top = 0.0;
  for (Index k = 0; k < n; ++k) top = std::max(top, R(k, k) * R(k, k));
  const double rank_tol = static_cast<double>(n) * kEps * top;
  double volume = 1.0;
  for (Index k = 0; k < n; ++k) {
    const double d2 = R(k, k) * R(k, k);
    if (d2 > rank_tol) ++g.rank;
    volume *= d2;
  }
  g.v_sq = (g.rank == n && top > 0.0) ? volume : 0.0;

  if (with_angles && g.rank == n && n >= 2) {
    Vector angles(n);
    for (Index s = 0; s < n; ++s) {
      const Vector a = An.row(s).transpose();
      angles(s) = apply_rejection(S.without(s), a).squaredNorm() / a.squaredNorm();
    }
    g.sin_sq_angles = std::move(angles);
  }
  return g;
}

Vector gram_solve(const SubsetGeometry& geometry, const Vector& rhs) {
  require_independent(geometry, geometry.gram.rows());
  Eigen::LLT<Matrix> llt(geometry.gram);
  if (llt.info() != Eigen::Success) throw DependentSubset("subset Gram matrix is not positive definite");
  return llt.solve(rhs);
}

Matrix orthogonal_projector(const RowSubset& S) {
  const SubsetGeometry g = subset_geometry(S);
  require_independent(g, S.size());
  Eigen::LLT<Matrix> llt(g.gram);
  if (llt.info() != Eigen::Success) throw DependentSubset("subset Gram matrix is not positive definite");
  const Matrix P = S.rows().transpose() * llt.solve(S.rows());
  return 0.5 * (P + P.transpose());
}

Matrix adjugate(const Matrix& G) {
  const Index n = G.rows();
  if (n < 1 || G.cols() != n) throw InvalidArgument("adjugate needs a non-empty square matrix");
  Matrix adj(n, n);
  switch (n) {
    case 1:
      adj(0, 0) = 1.0;
      return adj;
    case 2:
      adj << G(1, 1), -G(0, 1), -G(1, 0), G(0, 0);
      return adj;
    case 3:
      for (Index i = 0; i < 3; ++i) {
        for (Index j = 0; j < 3; ++j) {
          // adj(i, j) is the (j, i) cofactor.
          const Index r0 = (j + 1) % 3, r1 = (j + 2) % 3;
          const Index c0 = (i + 1) % 3, c1 = (i + 2) % 3;
          adj(i, j) = G(r0, c0) * G(r1, c1) - G(r0, c1) * G(r1, c0);
        }
      }
      return adj;
    default:
      break;
  }
  // Symmetric input from here on.
  const Matrix S = 0.5 * (G + G.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(S);
  if (eig.info() != Eigen::Success) throw NumericError("symmetric eigensolver did not converge");
  const Vector& lambda = eig.eigenvalues();
  const double scale = lambda.cwiseAbs().maxCoeff();
  if (lambda.cwiseAbs().minCoeff() > static_cast<double>(n) * kEps * scale) {
    Eigen::PartialPivLU<Matrix> lu(S);
    return lu.determinant() * lu.inverse();
  }
  // adj = V diag(prod_{k != j} lambda_k) V^T
  Vector complement(n);
  for (Index j = 0; j < n; ++j) {
    double p = 1.0;
    for (Index k = 0; k < n; ++k)
      if (k != j) p *= lambda(k);
    complement(j) = p;
  }
  return eig.eigenvectors() * complement.asDiagonal() * eig.eigenvectors().transpose();
}

Matrix quasi_projector(const RowSubset& S) {
  const Matrix& An = S.rows();
  Matrix Gn = An * An.transpose();
  Gn = 0.5 * (Gn + Gn.transpose());
  const Matrix Q = An.transpose() * adjugate(Gn) * An;
  return 0.5 * (Q + Q.transpose());
}

Matrix recursive_projector(const RowSubset& S) {
  const Index n = S.size(), N = S.dim();
  if (n < 2) throw InvalidArgument("recursive expansion needs at least two rows");
  require_independent(subset_geometry(S), n);
  const double angle_tol = static_cast<double>(n) * kEps;
  const Matrix I = Matrix::Identity(N, N);
  Matrix P = Matrix::Zero(N, N);
  for (Index s = 0; s < n; ++s) {
    const Matrix rest = I - orthogonal_projector(S.without(s));
    const Vector a = S.rows().row(s).transpose();
    const double norm_sq = a.squaredNorm();
    const double sin_sq = (rest * a).squaredNorm() / norm_sq;
    if (sin_sq < angle_tol)
      throw DegenerateAngle("row " + std::to_string(s) + " is numerically inside the span of the others");
    P.noalias() += (a * (a.transpose() * rest)) / (sin_sq * norm_sq);
  }
  return P;
}

Vector apply_rejection(const RowSubset& S, const Vector& r) {
  if (r.size() != S.dim()) throw InvalidArgument("vector length does not match subset dimension");
  const SubsetGeometry g = subset_geometry(S);
  return r - S.rows().transpose() * gram_solve(g, S.rows() * r);
}

}  // namespace kacz
