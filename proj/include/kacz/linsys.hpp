#pragma once

#include <kacz/types.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string_view>

namespace kacz {

/// A consistent dense system A x = b with M >= N, optionally carrying the
/// known solution x*. Instances are validated on construction and immutable.
class LinearSystem {
 public:
  /// Validates shapes, M >= N and, when both b and x* are present, consistency.
  /// If b is absent it is computed as A x*; one of the two must be given.
  LinearSystem(Matrix A, std::optional<Vector> b, std::optional<Vector> x_star = std::nullopt);

  const Matrix& A() const { return A_; }
  const Vector& b() const { return b_; }
  const std::optional<Vector>& x_star() const { return x_star_; }
  Index rows() const { return A_.rows(); }
  Index cols() const { return A_.cols(); }

 private:
  Matrix A_;
  Vector b_;
  std::optional<Vector> x_star_;
};

/// Eigen-decomposition of G = A^T A.
struct SpectralDecomposition {
  Vector sigma_sq;  ///< descending, clamped at zero
  Matrix V;         ///< orthonormal eigenvectors, column j pairs with sigma_sq(j)
};

Matrix gram(const Matrix& A);

/// Symmetric eigen-decomposition of gram(A); tiny negative eigenvalues are
/// clamped. Throws NumericError if the eigensolver fails.
SpectralDecomposition singular_spectrum(const Matrix& A);

/// Same as singular_spectrum but starting from an explicit PSD matrix.
SpectralDecomposition psd_spectrum(const Matrix& G);

enum class Decay { gaussian, linear_sv, exponential_sv };

Decay parse_decay(std::string_view name);
std::string_view to_string(Decay d);

/// Singular values used by the linear_sv / exponential_sv generators.
Vector singular_value_schedule(Index N, Decay decay);

/// Random consistent system, deterministic in `seed`. For the decaying
/// variants A = U diag(sigma) V^T with Haar-like orthonormal U (M x N) and V.
LinearSystem synth_system(Index M, Index N, std::uint64_t seed, Decay decay);

// Text I/O: one matrix row per line, comma separated; vectors one value per
// line. Lines starting with '#' and blank lines are skipped.
Matrix read_matrix(const std::filesystem::path& path);
Vector read_vector(const std::filesystem::path& path);
void write_matrix(const std::filesystem::path& path, const Matrix& A);
void write_vector(const std::filesystem::path& path, const Vector& v);

/// printf("%.17g"); exact round trip through read_*.
std::string format_number(double x);

LinearSystem load_system(const std::filesystem::path& matrix_path,
                         const std::optional<std::filesystem::path>& rhs_path,
                         const std::optional<std::filesystem::path>& solution_path);

}  // namespace kacz
