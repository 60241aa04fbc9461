#pragma once

#include <kacz/combinatorics.hpp>
#include <kacz/linsys.hpp>
#include <kacz/types.hpp>

#include <optional>
#include <vector>

namespace kacz {

// Throughout, sums over n-subsets of rows: vol_n = sum det(G_n), and the
// total quasi projector Phi_n = sum Q_n. Containers indexed "by n" have
// n_max + 1 slots with slot 0 meaning n = 0 (vol_0 = 1, Phi_0 = 0).

/// Phi_1..Phi_{n_max} and vol_0..vol_{n_max} from one pass of
/// Phi_n = G (vol_{n-1} I - Phi_{n-1}), vol_n = Tr(Phi_n) / n.
struct PhiRecursion {
  std::vector<Matrix> phi;
  std::vector<double> vols;
};

PhiRecursion phi_recursion(const Matrix& G, Index n_max);

/// Phi_n of the Gram matrix G, 1 <= n <= N.
Matrix total_quasi_projector(const Matrix& G, Index n);

/// vol_0..vol_{n_max} via the trace formula.
std::vector<double> vol_sequence(const Matrix& G, Index n_max);

/// sum_{p=1..n} (-1)^{p-1} vol_{n-p} G^p, the unrolled recursion.
Matrix phi_polynomial(const Matrix& G, const std::vector<double>& vols, Index n);

/// Enumeration oracles. Block sums are reduced pairwise in a fixed tree so
/// the result does not depend on thread scheduling.
double brute_force_vol(const Matrix& A, Index n, std::uint64_t cap = kEnumerationCap);
Matrix brute_force_phi(const Matrix& A, Index n, std::uint64_t cap = kEnumerationCap);

/// max over n-subsets of v_sq.
double max_subset_volume(const Matrix& A, Index n, std::uint64_t cap = kEnumerationCap);

/// Applies x -> sum_p (-1)^{p-1} vol_{n-p} x^p to every entry (Horner).
/// Values within -1e-10 vol_n of zero are clamped to 0; more negative ones
/// are left for the caller to reject.
Vector transform_singular_values(const Vector& sigma_sq, const std::vector<double>& vols, Index n);

/// The same quantities from the eigenvalues alone: vol_n = e_n(sigma_sq) and
/// Phi_n(sigma_sq_j) = sigma_sq_j e_{n-1}(sigma_sq without j), where e_k is
/// the elementary symmetric polynomial. Every term is non-negative, so this
/// stays accurate for strongly graded spectra where the alternating
/// polynomial cancels. Negative inputs are treated as 0.
struct SymmetricTransform {
  std::vector<double> vols;          ///< by n, vol_0..vol_{n_max}
  std::vector<Vector> sigma_hat_sq;  ///< by n, slot 0 empty
};

SymmetricTransform symmetric_transform(const Vector& sigma_sq, Index n_max);

struct GradeCondition {
  double kappa_sq = 0;
  double sigma_hat_sq_min = 0;
  Index argmin = -1;  ///< position in sigma_sq of the minimizing eigenvalue
};

/// kappa^2_n = vol_n / min_j Phi_n(sigma_sq_j), minimum over sigma_sq_j > 0
/// only. Throws RankDeficient when every transformed value vanishes and
/// NumericError when one is clearly negative.
GradeCondition grade_condition_number(const Vector& sigma_sq, const std::vector<double>& vols, Index n);

/// As above with the transformed values already at hand; rank is judged
/// from sigma_sq rather than from the size of vol_n.
GradeCondition grade_condition_number(const Vector& sigma_sq, const Vector& sigma_hat_sq, double vol_n, Index n);

/// E[P_n] = Phi_n / vol_n under volume sampling.
Matrix expected_projector(const Matrix& G, Index n);

/// lower_factor = (1 - 1/kappa^2)^k is the guaranteed contraction of
/// E||x_k - x*||^2; upper_factor = (1 - 1/kappa^2)^{2k} is what a start
/// aligned with v_min cannot beat.
struct RateBounds {
  double lower_factor = 1;
  double upper_factor = 1;
};

RateBounds rate_bounds(double kappa_sq, long k);

/// G^-1 = (vol_{N-1} I - Phi_{N-1}) / vol_N. Throws RankDeficient for singular G.
Matrix gram_inverse_via_phi(const Matrix& G);

/// Everything the bounds and the CLI tables need about one matrix.
struct SpectralProfile {
  Index n_max = 0;
  Vector sigma_sq;                ///< eigenvalues of G, descending
  Matrix V;                       ///< matching eigenvectors
  std::vector<double> vols;       ///< by n
  std::vector<Vector> phi_eigs;   ///< by n, Phi_n(sigma_sq) in the order of sigma_sq
  std::vector<double> sigma_hat_sq_min;  ///< by n
  std::vector<double> kappa_sq;   ///< by n
  std::vector<Vector> v_min;      ///< by n, unit eigenvector attaining sigma_hat_sq_min
  std::vector<bool> v_min_unique; ///< by n, false if the minimum is (numerically) repeated
  std::optional<std::vector<double>> v_sq_max;  ///< by n
  std::optional<std::vector<double>> vol_max;   ///< by n, C(M, n) v_sq_max
};

/// Builds the profile for n = 1..n_max from the eigenvalues of G via
/// symmetric_transform. With `with_vol_max`, also
/// enumerates subsets to find v_sq_max (subject to `cap`).
SpectralProfile build_profile(const Matrix& A, Index n_max, bool with_vol_max = false,
                              std::uint64_t cap = kEnumerationCap);

}  // namespace kacz
