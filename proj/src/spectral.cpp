#include <kacz/spectral.hpp>

#include <kacz/errors.hpp>
#include <kacz/projectors.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <string>
#include <thread>

namespace kacz {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

void require_square(const Matrix& G) {
  if (G.rows() != G.cols() || G.rows() == 0) throw InvalidArgument("expected a non-empty square matrix");
}

void require_grade(Index n, Index N) {
  if (n < 1 || n > N)
    throw InvalidArgument("grade n = " + std::to_string(n) + " outside [1, " + std::to_string(N) + "]");
}

// vol_n at or below this is indistinguishable from zero: vol_n <= vol_1^n
// always, and rounding in the recursion is relative to that scale.
bool degenerate_volume(double vol_n, double vol_1, Index n) {
  return !(vol_n > static_cast<double>(n) * kEps * std::pow(vol_1, static_cast<double>(n)));
}

constexpr std::uint64_t kBlock = 1024;

// Sums term(subset) over all n-subsets of {0..M-1}. Blocks of consecutive
// colex ranks are summed by a worker pool, then block sums are combined
// pairwise in a fixed tree.
template <class T, class Term, class Combine>
T enumerate_reduce(Index M, Index n, std::uint64_t cap, const T& zero, Term term, Combine combine) {
  require_enumerable(M, n, cap);
  const std::uint64_t total = binomial(static_cast<std::uint64_t>(M), static_cast<std::uint64_t>(n));
  const std::uint64_t blocks = (total + kBlock - 1) / kBlock;
  std::vector<T> partial(blocks, zero);
  std::atomic<std::uint64_t> next{0};
  auto worker = [&] {
    for (std::uint64_t b; (b = next.fetch_add(1)) < blocks;) {
      IndexSet c = unrank_colex(b * kBlock, n);
      const std::uint64_t end = std::min(total, (b + 1) * kBlock);
      T acc = zero;
      for (std::uint64_t r = b * kBlock; r < end; ++r) {
        acc = combine(std::move(acc), term(c));
        next_colex(c, M);
      }
      partial[b] = std::move(acc);
    }
  };
  const unsigned threads =
      static_cast<unsigned>(std::min<std::uint64_t>(std::max(1u, std::thread::hardware_concurrency()), blocks));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  for (std::size_t width = 1; width < partial.size(); width *= 2)
    for (std::size_t i = 0; i + width < partial.size(); i += 2 * width)
      partial[i] = combine(std::move(partial[i]), partial[i + width]);
  return partial.empty() ? zero : partial.front();
}

}  // namespace

PhiRecursion phi_recursion(const Matrix& G, Index n_max) {
  require_square(G);
  const Index N = G.rows();
  require_grade(n_max, N);
  const Matrix S = 0.5 * (G + G.transpose());
  PhiRecursion out;
  out.phi.reserve(static_cast<std::size_t>(n_max) + 1);
  out.vols.reserve(static_cast<std::size_t>(n_max) + 1);
  out.phi.push_back(Matrix::Zero(N, N));
  out.vols.push_back(1.0);
  for (Index n = 1; n <= n_max; ++n) {
    Matrix shifted = -out.phi.back();
    shifted.diagonal().array() += out.vols.back();
    Matrix phi = S * shifted;
    phi = 0.5 * (phi + phi.transpose());
    out.vols.push_back(phi.trace() / static_cast<double>(n));
    out.phi.push_back(std::move(phi));
  }
  return out;
}

Matrix total_quasi_projector(const Matrix& G, Index n) { return phi_recursion(G, n).phi.back(); }

std::vector<double> vol_sequence(const Matrix& G, Index n_max) { return phi_recursion(G, n_max).vols; }

Matrix phi_polynomial(const Matrix& G, const std::vector<double>& vols, Index n) {
  require_square(G);
  require_grade(n, G.rows());
  if (static_cast<Index>(vols.size()) < n) throw InvalidArgument("need vol_0..vol_{n-1}");
  const Index N = G.rows();
  Matrix power = Matrix::Identity(N, N);
  Matrix out = Matrix::Zero(N, N);
  for (Index p = 1; p <= n; ++p) {
    power = power * G;
    const double sign = (p % 2 == 1) ? 1.0 : -1.0;
    out += sign * vols[static_cast<std::size_t>(n - p)] * power;
  }
  return out;
}

double brute_force_vol(const Matrix& A, Index n, std::uint64_t cap) {
  return enumerate_reduce(
      A.rows(), n, cap, 0.0,
      [&](const IndexSet& c) { return subset_geometry(RowSubset(A, c)).v_sq; },
      [](double a, double b) { return a + b; });
}

Matrix brute_force_phi(const Matrix& A, Index n, std::uint64_t cap) {
  const Index N = A.cols();
  return enumerate_reduce(
      A.rows(), n, cap, Matrix(Matrix::Zero(N, N)),
      [&](const IndexSet& c) { return quasi_projector(RowSubset(A, c)); },
      [](Matrix a, const Matrix& b) {
        a += b;
        return a;
      });
}

double max_subset_volume(const Matrix& A, Index n, std::uint64_t cap) {
  return enumerate_reduce(
      A.rows(), n, cap, 0.0,
      [&](const IndexSet& c) { return subset_geometry(RowSubset(A, c)).v_sq; },
      [](double a, double b) { return std::max(a, b); });
}

Vector transform_singular_values(const Vector& sigma_sq, const std::vector<double>& vols, Index n) {
  if (n < 1) throw InvalidArgument("grade n must be positive");
  if (static_cast<Index>(vols.size()) < n) throw InvalidArgument("need vol_0..vol_{n-1}");
  Vector out(sigma_sq.size());
  for (Index j = 0; j < sigma_sq.size(); ++j) {
    const double x = sigma_sq(j);
    // x (vol_{n-1} - x (vol_{n-2} - x (... - x vol_0)))
    double acc = vols[0];
    double magnitude = std::abs(vols[0]);
    for (Index p = 1; p < n; ++p) {
      acc = vols[static_cast<std::size_t>(p)] - x * acc;
      magnitude = std::abs(vols[static_cast<std::size_t>(p)]) + std::abs(x) * magnitude;
    }
    acc *= x;
    magnitude *= std::abs(x);
    const double scale =
        static_cast<Index>(vols.size()) > n ? vols[static_cast<std::size_t>(n)] : magnitude;
    if (acc < 0.0 && acc >= -tol::abs * scale) acc = 0.0;
    out(j) = acc;
  }
  return out;
}

SymmetricTransform symmetric_transform(const Vector& sigma_sq, Index n_max) {
  const Index N = sigma_sq.size();
  require_grade(n_max, N);
  const auto slots = static_cast<std::size_t>(n_max) + 1;
  const Vector lam = sigma_sq.cwiseMax(0.0);
  // e_0..e_top of lam with entry `skip` left out (skip = -1 keeps all).
  const auto elementary = [&](Index skip, Index top) {
    std::vector<double> e(static_cast<std::size_t>(top) + 1, 0.0);
    e[0] = 1.0;
    for (Index i = 0; i < N; ++i) {
      if (i == skip) continue;
      for (auto k = static_cast<std::size_t>(top); k >= 1; --k) e[k] += lam(i) * e[k - 1];
    }
    return e;
  };
  SymmetricTransform out;
  out.vols = elementary(-1, n_max);
  out.sigma_hat_sq.assign(slots, Vector());
  for (std::size_t k = 1; k < slots; ++k) out.sigma_hat_sq[k].resize(N);
  for (Index j = 0; j < N; ++j) {
    const std::vector<double> rest = elementary(j, n_max - 1);
    for (std::size_t k = 1; k < slots; ++k) out.sigma_hat_sq[k](j) = lam(j) * rest[k - 1];
  }
  return out;
}

GradeCondition grade_condition_number(const Vector& sigma_sq, const std::vector<double>& vols, Index n) {
  if (static_cast<Index>(vols.size()) <= n) throw InvalidArgument("need vol_0..vol_n");
  if (sigma_sq.size() == 0) throw InvalidArgument("empty spectrum");
  const double vol_n = vols[static_cast<std::size_t>(n)];
  if (n >= 1 && degenerate_volume(vol_n, vols[1], n))
    throw RankDeficient("vol_" + std::to_string(n) + " vanishes: matrix rank is below grade n");
  return grade_condition_number(sigma_sq, transform_singular_values(sigma_sq, vols, n), vol_n, n);
}

GradeCondition grade_condition_number(const Vector& sigma_sq, const Vector& transformed, double vol_n, Index n) {
  if (sigma_sq.size() == 0 || transformed.size() != sigma_sq.size())
    throw InvalidArgument("spectrum and transformed values must be non-empty and of equal length");
  if (n < 1) throw InvalidArgument("grade must be >= 1");
  const double top = sigma_sq.maxCoeff();
  const double positive_tol = static_cast<double>(sigma_sq.size()) * kEps * top;
  if ((sigma_sq.array() > positive_tol).count() < n)
    throw RankDeficient("matrix rank is below grade n = " + std::to_string(n));
  GradeCondition out;
  out.sigma_hat_sq_min = std::numeric_limits<double>::infinity();
  for (Index j = 0; j < sigma_sq.size(); ++j) {
    if (!(sigma_sq(j) > positive_tol)) continue;
    if (transformed(j) < 0.0)
      throw NumericError("transformed singular value " + format_number(transformed(j)) +
                         " is negative beyond rounding");
    if (transformed(j) < out.sigma_hat_sq_min) {
      out.sigma_hat_sq_min = transformed(j);
      out.argmin = j;
    }
  }
  if (out.argmin < 0 || !(out.sigma_hat_sq_min > tol::abs * vol_n) || !(vol_n > 0.0))
    throw RankDeficient("matrix rank is below grade n = " + std::to_string(n));
  out.kappa_sq = vol_n / out.sigma_hat_sq_min;
  return out;
}

Matrix expected_projector(const Matrix& G, Index n) {
  const PhiRecursion rec = phi_recursion(G, n);
  const double vol_n = rec.vols.back();
  if (degenerate_volume(vol_n, rec.vols[1], n))
    throw RankDeficient("vol_" + std::to_string(n) + " vanishes; no n-subset has positive volume");
  return rec.phi.back() / vol_n;
}

RateBounds rate_bounds(double kappa_sq, long k) {
  if (!(kappa_sq >= 1.0 - tol::rel)) throw InvalidArgument("grade condition number must be >= 1");
  if (k < 0) throw InvalidArgument("iteration count must be non-negative");
  const double base = std::max(0.0, 1.0 - 1.0 / kappa_sq);
  const double per = std::pow(base, static_cast<double>(k));
  return {per, per * per};
}

Matrix gram_inverse_via_phi(const Matrix& G) {
  require_square(G);
  const Index N = G.rows();
  const Matrix S = 0.5 * (G + G.transpose());
  Matrix shifted = Matrix::Identity(N, N);  // vol_0 I - Phi_0
  if (N > 1) {
    const PhiRecursion rec = phi_recursion(S, N - 1);
    shifted = -rec.phi.back();
    shifted.diagonal().array() += rec.vols.back();
  }
  const double vol_N = (S * shifted).trace() / static_cast<double>(N);
  if (degenerate_volume(vol_N, S.trace(), N)) throw RankDeficient("Gram matrix is singular");
  return shifted / vol_N;
}

SpectralProfile build_profile(const Matrix& A, Index n_max, bool with_vol_max, std::uint64_t cap) {
  const Index M = A.rows(), N = A.cols();
  require_grade(n_max, N);
  SpectralProfile p;
  p.n_max = n_max;
  const SpectralDecomposition spec = singular_spectrum(A);
  p.sigma_sq = spec.sigma_sq;
  p.V = spec.V;
  SymmetricTransform st = symmetric_transform(p.sigma_sq, n_max);
  p.vols = std::move(st.vols);
  const std::size_t slots = static_cast<std::size_t>(n_max) + 1;
  p.phi_eigs.assign(slots, Vector());
  p.sigma_hat_sq_min.assign(slots, std::numeric_limits<double>::quiet_NaN());
  p.kappa_sq.assign(slots, std::numeric_limits<double>::quiet_NaN());
  p.v_min.assign(slots, Vector());
  p.v_min_unique.assign(slots, false);
  for (Index n = 1; n <= n_max; ++n) {
    const auto k = static_cast<std::size_t>(n);
    p.phi_eigs[k] = std::move(st.sigma_hat_sq[k]);
    const GradeCondition gc = grade_condition_number(p.sigma_sq, p.phi_eigs[k], p.vols[k], n);
    p.sigma_hat_sq_min[k] = gc.sigma_hat_sq_min;
    p.kappa_sq[k] = gc.kappa_sq;
    p.v_min[k] = p.V.col(gc.argmin);
    bool unique = true;
    for (Index j = 0; j < N; ++j)
      if (j != gc.argmin && std::abs(p.phi_eigs[k](j) - gc.sigma_hat_sq_min) <= 1e-8 * p.vols[k])
        unique = false;
    p.v_min_unique[k] = unique;
  }
  if (with_vol_max) {
    std::vector<double> v_max(slots, std::numeric_limits<double>::quiet_NaN());
    std::vector<double> vol_max(slots, std::numeric_limits<double>::quiet_NaN());
    for (Index n = 1; n <= n_max; ++n) {
      const auto k = static_cast<std::size_t>(n);
      v_max[k] = max_subset_volume(A, n, cap);
      vol_max[k] = binomial_real(static_cast<std::uint64_t>(M), k) * v_max[k];
    }
    p.v_sq_max = std::move(v_max);
    p.vol_max = std::move(vol_max);
  }
  return p;
}

}  // namespace kacz
