#include <kacz/linsys.hpp>

#include <kacz/errors.hpp>
#include <kacz/rng.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

namespace kacz {

LinearSystem::LinearSystem(Matrix A, std::optional<Vector> b, std::optional<Vector> x_star)
    : A_(std::move(A)), x_star_(std::move(x_star)) {
  const Index M = A_.rows(), N = A_.cols();
  if (M == 0 || N == 0) throw InputError("empty matrix");
  if (M < N)
    throw InputError("M < N: system has " + std::to_string(M) + " rows and " + std::to_string(N) +
                     " columns");
  if (x_star_ && x_star_->size() != N)
    throw InputError("solution length " + std::to_string(x_star_->size()) + " does not match N = " +
                     std::to_string(N));
  if (b) {
    if (b->size() != M)
      throw InputError("right-hand side length " + std::to_string(b->size()) +
                       " does not match M = " + std::to_string(M));
    b_ = std::move(*b);
    if (x_star_) {
      const double defect = (A_ * *x_star_ - b_).cwiseAbs().maxCoeff();
      if (!(defect <= tol::consistency(b_)))
        throw InputError("inconsistent system: ||A x* - b||_inf = " + format_number(defect));
    }
  } else if (x_star_) {
    b_ = A_ * *x_star_;
  } else {
    throw InputError("either a right-hand side or a solution is required");
  }
}

Matrix gram(const Matrix& A) {
  Matrix G = A.transpose() * A;
  return 0.5 * (G + G.transpose());
}

SpectralDecomposition psd_spectrum(const Matrix& G) {
  const Matrix S = 0.5 * (G + G.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(S);
  if (eig.info() != Eigen::Success) throw NumericError("symmetric eigensolver did not converge");
  const Index N = S.rows();
  SpectralDecomposition out;
  // Eigen returns ascending order.
  out.sigma_sq = eig.eigenvalues().reverse();
  out.V = eig.eigenvectors().rowwise().reverse();
  const double top = N ? std::max(out.sigma_sq(0), 0.0) : 0.0;
  // Rounding leaves eigenvalues of order N eps top below zero; anything far
  // past that means the input was not PSD to begin with.
  const double psd_tol = static_cast<double>(N) * std::numeric_limits<double>::epsilon() * top;
  for (Index j = 0; j < N; ++j) {
    if (out.sigma_sq(j) < 0.0) {
      if (out.sigma_sq(j) < -1e6 * psd_tol)
        throw NumericError("matrix is not positive semidefinite: eigenvalue " +
                           format_number(out.sigma_sq(j)));
      out.sigma_sq(j) = 0.0;
    }
  }
  return out;
}

SpectralDecomposition singular_spectrum(const Matrix& A) { return psd_spectrum(gram(A)); }

Decay parse_decay(std::string_view name) {
  if (name == "gaussian") return Decay::gaussian;
  if (name == "linear_sv") return Decay::linear_sv;
  if (name == "exponential_sv") return Decay::exponential_sv;
  throw InvalidArgument("unknown decay '" + std::string(name) + "'");
}

std::string_view to_string(Decay d) {
  switch (d) {
    case Decay::gaussian: return "gaussian";
    case Decay::linear_sv: return "linear_sv";
    case Decay::exponential_sv: return "exponential_sv";
  }
  return "?";
}

Vector singular_value_schedule(Index N, Decay decay) {
  Vector sigma(N);
  for (Index j = 0; j < N; ++j) {
    switch (decay) {
      case Decay::linear_sv:
        sigma(j) = N == 1 ? 1.0 : 1.0 - static_cast<double>(j) * 0.9 / static_cast<double>(N - 1);
        break;
      case Decay::exponential_sv:
        sigma(j) = std::ldexp(1.0, -static_cast<int>(j));
        break;
      case Decay::gaussian:
        throw InvalidArgument("gaussian systems have no prescribed singular values");
    }
  }
  return sigma;
}

namespace {

Matrix gaussian_matrix(Index rows, Index cols, Rng& rng) {
  Matrix X(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) X(i, j) = rng.normal();
  return X;
}

// Q factor of a Gaussian matrix, with column signs fixed by diag(R) > 0.
Matrix random_orthonormal(Index rows, Index cols, Rng& rng) {
  const Matrix X = gaussian_matrix(rows, cols, rng);
  Eigen::HouseholderQR<Matrix> qr(X);
  Matrix Q = qr.householderQ() * Matrix::Identity(rows, cols);
  const Matrix R = qr.matrixQR().topRows(cols).triangularView<Eigen::Upper>();
  for (Index j = 0; j < cols; ++j)
    if (R(j, j) < 0.0) Q.col(j) = -Q.col(j);
  return Q;
}

}  // namespace

LinearSystem synth_system(Index M, Index N, std::uint64_t seed, Decay decay) {
  if (N < 1 || M < N)
    throw InvalidArgument("synthetic system needs M >= N >= 1, got M = " + std::to_string(M) +
                          ", N = " + std::to_string(N));
  Rng rng(seed);
  Matrix A;
  if (decay == Decay::gaussian) {
    A = gaussian_matrix(M, N, rng);
  } else {
    const Matrix U = random_orthonormal(M, N, rng);
    const Matrix V = random_orthonormal(N, N, rng);
    A = U * singular_value_schedule(N, decay).asDiagonal() * V.transpose();
  }
  Vector x_star(N);
  for (Index j = 0; j < N; ++j) x_star(j) = rng.normal();
  return LinearSystem(std::move(A), std::nullopt, std::move(x_star));
}

std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_number(std::string_view token, const std::filesystem::path& path, std::size_t line) {
  token = trim(token);
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (token.empty() || ec != std::errc{} || ptr != token.data() + token.size() || !std::isfinite(value))
    throw InputError(path.string() + ":" + std::to_string(line) + ": cannot parse number '" +
                     std::string(token) + "'");
  return value;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path.string() + "'");
  return out;
}

}  // namespace

Matrix read_matrix(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::vector<std::vector<double>> rows;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string_view text = trim(raw);
    if (text.empty() || text.front() == '#') continue;
    std::vector<double> row;
    std::size_t start = 0;
    while (true) {
      const auto comma = text.find(',', start);
      row.push_back(parse_number(text.substr(start, comma - start), path, line));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw InputError(path.string() + ":" + std::to_string(line) + ": expected " +
                       std::to_string(rows.front().size()) + " columns, found " +
                       std::to_string(row.size()));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InputError("'" + path.string() + "' contains no matrix rows");
  Matrix A(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < A.rows(); ++i)
    for (Index j = 0; j < A.cols(); ++j) A(i, j) = rows[i][j];
  return A;
}

Vector read_vector(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::vector<double> values;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string_view text = trim(raw);
    if (text.empty() || text.front() == '#') continue;
    values.push_back(parse_number(text, path, line));
  }
  return Eigen::Map<const Vector>(values.data(), static_cast<Index>(values.size()));
}

void write_matrix(const std::filesystem::path& path, const Matrix& A) {
  auto out = open_output(path);
  for (Index i = 0; i < A.rows(); ++i) {
    for (Index j = 0; j < A.cols(); ++j) out << (j ? "," : "") << format_number(A(i, j));
    out << '\n';
  }
  if (!out) throw InputError("write to '" + path.string() + "' failed");
}

void write_vector(const std::filesystem::path& path, const Vector& v) {
  auto out = open_output(path);
  for (Index i = 0; i < v.size(); ++i) out << format_number(v(i)) << '\n';
  if (!out) throw InputError("write to '" + path.string() + "' failed");
}

LinearSystem load_system(const std::filesystem::path& matrix_path,
                         const std::optional<std::filesystem::path>& rhs_path,
                         const std::optional<std::filesystem::path>& solution_path) {
  Matrix A = read_matrix(matrix_path);
  std::optional<Vector> b, x_star;
  if (rhs_path) b = read_vector(*rhs_path);
  if (solution_path) x_star = read_vector(*solution_path);
  return LinearSystem(std::move(A), std::move(b), std::move(x_star));
}

}  // namespace kacz
