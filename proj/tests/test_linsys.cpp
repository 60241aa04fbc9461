#include <doctest.h>

#include "oracles.hpp"

#include <kacz/errors.hpp>
#include <kacz/linsys.hpp>
#include <kacz/rng.hpp>

#include <bit>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <array>

using namespace kacz;

namespace {

Matrix reference_A() {
  Matrix A(3, 2);
  A << 1, 0, 0, 1, 1, 1;
  return A;
}

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("kacz_linsys_" + std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::filesystem::path write(const std::string& name, const std::string& text) const {
    std::ofstream(path / name) << text;
    return path / name;
  }
};

}  // namespace

TEST_CASE("load_system computes b from the solution") {
  TempDir dir;
  const auto A = dir.write("A.csv", "# reference\n1,0\n0,1\n1,1\n");
  const auto x = dir.write("x.txt", "1\n1\n");
  const LinearSystem sys = load_system(A, std::nullopt, x);
  CHECK(sys.rows() == 3);
  CHECK(sys.cols() == 2);
  CHECK(sys.b() == Vector::Map(std::array<double, 3>{1, 1, 2}.data(), 3));
}

TEST_CASE("load_system rejects wide matrices and inconsistent data") {
  TempDir dir;
  const auto wide = dir.write("wide.csv", "1,0,0\n0,1,0\n");
  const auto x3 = dir.write("x3.txt", "1\n1\n1\n");
  CHECK_THROWS_WITH_AS(load_system(wide, std::nullopt, x3), doctest::Contains("M < N"), InputError);

  const auto A = dir.write("A.csv", "1,0\n0,1\n1,1\n");
  const auto b = dir.write("b.txt", "1\n1\n3\n");
  const auto x = dir.write("x.txt", "1\n1\n");
  CHECK_THROWS_WITH_AS(load_system(A, b, x), doctest::Contains("inconsistent"), InputError);

  const auto ragged = dir.write("ragged.csv", "1,0\n0\n");
  CHECK_THROWS_AS(read_matrix(ragged), InputError);
  const auto junk = dir.write("junk.csv", "1,zero\n");
  CHECK_THROWS_AS(read_matrix(junk), InputError);
  CHECK_THROWS_AS(read_matrix(dir.path / "missing.csv"), InputError);
  const auto short_b = dir.write("short.txt", "1\n");
  CHECK_THROWS_AS(load_system(A, short_b, std::nullopt), InputError);
}

TEST_CASE("gram matches an independent product and is symmetric") {
  CHECK(gram(Matrix::Identity(2, 2)) == Matrix::Identity(2, 2));
  Matrix expected(2, 2);
  expected << 2, 1, 1, 2;
  CHECK(gram(reference_A()) == expected);
  const Matrix X = oracle::gaussian(9, 4, 3);
  const Matrix G = gram(X);
  CHECK(G == G.transpose());
  CHECK(oracle::max_abs(G - oracle::matmul(X.transpose(), X)) < 1e-12);
}

TEST_CASE("singular_spectrum on closed-form matrices") {
  CHECK((singular_spectrum(Matrix::Identity(3, 3)).sigma_sq - Vector::Ones(3)).norm() < 1e-14);
  const SpectralDecomposition ref = singular_spectrum(reference_A());
  CHECK(ref.sigma_sq(0) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(ref.sigma_sq(1) == doctest::Approx(1.0).epsilon(1e-14));
  Matrix D = Matrix::Zero(2, 2);
  D.diagonal() << 2, 1;
  const SpectralDecomposition d = singular_spectrum(D);
  CHECK(d.sigma_sq(0) == doctest::Approx(4.0));
  CHECK(d.sigma_sq(1) == doctest::Approx(1.0));
}

TEST_CASE("singular_spectrum agrees with a one-sided Jacobi SVD") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Matrix X = oracle::gaussian(12, 6, seed);
    const SpectralDecomposition s = singular_spectrum(X);
    Eigen::JacobiSVD<Matrix> svd(X);
    const Vector sv_sq = svd.singularValues().array().square();
    CHECK((s.sigma_sq - sv_sq).cwiseAbs().maxCoeff() <= 1e-10 * sv_sq(0));
    // Orthonormal eigenvectors, reconstruction, and the Frobenius trace.
    CHECK(oracle::max_abs(s.V.transpose() * s.V - Matrix::Identity(6, 6)) <= tol::orth);
    CHECK(oracle::max_abs(gram(X) - s.V * s.sigma_sq.asDiagonal() * s.V.transpose()) <= 1e-10 * sv_sq(0));
    CHECK(std::abs(s.sigma_sq.sum() - X.squaredNorm()) <= tol::rel * X.squaredNorm());
    for (Index j = 1; j < 6; ++j) CHECK(s.sigma_sq(j - 1) >= s.sigma_sq(j));
  }
}

TEST_CASE("rank-deficient spectra are clamped to zero") {
  Matrix X = oracle::gaussian(6, 3, 8);
  X.col(2) = X.col(0) - 2.0 * X.col(1);
  const SpectralDecomposition s = singular_spectrum(X);
  CHECK(s.sigma_sq.minCoeff() >= 0.0);
  CHECK(s.sigma_sq(2) <= 1e-12 * s.sigma_sq(0));
}

TEST_CASE("synth_system is deterministic and follows the pinned schedules") {
  const LinearSystem a = synth_system(15, 10, 7, Decay::gaussian);
  const LinearSystem b = synth_system(15, 10, 7, Decay::gaussian);
  CHECK(a.A() == b.A());
  CHECK(a.b() == b.b());
  CHECK(*a.x_star() == *b.x_star());
  CHECK(a.A() != synth_system(15, 10, 8, Decay::gaussian).A());
  CHECK((a.A() * *a.x_star() - a.b()).norm() == 0.0);

  const SpectralDecomposition e = singular_spectrum(synth_system(8, 8, 1, Decay::exponential_sv).A());
  for (Index j = 0; j < 8; ++j)
    CHECK(std::abs(e.sigma_sq(j) - std::pow(4.0, -static_cast<double>(j))) <= tol::rel);

  const SpectralDecomposition l = singular_spectrum(synth_system(8, 8, 1, Decay::linear_sv).A());
  CHECK(std::sqrt(l.sigma_sq(0) / l.sigma_sq(7)) == doctest::Approx(10.0).epsilon(1e-10));

  const SpectralDecomposition tall = singular_spectrum(synth_system(12, 5, 3, Decay::linear_sv).A());
  CHECK(std::sqrt(tall.sigma_sq(4)) == doctest::Approx(0.1).epsilon(1e-10));

  CHECK_THROWS_AS(synth_system(3, 4, 1, Decay::gaussian), InvalidArgument);
  CHECK_THROWS_AS(parse_decay("cubic"), InvalidArgument);
}

TEST_CASE("save then load is bit-exact") {
  TempDir dir;
  Rng rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix A(4, 3);
    for (Index i = 0; i < 4; ++i)
      for (Index j = 0; j < 3; ++j) A(i, j) = std::ldexp(rng.normal(), static_cast<int>(rng.below(80)) - 40);
    write_matrix(dir.path / "m.csv", A);
    const Matrix back = read_matrix(dir.path / "m.csv");
    REQUIRE(back.rows() == 4);
    for (Index i = 0; i < 4; ++i)
      for (Index j = 0; j < 3; ++j) REQUIRE(std::bit_cast<std::uint64_t>(back(i, j)) == std::bit_cast<std::uint64_t>(A(i, j)));
    const Vector v = A.col(0);
    write_vector(dir.path / "v.txt", v);
    REQUIRE(read_vector(dir.path / "v.txt") == v);
  }
}
