#include <doctest.h>

#include "oracles.hpp"

#include <kacz/errors.hpp>
#include <kacz/solver.hpp>
#include <kacz/spectral.hpp>

#include <cmath>

using namespace kacz;

namespace {

Matrix reference_A() {
  Matrix A(3, 2);
  A << 1, 0, 0, 1, 1, 1;
  return A;
}

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

LinearSystem reference_system() { return LinearSystem(reference_A(), std::nullopt, vec({1, 1})); }

}  // namespace

TEST_CASE("kaczmarz_step") {
  CHECK(kaczmarz_step(vec({0, 0}), vec({1, 0}), 1.0) == vec({1, 0}));
  CHECK(kaczmarz_step(vec({0.5, 1.5}), vec({1, 1}), 2.0) == vec({0.5, 1.5}));
  CHECK(kaczmarz_step(vec({0, 0}), vec({1, 1}), 2.0) == vec({1, 1}));
  CHECK_THROWS_AS(kaczmarz_step(vec({0, 0}), vec({0, 0}), 1.0), InvalidArgument);
}

TEST_CASE("multirow_step") {
  const RowSubset S(reference_A(), {1, 2});
  for (const Vector& x : {vec({0, 0}), vec({-3, 7}), vec({1e3, 2})})
    CHECK((multirow_step(x, S, vec({1, 2})) - vec({1, 1})).norm() <= tol::abs);
  CHECK((multirow_step(vec({1, 1}), S, vec({1, 2})) - vec({1, 1})).norm() == 0.0);

  const Matrix A = oracle::gaussian(7, 5, 44);
  const Vector x = oracle::gaussian(5, 1, 45);
  for (Index i = 0; i < 7; ++i) {
    const RowSubset one(A, {i});
    const Vector a = A.row(i).transpose();
    CHECK((multirow_step(x, one, vec({0.3})) - kaczmarz_step(x, a, 0.3)).norm() <= tol::abs);
  }
  const RowSubset T(A, {0, 3, 4});
  const Vector b_S = vec({1, -2, 0.5});
  const Vector y = multirow_step(x, T, b_S);
  CHECK((T.rows() * y - b_S).cwiseAbs().maxCoeff() <= tol::abs * (1 + 2));
  // The move is orthogonal to the affine solution set: it lies in the row span.
  CHECK(apply_rejection(T, y - x).norm() <= tol::abs * (y - x).norm());

  Matrix D(2, 2);
  D << 1, 1, 2, 2;
  CHECK_THROWS_AS(multirow_step(vec({0, 0}), RowSubset::from_rows(D), vec({1, 2})), DependentSubset);
}

TEST_CASE("relaxed_step") {
  const Matrix A = oracle::gaussian(6, 4, 71);
  const RowSubset S(A, {1, 2});
  const Vector x = oracle::gaussian(4, 1, 72);
  const Vector b_S = vec({0.1, 0.2});
  CHECK(relaxed_step(x, S, b_S, 0.0) == x);
  CHECK(relaxed_step(x, S, b_S, 1.0) == multirow_step(x, S, b_S));

  Matrix a(1, 2);
  a << 1, 0;
  CHECK((relaxed_step(vec({1, 1}), RowSubset::from_rows(a), vec({0}), 2.0) - vec({-1, 1})).norm() <= tol::abs);

  Matrix D(2, 2);
  D << 1, 1, 2, 2;
  CHECK(relaxed_step(vec({3, 4}), RowSubset::from_rows(D), vec({1, 2}), 0.0) == vec({3, 4}));
  CHECK_THROWS_AS(relaxed_step(vec({3, 4}), RowSubset::from_rows(D), vec({1, 2}), 0.5), DependentSubset);
  CHECK_THROWS_AS(relaxed_step(x, S, b_S, 2.5), InvalidArgument);
}

TEST_CASE("run_pursuit: two rows of the reference system finish in one step") {
  const LinearSystem sys = reference_system();
  PursuitConfig cfg;
  cfg.n = 2;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    cfg.master_seed = seed;
    const PursuitTrace t = run_pursuit(sys, cfg);
    CHECK(t.converged);
    CHECK(t.iters_run == 1);
  }
}

TEST_CASE("run_pursuit: n = N = M is a single full projection") {
  const Matrix A = oracle::gaussian(5, 5, 3);
  const LinearSystem sys(A, std::nullopt, oracle::gaussian(5, 1, 4));
  PursuitConfig cfg;
  cfg.n = 5;
  const PursuitTrace t = run_pursuit(sys, cfg);
  CHECK(t.iters_run == 1);
  CHECK(t.converged);
}

TEST_CASE("run_pursuit: single-row traces are monotone and replay exactly") {
  const LinearSystem sys = reference_system();
  PursuitConfig cfg;
  cfg.n = 1;
  cfg.master_seed = 77;
  cfg.max_iters = 500;
  const PursuitTrace a = run_pursuit(sys, cfg);
  const PursuitTrace b = run_pursuit(sys, cfg);
  CHECK(a.errors_sq == b.errors_sq);
  CHECK(a.draws == b.draws);
  CHECK(a.errors_sq.size() == static_cast<std::size_t>(a.iters_run) + 1);
  CHECK(a.gain_ratios.size() == static_cast<std::size_t>(a.iters_run));
  for (std::size_t k = 1; k < a.errors_sq.size(); ++k) CHECK(a.errors_sq[k] <= a.errors_sq[k - 1] * (1 + tol::rel));
  CHECK(a.converged);
}

TEST_CASE("gain ratios never exceed one under either sampler") {
  const LinearSystem sys = synth_system(15, 10, 3, Decay::gaussian);
  for (Index n : {1, 2, 3}) {
    for (Sampler sampler : {Sampler::volume, Sampler::uniform}) {
      for (Relaxation mode : {Relaxation::undershoot, Relaxation::overshoot}) {
        for (VmaxMode vmax : {VmaxMode::exact, VmaxMode::running}) {
          PursuitConfig cfg;
          cfg.n = n;
          cfg.sampler = sampler;
          cfg.relaxation = mode;
          cfg.vmax_mode = vmax;
          cfg.max_iters = 300;
          cfg.master_seed = 5;
          const PursuitTrace t = run_pursuit(sys, cfg);
          for (double g : t.gain_ratios) REQUIRE(g <= 1 + tol::rel);
          if (sampler == Sampler::uniform) {
            REQUIRE(t.mus.size() == t.gain_ratios.size());
            for (double mu : t.mus) REQUIRE((mu >= 0 && mu <= 2));
          }
        }
      }
    }
  }
}

TEST_CASE("single volume-sampled steps contract as the expected projector predicts") {
  const LinearSystem sys = synth_system(15, 10, 11, Decay::gaussian);
  const Vector x_k = *sys.x_star() + oracle::gaussian(10, 1, 12);
  const Vector e = x_k - *sys.x_star();
  for (Index n : {1, 2, 3}) {
    PursuitConfig cfg;
    cfg.n = n;
    cfg.max_iters = 1;
    cfg.x0 = x_k;
    const int R = 2000;
    double sum = 0, sum_sq = 0;
    for (int r = 0; r < R; ++r) {
      cfg.master_seed = 1000 + static_cast<std::uint64_t>(r);
      const double g = run_pursuit(sys, cfg).gain_ratios.at(0);
      sum += g;
      sum_sq += g * g;
    }
    const double mean = sum / R;
    const double se = std::sqrt((sum_sq / R - mean * mean) / (R - 1));
    const SpectralProfile p = build_profile(sys.A(), n);
    const auto k = static_cast<std::size_t>(n);
    CHECK(mean <= 1.0 - p.sigma_hat_sq_min[k] / p.vols[k] + 3 * se);
    // Exact conditional expectation 1 - e^T E[P_n] e / ||e||^2.
    const double exact = 1.0 - e.dot(expected_projector(gram(sys.A()), n) * e) / e.squaredNorm();
    CHECK(std::abs(mean - exact) <= 4 * se);
  }
}

TEST_CASE("uniform draws lose exactly e^T Q_n e / v_sq_max per step") {
  const LinearSystem sys = synth_system(10, 6, 21, Decay::gaussian);
  for (Index n : {1, 2, 3}) {
    for (Relaxation mode : {Relaxation::undershoot, Relaxation::overshoot}) {
      PursuitConfig cfg;
      cfg.n = n;
      cfg.sampler = Sampler::uniform;
      cfg.relaxation = mode;
      cfg.max_iters = 50;
      cfg.record_iterates = true;
      cfg.master_seed = 8;
      const PursuitTrace t = run_pursuit(sys, cfg);
      const double v_max = max_subset_volume(sys.A(), n);
      for (long k = 0; k < t.iters_run; ++k) {
        const auto i = static_cast<std::size_t>(k);
        const Vector e = t.iterates[i] - *sys.x_star();
        const Matrix Q = quasi_projector(RowSubset(sys.A(), t.draws[i]));
        const double predicted = e.squaredNorm() - e.dot(Q * e) / v_max;
        REQUIRE(std::abs(t.errors_sq[i + 1] - predicted) <= 1e-10 * e.squaredNorm());
      }
    }
  }
}

TEST_CASE("rank-deficient systems are measured in the row space") {
  Matrix A = oracle::gaussian(8, 4, 90);
  A.col(3) = A.col(0) - A.col(1);
  const LinearSystem sys(A, std::nullopt, oracle::gaussian(4, 1, 91));
  PursuitConfig cfg;
  cfg.n = 2;
  cfg.max_iters = 5000;
  cfg.stop_tol = 1e-10;
  const PursuitTrace t = run_pursuit(sys, cfg);
  CHECK(t.converged);
  CHECK(t.errors_sq.front() > 1e-3);
}

TEST_CASE("residual tracking needs no solution") {
  const LinearSystem sys(reference_A(), vec({1, 1, 2}));
  PursuitConfig cfg;
  cfg.n = 1;
  cfg.track = Track::residual;
  cfg.max_iters = 2000;
  const PursuitTrace t = run_pursuit(sys, cfg);
  CHECK(t.converged);
  cfg.track = Track::error_to_solution;
  CHECK_THROWS_AS(run_pursuit(sys, cfg), InvalidArgument);
}

TEST_CASE("configuration errors") {
  const LinearSystem sys = reference_system();
  PursuitConfig cfg;
  cfg.n = 0;
  CHECK_THROWS_AS(run_pursuit(sys, cfg), InvalidArgument);
  cfg.n = 3;
  CHECK_THROWS_AS(run_pursuit(sys, cfg), InvalidArgument);
  cfg.n = 1;
  cfg.max_iters = 0;
  CHECK_THROWS_AS(run_pursuit(sys, cfg), InvalidArgument);
  cfg.max_iters = 10;
  cfg.stop_tol = 0;
  CHECK_THROWS_AS(run_pursuit(sys, cfg), InvalidArgument);
  cfg.stop_tol = 1e-12;
  CHECK_THROWS_AS(run_ensemble(sys, cfg, 0), InvalidArgument);
}

TEST_CASE("run_ensemble") {
  const LinearSystem sys = synth_system(15, 10, 2, Decay::gaussian);
  PursuitConfig cfg;
  cfg.n = 2;
  cfg.max_iters = 200;
  cfg.master_seed = 33;

  SUBCASE("one member reproduces run_pursuit") {
    const EnsembleReport r = run_ensemble(sys, cfg, 1);
    const PursuitTrace t = run_pursuit(sys, cfg);
    REQUIRE(r.traces.size() == 1);
    CHECK(r.traces[0].errors_sq == t.errors_sq);
    for (long k = 1; k <= t.iters_run; ++k)
      CHECK(r.mean_gain_ratio[static_cast<std::size_t>(k)] == t.gain_ratios[static_cast<std::size_t>(k - 1)]);
  }
  SUBCASE("members share x0, differ in draws, and replay") {
    const EnsembleReport a = run_ensemble(sys, cfg, 6);
    const EnsembleReport b = run_ensemble(sys, cfg, 6);
    for (int m = 0; m < 6; ++m) {
      CHECK(a.traces[static_cast<std::size_t>(m)].errors_sq == b.traces[static_cast<std::size_t>(m)].errors_sq);
      CHECK(a.traces[static_cast<std::size_t>(m)].errors_sq[0] == a.traces[0].errors_sq[0]);
    }
    CHECK(a.traces[0].draws != a.traces[1].draws);
    const SpectralProfile p = build_profile(sys.A(), 2);
    CHECK(a.kappa_sq == doctest::Approx(p.kappa_sq[2]));
    CHECK(a.bound_lower_factor == doctest::Approx(1 - 1 / p.kappa_sq[2]));
    CHECK(a.bound_upper_factor == doctest::Approx(std::pow(1 - 1 / p.kappa_sq[2], 2)));
  }
  SUBCASE("one-step convergence on the reference system") {
    PursuitConfig ref = cfg;
    ref.max_iters = 5;
    const EnsembleReport r = run_ensemble(reference_system(), ref, 5);
    CHECK(r.gain_count[1] == 5);
    CHECK(std::abs(r.mean_gain_ratio[1]) <= tol::abs);
    CHECK(r.gain_count[2] == 0);
    CHECK(std::isnan(r.mean_gain_ratio[2]));
  }
  SUBCASE("uniform ensembles use vol_max") {
    PursuitConfig u = cfg;
    u.sampler = Sampler::uniform;
    const EnsembleReport r = run_ensemble(sys, u, 3);
    const SpectralProfile p = build_profile(sys.A(), 2, true);
    CHECK(r.kappa_sq == doctest::Approx((*p.vol_max)[2] / p.sigma_hat_sq_min[2]));
    CHECK(r.kappa_sq >= p.kappa_sq[2]);
  }
}
