#include <kacz/solver.hpp>

#include <kacz/errors.hpp>
#include <kacz/rng.hpp>
#include <kacz/spectral.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <string>
#include <thread>

namespace kacz {

namespace {

constexpr std::uint64_t kStartStream = ~std::uint64_t{0};
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

Vector gather(const Vector& b, const IndexSet& indices) {
  Vector out(static_cast<Index>(indices.size()));
  for (std::size_t k = 0; k < indices.size(); ++k) out(static_cast<Index>(k)) = b(indices[k]);
  return out;
}

// A_n^T G_n^-1 (b_S - A_n x): the full projection step from x.
Vector projection_correction(const RowSubset& S, const SubsetGeometry& g, const Vector& x,
                             const Vector& b_S) {
  return S.rows().transpose() * gram_solve(g, b_S - S.rows() * x);
}

// Immutable per-(system, config) state shared by every member of an ensemble.
class Engine {
 public:
  Engine(const LinearSystem& system, const PursuitConfig& config) : sys_(system), cfg_(config) {
    const Index N = system.cols();
    if (config.n < 1 || config.n > N)
      throw InvalidArgument("rows per step n = " + std::to_string(config.n) + " outside [1, " +
                            std::to_string(N) + "]");
    if (config.max_iters < 1) throw InvalidArgument("max_iters must be at least 1");
    if (!(config.stop_tol > 0.0)) throw InvalidArgument("stop tolerance must be positive");
    if (config.track == Track::error_to_solution && !system.x_star())
      throw InvalidArgument("tracking the error needs a known solution x*");
    if (config.x0 && config.x0->size() != N) throw InvalidArgument("x0 has the wrong length");

    if (config.sampler == Sampler::volume) {
      dist_ = build_volume_distribution(system.A(), config.n);
    } else if (config.vmax_mode == VmaxMode::exact) {
      exact_v_sq_max_ = max_subset_volume(system.A(), config.n);
    }

    if (config.track == Track::error_to_solution) {
      // The null-space part of x - x* never changes; measure the rest.
      const SpectralDecomposition spec = singular_spectrum(system.A());
      const double cut = static_cast<double>(N) * std::numeric_limits<double>::epsilon() *
                         spec.sigma_sq(0);
      Index rank = 0;
      while (rank < N && spec.sigma_sq(rank) > cut) ++rank;
      if (rank < N) row_basis_ = spec.V.leftCols(rank);
    }
  }

  double measure(const Vector& x) const {
    if (cfg_.track == Track::residual) return (sys_.A() * x - sys_.b()).squaredNorm();
    const Vector e = x - *sys_.x_star();
    if (row_basis_) return (row_basis_->transpose() * e).squaredNorm();
    return e.squaredNorm();
  }

  Vector start() const { return cfg_.x0 ? *cfg_.x0 : default_start(sys_, cfg_.master_seed); }

  PursuitTrace run(Vector x, Rng rng, double stop_sq) const {
    PursuitTrace trace;
    const bool uniform = cfg_.sampler == Sampler::uniform;
    RelaxationState relax{cfg_.relaxation, cfg_.vmax_mode, exact_v_sq_max_};
    double err = measure(x);
    trace.errors_sq.push_back(err);
    if (cfg_.record_iterates) trace.iterates.push_back(x);
    trace.converged = err <= stop_sq;
    while (!trace.converged && trace.iters_run < cfg_.max_iters) {
      IndexSet drawn = uniform ? draw_uniform(sys_.rows(), cfg_.n, rng) : draw_volume(*dist_, rng);
      const RowSubset S(sys_.A(), drawn);
      const SubsetGeometry g = subset_geometry(S);
      const Vector b_S = gather(sys_.b(), drawn);
      if (uniform) {
        double mu = relaxation_factor(g.v_sq, relax);
        // Dependent draws carry zero volume and contribute a no-op.
        if (g.rank < cfg_.n) mu = 0.0;
        if (mu != 0.0) x += mu * projection_correction(S, g, x, b_S);
        trace.mus.push_back(mu);
      } else {
        x += projection_correction(S, g, x, b_S);
      }
      const double next = measure(x);
      trace.gain_ratios.push_back(next / err);
      trace.errors_sq.push_back(next);
      trace.draws.push_back(std::move(drawn));
      if (cfg_.record_iterates) trace.iterates.push_back(x);
      err = next;
      ++trace.iters_run;
      trace.converged = err <= stop_sq;
    }
    return trace;
  }

  double stop_sq() const { return cfg_.stop_tol * cfg_.stop_tol; }

 private:
  const LinearSystem& sys_;
  const PursuitConfig& cfg_;
  std::optional<VolumeDistribution> dist_;
  double exact_v_sq_max_ = 0.0;
  std::optional<Matrix> row_basis_;
};

}  // namespace

Vector kaczmarz_step(const Vector& x, const Vector& a, double b_a) {
  const double norm_sq = a.squaredNorm();
  if (!(norm_sq > 0.0)) throw InvalidArgument("Kaczmarz step on a zero row");
  return x + ((b_a - a.dot(x)) / norm_sq) * a;
}

Vector multirow_step(const Vector& x, const RowSubset& S, const Vector& b_S) {
  if (b_S.size() != S.size() || x.size() != S.dim()) throw InvalidArgument("step operand sizes disagree");
  const SubsetGeometry g = subset_geometry(S);
  return x + projection_correction(S, g, x, b_S);
}

Vector relaxed_step(const Vector& x, const RowSubset& S, const Vector& b_S, double mu) {
  if (!(mu >= 0.0 && mu <= 2.0)) throw InvalidArgument("relaxation factor outside [0, 2]");
  if (b_S.size() != S.size() || x.size() != S.dim()) throw InvalidArgument("step operand sizes disagree");
  if (mu == 0.0) return x;
  const SubsetGeometry g = subset_geometry(S);
  return x + mu * projection_correction(S, g, x, b_S);
}

Sampler parse_sampler(std::string_view name) {
  if (name == "volume") return Sampler::volume;
  if (name == "uniform") return Sampler::uniform;
  throw InvalidArgument("unknown sampler '" + std::string(name) + "'");
}

std::string_view to_string(Sampler s) { return s == Sampler::volume ? "volume" : "uniform"; }

Vector default_start(const LinearSystem& system, std::uint64_t master_seed) {
  Rng rng(split_seed(master_seed, kStartStream));
  Vector x0(system.cols());
  for (Index j = 0; j < x0.size(); ++j) x0(j) = rng.normal();
  return x0;
}

std::uint64_t member_seed(std::uint64_t master_seed, std::uint64_t member) {
  return split_seed(master_seed, member);
}

PursuitTrace run_pursuit(const LinearSystem& system, const PursuitConfig& config) {
  const Engine engine(system, config);
  return engine.run(engine.start(), Rng(member_seed(config.master_seed, 0)), engine.stop_sq());
}

EnsembleReport run_ensemble(const LinearSystem& system, const PursuitConfig& config, int members) {
  if (members < 1) throw InvalidArgument("an ensemble needs at least one member");
  const Engine engine(system, config);
  const Vector x0 = engine.start();

  EnsembleReport report;
  report.n = config.n;
  report.iters = config.max_iters;
  const double scale = config.track == Track::residual ? system.b().squaredNorm()
                                                       : system.x_star()->squaredNorm();
  report.precision_cutoff = 1e-28 * (1.0 + scale);
  const double stop_sq = std::max(engine.stop_sq(), report.precision_cutoff);

  report.traces.resize(static_cast<std::size_t>(members));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int r; (r = next.fetch_add(1)) < members;)
      report.traces[static_cast<std::size_t>(r)] =
          engine.run(x0, Rng(member_seed(config.master_seed, static_cast<std::uint64_t>(r))), stop_sq);
  };
  const unsigned threads = std::min<unsigned>(std::max(1u, std::thread::hardware_concurrency()),
                                              static_cast<unsigned>(members));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  // Grade condition number: vol_n for volume draws, vol_n^max for uniform ones.
  const bool uniform = config.sampler == Sampler::uniform;
  const SpectralProfile profile = build_profile(system.A(), config.n, uniform);
  const auto k = static_cast<std::size_t>(config.n);
  report.kappa_sq = uniform ? (*profile.vol_max)[k] / profile.sigma_hat_sq_min[k] : profile.kappa_sq[k];
  const RateBounds per_step = rate_bounds(report.kappa_sq, 1);
  report.bound_lower_factor = per_step.lower_factor;
  report.bound_upper_factor = per_step.upper_factor;

  const auto slots = static_cast<std::size_t>(config.max_iters) + 1;
  report.mean_gain_ratio.assign(slots, kNaN);
  report.gain_ratio_se.assign(slots, kNaN);
  report.gain_count.assign(slots, 0);
  report.mean_log_error.assign(slots, kNaN);
  std::vector<double> gains;
  for (std::size_t it = 0; it < slots; ++it) {
    double log_sum = 0.0;
    int log_count = 0;
    gains.clear();
    for (const PursuitTrace& t : report.traces) {
      if (it < t.errors_sq.size()) {
        // An exact zero error counts as the smallest normal double.
        log_sum += std::log(std::max(t.errors_sq[it], std::numeric_limits<double>::min()));
        ++log_count;
      }
      if (it >= 1 && it - 1 < t.gain_ratios.size() && t.errors_sq[it - 1] >= report.precision_cutoff)
        gains.push_back(t.gain_ratios[it - 1]);
    }
    if (log_count) report.mean_log_error[it] = log_sum / log_count;
    const auto count = static_cast<int>(gains.size());
    report.gain_count[it] = count;
    if (count == 0) continue;
    double mean = 0.0;
    for (double g : gains) mean += g;
    mean /= count;
    report.mean_gain_ratio[it] = mean;
    if (count > 1) {
      double ss = 0.0;
      for (double g : gains) ss += (g - mean) * (g - mean);
      report.gain_ratio_se[it] = std::sqrt(ss / (count - 1) / count);
    }
  }
  return report;
}

}  // namespace kacz
