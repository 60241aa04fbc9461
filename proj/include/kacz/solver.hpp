#pragma once

#include <kacz/linsys.hpp>
#include <kacz/projectors.hpp>
#include <kacz/sampling.hpp>
#include <kacz/types.hpp>

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

namespace kacz {

/// x + (b_a - <a, x>) / ||a||^2 a. Throws InvalidArgument for a zero row.
Vector kaczmarz_step(const Vector& x, const Vector& a, double b_a);

/// Orthogonal projection of x onto {y : A_n y = b_S}:
/// x + A_n^T G_n^-1 (b_S - A_n x). Throws DependentSubset if rank < n.
Vector multirow_step(const Vector& x, const RowSubset& S, const Vector& b_S);

/// x + mu A_n^T G_n^-1 (b_S - A_n x), mu in [0, 2]. mu = 0 is a no-op and
/// is the only value accepted for a dependent subset.
Vector relaxed_step(const Vector& x, const RowSubset& S, const Vector& b_S, double mu);

enum class Sampler { volume, uniform };
enum class Track { error_to_solution, residual };

Sampler parse_sampler(std::string_view name);
std::string_view to_string(Sampler s);

struct PursuitConfig {
  Index n = 1;
  Sampler sampler = Sampler::volume;
  Relaxation relaxation = Relaxation::undershoot;  ///< uniform sampler only
  VmaxMode vmax_mode = VmaxMode::exact;            ///< uniform sampler only
  std::uint64_t master_seed = 0;
  long max_iters = 1000;
  double stop_tol = 1e-12;  ///< stop once errors_sq <= stop_tol^2
  Track track = Track::error_to_solution;
  std::optional<Vector> x0;  ///< default: standard normal from master_seed
  bool record_iterates = false;
};

struct PursuitTrace {
  std::vector<double> errors_sq;    ///< errors_sq[k] measured at x_k, k = 0..iters_run
  std::vector<double> gain_ratios;  ///< errors_sq[k+1] / errors_sq[k]
  std::vector<IndexSet> draws;      ///< subset used by step k -> k+1
  std::vector<double> mus;          ///< relaxation factor per step (uniform sampler)
  std::vector<Vector> iterates;     ///< x_0..x_k when record_iterates is set
  long iters_run = 0;
  bool converged = false;
};

/// Starting point used when PursuitConfig::x0 is absent.
Vector default_start(const LinearSystem& system, std::uint64_t master_seed);

/// Seed of the draw stream for ensemble member `member` (member 0 is also
/// the stream of a lone run_pursuit).
std::uint64_t member_seed(std::uint64_t master_seed, std::uint64_t member);

/// Runs one randomized n-row pursuit. Errors are ||x_k - x*||^2 restricted
/// to the row space of A (all of R^N when A has full column rank), or
/// squared residuals with Track::residual.
PursuitTrace run_pursuit(const LinearSystem& system, const PursuitConfig& config);

struct EnsembleReport {
  Index n = 0;
  long iters = 0;
  double kappa_sq = 0;  ///< vol_n / sigma_hat_min^2, or vol_n^max / ... for uniform draws
  double bound_lower_factor = 1;  ///< per-step (1 - 1/kappa^2)
  double bound_upper_factor = 1;  ///< per-step (1 - 1/kappa^2)^2
  double precision_cutoff = 0;    ///< members below this leave the gain statistics
  // Indexed by iteration k = 1..iters (slot 0 unused); NaN where no member
  // contributes.
  std::vector<double> mean_gain_ratio;
  std::vector<double> gain_ratio_se;
  std::vector<int> gain_count;
  /// Indexed by k = 0..iters: mean of ln(errors_sq) over members still running.
  std::vector<double> mean_log_error;
  std::vector<PursuitTrace> traces;  ///< in member order
};

/// Runs `members` pursuits from a shared x0 with split seeds, concurrently.
/// Members stop once their error falls below the machine-precision cutoff
/// 1e-28 (1 + ||x*||^2) (||b||^2 for residual tracking) or after
/// config.max_iters steps.
EnsembleReport run_ensemble(const LinearSystem& system, const PursuitConfig& config, int members);

}  // namespace kacz
