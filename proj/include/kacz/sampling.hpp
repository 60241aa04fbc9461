#pragma once

#include <kacz/combinatorics.hpp>
#include <kacz/rng.hpp>
#include <kacz/types.hpp>

#include <string_view>
#include <vector>

namespace kacz {

/// Volume-sampling law over n-subsets: pr(i) = v_sq(i) / vol_n.
struct VolumeDistribution {
  struct Entry {
    IndexSet indices;
    double v_sq;
    double cumulative;  ///< pr of this entry and all before it
  };

  Index n = 0;
  std::vector<Entry> entries;  ///< positive-volume subsets only, colex order
  double vol_n = 0;
  double v_sq_max = 0;

  double probability(std::size_t i) const { return entries[i].v_sq / vol_n; }
};

/// Enumerates every n-subset of A's rows. Throws CapExceeded above `cap`
/// and RankDeficient if no subset has positive volume.
VolumeDistribution build_volume_distribution(const Matrix& A, Index n,
                                             std::uint64_t cap = kEnumerationCap);

/// Inverse-CDF draw; consumes one uniform from rng.
const IndexSet& draw_volume(const VolumeDistribution& dist, Rng& rng);

/// Uniform n-combination of {0..M-1} by partial Fisher-Yates, sorted.
IndexSet draw_uniform(Index M, Index n, Rng& rng);

enum class Relaxation { undershoot, overshoot };
enum class VmaxMode { exact, running };

Relaxation parse_relaxation(std::string_view name);
VmaxMode parse_vmax_mode(std::string_view name);

struct RelaxationState {
  Relaxation mode = Relaxation::undershoot;
  VmaxMode v_sq_max_mode = VmaxMode::exact;
  double v_sq_max = 0;  ///< exact value, or the largest volume seen so far
};

/// mu = 1 -+ sqrt(1 - min(v_sq / v_sq_max, 1)), in [0, 2]. In running mode
/// the state's v_sq_max is raised to v_sq first. Returns 0 if v_sq_max is 0.
double relaxation_factor(double v_sq, RelaxationState& state);

}  // namespace kacz
