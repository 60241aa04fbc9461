#include <kacz/sampling.hpp>

#include <kacz/errors.hpp>
#include <kacz/projectors.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace kacz {

VolumeDistribution build_volume_distribution(const Matrix& A, Index n, std::uint64_t cap) {
  require_enumerable(A.rows(), n, cap);
  if (n > A.cols()) throw InvalidArgument("subset size exceeds the number of columns");
  VolumeDistribution dist;
  dist.n = n;
  for_each_combination(A.rows(), n, [&](const IndexSet& c) {
    const double v_sq = subset_geometry(RowSubset(A, c)).v_sq;
    if (v_sq > 0.0) dist.entries.push_back({c, v_sq, 0.0});
  });
  if (dist.entries.empty())
    throw RankDeficient("every " + std::to_string(n) + "-subset of rows is linearly dependent");
  double running = 0.0;
  for (auto& e : dist.entries) {
    running += e.v_sq;
    dist.v_sq_max = std::max(dist.v_sq_max, e.v_sq);
  }
  dist.vol_n = running;
  double cumulative = 0.0;
  for (auto& e : dist.entries) {
    cumulative += e.v_sq;
    e.cumulative = cumulative / running;
  }
  dist.entries.back().cumulative = 1.0;
  return dist;
}

const IndexSet& draw_volume(const VolumeDistribution& dist, Rng& rng) {
  const double u = rng.uniform();
  const auto it = std::upper_bound(dist.entries.begin(), dist.entries.end(), u,
                                   [](double value, const auto& e) { return value < e.cumulative; });
  return it == dist.entries.end() ? dist.entries.back().indices : it->indices;
}

IndexSet draw_uniform(Index M, Index n, Rng& rng) {
  if (n < 1 || n > M)
    throw InvalidArgument("subset size " + std::to_string(n) + " outside [1, " + std::to_string(M) + "]");
  IndexSet pool(static_cast<std::size_t>(M));
  std::iota(pool.begin(), pool.end(), Index{0});
  for (Index k = 0; k < n; ++k) {
    const auto j = k + static_cast<Index>(rng.below(static_cast<std::uint64_t>(M - k)));
    std::swap(pool[static_cast<std::size_t>(k)], pool[static_cast<std::size_t>(j)]);
  }
  pool.resize(static_cast<std::size_t>(n));
  std::sort(pool.begin(), pool.end());
  return pool;
}

Relaxation parse_relaxation(std::string_view name) {
  if (name == "undershoot") return Relaxation::undershoot;
  if (name == "overshoot") return Relaxation::overshoot;
  throw InvalidArgument("unknown relaxation mode '" + std::string(name) + "'");
}

VmaxMode parse_vmax_mode(std::string_view name) {
  if (name == "exact") return VmaxMode::exact;
  if (name == "running") return VmaxMode::running;
  throw InvalidArgument("unknown v_sq_max mode '" + std::string(name) + "'");
}

double relaxation_factor(double v_sq, RelaxationState& state) {
  if (state.v_sq_max_mode == VmaxMode::running) state.v_sq_max = std::max(state.v_sq_max, v_sq);
  if (!(state.v_sq_max > 0.0)) return 0.0;
  const double ratio = std::clamp(v_sq / state.v_sq_max, 0.0, 1.0);
  const double shift = std::sqrt(1.0 - ratio);
  return state.mode == Relaxation::undershoot ? 1.0 - shift : 1.0 + shift;
}

}  // namespace kacz
