#pragma once

#include <kacz/types.hpp>

#include <cstdint>
#include <functional>

namespace kacz {

/// Default cap on enumerated subsets for the brute-force routines.
inline constexpr std::uint64_t kEnumerationCap = 2'000'000;

/// Binomial coefficient C(m, k), saturating at UINT64_MAX on overflow.
std::uint64_t binomial(std::uint64_t m, std::uint64_t k);

/// Exact C(m, k) as a double (used for vol_max scaling where C may be large).
double binomial_real(std::uint64_t m, std::uint64_t k);

/// Throws CapExceeded if C(m, k) > cap.
void require_enumerable(Index m, Index k, std::uint64_t cap);

/// Advances a sorted k-combination of {0..m-1} to its colex successor.
/// Returns false (leaving `c` unspecified) after the last combination.
bool next_colex(IndexSet& c, Index m);

/// The combination of colex rank `rank` (combinatorial number system).
IndexSet unrank_colex(std::uint64_t rank, Index k);

/// Calls `visit` on every k-subset of {0..m-1} in colex order.
void for_each_combination(Index m, Index k, const std::function<void(const IndexSet&)>& visit);

}  // namespace kacz
