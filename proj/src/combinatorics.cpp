#include <kacz/combinatorics.hpp>

#include <kacz/errors.hpp>

#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace kacz {

std::uint64_t binomial(std::uint64_t m, std::uint64_t k) {
  if (k > m) return 0;
  k = std::min(k, m - k);
  std::uint64_t result = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    // result * (m - k + i) / i stays integral at every step.
    const std::uint64_t factor = m - k + i;
    const std::uint64_t g = std::gcd(result, i);
    const std::uint64_t r = result / g, d = i / g;
    const std::uint64_t f = factor / d;
    if (r > std::numeric_limits<std::uint64_t>::max() / f)
      return std::numeric_limits<std::uint64_t>::max();
    result = r * f;
  }
  return result;
}

double binomial_real(std::uint64_t m, std::uint64_t k) {
  if (k > m) return 0.0;
  k = std::min(k, m - k);
  double result = 1.0;
  for (std::uint64_t i = 1; i <= k; ++i)
    result = result * static_cast<double>(m - k + i) / static_cast<double>(i);
  return std::round(result);
}

void require_enumerable(Index m, Index k, std::uint64_t cap) {
  if (k < 1 || k > m)
    throw InvalidArgument("subset size " + std::to_string(k) + " outside [1, " +
                          std::to_string(m) + "]");
  const std::uint64_t count = binomial(static_cast<std::uint64_t>(m), static_cast<std::uint64_t>(k));
  if (count > cap)
    throw CapExceeded("C(" + std::to_string(m) + ", " + std::to_string(k) + ") subsets exceed the " +
                      "enumeration cap of " + std::to_string(cap));
}

bool next_colex(IndexSet& c, Index m) {
  const std::size_t k = c.size();
  for (std::size_t i = 0; i < k; ++i) {
    const Index limit = i + 1 < k ? c[i + 1] : m;
    if (c[i] + 1 < limit) {
      ++c[i];
      for (std::size_t j = 0; j < i; ++j) c[j] = static_cast<Index>(j);
      return true;
    }
  }
  return false;
}

IndexSet unrank_colex(std::uint64_t rank, Index k) {
  IndexSet c(static_cast<std::size_t>(k));
  for (Index i = k; i >= 1; --i) {
    // Largest x with C(x, i) <= rank.
    std::uint64_t x = static_cast<std::uint64_t>(i) - 1;
    while (binomial(x + 1, static_cast<std::uint64_t>(i)) <= rank) ++x;
    c[static_cast<std::size_t>(i - 1)] = static_cast<Index>(x);
    rank -= binomial(x, static_cast<std::uint64_t>(i));
  }
  return c;
}

void for_each_combination(Index m, Index k, const std::function<void(const IndexSet&)>& visit) {
  if (k < 0 || k > m) return;
  IndexSet c(static_cast<std::size_t>(k));
  std::iota(c.begin(), c.end(), Index{0});
  do {
    visit(c);
  } while (next_colex(c, m));
}

}  // namespace kacz
