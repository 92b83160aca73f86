#include "sparselab/combinatorics.hpp"

#include <limits>

namespace sparselab {

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  if (k > n - k) k = n - k;
  constexpr std::uint64_t cap = std::numeric_limits<std::int64_t>::max();
  std::uint64_t result = 1;
  for (std::uint64_t i = 0; i < k; ++i) {
    if (result > cap / (n - i)) return cap;
    result = result * (n - i) / (i + 1);
  }
  return result;
}

void for_each_subset(Index population, Index k,
                     const std::function<void(const IndexSet&)>& visit) {
  if (k < 0 || k > population) return;
  IndexSet subset(static_cast<std::size_t>(k));
  for (Index i = 0; i < k; ++i) subset[static_cast<std::size_t>(i)] = i;
  while (true) {
    visit(subset);
    // advance to the next combination in lexicographic order
    Index i = k - 1;
    while (i >= 0 && subset[static_cast<std::size_t>(i)] == population - k + i)
      --i;
    if (i < 0) break;
    ++subset[static_cast<std::size_t>(i)];
    for (Index j = i + 1; j < k; ++j)
      subset[static_cast<std::size_t>(j)] =
          subset[static_cast<std::size_t>(j - 1)] + 1;
  }
}

}  // namespace sparselab
