#pragma once

#include <cstdint>
#include <functional>

#include "sparselab/types.hpp"

namespace sparselab {

/// C(n, k) with saturation at 2^63-1 (enough for budget checks).
std::uint64_t binomial(std::uint64_t n, std::uint64_t k);

/// Calls visit(subset) for every size-k subset of {0..population-1} in
/// lexicographic order. subset is sorted ascending and reused across calls.
void for_each_subset(Index population, Index k,
                     const std::function<void(const IndexSet&)>& visit);

}  // namespace sparselab
