#include "sparselab/rng.hpp"

#include <algorithm>
#include <stdexcept>

namespace sparselab {

std::vector<Eigen::Index> RandomStream::sample_without_replacement(
    Eigen::Index population, Eigen::Index count) {
  if (count < 0 || count > population)
    throw std::invalid_argument(
        "sample_without_replacement: count out of range");
  // Floyd's algorithm: count draws regardless of population size.
  std::vector<Eigen::Index> picked;
  picked.reserve(static_cast<std::size_t>(count));
  for (Eigen::Index j = population - count; j < population; ++j) {
    const auto t = static_cast<Eigen::Index>(
        next_index(static_cast<std::uint64_t>(j) + 1));
    if (std::find(picked.begin(), picked.end(), t) != picked.end()) {
      picked.push_back(j);
    } else {
      picked.push_back(t);
    }
  }
  std::sort(picked.begin(), picked.end());
  return picked;
}

}  // namespace sparselab
