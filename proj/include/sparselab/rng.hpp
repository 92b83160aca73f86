#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Core>

namespace sparselab {

/// Seeded random stream used by every generator in the library.
///
/// All draw routines are written out explicitly (no std::*_distribution)
/// so a given seed produces the same sequence on every platform. Frozen
/// regression fixtures depend on this.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : base_seed_(seed), engine_(seed) {}

  /// Uniform double in [0, 1), 53-bit resolution.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller (two engine outputs per draw).
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Uniform integer in [0, bound), rejection sampled to avoid modulo bias.
  std::uint64_t next_index(std::uint64_t bound) {
    const std::uint64_t threshold = (0ULL - bound) % bound;
    std::uint64_t r = engine_();
    while (r < threshold) r = engine_();
    return r % bound;
  }

  /// Independent stream derived from the original seed and an index;
  /// unaffected by draws already made on this stream.
  RandomStream substream(std::uint64_t index) const {
    return RandomStream(splitmix64(base_seed_ ^ splitmix64(index + 1)));
  }

  Eigen::MatrixXd gaussian_matrix(Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXd out(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
      for (Eigen::Index i = 0; i < rows; ++i) out(i, j) = normal();
    return out;
  }

  Eigen::VectorXd gaussian_vector(Eigen::Index size) {
    Eigen::VectorXd out(size);
    for (Eigen::Index i = 0; i < size; ++i) out(i) = normal();
    return out;
  }

  /// Unit vector uniform on the sphere (normalized gaussian).
  Eigen::VectorXd unit_vector(Eigen::Index size) {
    Eigen::VectorXd v = gaussian_vector(size);
    while (v.norm() < 1e-12) v = gaussian_vector(size);
    return v / v.norm();
  }

  /// In-place Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(next_index(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  /// Sorted sample of `count` distinct indices from [0, population).
  std::vector<Eigen::Index> sample_without_replacement(Eigen::Index population,
                                                       Eigen::Index count);

  static std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
  }

 private:
  std::uint64_t base_seed_;
  std::mt19937_64 engine_;
};

}  // namespace sparselab
