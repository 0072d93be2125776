#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

namespace bloomemb {

/// SplitMix64 finalizer. Used to expand seeds and as the base hash of the
/// double-hashing family.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// xoshiro256** seeded through SplitMix64.
///
/// All randomness in the library goes through this generator so that hash
/// matrices, synthetic data and weight initialisation are reproducible across
/// platforms and standard library implementations. Bounded integers use
/// rejection sampling on the full 64-bit output, never `%` alone.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) noexcept;

  std::uint64_t next() noexcept;

  /// Uniform integer in [0, bound). `bound` must be positive.
  std::uint64_t uniform(std::uint64_t bound) noexcept;

  /// Uniform double in [0, 1) with 53 bits of precision.
  double uniform_real() noexcept;

  /// Derive an independent stream, e.g. one per profile or per experiment cell.
  Rng fork(std::uint64_t stream) const noexcept;

  template <typename T>
  void shuffle(std::span<T> values) noexcept {
    for (std::size_t i = values.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(uniform(i));
      std::swap(values[i - 1], values[j]);
    }
  }

 private:
  std::uint64_t s_[4];
};

}  // namespace bloomemb
