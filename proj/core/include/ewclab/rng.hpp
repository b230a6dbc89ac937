#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace ewclab {

// Portable pseudo-random source: std::mt19937_64 (whose output sequence is
// fixed by the C++ standard) plus distribution code defined here rather than
// by the standard library, so draws are identical across toolchains.
class Rng {
 public:
  // Generator version tag written to run manifests.
  static constexpr const char* kName = "mt19937_64/v1";

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform on [0, bound), unbiased by rejection. bound must be > 0.
  std::uint64_t below(std::uint64_t bound);

 private:
  std::mt19937_64 engine_;
};

// SplitMix64 finalizer.
std::uint64_t splitmix64(std::uint64_t x) noexcept;

// Derives an independent seed from a parent seed and a stream label.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

// Fisher-Yates, walking from the last position down.
template <typename T>
void shuffle(std::span<T> items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    using std::swap;
    swap(items[i - 1], items[j]);
  }
}

}  // namespace ewclab
