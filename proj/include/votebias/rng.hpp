#pragma once

#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

namespace votebias {

/// SplitMix64 (Steele, Lea, Flood 2014). Used for every random draw so that
/// streams are reproducible bit-for-bit across platforms and standard
/// libraries; std distributions are implementation-defined.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t state) noexcept : state_(state) {}

  std::uint64_t next() noexcept;

  /// Uniform integer in [0, bound). Lemire's multiply-shift with rejection,
  /// so the result is unbiased. bound must be > 0.
  std::uint64_t bounded(std::uint64_t bound) noexcept;

  /// Uniform double in [0, 1) from the top 53 bits.
  double uniform() noexcept;

  static std::uint64_t mix(std::uint64_t z) noexcept;

 private:
  std::uint64_t state_;
};

/// Independent stream for work item `index` of a run seeded with `seed`.
/// Streams depend only on (seed, index), never on scheduling.
SplitMix64 substream(std::uint64_t seed, std::uint64_t index) noexcept;

/// Derives a module seed from the run seed and a tag such as "thresholds".
std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag) noexcept;

/// Fisher-Yates using SplitMix64::bounded.
template <typename T>
void shuffle(std::vector<T>& values, SplitMix64& rng) {
  for (std::size_t i = values.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.bounded(i));
    std::swap(values[i - 1], values[j]);
  }
}

}  // namespace votebias
