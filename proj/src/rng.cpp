#include "votebias/rng.hpp"

namespace votebias {

namespace {
constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;
__extension__ using u128 = unsigned __int128;
}

std::uint64_t SplitMix64::mix(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t SplitMix64::next() noexcept {
  state_ += kGamma;
  return mix(state_);
}

std::uint64_t SplitMix64::bounded(std::uint64_t bound) noexcept {
  auto product = static_cast<u128>(next()) * bound;
  auto low = static_cast<std::uint64_t>(product);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      product = static_cast<u128>(next()) * bound;
      low = static_cast<std::uint64_t>(product);
    }
  }
  return static_cast<std::uint64_t>(product >> 64);
}

double SplitMix64::uniform() noexcept {
  return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

SplitMix64 substream(std::uint64_t seed, std::uint64_t index) noexcept {
  return SplitMix64(SplitMix64::mix(seed ^ SplitMix64::mix(index * kGamma + 1)));
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag) noexcept {
  // FNV-1a over the tag, then mixed with the seed.
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : tag) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return SplitMix64::mix(seed ^ SplitMix64::mix(h));
}

}  // namespace votebias
