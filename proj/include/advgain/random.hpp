#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace advgain {

/// The one generator used for every seeded draw in the library.
using Rng = std::mt19937_64;

/// Uniform integer in [0, bound) by Lemire's multiply-and-reject method.
/// Unlike std::uniform_int_distribution the result stream is identical on
/// every standard library, which keeps reports byte-identical across builds.
inline std::uint64_t uniform_below(Rng& rng, std::uint64_t bound) {
  using u128 = unsigned __int128;
  std::uint64_t x = rng();
  u128 m = static_cast<u128>(x) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      x = rng();
      m = static_cast<u128>(x) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

/// Fisher-Yates shuffle driven by uniform_below.
template <typename T>
void seeded_shuffle(std::span<T> items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform_below(rng, i));
    using std::swap;
    swap(items[i - 1], items[j]);
  }
}

}  // namespace advgain
