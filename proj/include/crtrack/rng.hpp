#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace crtrack {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Mixes a master seed with a path of integer keys (frame, part, stage...)
/// into an independent stream seed. Same inputs always give the same seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> keys) {
  std::uint64_t h = splitmix64(master);
  for (std::uint64_t k : keys) h = splitmix64(h ^ splitmix64(k + 0x632be59bd9b4e019ULL));
  return h;
}

inline Rng make_stream(std::uint64_t master, std::initializer_list<std::uint64_t> keys) {
  return Rng(derive_seed(master, keys));
}

/// Uniform draw on the half-open interval (0, 1], on a 2^-53 grid.
template <class URBG>
double uniform_open_closed(URBG& rng) {
  static_assert(URBG::min() == 0 && URBG::max() == ~std::uint64_t{0},
                "expects a full-width 64-bit engine");
  return static_cast<double>((rng() >> 11) + 1) * 0x1.0p-53;
}

}  // namespace crtrack
