#pragma once

#include <cstdint>
#include <string_view>

namespace cfmargin {

// Counter-based randomness. Every draw is a pure function of a seed chain,
// so results do not depend on evaluation order or worker count.

constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t seed_chain(std::uint64_t seed, std::uint64_t value) {
  return splitmix64(seed ^ (value + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2)));
}

inline std::uint64_t hash_str(std::string_view s) {
  // FNV-1a
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x00000100000001b3ULL;
  }
  return h;
}

inline std::uint64_t seed_chain(std::uint64_t seed, std::string_view s) {
  return seed_chain(seed, hash_str(s));
}

// Uniform double in [0, 1) from a fully mixed word.
constexpr double uniform01(std::uint64_t word) {
  return static_cast<double>(splitmix64(word) >> 11) * 0x1.0p-53;
}

}  // namespace cfmargin
