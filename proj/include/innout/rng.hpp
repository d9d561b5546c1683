#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace innout {

// splitmix64 finalizer; used both to mix seeds and to whiten string hashes.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Per-video seed independent of scheduling and of unrelated videos.
inline std::uint64_t derive_seed(std::uint64_t global_seed, std::string_view video_id) {
  return mix64(global_seed ^ mix64(fnv1a(video_id)));
}

inline std::uint64_t derive_seed(std::uint64_t global_seed, std::uint64_t salt) {
  return mix64(global_seed ^ mix64(salt));
}

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed) { return Rng(mix64(seed)); }

}  // namespace innout
