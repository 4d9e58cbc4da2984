#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace gainsched {

// All randomness derives from one root seed expanded into named streams
// (env-0, env-1, ..., init, sampler). Adding a stream never perturbs others.
inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::uint64_t stream_seed(std::uint64_t root, std::string_view name) {
  // splitmix64 finalizer over root ^ hash(name)
  std::uint64_t z = root ^ fnv1a(name);
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline std::mt19937_64 make_stream(std::uint64_t root, std::string_view name) {
  return std::mt19937_64(stream_seed(root, name));
}

} // namespace gainsched
