#pragma once

#include <cstdint>
#include <string_view>

namespace eagle {

// Counter-free seed mixing (splitmix64 finalizer). Used to derive
// independent sub-streams from (base seed, instance, strategy, repeat).
inline std::uint64_t mix_seed(std::uint64_t state, std::uint64_t salt) {
  std::uint64_t z = state + 0x9e3779b97f4a7c15ULL + salt;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t hash_name(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Deterministic random stream. All sampling in the library goes through
// this class so that pools and traces are reproducible byte-for-byte from
// a seed, independent of the standard library's distribution internals.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : state_(seed) {
    // Warm up so that small seeds do not produce correlated first draws.
    next_u64();
    next_u64();
  }

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform on the open interval (0,1).
  double uniform01() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; two uniforms per draw, no cached state.
  double gaussian();

  // Independent child stream.
  RngStream fork(std::uint64_t salt) { return RngStream(mix_seed(next_u64(), salt)); }

 private:
  std::uint64_t state_;
};

}  // namespace eagle
