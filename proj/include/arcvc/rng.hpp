#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace arcvc {

// splitmix64 step; used to derive independent named streams from one seed.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// FNV-1a over the salt string, mixed with the master seed. Every consumer of
// randomness in a run pulls from its own named stream so that adding a draw
// in one place never perturbs another.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view salt) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : salt) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  std::uint64_t s = master ^ h;
  return splitmix64(s);
}

inline std::mt19937_64 rng_stream(std::uint64_t master, std::string_view salt) {
  return std::mt19937_64(derive_seed(master, salt));
}

}  // namespace arcvc
