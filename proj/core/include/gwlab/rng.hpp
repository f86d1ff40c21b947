#pragma once

#include <cstdint>
#include <random>

namespace gwlab {

// Stateless splitmix64 mix; used to derive sub-stream and replica seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_stream_seed(std::uint64_t master, std::uint64_t lane) {
  return splitmix64(master + 0x9E3779B97F4A7C15ULL * (lane + 1));
}

// Per-replica seed: stable hash of (master seed, replica index).
inline std::uint64_t replica_seed(std::uint64_t master, std::uint64_t index) {
  return splitmix64(splitmix64(master) ^ (0xD1B54A32D192ED03ULL * (index + 1)));
}

// 53-bit uniform in [0,1). mt19937_64 output is standard-specified, so draws
// are reproducible across platforms for a given seed.
inline double uniform01(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

}  // namespace gwlab
