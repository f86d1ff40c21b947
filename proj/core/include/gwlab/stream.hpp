#pragma once

#include <cstdint>
#include <random>

#include "gwlab/offspring.hpp"
#include "gwlab/rng.hpp"

namespace gwlab {

// The shared randomness that drives all three walks: one uniform per step and
// one offspring draw per step index. The two sub-streams are seeded
// independently from the master seed, so the offspring attached to step n does
// not depend on how many uniforms were consumed.
class RandomnessStream {
 public:
  explicit RandomnessStream(std::uint64_t master_seed)
      : master_(master_seed),
        u_rng_(derive_stream_seed(master_seed, 0)),
        z_rng_(derive_stream_seed(master_seed, 1)) {}

  double next_uniform() {
    ++uniforms_;
    return uniform01(u_rng_);
  }

  int next_offspring(const OffspringDistribution& dist) {
    ++offspring_;
    return dist.quantile(uniform01(z_rng_));
  }

  std::uint64_t master_seed() const { return master_; }
  std::int64_t uniforms_drawn() const { return uniforms_; }
  std::int64_t offspring_drawn() const { return offspring_; }

 private:
  std::uint64_t master_;
  std::mt19937_64 u_rng_;
  std::mt19937_64 z_rng_;
  std::int64_t uniforms_ = 0;
  std::int64_t offspring_ = 0;
};

}  // namespace gwlab
