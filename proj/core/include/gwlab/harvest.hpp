#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "gwlab/coupling.hpp"
#include "gwlab/regen.hpp"
#include "gwlab/segments.hpp"
#include "gwlab/stats.hpp"

namespace gwlab {

// Streaming drive of a coupled run: detect regenerations online, close and
// classify blocks as they confirm, prune the trees behind, accumulate.
// Memory stays proportional to the open window, so run length is unbounded.
struct HarvestOptions {
  RegenConfig regen{};
  std::int64_t target_segments = 0;  // stop after this many blocks (0 = off)
  std::int64_t max_steps = 0;        // stop after this many steps (0 = off)
  bool collect_summaries = false;
  std::int64_t ergodic_batch = 0;    // 0 = derived from max_steps, or disabled
  ProcessLimits limits{};
};

struct HarvestResult {
  SegmentStats stats;
  InvariantCounters counters;
  std::vector<SegmentSummary> summaries;
  BatchMeans ergodic_slow{0};
  BatchMeans ergodic_fast{0};
  std::int64_t steps = 0;
  std::int64_t confirmed_regens = 0;
  std::uint64_t seed = 0;

  void merge(HarvestResult&& o);
};

HarvestResult harvest_segments(const OffspringDistribution& dist, BiasParams params,
                               const HarvestOptions& opts, std::uint64_t seed);

// Conditioned-law sampling by rejection: fresh runs are kept only when time 0
// is a confirmed regeneration, and the first block (0, tau_1] is emitted.
// Acceptance frequency estimates the never-return probability.
struct RejectionResult {
  SegmentStats stats;
  InvariantCounters counters;
  std::vector<SegmentSummary> summaries;
  std::int64_t trials = 0;
  std::int64_t accepted = 0;

  Estimate acceptance_rate() const;
  void merge(RejectionResult&& o);
};

RejectionResult rejection_sample(const OffspringDistribution& dist, BiasParams params,
                                 const RegenConfig& cfg, std::int64_t trials, std::uint64_t seed,
                                 bool collect_summaries = false);

// Integer-walk-only samplers (no trees).

// Unconditioned first-regeneration sample: back-step count and first
// regeneration time, which may be 0.
BSample sample_b_counts(double beta, std::int64_t trials, std::uint64_t seed,
                        RegenConfig cfg = {});

struct ZeroSrCounts {
  std::int64_t holds = 0;
  std::int64_t fails = 0;
  std::int64_t trials = 0;
  Estimate rate() const;
};
ZeroSrCounts zero_sr_trials(double beta, std::int64_t trials, std::uint64_t seed,
                            RegenConfig cfg = {});

// Replica fan-out over available parallelism (GWLAB_THREADS caps it); results
// land in replica order so merges are deterministic.
int effective_threads(int replicas);
void run_indexed(int n, const std::function<void(int)>& fn);

}  // namespace gwlab
