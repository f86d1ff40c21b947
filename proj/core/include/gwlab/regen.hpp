#pragma once

#include <cstdint>
#include <deque>
#include <vector>

#include "gwlab/coupling.hpp"
#include "gwlab/errors.hpp"

namespace gwlab {

// strict:    y[t] > max(y before t)  and  y[t] <  min(y after t)
// nonstrict: y[t] > max(y before t)  and  y[t] <= min(y after t)
enum class RegenMode { strict, nonstrict };

// A time is only confirmed once the path's running maximum exceeds its level
// by more than `margin`; with the default margin the probability that a
// confirmed time is later invalidated is below 1e-9 per confirmation.
struct RegenConfig {
  RegenMode mode = RegenMode::strict;
  int margin = 0;  // 0 -> default_margin(beta)

  int effective_margin(double beta) const;
};

// Smallest M >= 1 with beta^-M <= 1e-9.
int default_margin(double beta);

// Confirmed regeneration times of an observed integer-walk path (y[0] == 0,
// +-1 increments). Times whose level is within the margin of the running
// maximum are undecided and excluded.
std::vector<std::int64_t> detect_regens(const std::vector<int>& y, double beta,
                                        RegenConfig cfg = {});

enum class ZeroSr { holds, fails, undecided };

// Whether time 0 is a confirmed regeneration; the rejection filter that
// realizes the conditioned law.
ZeroSr check_zero_sr(const std::vector<int>& y, double beta, RegenConfig cfg = {});

struct SegmentStep {
  std::int8_t dy = 0;
  std::int8_t d_slow = 0;
  std::int8_t d_fast = 0;
  std::uint8_t below_width = 0;
  std::int32_t k_sync = 0;
  double u = 0;
};

// One inter-regeneration block (start, end], with both walks' depth gains.
struct Segment {
  std::int64_t start = 0;
  std::int64_t end = 0;
  std::int32_t gain_slow = 0;
  std::int32_t gain_fast = 0;
  std::vector<SegmentStep> steps;

  std::int64_t length() const { return end - start; }
};

// Blocks between consecutive confirmed nonzero regeneration times. The block
// before the first nonzero regeneration and the undecided tail are dropped;
// fewer than two usable times yields an empty list.
std::vector<Segment> split_segments(const CoupledTrajectory& traj,
                                    const std::vector<std::int64_t>& regen_times);

// Streaming regeneration detection over +-1 increments. Candidates are fresh
// strict maxima; a down-step invalidates candidates per the mode; a candidate
// is confirmed once the running maximum clears its level by more than the
// margin. Callers mirror per-candidate payload in a parallel deque using the
// counts returned by advance(). Throws soundness_error if a confirmed level
// is ever violated.
class RegenTracker {
 public:
  RegenTracker(RegenMode mode, int margin);

  struct Advance {
    int popped_back = 0;   // candidates invalidated, newest first
    bool pushed = false;   // a new candidate (this step's time/level)
    int confirmed = 0;     // candidates confirmed, oldest first
  };

  Advance advance(std::int64_t time, int y_after);

  std::int64_t candidate_count() const { return static_cast<std::int64_t>(cands_.size()); }
  std::int64_t confirmed_count() const { return confirmed_total_; }
  bool has_confirmed() const { return confirmed_total_ > 0; }
  int last_confirmed_level() const { return last_confirmed_level_; }

 private:
  struct Cand {
    std::int64_t time;
    int level;
  };

  RegenMode mode_;
  int margin_;
  std::deque<Cand> cands_;
  int y_ = 0;
  int max_level_ = 0;
  std::int64_t confirmed_total_ = 0;
  int last_confirmed_level_ = 0;
};

}  // namespace gwlab
