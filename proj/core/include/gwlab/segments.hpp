#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gwlab/offspring.hpp"
#include "gwlab/regen.hpp"
#include "gwlab/stats.hpp"

namespace gwlab {

// One classified inter-regeneration block. decoupled == false is the
// stayed-together event; decoupled == true with b back-steps is the
// decoupled-with-b-returns event.
struct SegmentSummary {
  std::int64_t start = 0;
  std::int32_t length = 0;
  std::int32_t b_count = 0;       // back-steps of the integer walk inside the block
  std::int32_t delta_offset = -1; // 1-based offset of the first divergence, -1 if none
  std::int32_t gain_slow = 0;
  std::int32_t gain_fast = 0;
  bool decoupled = false;
};

// Violation tallies for the structural invariants of the coupling. These are
// counted, never silently dropped; every field is expected to stay zero.
struct InvariantCounters {
  std::int64_t domination = 0;          // depth increment < integer-walk increment
  std::int64_t gap_ledger = 0;          // gap changed on a forward step, or jump not in {-2,0,2}
  std::int64_t delta_jump = 0;          // first in-segment divergence jump != +2
  std::int64_t delta_not_backstep = 0;  // first divergence not a back-step of the integer walk
  std::int64_t delta_width = 0;         // first divergence with u >= decouple width
  std::int64_t coupled_gain_mismatch = 0;
  std::int64_t dk_gap_bound = 0;        // gain_fast - gain_slow < 4 - 2k on a decoupled block
  std::int64_t section4_pathwise = 0;   // per-block gap below its class's lower bound
  std::int64_t super_regen = 0;         // tree walk returned to a regeneration depth

  std::int64_t total() const;
  void merge(const InvariantCounters& o);
};

// Classify one block; when counters are supplied the block's structural
// invariants are audited into them.
SegmentSummary classify(const Segment& seg, double beta, double eps,
                        InvariantCounters* counters = nullptr);

// Trajectory-level invariants (pathwise domination, gap ledger, coupling
// tightness, super-regeneration transfer at the given confirmed times).
InvariantCounters audit_trajectory(const CoupledTrajectory& traj,
                                   const std::vector<std::int64_t>& regen_times);

// Mergeable sufficient statistics over classified blocks. Merge order is
// fixed by the caller (replica index), so reports are bit-reproducible.
class SegmentStats {
 public:
  void add(const SegmentSummary& s);
  void merge(const SegmentStats& o);

  std::int64_t count() const { return n_; }
  Estimate speed(Walk w) const;     // mean gain / mean length, delta method
  Estimate mean_length() const;
  Estimate gap() const;             // mean of (gain_fast - gain_slow)
  double gap_one_sided_p() const;   // P[gap <= 0] under the normal approximation
  Estimate prob_decoupled(int k) const;
  Estimate prob_coupled() const;
  Estimate prob_b(int k) const;
  Estimate section4_paired() const; // mean of (gap_i - class lower bound_i)

  const std::map<int, std::int64_t>& decoupled_counts() const { return dk_counts_; }
  const std::map<int, std::int64_t>& b_counts() const { return b_counts_; }
  const std::map<int, std::int64_t>& max_tau_by_b() const { return max_tau_by_b_; }
  std::int64_t coupled_count() const { return c_count_; }
  std::int64_t window_violations(int w) const;  // length > w*b + 1, w in {3,4}

 private:
  std::int64_t n_ = 0;
  std::int64_t c_count_ = 0;
  std::map<int, std::int64_t> dk_counts_;
  std::map<int, std::int64_t> b_counts_;
  std::map<int, std::int64_t> max_tau_by_b_;
  RatioAccum speed_slow_, speed_fast_;
  Welford gap_, paired_;
  Welford length_;
  std::int64_t window3_ = 0, window4_ = 0;
};

SegmentStats fold(std::span<const SegmentSummary> summaries);

// Free-function forms over block lists.
Estimate speed_regen(std::span<const SegmentSummary> summaries, Walk w);
struct GapEstimate {
  Estimate estimate;
  double one_sided_p = 1.0;
};
GapEstimate gap_estimator(std::span<const SegmentSummary> summaries);

// Ergodic speed: final depth over steps, batch-means standard error.
Estimate speed_ergodic(const CoupledTrajectory& traj, Walk w, int n_batches = 20);

struct ProbRow {
  std::string name;
  double freq = 0;
  double lo = 0, hi = 0;  // Wilson 95%
  std::int64_t count = 0;
  bool analytic = false;  // tail-bound remainder rows carry no counts
};
struct ProbTable {
  std::int64_t n = 0;
  std::vector<ProbRow> rows;
  const ProbRow* find(const std::string& name) const;
};

// Frequencies of the stayed-together event, each decoupling class, and each
// back-step count, plus an analytic remainder row past the largest observed k.
ProbTable prob_table(const SegmentStats& stats, double beta);
ProbTable prob_table(std::span<const SegmentSummary> summaries, double beta);

// Unconditioned first-regeneration sample of the integer walk: counts of the
// number of back-steps before the first regeneration time (which may be 0).
struct BSample {
  std::map<int, std::int64_t> counts;
  std::map<int, std::int64_t> max_tau_by_b;
  std::int64_t n = 0;

  Estimate prob(int k) const;
};

struct AuditRow {
  std::string name;
  double empirical = 0;
  double se = 0;
  double bound = 0;
  double margin_sigma = 0;
  std::int64_t violations = -1;  // -1 when not a counting check
  std::int64_t n = 0;
  std::string verdict;  // "pass", "VIOLATION", "info"
};
struct AuditReport {
  std::vector<AuditRow> rows;
  bool all_pass() const;
  const AuditRow* find(const std::string& name) const;
};

// Empirical audit of every closed-form block-level claim: the decoupling
// lower bound, the per-k upper bound, the geometric tail, the aggregate gap
// inequality, and the length-window check for coefficients 3 and 4.
AuditReport lemma_audit(const SegmentStats& stats, const BSample& b_sample, double beta,
                        double eps, const OffspringDistribution& dist);

// Large-bias rate report: per-eps speed gap against 2*E[1/Z]/beta^2, the
// leading-order ratio of the decoupling probability, and the mean block length.
struct RateReport {
  Estimate rate_per_eps;   // (mean gap / mean length) / eps
  double target_rate = 0;  // 2 E[1/Z] / beta^2
  double rate_ratio = 0;
  Estimate d1_prob;
  double mean_width = 0;   // E[decouple width]
  double d1_ratio = 0;
  Estimate mean_tau;
  bool pass_rate = false;  // ratio within 30%
  bool pass_d1 = false;    // d1_ratio within 15%
  bool pass_tau = false;   // mean_tau in [1, 1.05]
};
RateReport rate_check(const SegmentStats& stats, double beta, double eps,
                      const OffspringDistribution& dist);

// Exhaustive +-1 prefixes with an all-forward suffix: every regeneration
// decision within the horizon is exact. Records, per back-step count, the
// largest first-regeneration time observed with tau <= max_len.
struct EnumRow {
  int b = 0;
  std::int64_t max_tau = 0;
  std::int64_t paths = 0;
};
struct EnumTable {
  int max_len = 0;
  RegenMode mode = RegenMode::strict;
  std::vector<EnumRow> rows;
  std::map<std::pair<int, int>, std::int64_t> hist;  // (b, tau) -> paths
  std::int64_t evaluated = 0;
  std::int64_t window_violations(int w) const;
  bool window_holds(int w) const { return window_violations(w) == 0; }
  const EnumRow* find(int b) const;
};
EnumTable enumerate_paths(int max_len, RegenMode mode);

}  // namespace gwlab
