#include "gwlab/harvest.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <deque>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "gwlab/rng.hpp"

namespace gwlab {

namespace {

constexpr std::int64_t kTrialStepCap = 10'000'000;

// Margin used for tree pruning; stricter than the statistical confirmation
// margin so a pruned level is revisited with probability around 1e-12.
int prune_margin(double beta, int confirm_margin) {
  const int m12 = static_cast<int>(std::ceil(12.0 * std::log(10.0) / std::log(beta)));
  return std::max(confirm_margin, std::max(1, m12));
}

struct CandInfo {
  std::int64_t time;
  int level;
  std::int64_t vid_slow, vid_fast;
  int depth_slow, depth_fast;
  std::int64_t cum_b, cum_desync;
};

struct DesyncEvent {
  std::int64_t time;
  std::int8_t jump;
  bool backstep;
  bool below_width;
};

// Gain-level structural checks shared by the offline classifier and the
// streaming harvester.
void audit_gains(const SegmentSummary& s, InvariantCounters& c) {
  const int gap = s.gain_fast - s.gain_slow;
  if (!s.decoupled && gap != 0) ++c.coupled_gain_mismatch;
  if (s.decoupled && gap < 4 - 2 * s.b_count) ++c.dk_gap_bound;
  const int lower = s.decoupled ? 4 - 2 * s.b_count : 0;
  if (gap < lower) ++c.section4_pathwise;
}

// Shared per-step machinery: the coupled process, the online detector, the
// mirrored candidate payloads and the sparse divergence-event queue.
class StreamDriver {
 public:
  StreamDriver(const OffspringDistribution& dist, BiasParams params, RegenMode mode, int margin,
               std::uint64_t seed, const ProcessLimits& limits, InvariantCounters& counters)
      : proc_(dist, params, seed, limits), tracker_(mode, margin), counters_(&counters) {
    cands_.push_back(
        CandInfo{0, 0, proc_.position(Walk::slow), proc_.position(Walk::fast), 0, 0, 0, 0});
  }

  // Advance one step; newly confirmed regeneration payloads are appended to
  // `confirmed` (oldest first).
  void step(std::vector<CandInfo>& confirmed) {
    const bool was_decoupled = proc_.decoupled();
    const StepOutcome s = proc_.step();

    if (s.d_slow < s.dy || s.d_fast < s.dy) ++counters_->domination;
    const int jump = s.d_fast - s.d_slow;
    if (s.dy > 0 && jump != 0) ++counters_->gap_ledger;
    if (jump != -2 && jump != 0 && jump != 2) ++counters_->gap_ledger;
    // Coupling tightness: while the walks have never diverged, a step
    // diverges exactly when the uniform lands in the decouple sliver.
    if (!was_decoupled && s.desync != s.below_width) ++counters_->delta_width;

    if (s.dy < 0) ++cum_b_;
    if (s.desync) {
      ++cum_desync_;
      events_.push_back(DesyncEvent{s.time, static_cast<std::int8_t>(jump), s.dy < 0,
                                    s.below_width});
    }
    if (erg_slow_) erg_slow_->add(s.d_slow);
    if (erg_fast_) erg_fast_->add(s.d_fast);

    const RegenTracker::Advance adv = tracker_.advance(s.time, static_cast<int>(proc_.y()));
    for (int i = 0; i < adv.popped_back; ++i) cands_.pop_back();
    if (adv.pushed)
      cands_.push_back(CandInfo{s.time, static_cast<int>(proc_.y()), proc_.position(Walk::slow),
                                proc_.position(Walk::fast), proc_.depth(Walk::slow),
                                proc_.depth(Walk::fast), cum_b_, cum_desync_});
    for (int i = 0; i < adv.confirmed; ++i) {
      confirmed.push_back(cands_.front());
      cands_.pop_front();
    }
  }

  CouplingProcess& process() { return proc_; }
  std::int64_t time() const { return proc_.time(); }

  void attach_ergodic(BatchMeans* slow, BatchMeans* fast) {
    erg_slow_ = slow;
    erg_fast_ = fast;
  }

  const DesyncEvent* first_event_in(std::int64_t lo, std::int64_t hi) const {
    for (const DesyncEvent& e : events_)
      if (e.time > lo && e.time <= hi) return &e;
    return nullptr;
  }
  void purge_events(std::int64_t upto) {
    while (!events_.empty() && events_.front().time <= upto) events_.pop_front();
  }

 private:
  CouplingProcess proc_;
  RegenTracker tracker_;
  std::deque<CandInfo> cands_;
  std::deque<DesyncEvent> events_;
  std::int64_t cum_b_ = 0, cum_desync_ = 0;
  InvariantCounters* counters_;
  BatchMeans* erg_slow_ = nullptr;
  BatchMeans* erg_fast_ = nullptr;
};

// Close the block (from, to] and fold it into the result.
SegmentSummary close_block(const CandInfo& from, const CandInfo& to, StreamDriver& driver,
                           InvariantCounters& counters) {
  SegmentSummary s;
  s.start = from.time;
  s.length = static_cast<std::int32_t>(to.time - from.time);
  s.b_count = static_cast<std::int32_t>(to.cum_b - from.cum_b);
  s.gain_slow = to.depth_slow - from.depth_slow;
  s.gain_fast = to.depth_fast - from.depth_fast;
  s.decoupled = to.cum_desync > from.cum_desync;
  if (s.decoupled) {
    const DesyncEvent* ev = driver.first_event_in(from.time, to.time);
    if (ev) {
      s.delta_offset = static_cast<std::int32_t>(ev->time - from.time);
      if (ev->jump != 2) ++counters.delta_jump;
      if (!ev->backstep) ++counters.delta_not_backstep;
      if (!ev->below_width) ++counters.delta_width;
    }
  }
  audit_gains(s, counters);
  driver.purge_events(to.time);
  return s;
}

}  // namespace

void HarvestResult::merge(HarvestResult&& o) {
  stats.merge(o.stats);
  counters.merge(o.counters);
  summaries.insert(summaries.end(), o.summaries.begin(), o.summaries.end());
  ergodic_slow.merge(o.ergodic_slow);
  ergodic_fast.merge(o.ergodic_fast);
  steps += o.steps;
  confirmed_regens += o.confirmed_regens;
}

HarvestResult harvest_segments(const OffspringDistribution& dist, BiasParams params,
                               const HarvestOptions& opts, std::uint64_t seed) {
  if (opts.target_segments <= 0 && opts.max_steps <= 0)
    throw std::invalid_argument("harvest_segments: set target_segments or max_steps");

  const int margin = opts.regen.effective_margin(params.beta);
  const int m_prune = prune_margin(params.beta, margin);

  HarvestResult res;
  res.seed = seed;
  std::int64_t batch = opts.ergodic_batch;
  if (batch <= 0) batch = opts.max_steps > 0 ? std::max<std::int64_t>(50, opts.max_steps / 20) : 50'000;
  res.ergodic_slow = BatchMeans(batch);
  res.ergodic_fast = BatchMeans(batch);

  StreamDriver driver(dist, params, opts.regen.mode, margin, seed, opts.limits, res.counters);
  driver.attach_ergodic(&res.ergodic_slow, &res.ergodic_fast);

  const std::int64_t step_cap =
      opts.max_steps > 0 ? opts.max_steps
                         : std::max<std::int64_t>(10'000'000, 10'000 * opts.target_segments);

  bool have_boundary = false;
  CandInfo boundary{};
  std::deque<CandInfo> prune_queue;
  std::vector<CandInfo> confirmed;

  while (true) {
    if (opts.target_segments > 0 && res.stats.count() >= opts.target_segments) break;
    if (opts.max_steps > 0 && driver.time() >= opts.max_steps) break;
    if (driver.time() >= step_cap)
      throw capacity_error("harvest_segments: step budget exhausted before reaching the target");

    confirmed.clear();
    driver.step(confirmed);
    for (const CandInfo& cand : confirmed) {
      ++res.confirmed_regens;
      prune_queue.push_back(cand);
      if (!have_boundary) {
        if (cand.time > 0) {  // the block before the first nonzero time is dropped
          boundary = cand;
          have_boundary = true;
        }
        continue;
      }
      const SegmentSummary s = close_block(boundary, cand, driver, res.counters);
      res.stats.add(s);
      if (opts.collect_summaries) res.summaries.push_back(s);
      boundary = cand;
      if (opts.target_segments > 0 && res.stats.count() >= opts.target_segments) break;
    }
    while (!prune_queue.empty() &&
           driver.process().y() - prune_queue.front().level > m_prune) {
      driver.process().prune(prune_queue.front().vid_slow, prune_queue.front().vid_fast);
      prune_queue.pop_front();
    }
  }
  res.steps = driver.time();
  return res;
}

Estimate RejectionResult::acceptance_rate() const {
  return {trials > 0 ? static_cast<double>(accepted) / static_cast<double>(trials) : 0.0,
          binom_se(accepted, trials), trials, "rejection-acceptance"};
}

void RejectionResult::merge(RejectionResult&& o) {
  stats.merge(o.stats);
  counters.merge(o.counters);
  summaries.insert(summaries.end(), o.summaries.begin(), o.summaries.end());
  trials += o.trials;
  accepted += o.accepted;
}

RejectionResult rejection_sample(const OffspringDistribution& dist, BiasParams params,
                                 const RegenConfig& cfg, std::int64_t trials, std::uint64_t seed,
                                 bool collect_summaries) {
  if (trials <= 0) throw std::invalid_argument("rejection_sample: trials must be >= 1");
  const int margin = cfg.effective_margin(params.beta);

  RejectionResult res;
  res.trials = trials;
  for (std::int64_t trial = 0; trial < trials; ++trial) {
    const std::uint64_t trial_seed = replica_seed(seed, static_cast<std::uint64_t>(trial));
    StreamDriver driver(dist, params, cfg.mode, margin, trial_seed, ProcessLimits{}, res.counters);
    std::vector<CandInfo> confirmed;
    std::vector<CandInfo> kept;
    bool rejected = false;
    while (!rejected && kept.size() < 2) {
      if (driver.time() >= kTrialStepCap)
        throw capacity_error("rejection_sample: trial exceeded the step cap");
      confirmed.clear();
      driver.step(confirmed);
      for (const CandInfo& c : confirmed) kept.push_back(c);
      // The zero-time candidate dies exactly when the walk comes back to 0
      // (below 0 in nonstrict mode); before any confirmation that is a plain
      // rejection of the trial.
      const std::int64_t y = driver.process().y();
      const bool dipped = cfg.mode == RegenMode::strict ? y <= 0 : y < 0;
      if (kept.empty() && dipped) rejected = true;
    }
    if (rejected) continue;
    // Confirmations arrive level-ordered, so kept[0] is time 0 (the trial
    // would have been rejected otherwise) and kept[1] is the first nonzero
    // regeneration.
    if (kept[0].time != 0)
      throw soundness_error("rejection_sample: first confirmed time is nonzero");
    ++res.accepted;
    const SegmentSummary s = close_block(kept[0], kept[1], driver, res.counters);
    res.stats.add(s);
    if (collect_summaries) res.summaries.push_back(s);
  }
  return res;
}

BSample sample_b_counts(double beta, std::int64_t trials, std::uint64_t seed, RegenConfig cfg) {
  if (trials <= 0) throw std::invalid_argument("sample_b_counts: trials must be >= 1");
  if (!(beta > 1)) throw std::invalid_argument("sample_b_counts: beta must be > 1");
  const int margin = cfg.effective_margin(beta);
  const double q1 = parent_step_prob(1, beta);

  BSample out;
  std::mt19937_64 rng(derive_stream_seed(seed, 11));
  struct Payload {
    std::int64_t time;
    std::int64_t cum_b;
  };
  for (std::int64_t trial = 0; trial < trials; ++trial) {
    RegenTracker tracker(cfg.mode, margin);
    std::deque<Payload> cands;
    cands.push_back({0, 0});
    int y = 0;
    std::int64_t cum_b = 0;
    for (std::int64_t t = 1;; ++t) {
      if (t > kTrialStepCap) throw capacity_error("sample_b_counts: trial exceeded the step cap");
      const int dy = uniform01(rng) > q1 ? 1 : -1;
      y += dy;
      if (dy < 0) ++cum_b;
      const RegenTracker::Advance adv = tracker.advance(t, y);
      for (int i = 0; i < adv.popped_back; ++i) cands.pop_back();
      if (adv.pushed) cands.push_back({t, cum_b});
      if (adv.confirmed > 0) {
        // the oldest confirmation is the first regeneration time (may be 0)
        const Payload first = cands.front();
        const int b = static_cast<int>(first.cum_b);
        ++out.counts[b];
        auto& mt = out.max_tau_by_b[b];
        mt = std::max(mt, first.time);
        break;
      }
    }
    ++out.n;
  }
  return out;
}

Estimate ZeroSrCounts::rate() const {
  return {trials > 0 ? static_cast<double>(holds) / static_cast<double>(trials) : 0.0,
          binom_se(holds, trials), trials, "rejection-acceptance"};
}

ZeroSrCounts zero_sr_trials(double beta, std::int64_t trials, std::uint64_t seed, RegenConfig cfg) {
  if (trials <= 0) throw std::invalid_argument("zero_sr_trials: trials must be >= 1");
  if (!(beta > 1)) throw std::invalid_argument("zero_sr_trials: beta must be > 1");
  const int margin = cfg.effective_margin(beta);
  const double q1 = parent_step_prob(1, beta);

  ZeroSrCounts out;
  out.trials = trials;
  std::mt19937_64 rng(derive_stream_seed(seed, 13));
  for (std::int64_t trial = 0; trial < trials; ++trial) {
    int y = 0;
    for (std::int64_t t = 1;; ++t) {
      if (t > kTrialStepCap) throw capacity_error("zero_sr_trials: trial exceeded the step cap");
      y += uniform01(rng) > q1 ? 1 : -1;
      const bool dipped = cfg.mode == RegenMode::strict ? y <= 0 : y < 0;
      if (dipped) {
        ++out.fails;
        break;
      }
      if (y > margin) {
        ++out.holds;
        break;
      }
    }
  }
  return out;
}

int effective_threads(int replicas) {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw < 1) hw = 1;
  if (const char* env = std::getenv("GWLAB_THREADS")) {
    const int cap = std::atoi(env);
    if (cap >= 1) hw = std::min(hw, cap);
  }
  return std::max(1, std::min(hw, replicas));
}

void run_indexed(int n, const std::function<void(int)>& fn) {
  const int threads = effective_threads(n);
  if (threads <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mu);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (std::thread& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace gwlab
