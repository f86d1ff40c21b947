#include "gwlab/regen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace gwlab {

int default_margin(double beta) {
  if (!(beta > 1.0))
    throw std::invalid_argument("default_margin: beta must be > 1 (set an explicit margin otherwise)");
  const int m = static_cast<int>(std::ceil(9.0 * std::log(10.0) / std::log(beta)));
  return std::max(1, m);
}

int RegenConfig::effective_margin(double beta) const {
  return margin > 0 ? margin : default_margin(beta);
}

namespace {

void validate_path(const std::vector<int>& y) {
  if (y.empty() || y[0] != 0)
    throw std::invalid_argument("regen: path must start at 0");
  for (size_t i = 1; i < y.size(); ++i)
    if (std::abs(y[i] - y[i - 1]) != 1)
      throw std::invalid_argument("regen: path must move by +-1");
}

}  // namespace

std::vector<std::int64_t> detect_regens(const std::vector<int>& y, double beta, RegenConfig cfg) {
  validate_path(y);
  const int M = cfg.effective_margin(beta);
  const std::int64_t n = static_cast<std::int64_t>(y.size()) - 1;

  const int global_max = *std::max_element(y.begin(), y.end());

  // min over times strictly after t, scanned from the right
  std::vector<std::int64_t> out;
  std::vector<int> min_after(y.size());
  int run = std::numeric_limits<int>::max();
  for (std::int64_t t = n; t >= 0; --t) {
    min_after[t] = run;
    run = std::min(run, y[t]);
  }

  int max_before = std::numeric_limits<int>::min();
  for (std::int64_t t = 0; t <= n; ++t) {
    const bool fresh_max = y[t] > max_before;
    max_before = std::max(max_before, y[t]);
    if (!fresh_max) continue;
    const bool future_ok = cfg.mode == RegenMode::strict ? y[t] < min_after[t]
                                                         : y[t] <= min_after[t];
    if (!future_ok) continue;
    if (global_max - y[t] > M) out.push_back(t);
  }
  return out;
}

ZeroSr check_zero_sr(const std::vector<int>& y, double beta, RegenConfig cfg) {
  validate_path(y);
  const int M = cfg.effective_margin(beta);
  int global_max = 0;
  for (size_t t = 1; t < y.size(); ++t) {
    const bool dipped = cfg.mode == RegenMode::strict ? y[t] <= 0 : y[t] < 0;
    if (dipped) return ZeroSr::fails;
    global_max = std::max(global_max, y[t]);
  }
  return global_max > M ? ZeroSr::holds : ZeroSr::undecided;
}

std::vector<Segment> split_segments(const CoupledTrajectory& traj,
                                    const std::vector<std::int64_t>& regen_times) {
  std::vector<std::int64_t> times;
  for (std::int64_t t : regen_times)
    if (t > 0) times.push_back(t);
  std::vector<Segment> out;
  if (times.size() < 2) return out;

  const auto depth_slow = traj.depth_values(Walk::slow);
  const auto depth_fast = traj.depth_values(Walk::fast);
  out.reserve(times.size() - 1);
  for (size_t i = 0; i + 1 < times.size(); ++i) {
    const std::int64_t s = times[i], e = times[i + 1];
    Segment seg;
    seg.start = s;
    seg.end = e;
    seg.gain_slow = depth_slow[e] - depth_slow[s];
    seg.gain_fast = depth_fast[e] - depth_fast[s];
    seg.steps.reserve(static_cast<size_t>(e - s));
    for (std::int64_t t = s + 1; t <= e; ++t) {
      const size_t j = static_cast<size_t>(t - 1);  // step t is record index t-1
      seg.steps.push_back({traj.dy[j], traj.d_slow[j], traj.d_fast[j], traj.below_width[j],
                           traj.k_sync[j], traj.u[j]});
    }
    out.push_back(std::move(seg));
  }
  return out;
}

RegenTracker::RegenTracker(RegenMode mode, int margin) : mode_(mode), margin_(margin) {
  if (margin_ < 1) throw std::invalid_argument("RegenTracker: margin must be >= 1");
  cands_.push_back({0, 0});  // time 0 is always a candidate
  last_confirmed_level_ = std::numeric_limits<int>::min();
}

RegenTracker::Advance RegenTracker::advance(std::int64_t time, int y_after) {
  Advance adv;
  const int dy = y_after - y_;
  y_ = y_after;
  if (dy == 1) {
    if (y_after > max_level_) {
      max_level_ = y_after;
      cands_.push_back({time, y_after});
      adv.pushed = true;
      while (!cands_.empty() && max_level_ - cands_.front().level > margin_) {
        last_confirmed_level_ = cands_.front().level;
        cands_.pop_front();
        ++confirmed_total_;
        ++adv.confirmed;
      }
    }
  } else {
    const int cut = mode_ == RegenMode::strict ? y_after : y_after + 1;
    while (!cands_.empty() && cands_.back().level >= cut) {
      cands_.pop_back();
      ++adv.popped_back;
    }
    const bool violated = mode_ == RegenMode::strict ? y_after <= last_confirmed_level_
                                                     : y_after < last_confirmed_level_;
    if (confirmed_total_ > 0 && violated)
      throw soundness_error("confirmed regeneration invalidated by a later step");
  }
  return adv;
}

}  // namespace gwlab
