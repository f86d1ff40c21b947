#include "gwlab/coupling.hpp"

#include <stdexcept>

namespace gwlab {

BiasParams::BiasParams(double beta_, double eps_) : beta(beta_), eps(eps_) {
  if (!(beta > 1.0)) throw std::invalid_argument("BiasParams: beta must be > 1");
  if (!(eps >= 0.0)) throw std::invalid_argument("BiasParams: eps must be >= 0");
}

CouplingPartition make_partition(int k, double beta, double eps) {
  if (k < 1) throw std::invalid_argument("make_partition: k must be >= 1");
  if (!(beta > 0) || eps < 0) throw std::invalid_argument("make_partition: beta > 0, eps >= 0 required");
  CouplingPartition p;
  p.k = k;
  p.beta = beta;
  p.eps = eps;
  p.q_slow = parent_step_prob(k, beta);
  p.q_fast = parent_step_prob(k, beta + eps);
  p.width = p.q_slow - p.q_fast;
  p.child_slow = child_step_prob(k, beta);
  p.cell = p.width / k;
  return p;
}

CouplingPartition make_partition(int k, const BiasParams& params) {
  return make_partition(k, params.beta, params.eps);
}

std::vector<CouplingPartition::Interval> CouplingPartition::intervals(Walk w) const {
  std::vector<Interval> out;
  if (w == Walk::slow) {
    out.push_back({0.0, q_slow, 0});
  } else {
    for (int j = 1; j <= k; ++j) out.push_back({(j - 1) * cell, j * cell, j});
    out.push_back({width, q_slow, 0});
  }
  // Shared child slices on (q_slow, 1]: child i takes (1-i*p, 1-(i-1)*p].
  for (int i = k; i >= 1; --i) out.push_back({1.0 - i * child_slow, 1.0 - (i - 1) * child_slow, i});
  return out;
}

double CouplingPartition::parent_measure(Walk w) const {
  double m = 0;
  for (const Interval& iv : intervals(w))
    if (iv.target == 0) m += iv.hi - iv.lo;
  return m;
}

double CouplingPartition::child_measure(Walk w, int child) const {
  double m = 0;
  for (const Interval& iv : intervals(w))
    if (iv.target == child) m += iv.hi - iv.lo;
  return m;
}

double CouplingPartition::total_measure(Walk w) const {
  double m = 0;
  for (const Interval& iv : intervals(w)) m += iv.hi - iv.lo;
  return m;
}

CouplingProcess::CouplingProcess(const OffspringDistribution& dist, BiasParams params,
                                 std::uint64_t seed, ProcessLimits limits)
    : dist_(dist),
      params_(params),
      rates_(params.beta, params.eps),
      stream_(seed),
      root_count_(stream_.next_offspring(dist_)),
      tree_slow_(root_count_, limits.max_live_vertices),
      tree_fast_(root_count_, limits.max_live_vertices) {}

int CouplingProcess::depth(Walk w) const {
  return w == Walk::slow ? tree_slow_.depth_of(pos_slow_) : tree_fast_.depth_of(pos_fast_);
}

StepOutcome CouplingProcess::step() {
  const double u = stream_.next_uniform();
  const int z = stream_.next_offspring(dist_);
  return step_core(u, z);
}

StepOutcome CouplingProcess::step_with(double u, int z) { return step_core(u, z); }

StepOutcome CouplingProcess::step_core(double u, int z) {
  StepOutcome out;
  out.time = ++time_;
  out.u = u;
  out.z = z;
  out.dy = u > rates_.q1() ? 1 : -1;
  y_ += out.dy;

  const int k_slow = tree_slow_.count_of(pos_slow_);
  out.k_sync = k_slow;
  // The root carries no decouple sliver: both walks use the same child rule
  // there, so the flag only makes sense away from it.
  out.below_width = !tree_slow_.at_real_root(pos_slow_) && u < rates_.at(k_slow).width;

  const int depth_slow_before = tree_slow_.depth_of(pos_slow_);
  const int depth_fast_before = tree_fast_.depth_of(pos_fast_);

  // slow walk
  if (tree_slow_.at_real_root(pos_slow_)) {
    const auto e = tree_slow_.enter_child(pos_slow_, resolve_root_child(u, k_slow), z);
    pos_slow_ = e.id;
    out.discovered_slow = e.discovered;
  } else {
    const MoveDecision m = resolve_slow_move(u, k_slow, rates_.at(k_slow));
    if (m.to_parent) {
      const std::int64_t p = tree_slow_.parent_of(pos_slow_);
      if (p == LazyTree::npos)
        throw soundness_error("slow walk stepped below a pruned regeneration vertex");
      pos_slow_ = p;
    } else {
      const auto e = tree_slow_.enter_child(pos_slow_, m.child, z);
      pos_slow_ = e.id;
      out.discovered_slow = e.discovered;
    }
  }

  // fast walk
  const int k_fast = tree_fast_.count_of(pos_fast_);
  if (tree_fast_.at_real_root(pos_fast_)) {
    const auto e = tree_fast_.enter_child(pos_fast_, resolve_root_child(u, k_fast), z);
    pos_fast_ = e.id;
    out.discovered_fast = e.discovered;
  } else {
    const MoveDecision m = resolve_fast_move(u, k_fast, rates_.at(k_fast));
    if (m.to_parent) {
      const std::int64_t p = tree_fast_.parent_of(pos_fast_);
      if (p == LazyTree::npos)
        throw soundness_error("fast walk stepped below a pruned regeneration vertex");
      pos_fast_ = p;
    } else {
      const auto e = tree_fast_.enter_child(pos_fast_, m.child, z);
      pos_fast_ = e.id;
      out.discovered_fast = e.discovered;
    }
  }

  out.d_slow = static_cast<std::int8_t>(tree_slow_.depth_of(pos_slow_) - depth_slow_before);
  out.d_fast = static_cast<std::int8_t>(tree_fast_.depth_of(pos_fast_) - depth_fast_before);
  out.desync = out.d_slow != out.d_fast;
  if (out.desync && !decoupled_) {
    decoupled_ = true;
    delta_ = time_;
  }
  return out;
}

void CouplingProcess::prune(std::int64_t slow_keep, std::int64_t fast_keep) {
  tree_slow_.prune_below(slow_keep);
  tree_fast_.prune_below(fast_keep);
}

std::vector<int> CoupledTrajectory::y_values() const {
  std::vector<int> y(dy.size() + 1, 0);
  for (size_t i = 0; i < dy.size(); ++i) y[i + 1] = y[i] + dy[i];
  return y;
}

std::vector<int> CoupledTrajectory::depth_values(Walk w) const {
  const auto& d = w == Walk::slow ? d_slow : d_fast;
  std::vector<int> out(d.size() + 1, 0);
  for (size_t i = 0; i < d.size(); ++i) out[i + 1] = out[i] + d[i];
  return out;
}

CoupledTrajectory run_trajectory(const OffspringDistribution& dist, BiasParams params,
                                 std::int64_t n_steps, std::uint64_t seed,
                                 std::int64_t max_steps) {
  if (n_steps < 1) throw std::invalid_argument("run_trajectory: n_steps must be >= 1");
  if (n_steps > max_steps)
    throw capacity_error("run_trajectory: n_steps exceeds the full-record capacity of " +
                         std::to_string(max_steps) + " steps");
  CoupledTrajectory t;
  t.dist_spec = dist.spec_string();
  t.beta = params.beta;
  t.eps = params.eps;
  t.steps = n_steps;
  t.seed = seed;
  t.u.reserve(n_steps);
  t.z.reserve(n_steps);
  t.dy.reserve(n_steps);
  t.d_slow.reserve(n_steps);
  t.d_fast.reserve(n_steps);
  t.k_sync.reserve(n_steps);
  t.below_width.reserve(n_steps);
  t.discovered_slow.reserve(n_steps);
  t.discovered_fast.reserve(n_steps);

  CouplingProcess proc(dist, params, seed);
  for (std::int64_t i = 0; i < n_steps; ++i) {
    const StepOutcome s = proc.step();
    t.u.push_back(s.u);
    t.z.push_back(s.z);
    t.dy.push_back(s.dy);
    t.d_slow.push_back(s.d_slow);
    t.d_fast.push_back(s.d_fast);
    t.k_sync.push_back(s.k_sync);
    t.below_width.push_back(s.below_width);
    t.discovered_slow.push_back(s.discovered_slow);
    t.discovered_fast.push_back(s.discovered_fast);
  }
  t.delta = proc.delta();
  return t;
}

}  // namespace gwlab
