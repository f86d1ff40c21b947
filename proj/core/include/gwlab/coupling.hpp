#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gwlab/offspring.hpp"
#include "gwlab/rates.hpp"
#include "gwlab/stream.hpp"
#include "gwlab/tree.hpp"

namespace gwlab {

// The coupled pair of biases. The transient regime beta > 1 is required for
// the regeneration machinery; eps == 0 is allowed and makes the walks
// identical (useful for degenerate checks).
struct BiasParams {
  double beta;
  double eps;

  BiasParams(double beta_, double eps_);
  double upper() const { return beta + eps; }
};

// slow = bias beta, fast = bias beta+eps.
enum class Walk { slow, fast };

struct MoveDecision {
  bool to_parent = false;
  int child = 0;  // 1-based when !to_parent
};

// Joint step rule at a non-root vertex with k children, one shared uniform u.
//
// slow walk:  [0, q_k] -> parent;  (1-i*p_k, 1-(i-1)*p_k] -> child i.
// fast walk:  [0, w_k) -> child j on a k-way equal split (w_k = decouple width);
//             [w_k, q_k] -> parent;  same child slices as the slow walk above.
//
// Both walks use the slow-bias child slices, so while the environments agree
// the walks move together except on [0, w_k), where only the fast walk steps
// forward. The fast marginal is exact: p_k(beta) + w_k/k == p_k(beta+eps).
inline MoveDecision resolve_slow_move(double u, int k, const StepRates& r) {
  if (u <= r.q_base) return {true, 0};
  int i = 1 + static_cast<int>((1.0 - u) * r.inv_p_base);
  if (i < 1) i = 1;
  if (i > k) i = k;
  return {false, i};
}

inline MoveDecision resolve_fast_move(double u, int k, const StepRates& r) {
  if (u < r.width) {
    int j = 1 + static_cast<int>(u * r.inv_cell);
    if (j > k) j = k;
    return {false, j};
  }
  if (u <= r.q_base) return {true, 0};
  int i = 1 + static_cast<int>((1.0 - u) * r.inv_p_base);
  if (i < 1) i = 1;
  if (i > k) i = k;
  return {false, i};
}

// From the root every transition goes to a child; u picks the i-th of m equal
// sub-intervals of [0,1). Both walks apply the same rule, so they stay
// coupled at the root even when the integer walk steps down.
inline int resolve_root_child(double u, int m) {
  int i = 1 + static_cast<int>(u * m);
  if (i > m) i = m;
  return i;
}

// Explicit interval layout of the joint step rule at one vertex, for exactness
// checks and reports.
struct CouplingPartition {
  int k = 0;
  double beta = 0, eps = 0;
  double q_slow = 0;      // parent mass at bias beta
  double q_fast = 0;      // parent mass at bias beta+eps
  double width = 0;       // decouple width eps_k
  double child_slow = 0;  // per-child mass at bias beta (shared slices)
  double cell = 0;        // width/k, fast-only forward cells

  struct Interval {
    double lo, hi;
    int target;  // 0 = parent, j >= 1 = child j
  };

  std::vector<Interval> intervals(Walk w) const;
  double parent_measure(Walk w) const;
  double child_measure(Walk w, int child) const;
  double total_measure(Walk w) const;
};

CouplingPartition make_partition(int k, double beta, double eps);
CouplingPartition make_partition(int k, const BiasParams& params);

struct ProcessLimits {
  std::int64_t max_live_vertices = 1ll << 25;  // per tree
};

struct StepOutcome {
  std::int64_t time = 0;
  double u = 0;
  int z = 0;
  std::int8_t dy = 0;      // integer-walk increment
  std::int8_t d_slow = 0;  // depth increments
  std::int8_t d_fast = 0;
  bool discovered_slow = false;
  bool discovered_fast = false;
  bool desync = false;       // depth increments differ at this step
  bool below_width = false;  // u < decouple width of the slow walk's vertex
  std::int32_t k_sync = 0;   // child count at the slow walk's vertex before the step
};

// Drives the three walks off one uniform stream and one offspring stream.
// Each tree walk owns its own lazily grown tree; the environments are coupled
// only through the offspring draw shared per step index.
class CouplingProcess {
 public:
  CouplingProcess(const OffspringDistribution& dist, BiasParams params, std::uint64_t seed,
                  ProcessLimits limits = {});

  StepOutcome step();
  StepOutcome step_with(double u, int z);

  std::int64_t time() const { return time_; }
  std::int64_t y() const { return y_; }
  std::int64_t position(Walk w) const { return w == Walk::slow ? pos_slow_ : pos_fast_; }
  int depth(Walk w) const;
  bool decoupled() const { return decoupled_; }
  std::int64_t delta() const { return delta_; }  // -1 until the walks first diverge
  const LazyTree& tree(Walk w) const { return w == Walk::slow ? tree_slow_ : tree_fast_; }
  const BiasParams& params() const { return params_; }
  const OffspringDistribution& offspring() const { return dist_; }
  double q1() const { return rates_.q1(); }
  std::uint64_t seed() const { return stream_.master_seed(); }

  // Drops both trees below the vertices occupied at a confirmed regeneration.
  void prune(std::int64_t slow_keep, std::int64_t fast_keep);

 private:
  StepOutcome step_core(double u, int z);

  OffspringDistribution dist_;
  BiasParams params_;
  RateTable rates_;
  RandomnessStream stream_;
  int root_count_;  // step-0 offspring draw, shared by both roots
  LazyTree tree_slow_;
  LazyTree tree_fast_;
  std::int64_t pos_slow_ = 0;
  std::int64_t pos_fast_ = 0;
  std::int64_t y_ = 0;
  std::int64_t time_ = 0;
  bool decoupled_ = false;
  std::int64_t delta_ = -1;
};

// Full step-by-step record of a coupled run; the offline reference path for
// the regeneration detector and classifier.
struct CoupledTrajectory {
  std::string dist_spec;
  double beta = 0, eps = 0;
  std::int64_t steps = 0;
  std::uint64_t seed = 0;

  std::vector<double> u;
  std::vector<std::int32_t> z;
  std::vector<std::int8_t> dy, d_slow, d_fast;
  std::vector<std::int32_t> k_sync;
  std::vector<std::uint8_t> below_width, discovered_slow, discovered_fast;
  std::int64_t delta = -1;

  std::int64_t length() const { return static_cast<std::int64_t>(dy.size()); }
  std::vector<int> y_values() const;                // length()+1 values, y[0] = 0
  std::vector<int> depth_values(Walk w) const;      // length()+1 values, depth[0] = 0
};

CoupledTrajectory run_trajectory(const OffspringDistribution& dist, BiasParams params,
                                 std::int64_t n_steps, std::uint64_t seed,
                                 std::int64_t max_steps = 20'000'000);

}  // namespace gwlab
