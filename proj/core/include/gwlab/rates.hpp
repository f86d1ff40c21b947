#pragma once

#include <stdexcept>
#include <vector>

namespace gwlab {

// Transition weights of a bias-beta walk at a vertex with k children:
// each child gets probability beta/(k*beta+1), the parent 1/(k*beta+1).
inline double child_step_prob(int k, double beta) { return beta / (k * beta + 1.0); }
inline double parent_step_prob(int k, double beta) { return 1.0 / (k * beta + 1.0); }

// Coupling slack at a k-child vertex: the parent-step probability lost when
// the bias is raised from beta to beta+eps. The joint step rule sends only
// the higher-bias walk forward on this sliver of the uniform.
inline double decouple_width(int k, double beta, double eps) {
  return parent_step_prob(k, beta) - parent_step_prob(k, beta + eps);
}

// Escape probability of a bias-b walk on the integers (never returns to its
// start), with the effective bias b = d*beta. Zero at d*beta == 1 (recurrent
// boundary). The exact value is the drift (b-1)/(b+1).
inline double never_return_prob_exact(double beta, int d = 1) {
  const double b = d * beta;
  if (b < 1.0) throw std::domain_error("never_return_prob_exact: requires d*beta >= 1");
  return (b - 1.0) / (b + 1.0);
}

// Closed-form constant the aggregate block bounds are built with. It carries
// an extra b/(b+1) factor and so understates the exact escape probability;
// every use divides by it, so the looseness only weakens the bounds, never
// their validity. Kept verbatim because the reference threshold (717) is
// calibrated to this constant. The simulation-side audits compare against
// both values and report the discrepancy.
inline double never_return_prob_bound(double beta, int d = 1) {
  const double b = d * beta;
  if (b < 1.0) throw std::domain_error("never_return_prob_bound: requires d*beta >= 1");
  return (b / (b + 1.0)) * ((b - 1.0) / (b + 1.0));
}

// Per-child-count step constants, cached so the hot loop avoids divisions.
struct StepRates {
  double q_base = 0;      // parent prob at bias beta
  double p_base = 0;      // per-child prob at bias beta
  double width = 0;       // decouple_width(k, beta, eps)
  double inv_p_base = 0;  // 1/p_base
  double inv_cell = 0;    // k/width (0 when width == 0)
};

class RateTable {
 public:
  RateTable(double beta, double eps) : beta_(beta), eps_(eps) {
    rows_.resize(2);
    fill(1);
    q1_ = rows_[1].q_base;
  }

  const StepRates& at(int k) {
    if (k >= static_cast<int>(rows_.size())) {
      const int old = static_cast<int>(rows_.size());
      rows_.resize(k + 1);
      for (int i = old; i <= k; ++i) fill(i);
    }
    return rows_[k];
  }

  double q1() const { return q1_; }
  double beta() const { return beta_; }
  double eps() const { return eps_; }

 private:
  void fill(int k) {
    StepRates& r = rows_[k];
    r.q_base = parent_step_prob(k, beta_);
    r.p_base = child_step_prob(k, beta_);
    r.width = decouple_width(k, beta_, eps_);
    r.inv_p_base = 1.0 / r.p_base;
    r.inv_cell = r.width > 0 ? k / r.width : 0.0;
  }

  double beta_, eps_;
  double q1_ = 0;
  std::vector<StepRates> rows_;
};

}  // namespace gwlab
