#pragma once

#include <optional>

#include "gwlab/offspring.hpp"
#include "gwlab/rates.hpp"

namespace gwlab {

struct StepProbs {
  double p = 0;    // per-child
  double q = 0;    // parent
  double eps = 0;  // decouple width
};

// Exact per-child / parent / width triple at a k-child vertex.
StepProbs pqeps(int i, double beta, double eps);

struct LemmaBounds {
  double lower_once = 0;    // lower bound on the single-return decoupling class
  double upper_k = 0;       // upper bound on the k-return class
  double tail_k = 0;        // geometric tail bound on the back-step count
};

// The three closed-form block bounds at (dist, beta, eps, k). When an
// empirical back-step probability is supplied it feeds the k-class upper
// bound; otherwise the geometric tail is substituted.
LemmaBounds lemma_bounds(const OffspringDistribution& dist, double beta, double eps, int k,
                         std::optional<double> prob_b_k = std::nullopt);

enum class CVariant { closed_form, direct };

// Series factor of the aggregate bound: the closed form 15 x^2 (1-x)^-4, and
// the directly summed sum_{k>=2} (3k+1) k (k-2) x^k it relaxes. The closed
// form does not equal the direct sum; both are computed and reported.
double tail_series_closed(double x);
double tail_series_direct(double x);  // converged to relative 1e-12

// Aggregate bound at effective bias d*beta; below 1 it certifies that the
// speed is increasing at beta for every eps > 0. Empty when the tail base
// 27 q_1 / 4 reaches 1 (series divergent).
std::optional<double> C_of_beta(double beta, int d = 1, CVariant variant = CVariant::closed_form);

struct ThresholdResult {
  double beta_star = 0;   // smallest beta with C(beta) < 1, to 1e-9
  bool certified = false; // C(beta_star + tol) < 1 <= C(beta_star - tol) checked
};
ThresholdResult threshold_search(int d = 1, CVariant variant = CVariant::closed_form);

// Leading-order growth rate of the speed gap per unit bias: 2 E[1/Z] / beta^2.
double theorem3_rate(const OffspringDistribution& dist, double beta);

// Everything above at one (beta, eps, d, dist), for reports.
struct BoundReport {
  double beta = 0, eps = 0;
  int d = 1;
  double p1 = 0, q1 = 0, p_inf = 0, mean_eps = 0;
  double lemma1_lower = 0;
  double lemma2_prefactor = 0;   // multiplies k(3k+1) P[|B|=k]
  double tail_base = 0;          // x = 27 q1 / 4
  bool tail_divergent = false;
  double series_closed = 0, series_direct = 0;
  double c_closed = 0, c_direct = 0;  // meaningful only when !tail_divergent
};
BoundReport compute_bounds(const OffspringDistribution& dist, double beta, double eps, int d = 1);

}  // namespace gwlab
