#include "gwlab/bounds.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace gwlab {

StepProbs pqeps(int i, double beta, double eps) {
  if (i < 1) throw std::invalid_argument("pqeps: i must be >= 1");
  if (!(beta > 0) || eps < 0) throw std::invalid_argument("pqeps: beta > 0, eps >= 0 required");
  return {child_step_prob(i, beta), parent_step_prob(i, beta), decouple_width(i, beta, eps)};
}

LemmaBounds lemma_bounds(const OffspringDistribution& dist, double beta, double eps, int k,
                         std::optional<double> prob_b_k) {
  if (k < 1) throw std::invalid_argument("lemma_bounds: k must be >= 1");
  const double p1 = child_step_prob(1, beta);
  const double q1 = parent_step_prob(1, beta);
  const double p_inf = never_return_prob_bound(beta);
  const double mean_eps = dist.mean_decouple_width(beta, eps);
  const double x = 27.0 * q1 / 4.0;

  LemmaBounds b;
  b.lower_once = p1 * p1 * p1 * p1 * mean_eps;
  b.tail_k = std::pow(x, k);
  const double pb = prob_b_k.value_or(b.tail_k);
  if (prob_b_k && (*prob_b_k < 0 || *prob_b_k > 1))
    throw std::invalid_argument("lemma_bounds: prob_b_k must lie in [0,1]");
  b.upper_k = (mean_eps / (q1 * p_inf)) * k * (3.0 * k + 1.0) * pb;
  return b;
}

double tail_series_closed(double x) {
  const double om = 1.0 - x;
  return 15.0 * x * x / (om * om * om * om);
}

double tail_series_direct(double x) {
  if (!(x < 1.0)) throw std::domain_error("tail_series_direct: requires x < 1");
  if (x <= 0.0) return 0.0;
  double sum = 0.0;
  double xk = x * x * x;  // k = 3 is the first nonzero term
  for (int k = 3;; ++k) {
    const double term = (3.0 * k + 1.0) * k * (k - 2.0) * xk;
    sum += term;
    if (term < 1e-14 * sum && k > 8) break;
    if (k > 100000) break;
    xk *= x;
  }
  return sum;
}

std::optional<double> C_of_beta(double beta, int d, CVariant variant) {
  if (d < 1) throw std::invalid_argument("C_of_beta: d must be >= 1");
  const double b = d * beta;
  if (!(b > 1.0)) throw std::domain_error("C_of_beta: requires d*beta > 1");
  const double p1 = b / (b + 1.0);
  const double q1 = 1.0 / (b + 1.0);
  const double p_inf = (b / (b + 1.0)) * ((b - 1.0) / (b + 1.0));
  const double x = 27.0 * q1 / 4.0;
  if (x >= 1.0) return std::nullopt;
  const double series = variant == CVariant::closed_form ? tail_series_closed(x) : tail_series_direct(x);
  return series / (p1 * p1 * p1 * p1 * p_inf * q1);
}

ThresholdResult threshold_search(int d, CVariant variant) {
  if (d < 1) throw std::invalid_argument("threshold_search: d must be >= 1");
  // Scan upward from the first beta with a convergent tail to bracket the
  // crossing, then bisect.
  const double beta_min = (27.0 / 4.0) / d + 1e-9;  // x < 1 from here on
  double lo = beta_min;
  double hi = beta_min * 1.05;
  const auto value = [&](double beta) {
    const auto c = C_of_beta(beta, d, variant);
    return c ? *c : std::numeric_limits<double>::infinity();
  };
  while (value(hi) >= 1.0) {
    lo = hi;
    hi *= 1.3;
    if (hi > 1e9) throw std::runtime_error("threshold_search: no crossing found");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-9; ++it) {
    const double mid = 0.5 * (lo + hi);
    (value(mid) < 1.0 ? hi : lo) = mid;
  }
  ThresholdResult r;
  r.beta_star = hi;
  const double tol = 1e-6;
  r.certified = value(r.beta_star + tol) < 1.0 && value(r.beta_star - tol) >= 1.0;
  return r;
}

double theorem3_rate(const OffspringDistribution& dist, double beta) {
  if (!(beta > 1.0)) throw std::invalid_argument("theorem3_rate: beta must be > 1");
  return 2.0 * dist.mean_inverse() / (beta * beta);
}

BoundReport compute_bounds(const OffspringDistribution& dist, double beta, double eps, int d) {
  const double b = d * beta;
  if (!(b > 1.0)) throw std::domain_error("compute_bounds: requires d*beta > 1");
  BoundReport r;
  r.beta = beta;
  r.eps = eps;
  r.d = d;
  r.p1 = b / (b + 1.0);
  r.q1 = 1.0 / (b + 1.0);
  r.p_inf = (b / (b + 1.0)) * ((b - 1.0) / (b + 1.0));
  // Lemma quantities follow the same d-substitution as the aggregate bound,
  // so they stay finite for beta < 1 as long as d*beta > 1.
  r.mean_eps = dist.mean_decouple_width(beta, eps);
  r.lemma1_lower = std::pow(r.p1, 4) * r.mean_eps;
  r.lemma2_prefactor = r.mean_eps / (r.q1 * r.p_inf);
  r.tail_base = 27.0 * r.q1 / 4.0;
  r.tail_divergent = r.tail_base >= 1.0;
  if (!r.tail_divergent) {
    r.series_closed = tail_series_closed(r.tail_base);
    r.series_direct = tail_series_direct(r.tail_base);
    const double pre = 1.0 / (std::pow(r.p1, 4) * r.p_inf * r.q1);
    r.c_closed = pre * r.series_closed;
    r.c_direct = pre * r.series_direct;
  }
  return r;
}

}  // namespace gwlab
