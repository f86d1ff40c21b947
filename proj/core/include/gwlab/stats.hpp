#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace gwlab {

// Point estimate with standard error, sample count and a method tag.
struct Estimate {
  double value = 0;
  double se = 0;
  std::int64_t count = 0;
  std::string method;
};

struct Welford {
  std::int64_t n = 0;
  double mean = 0;
  double m2 = 0;

  void add(double x) {
    ++n;
    const double d = x - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (x - mean);
  }
  void merge(const Welford& o) {
    if (o.n == 0) return;
    if (n == 0) { *this = o; return; }
    const double d = o.mean - mean;
    const std::int64_t tot = n + o.n;
    mean += d * static_cast<double>(o.n) / static_cast<double>(tot);
    m2 += o.m2 + d * d * static_cast<double>(n) * static_cast<double>(o.n) / static_cast<double>(tot);
    n = tot;
  }
  double var_sample() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
  double se() const { return n > 0 ? std::sqrt(var_sample() / static_cast<double>(n)) : 0.0; }
  Estimate estimate(const char* tag) const { return {mean, se(), n, tag}; }
};

// Sums for a ratio estimator mean(x)/mean(y) with delta-method standard error.
struct RatioAccum {
  std::int64_t n = 0;
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;

  void add(double x, double y) {
    ++n;
    sx += x; sy += y;
    sxx += x * x; syy += y * y; sxy += x * y;
  }
  void merge(const RatioAccum& o) {
    n += o.n;
    sx += o.sx; sy += o.sy;
    sxx += o.sxx; syy += o.syy; sxy += o.sxy;
  }
  Estimate ratio(const char* tag) const {
    Estimate e{0, 0, n, tag};
    if (n == 0 || sy == 0) return e;
    const double nn = static_cast<double>(n);
    const double mx = sx / nn, my = sy / nn;
    const double r = mx / my;
    e.value = r;
    if (n > 1) {
      const double vx = (sxx - nn * mx * mx) / (nn - 1);
      const double vy = (syy - nn * my * my) / (nn - 1);
      const double cxy = (sxy - nn * mx * my) / (nn - 1);
      const double v = (vx - 2.0 * r * cxy + r * r * vy) / (my * my);
      e.se = v > 0 ? std::sqrt(v / nn) : 0.0;
    }
    return e;
  }
};

// Batch-means accumulator for ergodic averages of a correlated series.
// The point value uses every sample; the standard error uses completed batches.
struct BatchMeans {
  std::int64_t batch_size = 0;
  double cur_sum = 0;
  std::int64_t cur_n = 0;
  double total_sum = 0;
  std::int64_t total_n = 0;
  std::vector<double> means;

  explicit BatchMeans(std::int64_t bs = 0) : batch_size(bs) {}

  void add(double x) {
    total_sum += x;
    ++total_n;
    if (batch_size <= 0) return;
    cur_sum += x;
    if (++cur_n == batch_size) {
      means.push_back(cur_sum / static_cast<double>(batch_size));
      cur_sum = 0;
      cur_n = 0;
    }
  }
  // Replica merge: batch lists concatenate in replica order; partial batches drop.
  void merge(const BatchMeans& o) {
    total_sum += o.total_sum;
    total_n += o.total_n;
    means.insert(means.end(), o.means.begin(), o.means.end());
  }
  Estimate estimate(const char* tag) const {
    Estimate e{total_n > 0 ? total_sum / static_cast<double>(total_n) : 0.0, 0, total_n, tag};
    if (means.size() > 1) {
      Welford w;
      for (double m : means) w.add(m);
      e.se = w.se();
    }
    return e;
  }
};

// Wilson score interval for a binomial proportion.
inline std::pair<double, double> wilson_interval(std::int64_t k, std::int64_t n, double z = 1.959963984540054) {
  if (n <= 0) return {0.0, 1.0};
  const double nn = static_cast<double>(n);
  const double p = static_cast<double>(k) / nn;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / nn;
  const double center = (p + z2 / (2.0 * nn)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

inline double binom_se(std::int64_t k, std::int64_t n) {
  if (n <= 0) return 0.0;
  const double p = static_cast<double>(k) / static_cast<double>(n);
  return std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

// Upper-tail probability of a standard normal.
inline double normal_upper_p(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

}  // namespace gwlab
