#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gwlab/rng.hpp"

namespace gwlab {

// Finite-support offspring law of the tree: P[Z=k] for k >= 1 (no leaves).
// Immutable after construction; safe to share across threads.
class OffspringDistribution {
 public:
  struct Atom {
    int count = 0;
    double weight = 0;
  };

  OffspringDistribution() = default;

  // Validates and normalizes: counts >= 1 and distinct, weights > 0.
  // A total weight within 1e-9 of 1 is renormalized, anything further is rejected.
  static OffspringDistribution from_atoms(const std::vector<std::pair<int, double>>& pairs);
  static OffspringDistribution constant(int k);
  // Text forms: "k1:w1,k2:w2,...", "const:k", "uniform:a-b".
  static OffspringDistribution parse(std::string_view spec);

  const std::vector<Atom>& atoms() const { return atoms_; }
  bool valid() const { return !atoms_.empty(); }
  double mean() const { return mean_; }          // E[Z]
  double mean_inverse() const { return mean_inv_; }  // E[1/Z]
  int min_degree() const { return min_degree_; }
  int max_degree() const { return max_degree_; }
  double pmf(int k) const;

  // Inverse-cdf sampling kernel; u in [0,1).
  int quantile(double u) const;

  // E[decouple_width(Z, beta, eps)], the mean coupling slack over the law.
  double mean_decouple_width(double beta, double eps) const;

  std::string spec_string() const;

 private:
  std::vector<Atom> atoms_;
  std::vector<double> cum_;
  double mean_ = 0;
  double mean_inv_ = 0;
  int min_degree_ = 0;
  int max_degree_ = 0;
};

template <class Rng>
int sample_offspring(const OffspringDistribution& dist, Rng& gen) {
  return dist.quantile(uniform01(gen));
}

}  // namespace gwlab
