#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "gwlab/offspring.hpp"
#include "gwlab/rates.hpp"
#include "gwlab/rng.hpp"

using namespace gwlab;

TEST_CASE("construction and cached moments") {
  const auto point = OffspringDistribution::from_atoms({{2, 1.0}});
  CHECK(point.mean() == doctest::Approx(2.0));
  CHECK(point.mean_inverse() == doctest::Approx(0.5));
  CHECK(point.min_degree() == 2);

  const auto two = OffspringDistribution::from_atoms({{1, 0.5}, {2, 0.5}});
  CHECK(two.mean() == doctest::Approx(1.5));
  CHECK(two.mean_inverse() == doctest::Approx(0.75));
  CHECK(two.min_degree() == 1);

  // atoms arrive unsorted, weights slightly off 1 -> renormalized
  const auto off = OffspringDistribution::from_atoms({{3, 0.5 + 2e-10}, {1, 0.5}});
  double total = 0;
  for (const auto& a : off.atoms()) total += a.weight;
  CHECK(std::abs(total - 1.0) < 1e-12);
  CHECK(off.atoms().front().count == 1);
}

TEST_CASE("construction errors") {
  CHECK_THROWS_AS(OffspringDistribution::from_atoms({}), std::invalid_argument);
  CHECK_THROWS_AS(OffspringDistribution::from_atoms({{0, 1.0}}), std::invalid_argument);
  CHECK_THROWS_AS(OffspringDistribution::from_atoms({{-2, 1.0}}), std::invalid_argument);
  CHECK_THROWS_AS(OffspringDistribution::from_atoms({{1, 0.0}}), std::invalid_argument);
  CHECK_THROWS_AS(OffspringDistribution::from_atoms({{1, 0.5}, {1, 0.5}}), std::invalid_argument);
  CHECK_THROWS_AS(OffspringDistribution::from_atoms({{1, 0.6}, {2, 0.6}}), std::invalid_argument);
  CHECK_THROWS_WITH_AS(OffspringDistribution::parse("0:1.0"),
                       "offspring spec: leaf atom forbidden (counts must be >= 1)",
                       std::invalid_argument);
}

TEST_CASE("text spec parsing") {
  const auto d = OffspringDistribution::parse("1:0.5,2:0.5");
  CHECK(d.pmf(1) == doctest::Approx(0.5));
  CHECK(d.pmf(2) == doctest::Approx(0.5));
  CHECK(OffspringDistribution::parse("const:3").min_degree() == 3);
  const auto u = OffspringDistribution::parse("uniform:1-3");
  CHECK(u.pmf(2) == doctest::Approx(1.0 / 3));
  CHECK_THROWS_AS(OffspringDistribution::parse("junk"), std::invalid_argument);
  CHECK_THROWS_AS(OffspringDistribution::parse("1:"), std::invalid_argument);
}

TEST_CASE("mean decouple width: hand values") {
  const auto ray = OffspringDistribution::constant(1);
  // single-child vertex at beta=1, eps=1: 1/2 - 1/3
  CHECK(ray.mean_decouple_width(1.0, 1.0) == doctest::Approx(1.0 / 6).epsilon(1e-12));
  CHECK(ray.mean_decouple_width(1.0, 0.0) == 0.0);

  const auto u12 = OffspringDistribution::parse("1:0.5,2:0.5");
  CHECK(u12.mean_decouple_width(1.0, 1.0) == doctest::Approx(3.0 / 20).epsilon(1e-12));
}

TEST_CASE("mean decouple width: monotone in eps, dominated by the min-degree term") {
  const auto dist = OffspringDistribution::parse("1:0.2,2:0.3,5:0.5");
  for (double beta : {1.5, 2.0, 10.0}) {
    double prev = 0.0;
    for (double eps = 0.25; eps <= 4.0; eps += 0.25) {
      const double v = dist.mean_decouple_width(beta, eps);
      CHECK(v > prev);
      prev = v;
      CHECK(v <= decouple_width(dist.min_degree(), beta, eps) + 1e-15);
    }
  }
  // equality holds only for a point mass
  const auto point = OffspringDistribution::constant(3);
  CHECK(point.mean_decouple_width(2.0, 1.0) ==
        doctest::Approx(decouple_width(3, 2.0, 1.0)).epsilon(1e-15));
}

TEST_CASE("large-bias scaling: beta^2 E[width]/eps -> E[1/Z]") {
  const auto dist = OffspringDistribution::parse("1:0.25,2:0.25,3:0.5");
  const double beta = 1e4, eps = 1.0;
  const double scaled = dist.mean_decouple_width(beta, eps) * beta * beta / eps;
  CHECK(std::abs(scaled / dist.mean_inverse() - 1.0) < 0.01);
}

TEST_CASE("sampling: determinism and law") {
  const auto point = OffspringDistribution::constant(3);
  std::mt19937_64 g(1);
  for (int i = 0; i < 100; ++i) CHECK(sample_offspring(point, g) == 3);

  const auto u12 = OffspringDistribution::parse("1:0.5,2:0.5");
  std::mt19937_64 a(99), b(99);
  for (int i = 0; i < 1000; ++i) CHECK(sample_offspring(u12, a) == sample_offspring(u12, b));

  std::mt19937_64 g2(2024);
  const int n = 1'000'000;
  int ones = 0;
  for (int i = 0; i < n; ++i) ones += sample_offspring(u12, g2) == 1;
  CHECK(std::abs(static_cast<double>(ones) / n - 0.5) < 0.002);
}
