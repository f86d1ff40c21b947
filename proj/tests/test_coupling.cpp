#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gwlab/coupling.hpp"
#include "gwlab/regen.hpp"
#include "gwlab/segments.hpp"

using namespace gwlab;

TEST_CASE("bias params guards") {
  CHECK_THROWS_AS(BiasParams(1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(BiasParams(2.0, -1.0), std::invalid_argument);
  CHECK(BiasParams(2.0, 0.0).upper() == 2.0);
}

TEST_CASE("driven steps: decoupling anatomy on a ray") {
  // beta=2, eps=2, single-child vertices: q1=1/3, width = 1/3 - 1/5 = 2/15.
  const auto ray = OffspringDistribution::constant(1);
  CouplingProcess proc(ray, BiasParams(2.0, 2.0), 42);

  // step 1 leaves the root (u=0.9 also moves Y up)
  auto s1 = proc.step_with(0.9, 1);
  CHECK(s1.dy == 1);
  CHECK(s1.d_slow == 1);
  CHECK(s1.d_fast == 1);
  CHECK(s1.discovered_slow);
  CHECK_FALSE(s1.desync);

  // u in [width, q1]: both walks step back, Y steps back, still coupled
  auto s2 = proc.step_with(0.9, 1);
  auto s3 = proc.step_with(0.25, 1);
  CHECK(s3.dy == -1);
  CHECK(s3.d_slow == -1);
  CHECK(s3.d_fast == -1);
  CHECK_FALSE(proc.decoupled());

  // u > q1: both forward
  auto s4 = proc.step_with(0.8, 1);
  CHECK(s4.d_slow == 1);
  CHECK(s4.d_fast == 1);

  // u < width: slow back, fast forward, gap jumps +2 and delta is set
  auto s5 = proc.step_with(0.05, 1);
  CHECK(s5.dy == -1);
  CHECK(s5.d_slow == -1);
  CHECK(s5.d_fast == 1);
  CHECK(s5.desync);
  CHECK(s5.below_width);
  CHECK(proc.decoupled());
  CHECK(proc.delta() == 5);
  CHECK(proc.depth(Walk::fast) - proc.depth(Walk::slow) == 2);
}

TEST_CASE("root step: equal child split while Y keeps its own threshold") {
  // two-child root, beta=2: q1 = 1/3
  const auto z2 = OffspringDistribution::constant(2);
  {
    CouplingProcess proc(z2, BiasParams(2.0, 1.0), 1);
    const auto s = proc.step_with(0.3, 2);  // u <= q1: Y down, walks still advance
    CHECK(s.dy == -1);
    CHECK(s.d_slow == 1);
    CHECK(s.d_fast == 1);
    CHECK_FALSE(s.desync);
    CHECK(proc.position(Walk::slow) == proc.position(Walk::fast));
  }
  {
    CouplingProcess proc(z2, BiasParams(2.0, 1.0), 1);
    const auto s = proc.step_with(0.8, 2);  // second half of [0,1): child 2, Y up
    CHECK(s.dy == 1);
    CHECK(s.d_slow == 1);
    CHECK(proc.depth(Walk::slow) == 1);
  }
}

TEST_CASE("eps = 0 keeps the walks identical forever") {
  const auto dist = OffspringDistribution::parse("1:0.4,2:0.4,3:0.2");
  const CoupledTrajectory t = run_trajectory(dist, BiasParams(1.5, 0.0), 20000, 7);
  CHECK(t.delta == -1);
  for (std::int64_t i = 0; i < t.length(); ++i) CHECK(t.d_slow[i] == t.d_fast[i]);
}

TEST_CASE("trajectories are bit-reproducible per seed") {
  const auto dist = OffspringDistribution::parse("1:0.5,3:0.5");
  const BiasParams params(2.0, 1.0);
  const CoupledTrajectory a = run_trajectory(dist, params, 5000, 99);
  const CoupledTrajectory b = run_trajectory(dist, params, 5000, 99);
  CHECK(a.u == b.u);
  CHECK(a.z == b.z);
  CHECK(a.dy == b.dy);
  CHECK(a.d_slow == b.d_slow);
  CHECK(a.d_fast == b.d_fast);
  CHECK(a.delta == b.delta);
  const CoupledTrajectory c = run_trajectory(dist, params, 5000, 100);
  CHECK(a.u != c.u);
}

TEST_CASE("integer-walk drift matches the closed form") {
  const auto ray = OffspringDistribution::constant(1);
  const CoupledTrajectory t = run_trajectory(ray, BiasParams(3.0, 0.0), 1'000'000, 31);
  double sum = 0;
  for (std::int64_t i = 0; i < t.length(); ++i) sum += t.dy[i];
  const double mean = sum / t.length();
  const double drift = 0.5;  // (beta-1)/(beta+1)
  const double sigma = std::sqrt((1.0 - drift * drift) / t.length());
  CHECK(std::abs(mean - drift) < 3 * sigma);
}

TEST_CASE("pathwise invariants hold on random runs") {
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    const auto dist = OffspringDistribution::parse("1:0.3,2:0.4,4:0.3");
    const CoupledTrajectory t = run_trajectory(dist, BiasParams(1.6, 0.8), 100'000, seed);
    const auto regens = detect_regens(t.y_values(), 1.6);
    const InvariantCounters c = audit_trajectory(t, regens);
    CHECK(c.total() == 0);

    // depth never falls behind the integer walk, cumulatively
    const auto y = t.y_values();
    const auto ds = t.depth_values(Walk::slow);
    const auto df = t.depth_values(Walk::fast);
    for (size_t i = 0; i < y.size(); i += 997) {
      CHECK(ds[i] >= y[i]);
      CHECK(df[i] >= y[i]);
    }
  }
}

TEST_CASE("both roots share the step-0 offspring draw") {
  const auto dist = OffspringDistribution::parse("1:0.5,6:0.5");
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    CouplingProcess proc(dist, BiasParams(2.0, 1.0), seed);
    CHECK(proc.tree(Walk::slow).count_of(0) == proc.tree(Walk::fast).count_of(0));
  }
}

TEST_CASE("capacity surfaces as an explicit error") {
  const auto ray = OffspringDistribution::constant(1);
  CHECK_THROWS_AS(run_trajectory(ray, BiasParams(2.0, 0.0), 100, 1, /*max_steps=*/50),
                  capacity_error);
  CHECK_THROWS_AS(run_trajectory(ray, BiasParams(2.0, 0.0), 0, 1), std::invalid_argument);

  ProcessLimits tiny;
  tiny.max_live_vertices = 4;
  CouplingProcess proc(ray, BiasParams(50.0, 0.0), 3, tiny);
  CHECK_THROWS_AS(
      [&] {
        for (int i = 0; i < 100; ++i) proc.step();
      }(),
      capacity_error);
}
