#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gwlab/harvest.hpp"
#include "gwlab/regen.hpp"
#include "gwlab/segments.hpp"

using namespace gwlab;

namespace {

std::vector<SegmentSummary> pipeline_summaries(const CoupledTrajectory& t, double beta,
                                               RegenConfig cfg, InvariantCounters* counters) {
  const auto regens = detect_regens(t.y_values(), beta, cfg);
  const auto segs = split_segments(t, regens);
  std::vector<SegmentSummary> out;
  out.reserve(segs.size());
  for (const Segment& s : segs) out.push_back(classify(s, beta, 0.0, counters));
  return out;
}

bool within_sigma(double actual, double expected, double se, double nsigma) {
  return std::abs(actual - expected) <= nsigma * se;
}

}  // namespace

TEST_CASE("classify: hand-built blocks") {
  // one forward step
  Segment fwd;
  fwd.start = 7;
  fwd.end = 8;
  fwd.gain_slow = 1;
  fwd.gain_fast = 1;
  fwd.steps = {{1, 1, 1, 0, 2, 0.9}};
  const SegmentSummary a = classify(fwd, 2.0, 1.0);
  CHECK_FALSE(a.decoupled);
  CHECK(a.b_count == 0);
  CHECK(a.length == 1);
  CHECK(a.delta_offset == -1);

  // forward, forward, decouple-back, forward, forward
  Segment d1;
  d1.start = 0;
  d1.end = 5;
  d1.gain_slow = 3;
  d1.gain_fast = 5;
  d1.steps = {{1, 1, 1, 0, 1, 0.9},
              {1, 1, 1, 0, 1, 0.9},
              {-1, -1, 1, 1, 1, 0.05},
              {1, 1, 1, 0, 1, 0.9},
              {1, 1, 1, 0, 1, 0.9}};
  InvariantCounters c;
  const SegmentSummary b = classify(d1, 2.0, 2.0, &c);
  CHECK(b.decoupled);
  CHECK(b.b_count == 1);
  CHECK(b.delta_offset == 3);
  CHECK(b.gain_fast - b.gain_slow == 2);
  CHECK(c.total() == 0);
}

TEST_CASE("eps = 0: every block is coupled, the gap is exactly zero") {
  const auto dist = OffspringDistribution::parse("1:0.5,2:0.5");
  const CoupledTrajectory t = run_trajectory(dist, BiasParams(2.0, 0.0), 50'000, 17);
  InvariantCounters c;
  const auto sums = pipeline_summaries(t, 2.0, {}, &c);
  REQUIRE(sums.size() > 100);
  CHECK(c.total() == 0);
  for (const auto& s : sums) CHECK_FALSE(s.decoupled);

  const GapEstimate g = gap_estimator(sums);
  CHECK(g.estimate.value == 0.0);
  CHECK(g.estimate.se == 0.0);

  const ProbTable table = prob_table(sums, 2.0);
  REQUIRE(table.find("C"));
  CHECK(table.find("C")->freq == 1.0);
}

TEST_CASE("estimator contracts on stub inputs") {
  std::vector<SegmentSummary> stub(50);
  for (auto& s : stub) {
    s.length = 1;
    s.gain_slow = 1;
    s.gain_fast = 1;
  }
  const Estimate v = speed_regen(stub, Walk::slow);
  CHECK(v.value == 1.0);
  CHECK(v.se == 0.0);
  CHECK_THROWS_AS(speed_regen(std::span<const SegmentSummary>{stub.data(), 1}, Walk::slow),
                  std::invalid_argument);
  CHECK_THROWS_AS(gap_estimator(std::span<const SegmentSummary>{}), std::invalid_argument);
  CHECK_THROWS_AS(prob_table(stub, 2.0), std::invalid_argument);  // < 100 summaries

  CoupledTrajectory all_fwd;
  all_fwd.dy.assign(2000, 1);
  all_fwd.d_slow.assign(2000, 1);
  all_fwd.d_fast.assign(2000, 1);
  const Estimate e = speed_ergodic(all_fwd, Walk::slow);
  CHECK(e.value == 1.0);
  CoupledTrajectory shorty;
  shorty.dy.assign(10, 1);
  shorty.d_slow.assign(10, 1);
  shorty.d_fast.assign(10, 1);
  CHECK_THROWS_AS(speed_ergodic(shorty, Walk::slow), std::invalid_argument);
}

TEST_CASE("streaming harvester reproduces the offline pipeline exactly") {
  const auto dist = OffspringDistribution::parse("1:0.5,2:0.5");
  const BiasParams params(2.0, 1.0);
  const std::uint64_t seed = 4242;
  const std::int64_t steps = 200'000;

  for (RegenMode mode : {RegenMode::strict, RegenMode::nonstrict}) {
    HarvestOptions opts;
    opts.regen.mode = mode;
    opts.max_steps = steps;
    opts.collect_summaries = true;
    const HarvestResult hr = harvest_segments(dist, params, opts, seed);

    const CoupledTrajectory t = run_trajectory(dist, params, steps, seed);
    InvariantCounters offline_counters;
    const auto offline = pipeline_summaries(t, params.beta, opts.regen, &offline_counters);

    REQUIRE(hr.summaries.size() == offline.size());
    REQUIRE(hr.summaries.size() > 1000);
    for (size_t i = 0; i < offline.size(); ++i) {
      CHECK(hr.summaries[i].start == offline[i].start);
      CHECK(hr.summaries[i].length == offline[i].length);
      CHECK(hr.summaries[i].b_count == offline[i].b_count);
      CHECK(hr.summaries[i].decoupled == offline[i].decoupled);
      CHECK(hr.summaries[i].delta_offset == offline[i].delta_offset);
      CHECK(hr.summaries[i].gain_slow == offline[i].gain_slow);
      CHECK(hr.summaries[i].gain_fast == offline[i].gain_fast);
    }
    CHECK(hr.counters.total() == 0);
    CHECK(offline_counters.total() == 0);

    // the nonstrict window obeys the 3b+1 bound on every sampled block
    if (mode == RegenMode::nonstrict) CHECK(hr.stats.window_violations(3) == 0);

    // i.i.d. sanity: first-half and second-half mean lengths agree to 4 sigma
    const size_t half = hr.summaries.size() / 2;
    Welford a, b;
    for (size_t i = 0; i < half; ++i) a.add(hr.summaries[i].length);
    for (size_t i = half; i < hr.summaries.size(); ++i) b.add(hr.summaries[i].length);
    const double se = std::sqrt(a.se() * a.se() + b.se() * b.se());
    CHECK(std::abs(a.mean - b.mean) < 4 * se);
  }
}

TEST_CASE("regeneration-ratio and ergodic speeds hit the closed forms") {
  {  // single-child tree at beta=3 reduces to the half-line walk: speed 1/2
    HarvestOptions opts;
    opts.max_steps = 1'000'000;
    const HarvestResult r =
        harvest_segments(OffspringDistribution::constant(1), BiasParams(3.0, 0.0), opts, 8);
    const Estimate reg = r.stats.speed(Walk::slow);
    const Estimate erg = r.ergodic_slow.estimate("erg");
    CHECK(within_sigma(reg.value, 0.5, reg.se, 3));
    CHECK(within_sigma(erg.value, 0.5, erg.se, 3));
    const double comb = std::sqrt(reg.se * reg.se + erg.se * erg.se);
    CHECK(within_sigma(reg.value, erg.value, comb, 3));
    // renewal density of regeneration times is (p-q)^2, so the mean block
    // length is its inverse: 4 at beta=3
    const Estimate len = r.stats.mean_length();
    CHECK(within_sigma(len.value, 4.0, len.se, 3));
  }
  {  // two-child tree at beta=2: effective bias 4, speed 3/5
    HarvestOptions opts;
    opts.max_steps = 1'000'000;
    const HarvestResult r =
        harvest_segments(OffspringDistribution::constant(2), BiasParams(2.0, 0.0), opts, 9);
    const Estimate reg = r.stats.speed(Walk::slow);
    CHECK(within_sigma(reg.value, 0.6, reg.se, 3));
  }
}

TEST_CASE("rejection acceptance matches the exact never-return probability") {
  // The acceptance frequency is the zero-time regeneration probability. It
  // matches the drift (beta-1)/(beta+1) and sits measurably above the
  // closed-form bound constant, which carries an extra beta/(beta+1) factor;
  // both comparisons are asserted so the discrepancy stays on record.
  for (double beta : {2.0, 3.0, 5.0}) {
    const ZeroSrCounts y_only = zero_sr_trials(beta, 100'000, 77);
    const Estimate rate = y_only.rate();
    CHECK(within_sigma(rate.value, never_return_prob_exact(beta), rate.se, 3));
    CHECK(rate.value > never_return_prob_bound(beta) + 10 * rate.se);
  }

  const RejectionResult rr =
      rejection_sample(OffspringDistribution::constant(1), BiasParams(2.0, 1.0), {}, 20'000, 78);
  const Estimate full = rr.acceptance_rate();
  CHECK(within_sigma(full.value, 1.0 / 3, full.se, 3));
  CHECK(rr.counters.total() == 0);
  CHECK(rr.stats.count() == rr.accepted);
}

TEST_CASE("rejection-sampled and extracted block laws agree cell-wise") {
  const auto dist = OffspringDistribution::parse("1:0.5,2:0.5");
  const BiasParams params(5.0, 1.0);

  HarvestOptions opts;
  opts.target_segments = 50'000;
  const HarvestResult ex = harvest_segments(dist, params, opts, 101);
  const RejectionResult rj = rejection_sample(dist, params, {}, 60'000, 102);
  REQUIRE(rj.accepted > 10'000);

  const auto cell = [&](const SegmentStats& s, int k, bool coupled) {
    return coupled ? s.prob_coupled() : s.prob_decoupled(k);
  };
  for (int k = 0; k <= 6; ++k) {
    const bool coupled = k == 0;
    const Estimate a = cell(ex.stats, k, coupled);
    const Estimate b = cell(rj.stats, k, coupled);
    const double n1 = static_cast<double>(a.count), n2 = static_cast<double>(b.count);
    const double pooled = (a.value * n1 + b.value * n2) / (n1 + n2);
    const double se = std::sqrt(std::max(pooled * (1 - pooled), 1e-12) * (1 / n1 + 1 / n2));
    CHECK(std::abs(a.value - b.value) <= 4 * se);
  }
}

TEST_CASE("unconditioned back-step tail is geometric") {
  const BSample bs = sample_b_counts(10.0, 100'000, 303);
  const double x = 27.0 / 44.0;
  for (int k = 2; k <= 6; ++k) {
    const Estimate e = bs.prob(k);
    CHECK(e.value <= std::pow(x, k) + 3 * e.se);
  }
  // a first regeneration with no back-steps forces a monotone prefix, so
  // P[|B|=0] is the exact escape probability
  const Estimate b0 = bs.prob(0);
  CHECK(within_sigma(b0.value, never_return_prob_exact(10.0), b0.se, 3));
}

TEST_CASE("lemma audit passes at moderate scale") {
  const auto z2 = OffspringDistribution::constant(2);
  HarvestOptions opts;
  opts.target_segments = 200'000;
  const HarvestResult r = harvest_segments(z2, BiasParams(10.0, 1.0), opts, 55);
  const BSample bs = sample_b_counts(10.0, 200'000, 56);
  const AuditReport audit = lemma_audit(r.stats, bs, 10.0, 1.0, z2);
  CHECK(audit.all_pass());
  REQUIRE(audit.find("decouple_once_lower"));
  CHECK(audit.find("decouple_once_lower")->bound ==
        doctest::Approx(std::pow(10.0 / 11, 4) * (2.0 / 483)).epsilon(1e-12));
  // strict mode: the 3|B|+1 window has violations, the 4|B|+1 window none
  CHECK(r.stats.window_violations(3) > 0);
  CHECK(r.stats.window_violations(4) == 0);
  CHECK(r.counters.total() == 0);
}

TEST_CASE("structural counters stay clean on a mixed law") {
  HarvestOptions opts;
  opts.target_segments = 20'000;
  opts.collect_summaries = true;
  const HarvestResult r = harvest_segments(OffspringDistribution::parse("uniform:1-3"),
                                           BiasParams(10.0, 1.0), opts, 91);
  CHECK(r.counters.total() == 0);
  bool saw_decoupled = false;
  for (const auto& s : r.summaries) {
    if (s.decoupled) {
      saw_decoupled = true;
      CHECK(s.delta_offset >= 1);
      CHECK(s.gain_fast - s.gain_slow >= 4 - 2 * s.b_count);
    } else {
      CHECK(s.gain_fast == s.gain_slow);
    }
  }
  CHECK(saw_decoupled);
}

TEST_CASE("large-bias rate report") {
  const auto z2 = OffspringDistribution::constant(2);
  HarvestOptions opts;
  opts.target_segments = 500'000;
  const HarvestResult r = harvest_segments(z2, BiasParams(100.0, 10.0), opts, 202);
  const RateReport rep = rate_check(r.stats, 100.0, 10.0, z2);
  CHECK(rep.target_rate == doctest::Approx(1e-4).epsilon(1e-12));
  CHECK(rep.pass_rate);
  CHECK(rep.pass_d1);
  CHECK(rep.pass_tau);
}
