#include "gwlab/segments.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <stdexcept>

#include "gwlab/rates.hpp"

namespace gwlab {

std::int64_t InvariantCounters::total() const {
  return domination + gap_ledger + delta_jump + delta_not_backstep + delta_width +
         coupled_gain_mismatch + dk_gap_bound + section4_pathwise + super_regen;
}

void InvariantCounters::merge(const InvariantCounters& o) {
  domination += o.domination;
  gap_ledger += o.gap_ledger;
  delta_jump += o.delta_jump;
  delta_not_backstep += o.delta_not_backstep;
  delta_width += o.delta_width;
  coupled_gain_mismatch += o.coupled_gain_mismatch;
  dk_gap_bound += o.dk_gap_bound;
  section4_pathwise += o.section4_pathwise;
  super_regen += o.super_regen;
}

SegmentSummary classify(const Segment& seg, double beta, double eps, InvariantCounters* counters) {
  (void)beta;
  (void)eps;
  SegmentSummary s;
  s.start = seg.start;
  s.length = static_cast<std::int32_t>(seg.length());
  s.gain_slow = seg.gain_slow;
  s.gain_fast = seg.gain_fast;
  for (size_t i = 0; i < seg.steps.size(); ++i) {
    const SegmentStep& st = seg.steps[i];
    if (st.dy < 0) ++s.b_count;
    if (st.d_slow != st.d_fast && s.delta_offset < 0) {
      s.delta_offset = static_cast<std::int32_t>(i) + 1;
      s.decoupled = true;
      if (counters) {
        if (st.d_fast - st.d_slow != 2) ++counters->delta_jump;
        if (st.dy >= 0) ++counters->delta_not_backstep;
        if (!st.below_width) ++counters->delta_width;
      }
    }
  }
  if (counters) {
    const int gap = s.gain_fast - s.gain_slow;
    if (!s.decoupled && gap != 0) ++counters->coupled_gain_mismatch;
    if (s.decoupled && gap < 4 - 2 * s.b_count) ++counters->dk_gap_bound;
    const int lower = s.decoupled ? 4 - 2 * s.b_count : 0;
    if (gap < lower) ++counters->section4_pathwise;
  }
  return s;
}

InvariantCounters audit_trajectory(const CoupledTrajectory& traj,
                                   const std::vector<std::int64_t>& regen_times) {
  InvariantCounters c;
  const std::int64_t n = traj.length();
  for (std::int64_t i = 0; i < n; ++i) {
    if (traj.d_slow[i] < traj.dy[i] || traj.d_fast[i] < traj.dy[i]) ++c.domination;
    const int jump = traj.d_fast[i] - traj.d_slow[i];
    if (traj.dy[i] > 0 && jump != 0) ++c.gap_ledger;
    if (jump != -2 && jump != 0 && jump != 2) ++c.gap_ledger;
    // Coupling tightness: until the first divergence (inclusive), a step
    // diverges exactly when the uniform lands in the decouple sliver.
    if (traj.delta < 0 || i < traj.delta) {
      const bool desync = traj.d_slow[i] != traj.d_fast[i];
      if (desync != static_cast<bool>(traj.below_width[i])) ++c.delta_width;
    }
  }
  if (traj.delta > 0) {
    const size_t j = static_cast<size_t>(traj.delta - 1);
    if (traj.d_fast[j] - traj.d_slow[j] != 2) ++c.delta_jump;
    if (traj.dy[j] >= 0) ++c.delta_not_backstep;
  }

  // Super-regeneration transfer: past a confirmed time, neither tree walk ever
  // returns to the depth it held there.
  const auto ds = traj.depth_values(Walk::slow);
  const auto df = traj.depth_values(Walk::fast);
  std::vector<int> min_after_s(ds.size()), min_after_f(df.size());
  int run_s = INT_MAX, run_f = INT_MAX;
  for (std::int64_t t = n; t >= 0; --t) {
    min_after_s[t] = run_s;
    min_after_f[t] = run_f;
    run_s = std::min(run_s, ds[t]);
    run_f = std::min(run_f, df[t]);
  }
  for (std::int64_t t : regen_times) {
    if (t < n && min_after_s[t] <= ds[t]) ++c.super_regen;
    if (t < n && min_after_f[t] <= df[t]) ++c.super_regen;
  }
  return c;
}

void SegmentStats::add(const SegmentSummary& s) {
  ++n_;
  const double len = s.length;
  length_.add(len);
  speed_slow_.add(s.gain_slow, len);
  speed_fast_.add(s.gain_fast, len);
  const double gap = s.gain_fast - s.gain_slow;
  gap_.add(gap);
  const double lower = s.decoupled ? 4.0 - 2.0 * s.b_count : 0.0;
  paired_.add(gap - lower);
  if (s.decoupled)
    ++dk_counts_[s.b_count];
  else
    ++c_count_;
  ++b_counts_[s.b_count];
  auto& mt = max_tau_by_b_[s.b_count];
  mt = std::max<std::int64_t>(mt, s.length);
  if (s.length > 3 * s.b_count + 1) ++window3_;
  if (s.length > 4 * s.b_count + 1) ++window4_;
}

void SegmentStats::merge(const SegmentStats& o) {
  n_ += o.n_;
  c_count_ += o.c_count_;
  for (const auto& [k, v] : o.dk_counts_) dk_counts_[k] += v;
  for (const auto& [k, v] : o.b_counts_) b_counts_[k] += v;
  for (const auto& [k, v] : o.max_tau_by_b_) {
    auto& mt = max_tau_by_b_[k];
    mt = std::max(mt, v);
  }
  speed_slow_.merge(o.speed_slow_);
  speed_fast_.merge(o.speed_fast_);
  gap_.merge(o.gap_);
  paired_.merge(o.paired_);
  length_.merge(o.length_);
  window3_ += o.window3_;
  window4_ += o.window4_;
}

Estimate SegmentStats::speed(Walk w) const {
  return (w == Walk::slow ? speed_slow_ : speed_fast_).ratio("regen-ratio");
}

Estimate SegmentStats::mean_length() const { return length_.estimate("mean-length"); }

Estimate SegmentStats::gap() const { return gap_.estimate("segment-gap"); }

double SegmentStats::gap_one_sided_p() const {
  const Estimate e = gap();
  if (e.se <= 0) return e.value > 0 ? 0.0 : 1.0;
  return normal_upper_p(e.value / e.se);
}

Estimate SegmentStats::prob_decoupled(int k) const {
  const auto it = dk_counts_.find(k);
  const std::int64_t c = it == dk_counts_.end() ? 0 : it->second;
  return {n_ > 0 ? static_cast<double>(c) / static_cast<double>(n_) : 0.0, binom_se(c, n_), n_,
          "frequency"};
}

Estimate SegmentStats::prob_coupled() const {
  return {n_ > 0 ? static_cast<double>(c_count_) / static_cast<double>(n_) : 0.0,
          binom_se(c_count_, n_), n_, "frequency"};
}

Estimate SegmentStats::prob_b(int k) const {
  const auto it = b_counts_.find(k);
  const std::int64_t c = it == b_counts_.end() ? 0 : it->second;
  return {n_ > 0 ? static_cast<double>(c) / static_cast<double>(n_) : 0.0, binom_se(c, n_), n_,
          "frequency"};
}

Estimate SegmentStats::section4_paired() const { return paired_.estimate("paired-gap-slack"); }

std::int64_t SegmentStats::window_violations(int w) const {
  if (w == 3) return window3_;
  if (w == 4) return window4_;
  throw std::invalid_argument("window_violations: only coefficients 3 and 4 are tracked");
}

SegmentStats fold(std::span<const SegmentSummary> summaries) {
  SegmentStats s;
  for (const SegmentSummary& x : summaries) s.add(x);
  return s;
}

Estimate speed_regen(std::span<const SegmentSummary> summaries, Walk w) {
  if (summaries.size() < 2) throw std::invalid_argument("speed_regen: need at least 2 segments");
  return fold(summaries).speed(w);
}

GapEstimate gap_estimator(std::span<const SegmentSummary> summaries) {
  if (summaries.empty()) throw std::invalid_argument("gap_estimator: empty input");
  const SegmentStats s = fold(summaries);
  return {s.gap(), s.gap_one_sided_p()};
}

Estimate speed_ergodic(const CoupledTrajectory& traj, Walk w, int n_batches) {
  const std::int64_t n = traj.length();
  if (n < 1000) throw std::invalid_argument("speed_ergodic: trajectory shorter than 1000 steps");
  if (n_batches < 20) n_batches = 20;
  BatchMeans bm(std::max<std::int64_t>(1, n / n_batches));
  const auto& d = w == Walk::slow ? traj.d_slow : traj.d_fast;
  for (std::int64_t i = 0; i < n; ++i) bm.add(d[i]);
  return bm.estimate("ergodic-batch-means");
}

const ProbRow* ProbTable::find(const std::string& name) const {
  for (const ProbRow& r : rows)
    if (r.name == name) return &r;
  return nullptr;
}

ProbTable prob_table(const SegmentStats& stats, double beta) {
  if (stats.count() < 100) throw std::invalid_argument("prob_table: need at least 100 summaries");
  ProbTable t;
  t.n = stats.count();
  auto push = [&](const std::string& name, std::int64_t count) {
    const auto [lo, hi] = wilson_interval(count, t.n);
    t.rows.push_back(
        {name, static_cast<double>(count) / static_cast<double>(t.n), lo, hi, count, false});
  };
  push("C", stats.coupled_count());
  int kmax = 0;
  for (const auto& [k, c] : stats.decoupled_counts()) {
    push("D_" + std::to_string(k), c);
    kmax = std::max(kmax, k);
  }
  // Analytic remainder past the largest observed class, from the geometric
  // tail of the back-step count over the escape probability.
  const double x = 27.0 * parent_step_prob(1, beta) / 4.0;
  if (x < 1.0 && beta > 1.0) {
    const double tail =
        std::pow(x, kmax + 1) / (1.0 - x) / never_return_prob_bound(beta);
    t.rows.push_back({"D_tail_bound[k>" + std::to_string(kmax) + "]", tail, 0, 0, 0, true});
  }
  for (const auto& [k, c] : stats.b_counts()) push("B_" + std::to_string(k), c);
  return t;
}

ProbTable prob_table(std::span<const SegmentSummary> summaries, double beta) {
  return prob_table(fold(summaries), beta);
}

Estimate BSample::prob(int k) const {
  const auto it = counts.find(k);
  const std::int64_t c = it == counts.end() ? 0 : it->second;
  return {n > 0 ? static_cast<double>(c) / static_cast<double>(n) : 0.0, binom_se(c, n), n,
          "frequency"};
}

bool AuditReport::all_pass() const {
  for (const AuditRow& r : rows)
    if (r.verdict == "VIOLATION") return false;
  return true;
}

const AuditRow* AuditReport::find(const std::string& name) const {
  for (const AuditRow& r : rows)
    if (r.name == name) return &r;
  return nullptr;
}

AuditReport lemma_audit(const SegmentStats& stats, const BSample& b_sample, double beta,
                        double eps, const OffspringDistribution& dist) {
  AuditReport rep;
  const double p1 = child_step_prob(1, beta);
  const double q1 = parent_step_prob(1, beta);
  const double p_inf = never_return_prob_bound(beta);
  const double mean_width = dist.mean_decouple_width(beta, eps);
  const double x = 27.0 * q1 / 4.0;

  {  // lower bound on the single-return decoupling class
    const Estimate d1 = stats.prob_decoupled(1);
    AuditRow r;
    r.name = "decouple_once_lower";
    r.empirical = d1.value;
    r.se = d1.se;
    r.bound = p1 * p1 * p1 * p1 * mean_width;
    r.n = d1.count;
    r.margin_sigma = d1.se > 0 ? (d1.value - r.bound) / d1.se
                               : (d1.value >= r.bound ? 0.0 : -INFINITY);
    r.verdict = r.empirical >= r.bound - 3.0 * r.se ? "pass" : "VIOLATION";
    if (eps == 0 && r.bound == 0) r.verdict = "pass";
    rep.rows.push_back(r);
  }

  // per-class upper bounds, k >= 2
  const double prefactor = mean_width / (q1 * p_inf);
  for (const auto& [k, count] : stats.decoupled_counts()) {
    if (k < 2) continue;
    (void)count;
    const Estimate dk = stats.prob_decoupled(k);
    const Estimate bk = b_sample.prob(k);
    AuditRow r;
    r.name = "decouple_k_upper[" + std::to_string(k) + "]";
    r.empirical = dk.value;
    r.se = dk.se;
    r.n = dk.count;
    const double coeff = prefactor * k * (3.0 * k + 1.0);
    double bound_se = 0;
    if (bk.count > 0 && bk.value > 0) {
      r.bound = coeff * bk.value;
      bound_se = coeff * bk.se;
    } else {
      r.bound = coeff * std::pow(x, k);  // analytic tail substituted
    }
    const double comb = std::sqrt(dk.se * dk.se + bound_se * bound_se);
    r.margin_sigma = comb > 0 ? (r.bound - dk.value) / comb : 0.0;
    r.verdict = dk.value <= r.bound + 3.0 * comb ? "pass" : "VIOLATION";
    rep.rows.push_back(r);
  }

  // geometric tail of the back-step count, unconditioned
  for (int k = 2; k <= 6; ++k) {
    const Estimate bk = b_sample.prob(k);
    AuditRow r;
    r.name = "b_tail[" + std::to_string(k) + "]";
    r.empirical = bk.value;
    r.se = bk.se;
    r.bound = std::pow(x, k);
    r.n = bk.count;
    r.margin_sigma = bk.se > 0 ? (r.bound - bk.value) / bk.se : INFINITY;
    r.verdict = bk.value <= r.bound + 3.0 * bk.se ? "pass" : "VIOLATION";
    rep.rows.push_back(r);
  }

  {  // aggregate gap inequality, paired per block
    const Estimate pe = stats.section4_paired();
    AuditRow r;
    r.name = "aggregate_gap";
    r.empirical = pe.value;
    r.se = pe.se;
    r.bound = 0.0;
    r.n = pe.count;
    r.margin_sigma = pe.se > 0 ? pe.value / pe.se : (pe.value >= 0 ? INFINITY : -INFINITY);
    r.verdict = pe.value >= -4.0 * pe.se ? "pass" : "VIOLATION";
    rep.rows.push_back(r);
  }

  for (int w : {3, 4}) {  // length windows; asserted per mode only after the oracle
    AuditRow r;
    r.name = "window[w=" + std::to_string(w) + "]";
    r.violations = stats.window_violations(w);
    r.n = stats.count();
    r.empirical = r.n > 0 ? static_cast<double>(r.violations) / static_cast<double>(r.n) : 0.0;
    r.verdict = "info";
    rep.rows.push_back(r);
  }
  return rep;
}

RateReport rate_check(const SegmentStats& stats, double beta, double eps,
                      const OffspringDistribution& dist) {
  RateReport r;
  r.mean_tau = stats.mean_length();
  r.d1_prob = stats.prob_decoupled(1);
  r.mean_width = dist.mean_decouple_width(beta, eps);

  // Speed gap over the common denominator: mean block gap / mean block length.
  const Estimate gap = stats.gap();
  const Estimate len = stats.mean_length();
  Estimate per_eps;
  per_eps.count = stats.count();
  per_eps.method = "gap-ratio";
  if (eps > 0 && len.value > 0) {
    per_eps.value = gap.value / len.value / eps;
    per_eps.se = gap.se / len.value / eps;  // length variance is second order here
  }
  r.rate_per_eps = per_eps;
  r.target_rate = 2.0 * dist.mean_inverse() / (beta * beta);
  r.rate_ratio = r.target_rate > 0 ? per_eps.value / r.target_rate : 0.0;
  r.d1_ratio = r.mean_width > 0 ? r.d1_prob.value / r.mean_width : 0.0;
  r.pass_rate = std::abs(r.rate_ratio - 1.0) <= 0.30;
  r.pass_d1 = std::abs(r.d1_ratio - 1.0) <= 0.15;
  r.pass_tau = r.mean_tau.value >= 1.0 && r.mean_tau.value <= 1.05;
  return r;
}

std::int64_t EnumTable::window_violations(int w) const {
  std::int64_t v = 0;
  for (const auto& [key, count] : hist)
    if (key.second > w * key.first + 1) v += count;
  return v;
}

const EnumRow* EnumTable::find(int b) const {
  for (const EnumRow& r : rows)
    if (r.b == b) return &r;
  return nullptr;
}

EnumTable enumerate_paths(int max_len, RegenMode mode) {
  if (max_len < 1 || max_len > 20)
    throw std::invalid_argument("enumerate_paths: max_len must be in [1, 20]");
  EnumTable table;
  table.max_len = max_len;
  table.mode = mode;

  std::vector<int> y(max_len + 1, 0);
  std::vector<int> min_after(max_len + 1, 0);
  const std::uint64_t total = 1ull << max_len;
  for (std::uint64_t mask = 0; mask < total; ++mask) {
    for (int i = 1; i <= max_len; ++i)
      y[i] = y[i - 1] + ((mask >> (i - 1)) & 1 ? 1 : -1);
    // All-forward suffix: the future minimum beyond the horizon is y[L]+1.
    int run = y[max_len] + 1;
    for (int t = max_len; t >= 0; --t) {
      min_after[t] = run;
      run = std::min(run, y[t]);
    }
    int max_before = 0;  // y[0] == 0; nonzero times only
    int tau = -1;
    for (int t = 1; t <= max_len; ++t) {
      if (y[t] > max_before) {
        const bool ok = mode == RegenMode::strict ? y[t] < min_after[t] : y[t] <= min_after[t];
        if (ok) {
          tau = t;
          break;
        }
      }
      max_before = std::max(max_before, y[t]);
    }
    if (tau < 0) continue;  // first regeneration lies beyond the horizon
    int b = 0;
    for (int i = 1; i <= tau; ++i)
      if (y[i] < y[i - 1]) ++b;
    ++table.hist[{b, tau}];
    ++table.evaluated;
  }
  for (const auto& [key, count] : table.hist) {
    const auto [b, tau] = key;
    bool found = false;
    for (EnumRow& r : table.rows) {
      if (r.b == b) {
        r.max_tau = std::max<std::int64_t>(r.max_tau, tau);
        r.paths += count;
        found = true;
      }
    }
    if (!found) table.rows.push_back({b, tau, count});
  }
  return table;
}

}  // namespace gwlab
