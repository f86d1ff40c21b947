#include "gwlab/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "gwlab/bounds.hpp"
#include "gwlab/harvest.hpp"
#include "gwlab/report.hpp"
#include "gwlab/rng.hpp"

namespace gwlab {

namespace {

std::string mode_name(RegenMode m) { return m == RegenMode::strict ? "strict" : "nonstrict"; }

std::string walk_name(Walk w) { return w == Walk::slow ? "slow" : "fast"; }

void embed_common(ReportDoc& doc, const ExperimentConfig& cfg) {
  doc.config("dist", cfg.dist_spec);
  doc.config("eps", cfg.eps);
  doc.config("seed", cfg.seed);
  doc.config("replicas", static_cast<std::int64_t>(cfg.replicas));
  doc.config("regen_mode", mode_name(cfg.mode));
  doc.config("margin", static_cast<std::int64_t>(cfg.margin));
  doc.config("seed_derivation", "splitmix64(master, replica_index)");
  if (cfg.replicas <= 64) {
    std::string seeds;
    for (int r = 0; r < cfg.replicas; ++r) {
      if (r) seeds += ' ';
      seeds += std::to_string(replica_seed(cfg.seed, static_cast<std::uint64_t>(r)));
    }
    doc.config("replica_seeds", seeds);
  }
}

void write_reports(const ReportDoc& doc, const ExperimentConfig& cfg, const std::string& command,
                   double elapsed_seconds) {
  const std::string base = report_base(cfg, command);
  if (cfg.format == "csv" || cfg.format == "both") write_text_file(base + ".csv", doc.csv());
  if (cfg.format == "json" || cfg.format == "both") write_text_file(base + ".json", doc.json());
  // wall-clock data never enters a report body
  write_text_file(base + ".timing.txt", format_double(elapsed_seconds) + " s\n");
}

void counter_rows(ReportDoc& doc, const InvariantCounters& c) {
  const auto row = [&](const char* name, std::int64_t v) {
    doc.add({"invariants", name, static_cast<double>(v), NAN, 0.0, NAN,
             v == 0 ? "pass" : "VIOLATION"});
  };
  row("domination", c.domination);
  row("gap_ledger", c.gap_ledger);
  row("delta_jump", c.delta_jump);
  row("delta_not_backstep", c.delta_not_backstep);
  row("delta_width", c.delta_width);
  row("coupled_gain_mismatch", c.coupled_gain_mismatch);
  row("dk_gap_bound", c.dk_gap_bound);
  row("section4_pathwise", c.section4_pathwise);
  row("super_regen", c.super_regen);
}

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

int guard(const char* command, int (*fn)(const ExperimentConfig&), const ExperimentConfig& cfg) {
  try {
    return fn(cfg);
  } catch (const capacity_error& e) {
    std::fprintf(stderr, "%s: capacity: %s\n", command, e.what());
    return exit_capacity;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "%s: usage: %s\n", command, e.what());
    return exit_usage;
  } catch (const std::domain_error& e) {
    std::fprintf(stderr, "%s: usage: %s\n", command, e.what());
    return exit_usage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "%s: failed: %s\n", command, e.what());
    return exit_statistical;
  }
}

HarvestResult run_harvest_replicas(const OffspringDistribution& dist, const BiasParams& params,
                                   HarvestOptions opts, const ExperimentConfig& cfg) {
  const int n = std::max(1, cfg.replicas);
  if (opts.target_segments > 0)
    opts.target_segments = (opts.target_segments + n - 1) / n;  // per replica
  std::vector<HarvestResult> parts(n);
  run_indexed(n, [&](int i) {
    parts[i] = harvest_segments(dist, params, opts,
                                replica_seed(cfg.seed, static_cast<std::uint64_t>(i)));
  });
  HarvestResult merged = std::move(parts[0]);
  for (int i = 1; i < n; ++i) merged.merge(std::move(parts[i]));
  return merged;
}

int do_bounds(const ExperimentConfig& cfg) {
  Timer timer;
  const OffspringDistribution dist = OffspringDistribution::parse(cfg.dist_spec);
  std::vector<double> betas = cfg.betas;
  if (betas.empty() && cfg.beta > 0) betas.push_back(cfg.beta);
  if (betas.empty()) throw std::invalid_argument("bounds: at least one --beta is required");
  if (cfg.d < 1) throw std::invalid_argument("bounds: d must be >= 1");
  for (double b : betas)
    if (!(cfg.d * b > 1.0))
      throw std::invalid_argument("bounds: requires d*beta > 1 (got beta=" + std::to_string(b) +
                                  ", d=" + std::to_string(cfg.d) + ")");

  ReportDoc doc("bounds");
  embed_common(doc, cfg);
  doc.config("d", static_cast<std::int64_t>(cfg.d));
  for (double b : betas) {
    const BoundReport r = compute_bounds(dist, b, cfg.eps, cfg.d);
    const std::string sec = "beta=" + format_double(b);
    doc.add({sec, "p1", r.p1, NAN, NAN, NAN, ""});
    doc.add({sec, "q1", r.q1, NAN, NAN, NAN, ""});
    doc.add({sec, "p_inf", r.p_inf, NAN, NAN, NAN, ""});
    doc.add({sec, "mean_eps", r.mean_eps, NAN, NAN, NAN, ""});
    doc.add({sec, "lemma1_lower", r.lemma1_lower, NAN, NAN, NAN, ""});
    doc.add({sec, "lemma2_prefactor", r.lemma2_prefactor, NAN, NAN, NAN, ""});
    doc.add({sec, "tail_base", r.tail_base, NAN, 1.0, NAN,
             r.tail_divergent ? "divergent" : "convergent"});
    if (!r.tail_divergent) {
      doc.add({sec, "series_closed", r.series_closed, NAN, NAN, NAN, ""});
      doc.add({sec, "series_direct", r.series_direct, NAN, NAN, NAN, ""});
      doc.add({sec, "c_closed", r.c_closed, NAN, 1.0, NAN, r.c_closed < 1.0 ? "below-1" : "above-1"});
      doc.add({sec, "c_direct", r.c_direct, NAN, 1.0, NAN,
               r.c_direct < 1.0 ? "below-1" : "above-1"});
    }
  }
  for (const CVariant v : {CVariant::closed_form, CVariant::direct}) {
    const ThresholdResult t = threshold_search(cfg.d, v);
    doc.add({"threshold", v == CVariant::closed_form ? "closed_form" : "direct", t.beta_star, NAN, NAN, NAN,
             t.certified ? "certified" : "UNCERTIFIED"});
    std::printf("bounds: threshold[%s] d=%d -> %.9f\n",
                v == CVariant::closed_form ? "closed_form" : "direct", cfg.d, t.beta_star);
  }
  write_reports(doc, cfg, "bounds", timer.seconds());
  return exit_ok;
}

int do_simulate(const ExperimentConfig& cfg) {
  Timer timer;
  const OffspringDistribution dist = OffspringDistribution::parse(cfg.dist_spec);
  const BiasParams params(cfg.beta, cfg.eps);
  const std::int64_t steps = cfg.steps > 0 ? cfg.steps : 1'000'000;
  if (steps < 1000) throw std::invalid_argument("simulate: steps must be >= 1000");

  HarvestOptions opts;
  opts.regen = {cfg.mode, cfg.margin};
  opts.max_steps = steps;
  const HarvestResult res = run_harvest_replicas(dist, params, opts, cfg);

  ReportDoc doc("simulate");
  embed_common(doc, cfg);
  doc.config("beta", cfg.beta);
  doc.config("steps", steps);

  const Estimate es = res.ergodic_slow.estimate("ergodic-batch-means");
  const Estimate ef = res.ergodic_fast.estimate("ergodic-batch-means");
  doc.add({"speed", "ergodic_slow", es.value, es.se, NAN, NAN, ""});
  doc.add({"speed", "ergodic_fast", ef.value, ef.se, NAN, NAN, ""});

  bool agree = true;
  if (res.stats.count() >= 2) {
    for (Walk w : {Walk::slow, Walk::fast}) {
      const Estimate reg = res.stats.speed(w);
      const Estimate erg = w == Walk::slow ? es : ef;
      doc.add({"speed", "regen_" + walk_name(w), reg.value, reg.se, NAN, NAN, ""});
      const double comb = std::sqrt(reg.se * reg.se + erg.se * erg.se);
      const double diff = std::abs(reg.value - erg.value);
      const bool ok = comb == 0 ? diff == 0 : diff <= 3.0 * comb;
      doc.add({"speed", "agreement_" + walk_name(w), diff, comb, 3.0 * comb, comb > 0 ? diff / comb : 0.0,
               ok ? "pass" : "VIOLATION"});
      agree = agree && ok;
    }
  }
  doc.add({"run", "steps", static_cast<double>(res.steps), NAN, NAN, NAN, ""});
  doc.add({"run", "segments", static_cast<double>(res.stats.count()), NAN, NAN, NAN, ""});
  doc.add({"run", "confirmed_regens", static_cast<double>(res.confirmed_regens), NAN, NAN, NAN, ""});
  if (res.stats.count() > 0) {
    const Estimate ml = res.stats.mean_length();
    doc.add({"run", "mean_segment_length", ml.value, ml.se, NAN, NAN, ""});
  }
  counter_rows(doc, res.counters);
  write_reports(doc, cfg, "simulate", timer.seconds());

  std::printf("simulate: ergodic slow speed %.6f +- %.6f over %lld steps\n", es.value, es.se,
              static_cast<long long>(res.steps));
  const bool hard_ok = res.counters.total() == 0;
  if (!hard_ok) std::printf("simulate: INVARIANT VIOLATIONS present\n");
  return hard_ok && agree ? exit_ok : exit_statistical;
}

int do_monotonicity(const ExperimentConfig& cfg) {
  Timer timer;
  const OffspringDistribution dist = OffspringDistribution::parse(cfg.dist_spec);
  const BiasParams params(cfg.beta, cfg.eps);
  if (!(cfg.eps > 0)) throw std::invalid_argument("monotonicity: eps must be > 0");
  const std::int64_t segments = cfg.segments > 0 ? cfg.segments : 1'000'000;
  if (segments < 100) throw std::invalid_argument("monotonicity: segments must be >= 100");

  HarvestOptions opts;
  opts.regen = {cfg.mode, cfg.margin};
  opts.target_segments = segments;
  const HarvestResult res = run_harvest_replicas(dist, params, opts, cfg);

  ReportDoc doc("monotonicity");
  embed_common(doc, cfg);
  doc.config("beta", cfg.beta);
  doc.config("segments", segments);

  const Estimate gap = res.stats.gap();
  const double p = res.stats.gap_one_sided_p();
  doc.add({"gap", "estimate", gap.value, gap.se, NAN, gap.se > 0 ? gap.value / gap.se : NAN, ""});
  doc.add({"gap", "one_sided_p", p, NAN, 0.01, NAN, p < 0.01 ? "pass" : "VIOLATION"});
  const Estimate d1 = res.stats.prob_decoupled(1);
  doc.add({"classes", "d1_prob", d1.value, d1.se, NAN, NAN, ""});
  const Estimate ml = res.stats.mean_length();
  doc.add({"run", "mean_segment_length", ml.value, ml.se, NAN, NAN, ""});
  doc.add({"run", "segments", static_cast<double>(res.stats.count()), NAN, NAN, NAN, ""});
  counter_rows(doc, res.counters);
  write_reports(doc, cfg, "monotonicity", timer.seconds());

  std::printf("monotonicity: gap %.3e +- %.3e (one-sided p %.3e) over %lld segments\n", gap.value,
              gap.se, p, static_cast<long long>(res.stats.count()));
  return p < 0.01 && res.counters.total() == 0 ? exit_ok : exit_statistical;
}

int do_lemmas(const ExperimentConfig& cfg) {
  Timer timer;
  const OffspringDistribution dist = OffspringDistribution::parse(cfg.dist_spec);
  const BiasParams params(cfg.beta, cfg.eps);
  const std::int64_t segments = cfg.segments > 0 ? cfg.segments : 1'000'000;
  const std::int64_t trials = cfg.trials > 0 ? cfg.trials : segments;

  HarvestOptions opts;
  opts.regen = {cfg.mode, cfg.margin};
  opts.target_segments = segments;
  const HarvestResult res = run_harvest_replicas(dist, params, opts, cfg);

  // Unconditioned back-step sample, replica-split like the harvest.
  const int n = std::max(1, cfg.replicas);
  std::vector<BSample> bparts(n);
  const std::int64_t per = (trials + n - 1) / n;
  run_indexed(n, [&](int i) {
    bparts[i] = sample_b_counts(cfg.beta, per, replica_seed(cfg.seed ^ 0x5ca1ab1eULL, i),
                                {cfg.mode, cfg.margin});
  });
  BSample bs;
  for (const BSample& p : bparts) {
    bs.n += p.n;
    for (const auto& [k, v] : p.counts) bs.counts[k] += v;
    for (const auto& [k, v] : p.max_tau_by_b) {
      auto& mt = bs.max_tau_by_b[k];
      mt = std::max(mt, v);
    }
  }

  const AuditReport audit = lemma_audit(res.stats, bs, cfg.beta, cfg.eps, dist);
  const EnumTable oracle = enumerate_paths(std::min(cfg.max_len, 16), cfg.mode);

  ReportDoc doc("lemmas");
  embed_common(doc, cfg);
  doc.config("beta", cfg.beta);
  doc.config("segments", segments);
  doc.config("trials", trials);

  for (const AuditRow& r : audit.rows) {
    doc.add({"audit", r.name, r.empirical, r.se, r.bound, r.margin_sigma, r.verdict});
    if (r.violations >= 0)
      doc.add({"audit", r.name + ".violations", static_cast<double>(r.violations), NAN, NAN, NAN,
               ""});
  }
  // Oracle-validated window for the active mode: coefficient 3 in nonstrict
  // mode, 4 in strict mode (3 provably fails there).
  const int w_mode = cfg.mode == RegenMode::strict ? 4 : 3;
  const std::int64_t enum_viol = oracle.window_violations(w_mode);
  const std::int64_t samp_viol = res.stats.window_violations(w_mode);
  doc.add({"window", "oracle_w", static_cast<double>(w_mode), NAN, NAN, NAN, ""});
  doc.add({"window", "enumerated_violations", static_cast<double>(enum_viol), NAN, 0.0, NAN,
           enum_viol == 0 ? "pass" : "VIOLATION"});
  doc.add({"window", "sampled_violations", static_cast<double>(samp_viol), NAN, 0.0, NAN,
           samp_viol == 0 ? "pass" : "VIOLATION"});
  counter_rows(doc, res.counters);
  write_reports(doc, cfg, "lemmas", timer.seconds());

  const bool ok = audit.all_pass() && enum_viol == 0 && samp_viol == 0 &&
                  res.counters.total() == 0;
  std::printf("lemmas: %s over %lld segments / %lld trials\n", ok ? "all pass" : "FAILURES",
              static_cast<long long>(res.stats.count()), static_cast<long long>(bs.n));
  return ok ? exit_ok : exit_statistical;
}

int do_rate(const ExperimentConfig& cfg) {
  Timer timer;
  const OffspringDistribution dist = OffspringDistribution::parse(cfg.dist_spec);
  const BiasParams params(cfg.beta, cfg.eps);
  if (!(cfg.eps > 0)) throw std::invalid_argument("rate: eps must be > 0");
  const std::int64_t segments = cfg.segments > 0 ? cfg.segments : 1'000'000;

  HarvestOptions opts;
  opts.regen = {cfg.mode, cfg.margin};
  opts.target_segments = segments;
  const HarvestResult res = run_harvest_replicas(dist, params, opts, cfg);
  const RateReport r = rate_check(res.stats, cfg.beta, cfg.eps, dist);

  ReportDoc doc("rate");
  embed_common(doc, cfg);
  doc.config("beta", cfg.beta);
  doc.config("segments", segments);
  doc.add({"rate", "per_eps", r.rate_per_eps.value, r.rate_per_eps.se, r.target_rate, NAN, ""});
  doc.add({"rate", "ratio_to_target", r.rate_ratio, NAN, 0.30, NAN,
           r.pass_rate ? "pass" : "VIOLATION"});
  doc.add({"rate", "d1_prob", r.d1_prob.value, r.d1_prob.se, r.mean_width, NAN, ""});
  doc.add({"rate", "d1_over_mean_eps", r.d1_ratio, NAN, 0.15, NAN,
           r.pass_d1 ? "pass" : "VIOLATION"});
  doc.add({"rate", "mean_tau", r.mean_tau.value, r.mean_tau.se, 1.05, NAN,
           r.pass_tau ? "pass" : "VIOLATION"});
  counter_rows(doc, res.counters);
  write_reports(doc, cfg, "rate", timer.seconds());

  std::printf("rate: ratio %.4f, d1 ratio %.4f, mean tau %.5f\n", r.rate_ratio, r.d1_ratio,
              r.mean_tau.value);
  return r.pass_rate && r.pass_d1 && r.pass_tau && res.counters.total() == 0 ? exit_ok
                                                                             : exit_statistical;
}

int do_enumerate(const ExperimentConfig& cfg) {
  Timer timer;
  if (cfg.max_len < 1 || cfg.max_len > 20)
    throw std::invalid_argument("enumerate: max-len must be in [1, 20]");
  const EnumTable t = enumerate_paths(cfg.max_len, cfg.mode);

  ReportDoc doc("enumerate");
  embed_common(doc, cfg);
  doc.config("max_len", static_cast<std::int64_t>(cfg.max_len));
  for (const EnumRow& r : t.rows) {
    doc.add({"enumeration", "max_tau[b=" + std::to_string(r.b) + "]",
             static_cast<double>(r.max_tau), NAN, NAN, NAN, ""});
    doc.add({"enumeration", "paths[b=" + std::to_string(r.b) + "]", static_cast<double>(r.paths),
             NAN, NAN, NAN, ""});
  }
  for (int w : {3, 4})
    doc.add({"window", "violations[w=" + std::to_string(w) + "]",
             static_cast<double>(t.window_violations(w)), NAN, 0.0, NAN,
             t.window_violations(w) == 0 ? "holds" : "exceptions"});
  doc.add({"enumeration", "paths_evaluated", static_cast<double>(t.evaluated), NAN, NAN, NAN, ""});
  write_reports(doc, cfg, "enumerate", timer.seconds());

  std::printf("enumerate: %s mode, len %d: w=3 %s, w=4 %s\n", mode_name(cfg.mode).c_str(),
              cfg.max_len, t.window_holds(3) ? "holds" : "has exceptions",
              t.window_holds(4) ? "holds" : "has exceptions");
  return exit_ok;
}

}  // namespace

std::string report_base(const ExperimentConfig& cfg, const std::string& command) {
  return cfg.out.empty() ? command + "_report" : cfg.out;
}

int cmd_bounds(const ExperimentConfig& cfg) { return guard("bounds", do_bounds, cfg); }
int cmd_simulate(const ExperimentConfig& cfg) { return guard("simulate", do_simulate, cfg); }
int cmd_monotonicity(const ExperimentConfig& cfg) {
  return guard("monotonicity", do_monotonicity, cfg);
}
int cmd_lemmas(const ExperimentConfig& cfg) { return guard("lemmas", do_lemmas, cfg); }
int cmd_rate(const ExperimentConfig& cfg) { return guard("rate", do_rate, cfg); }
int cmd_enumerate(const ExperimentConfig& cfg) { return guard("enumerate", do_enumerate, cfg); }

}  // namespace gwlab
