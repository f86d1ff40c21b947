// gwlab: simulation and numerical-verification lab for biased random walks on
// leafless Galton-Watson trees. Subcommands run reproducible experiments and
// emit machine-readable CSV/JSON reports.
//
// Exit codes: 0 pass, 1 usage error, 2 statistical or invariant failure,
// 3 capacity limit.

#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "gwlab/experiment.hpp"

namespace {

void add_common(CLI::App* sub, gwlab::ExperimentConfig& cfg) {
  sub->add_option("--dist", cfg.dist_spec,
                  "offspring law: 'k1:w1,k2:w2,...', 'const:k' or 'uniform:a-b'");
  sub->add_option("--eps", cfg.eps, "bias increment (>= 0)");
  sub->add_option("--seed", cfg.seed, "master seed");
  sub->add_option("--replicas", cfg.replicas, "independent replicas to merge")
      ->check(CLI::Range(1, 4096));
  sub->add_option("--margin", cfg.margin, "confirmation margin (0 = default rule)");
  sub->add_option("--out", cfg.out, "report base path (default <command>_report)");
  sub->add_option("--format", cfg.format, "csv | json | both")
      ->check(CLI::IsMember({"csv", "json", "both"}));
  sub->add_option_function<std::string>(
         "--regen-mode",
         [&cfg](const std::string& m) {
           cfg.mode = m == "nonstrict" ? gwlab::RegenMode::nonstrict : gwlab::RegenMode::strict;
         },
         "strict | nonstrict")
      ->check(CLI::IsMember({"strict", "nonstrict"}));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"biased-walk coupling lab on Galton-Watson trees"};
  app.require_subcommand(1);

  gwlab::ExperimentConfig cfg;
  int rc = gwlab::exit_usage;

  auto* bounds = app.add_subcommand("bounds", "closed-form quantities and thresholds");
  bounds->add_option("--beta", cfg.betas, "bias value(s)")->expected(-1);
  bounds->add_option("--d", cfg.d, "minimal degree substitution")->check(CLI::Range(1, 1024));
  add_common(bounds, cfg);
  bounds->callback([&] { rc = gwlab::cmd_bounds(cfg); });

  auto* simulate = app.add_subcommand("simulate", "coupled run; speed estimates and invariants");
  simulate->add_option("--beta", cfg.beta, "bias (> 1)")->required();
  simulate->add_option("--steps", cfg.steps, "steps per replica (>= 1000)");
  add_common(simulate, cfg);
  simulate->callback([&] { rc = gwlab::cmd_simulate(cfg); });

  auto* mono = app.add_subcommand("monotonicity", "segment gap estimator and positivity test");
  mono->add_option("--beta", cfg.beta, "bias (> 1)")->required();
  mono->add_option("--segments", cfg.segments, "total segments to harvest");
  add_common(mono, cfg);
  mono->callback([&] { rc = gwlab::cmd_monotonicity(cfg); });

  auto* lemmas = app.add_subcommand("lemmas", "empirical audit of the block-level bounds");
  lemmas->add_option("--beta", cfg.beta, "bias (> 1)")->required();
  lemmas->add_option("--segments", cfg.segments, "total segments to harvest");
  lemmas->add_option("--trials", cfg.trials, "unconditioned back-step sample size");
  add_common(lemmas, cfg);
  lemmas->callback([&] { rc = gwlab::cmd_lemmas(cfg); });

  auto* rate = app.add_subcommand("rate", "large-bias growth rate of the speed gap");
  rate->add_option("--beta", cfg.beta, "bias (> 1)")->required();
  rate->add_option("--segments", cfg.segments, "total segments to harvest");
  add_common(rate, cfg);
  rate->callback([&] { rc = gwlab::cmd_rate(cfg); });

  auto* enumerate = app.add_subcommand("enumerate", "exhaustive first-regeneration oracle");
  enumerate->add_option("--max-len", cfg.max_len, "prefix length (<= 20)");
  std::string mode = "strict";
  enumerate->add_option("--mode", mode, "strict | nonstrict")
      ->check(CLI::IsMember({"strict", "nonstrict"}));
  add_common(enumerate, cfg);
  enumerate->callback([&] {
    cfg.mode = mode == "nonstrict" ? gwlab::RegenMode::nonstrict : gwlab::RegenMode::strict;
    rc = gwlab::cmd_enumerate(cfg);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : gwlab::exit_usage;
  }
  return rc;
}
