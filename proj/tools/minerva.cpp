#include <cstdio>
#include <iostream>

#include "CLI11.hpp"
#include "cli.hpp"
#include "minerva/error.hpp"

using namespace minerva;
using namespace minerva::cli;

namespace {

ExtractionMode extraction_from(const std::string& name) {
  const auto mode = parse_extraction_mode(name);
  if (!mode) throw ConfigError("--mode must be strict or permissive");
  return *mode;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Verifiable CTI rewards, trace filtering and a toy self-training loop"};
  app.require_subcommand(1);

  ScoreOptions score;
  std::string score_mode = "strict";
  auto* sc = app.add_subcommand("score", "Score rollouts against a dataset");
  sc->add_option("--dataset", score.dataset, "Task dataset (JSONL)")->required();
  sc->add_option("--rollouts", score.rollouts, "Rollouts {uid, completion} (JSONL)")->required();
  sc->add_option("--out", score.out, "Per-rollout reward records")->required();
  sc->add_option("--mode", score_mode, "Extraction mode")->check(CLI::IsMember({"strict", "permissive"}));
  sc->add_option("--aliases", score.aliases, "Actor alias table (JSONL)");
  sc->add_option("--catalog", score.catalog, "Identifier catalog directory");
  sc->add_flag("--vsp", score.vsp, "Report the 1 - MAD/7.7 aggregate over CVSS rollouts");
  sc->add_option("--threads", score.threads, "Worker threads, 0 for all cores");

  FilterOptions filter;
  auto* fc = app.add_subcommand("filter", "Filter candidate traces and select one per uid");
  fc->add_option("--traces", filter.traces, "Traces {uid, response, verifier_score, context?, id?}")->required();
  fc->add_option("--contexts", filter.contexts, "Grounding contexts {uid, context}");
  fc->add_option("--dataset", filter.dataset, "Task dataset supplying grounding contexts");
  fc->add_option("--scorer", filter.scorer, "Linear scorer weight file");
  fc->add_option("--external-scores", filter.external_scores, "Precomputed {id, q} records");
  fc->add_option("--leakage", filter.leakage, "Extra leakage list");
  fc->add_option("--out", filter.out, "Verdict records")->required();
  fc->add_option("--quality-threshold", filter.quality_threshold)->check(CLI::Range(0.0, 1.0));
  fc->add_option("--min-grounding", filter.min_grounding)->check(CLI::Range(0.0, 1.0));
  fc->add_option("--min-reasoning-chars", filter.min_reasoning_chars);
  fc->add_option("--seed", filter.seed, "Tie-break seed");
  fc->add_option("--threads", filter.threads);

  TrainOptions train;
  auto* tc = app.add_subcommand("train-scorer", "Train the hashed n-gram quality scorer");
  tc->add_option("--labels", train.labels, "Labeled texts {text, label}")->required();
  tc->add_option("--out", train.out, "Weight file")->required();
  tc->add_option("--dims", train.config.dims);
  tc->add_option("--epochs", train.config.epochs);
  tc->add_option("--lr", train.config.learning_rate);
  tc->add_option("--l2", train.config.l2);
  tc->add_option("--holdout", train.config.holdout_fraction)->check(CLI::Range(0.0, 0.9));
  tc->add_option("--seed", train.config.seed);

  std::string config_name, sim_out, sim_mode;
  bool grpo_only = false;
  std::size_t rollouts = 0, snapshot_every = 0, steps = 0;
  std::uint64_t seed = 0;
  auto* mc = app.add_subcommand("simulate", "Run the self-training loop on a toy policy");
  mc->add_option("--config", config_name, "Run config (path, or name under $MINERVA_CONFIG_DIR)");
  mc->add_option("--out", sim_out, "Output directory")->required();
  mc->add_flag("--grpo-only", grpo_only, "Disable trace generation and distillation");
  auto* o_rollouts = mc->add_option("--rollouts", rollouts, "Rollouts per prompt");
  auto* o_seed = mc->add_option("--seed", seed);
  auto* o_snap = mc->add_option("--snapshot-every", snapshot_every, "Policy snapshot period in steps");
  auto* o_steps = mc->add_option("--steps", steps, "Total steps");
  auto* o_mode = mc->add_option("--mode", sim_mode, "Extraction mode")->check(CLI::IsMember({"strict", "permissive"}));

  TheoryOptions theory;
  std::vector<std::string> check;
  std::string events, report_out;
  auto* th = app.add_subcommand("theory", "Support-theory calculators and simulation checks");
  th->add_option("--k", theory.k, "Rollout budget");
  th->add_option("--zeta", theory.zeta, "Miss probability bound");
  th->add_option("--p", theory.p, "Success probability");
  th->add_option("--p0", theory.p0, "Initial success probability");
  th->add_option("--delta", theory.delta, "Log increment per distillation");
  th->add_option("--alpha-exp", theory.alpha_exp, "Per-attempt acceptance probability");
  th->add_option("--cycles", theory.cycles, "Distillation cycles for expected attempts");
  th->add_option("--check", check, "METRICS_CSV SNAPSHOT_DIR")->expected(2);
  th->add_option("--events", events, "ACR events CSV for --check");
  th->add_option("--report", report_out, "Also write the check report here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (*sc) {
      score.mode = extraction_from(score_mode);
      const auto s = cmd_score(score);
      std::printf("rollouts=%zu\nprompts=%zu\nmean_reward=%s\nzero_solve_fraction=%s\n", s.rollouts, s.prompts,
                  fixed(s.mean_reward, 6).c_str(), fixed(s.zero_solve_fraction, 6).c_str());
      if (score.vsp) {
        std::printf("vsp_pairs=%zu\n", s.vsp_pairs);
        if (s.vsp) std::printf("vsp=%s\n", fixed(*s.vsp, 6).c_str());
      }
    } else if (*fc) {
      const auto s = cmd_filter(filter, std::cerr);
      std::printf("traces=%zu\nuids=%zu\nscorer=%s\nheuristic_pass_fraction=%s\nml_pass_fraction=%s\n"
                  "eligible_fraction=%s\nselection_fraction=%s\n",
                  s.traces, s.uids, s.scorer.c_str(), fixed(s.heuristic_pass_fraction, 6).c_str(),
                  fixed(s.ml_pass_fraction, 6).c_str(), fixed(s.eligible_fraction, 6).c_str(),
                  fixed(s.selection_fraction, 6).c_str());
    } else if (*tc) {
      const auto t = cmd_train_scorer(train);
      std::printf("train_size=%zu\nheldout_size=%zu\nheldout_accuracy=%s\n", t.train_size, t.heldout_size,
                  fixed(t.heldout_accuracy, 6).c_str());
    } else if (*mc) {
      RunConfig cfg;
      if (!config_name.empty()) cfg = load_run_config(resolve_config_path(config_name));
      if (grpo_only) cfg.mode = "grpo";
      if (o_rollouts->count()) cfg.loop.rollouts_per_prompt = rollouts;
      if (o_seed->count()) cfg.loop.seed = seed;
      if (o_snap->count()) cfg.snapshot_every = snapshot_every;
      if (o_steps->count()) cfg.loop.total_steps = steps;
      if (o_mode->count()) cfg.extraction = extraction_from(sim_mode);
      const auto s = cmd_simulate(cfg, sim_out);
      std::printf("mode=%s\nsteps=%zu\nacr_events=%zu\nsnapshots=%zu\n", cfg.mode.c_str(), s.steps, s.events,
                  s.snapshots);
      if (s.steps) {
        std::printf("expected_zero_solve=%s\nmedian_p_gold=%s\ndetectable_fraction=%s\nmean_entropy=%s\n",
                    fixed(s.last.expected_zero_solve, 6).c_str(), fixed(s.last.median_p_gold, 9).c_str(),
                    fixed(s.last.detectable_fraction, 6).c_str(), fixed(s.last.mean_entropy, 6).c_str());
      }
    } else if (*th) {
      if (check.empty()) {
        std::fputs(cmd_theory(theory).c_str(), stdout);
      } else {
        const auto report = cmd_theory_check(check[0], check[1], events);
        const std::string text = report.render();
        std::fputs(text.c_str(), stdout);
        if (!report_out.empty()) {
          std::FILE* f = std::fopen(report_out.c_str(), "wb");
          if (!f) throw IoError("cannot write " + report_out);
          std::fputs(text.c_str(), f);
          std::fclose(f);
        }
        if (!report.all_passed()) return kAssertionFailed;
      }
    }
  } catch (const AssertionFailure& e) {
    std::fprintf(stderr, "assertion failed: %s\n", e.what());
    return kAssertionFailed;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kInputError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return kInternalError;
  }
  return kOk;
}
