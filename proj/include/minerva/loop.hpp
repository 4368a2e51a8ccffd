#pragma once

// The self-training loop: RLVR rollouts with group-normalized updates, hard
// prompt buffering, deferred answer-conditioned trace generation with
// filtering, and capped distillation back onto the original prompts.

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "minerva/answer_extract.hpp"
#include "minerva/policy.hpp"
#include "minerva/reward.hpp"
#include "minerva/sim_trace.hpp"
#include "minerva/task_model.hpp"
#include "minerva/trace_filter.hpp"

namespace minerva {

struct LoopConfig {
  std::size_t rollouts_per_prompt = 8;  // N
  std::size_t acr_rollouts = 4;         // K
  std::size_t distill_interval = 10;    // I
  std::size_t distill_cap = 256;        // M
  double lr_rlvr = 1e-6;
  double lr_scale = 0.05;  // gamma
  double ema_decay = 0.995;
  double quality_threshold = 0.5;  // tau_q
  std::size_t batch_size = 128;
  std::size_t total_steps = 500;
  double exposure = 0.6;  // beta
  std::uint64_t seed = 1;
};

/// Throws ConfigError naming the first invalid field.
void validate(const LoopConfig& config);

struct LoopOptions {
  RewardContext reward;
  ExtractionMode extraction = ExtractionMode::Strict;
  TraceDefects defects;
  /// nullptr means every trace passes the quality stage.
  std::shared_ptr<const QualityScorer> scorer;
  FilterConfig filter;
  /// Kinds never buffered for answer-conditioned generation.
  std::set<TaskKind> acr_excluded = {TaskKind::CvssVector};
  /// zeta for the detectability threshold reported in the metrics.
  double detect_zeta = 0.05;
  /// Called after every step with the actor.
  std::function<void(std::size_t step, const Policy& actor)> on_step;
};

struct StepMetrics {
  std::size_t step = 0;
  double zero_solve_fraction = 0.0;   // batch prompts whose best reward is 0
  double expected_zero_solve = 0.0;   // mean over all prompts of (1 - P(reward > 0))^N
  double mean_reward = 0.0;
  double mean_entropy = 0.0;          // over all prompts, nats
  double median_p_gold = 0.0;         // over all prompts
  double detectable_fraction = 0.0;   // prompts with P(gold) >= eps_{N,zeta}
  std::size_t acr_buffer = 0;         // |P| at the end of the step, before any flush
  // Only on distillation steps.
  std::optional<double> heuristic_pass_fraction;
  std::optional<double> ml_pass_fraction;
  std::optional<double> uid_coverage_fraction;
  std::optional<std::size_t> distilled;
};

struct AcrEvent {
  std::size_t step = 0;
  std::string uid;
  std::size_t attempt = 0;  // 1-based count of intervals this uid was in P
  double teacher_p_gold = 0.0;
  double alpha = 0.0;  // closed-form P(at least one gold draw)
  std::size_t heuristic_pass = 0;
  std::size_t eligible = 0;
  bool accepted = false;
  bool distilled = false;
  std::optional<double> p_gold_before;
  std::optional<double> p_gold_after;
};

/// An accepted trace paired with the original, label-free prompt.
struct DistillPair {
  std::string uid;
  std::string prompt;
  std::size_t target = 0;
  std::string trace;
};

struct LoopResult {
  std::vector<StepMetrics> metrics;
  std::vector<AcrEvent> events;
};

/// Answer-conditioned prompt: the original prompt followed by the label block.
/// The whole prompt is kept within `token_budget` whitespace tokens by
/// truncating the label reference first and then the original prompt.
std::string build_acr_prompt(const TaskInstance& task, std::size_t token_budget = 4096);

/// Uniformly samples min(|queue|, cap) pairs without replacement and applies
/// one distillation step each at `lr`. Returns the sampled pairs in order.
std::vector<DistillPair> distill_batch(const std::vector<DistillPair>& queue, Policy& policy,
                                       std::size_t cap, double lr, Rng& rng);

/// Verifier-derived answer sets per prompt, computed once at startup.
struct AnswerKey {
  std::vector<std::size_t> full_credit;  // reward 1
  std::vector<std::size_t> any_credit;   // reward > 0
};

/// Throws ConfigError if a task's uid is missing from the policy or no
/// answer in its space earns full credit.
std::vector<AnswerKey> build_answer_keys(const std::vector<TaskInstance>& tasks, const Policy& policy,
                                         const LoopOptions& options);

LoopResult run_loop(const std::vector<TaskInstance>& tasks, Policy& policy, const LoopConfig& config,
                    const LoopOptions& options = {});

/// The same loop with trace generation, filtering and distillation disabled.
LoopResult run_grpo_only(const std::vector<TaskInstance>& tasks, Policy& policy, const LoopConfig& config,
                         const LoopOptions& options = {});

// ---- files -----------------------------------------------------------------

struct MetricsFile {
  std::vector<std::pair<std::string, std::string>> meta;
  std::vector<StepMetrics> rows;
  std::optional<std::string> meta_value(std::string_view key) const;
};

/// "# minerva-metrics v1", a "# key=value ..." metadata line, a column
/// header, then one row per step; absent interval-only fields are empty.
void write_metrics_csv(const std::string& path, const std::vector<StepMetrics>& metrics,
                       const std::vector<std::pair<std::string, std::string>>& meta);
MetricsFile read_metrics_csv(const std::string& path);

void write_events_csv(const std::string& path, const std::vector<AcrEvent>& events);
std::vector<AcrEvent> read_events_csv(const std::string& path);

}  // namespace minerva
