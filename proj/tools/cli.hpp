#pragma once

// Subcommand implementations behind the minerva executable. Every function
// throws minerva::Error subclasses on bad input; main() maps them to exit codes.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "minerva/answer_extract.hpp"
#include "minerva/error.hpp"
#include "minerva/loop.hpp"
#include "minerva/sim_estimate.hpp"
#include "minerva/sim_trace.hpp"
#include "minerva/toy_dataset.hpp"
#include "minerva/trace_filter.hpp"

namespace minerva::cli {

enum ExitCode : int { kOk = 0, kInternalError = 1, kInputError = 2, kAssertionFailed = 3 };

/// Error for a failed theory or acceptance assertion (exit code 3).
class AssertionFailure : public Error {
 public:
  using Error::Error;
};

// ---- score -----------------------------------------------------------------

struct ScoreOptions {
  std::string dataset;
  std::string rollouts;
  std::string out;
  std::string aliases;
  std::string catalog;
  ExtractionMode mode = ExtractionMode::Strict;
  bool vsp = false;
  unsigned threads = 0;  // 0: hardware concurrency
};

struct ScoreSummary {
  std::size_t rollouts = 0;
  std::size_t prompts = 0;
  double mean_reward = 0.0;
  double zero_solve_fraction = 0.0;
  std::size_t vsp_pairs = 0;
  std::optional<double> vsp;
};

ScoreSummary cmd_score(const ScoreOptions& options);

// ---- filter ----------------------------------------------------------------

struct FilterOptions {
  std::string traces;
  std::string contexts;  // optional JSONL {uid, context}
  std::string dataset;   // optional; grounding context from the task
  std::string scorer;    // linear weight file
  std::string external_scores;
  std::string leakage;   // extra leakage list merged into the shipped one
  std::string out;
  double quality_threshold = 0.5;
  double min_grounding = 0.05;
  std::size_t min_reasoning_chars = 100;
  std::uint64_t seed = 1;
  unsigned threads = 0;
};

struct FilterSummary {
  std::size_t traces = 0;
  std::size_t uids = 0;
  std::string scorer;
  double heuristic_pass_fraction = 0.0;
  double ml_pass_fraction = 0.0;
  double eligible_fraction = 0.0;
  double selection_fraction = 0.0;
};

FilterSummary cmd_filter(const FilterOptions& options, std::ostream& warnings);

// ---- train-scorer ----------------------------------------------------------

struct TrainOptions {
  std::string labels;  // JSONL {text, label}
  std::string out;
  LinearTrainConfig config;
};

TrainedScorer cmd_train_scorer(const TrainOptions& options);

// ---- simulate --------------------------------------------------------------

struct RunConfig {
  LoopConfig loop;
  std::string mode = "minerva";  // or "grpo"
  HardDatasetConfig dataset;
  std::string tasks;   // dataset file; empty means the generated hard dataset
  std::string policy;  // snapshot with the initial policy, required with tasks
  std::string aliases;
  std::string catalog;
  std::string scorer;
  std::string leakage;
  TraceDefects defects;
  ExtractionMode extraction = ExtractionMode::Strict;
  double detect_zeta = 0.05;
  double min_grounding = 0.05;
  std::size_t min_reasoning_chars = 100;
  std::size_t snapshot_every = 0;
};

/// Rejects unknown keys and mistyped values with ConfigError naming the key.
/// Relative paths resolve against `base_dir`.
RunConfig parse_run_config(const std::string& json_text, const std::string& base_dir = "");
RunConfig load_run_config(const std::string& path);

/// An existing path is returned as is; otherwise `name` and `name.json` are
/// looked up in $MINERVA_CONFIG_DIR. Throws IoError when nothing matches.
std::string resolve_config_path(const std::string& name);

std::string run_config_json(const RunConfig& config);

struct SimulateSummary {
  StepMetrics last;
  std::size_t steps = 0;
  std::size_t events = 0;
  std::size_t snapshots = 0;
};

/// Writes metrics.csv, acr_events.csv, final_policy.jsonl, run_config.json
/// and, with snapshot_every > 0, snapshots/step_NNNNNN.jsonl into out_dir.
SimulateSummary cmd_simulate(const RunConfig& config, const std::string& out_dir);

// ---- theory ----------------------------------------------------------------

struct TheoryOptions {
  std::size_t k = 8;
  double zeta = 0.05;
  std::optional<double> p;
  std::optional<double> p0;
  std::optional<double> delta;
  std::optional<double> alpha_exp;
  std::optional<double> cycles;
};

/// key=value lines.
std::string cmd_theory(const TheoryOptions& options);

struct CheckReport {
  SimEstimate estimate;
  std::vector<TheoryCheck> checks;
  bool all_passed() const;
  std::string render() const;
};

/// `events` empty: acr_events.csv next to the metrics file, if present.
CheckReport cmd_theory_check(const std::string& metrics, const std::string& snapshots,
                             const std::string& events = "");

// ---- shared ----------------------------------------------------------------

std::string fixed(double value, int decimals);

}  // namespace minerva::cli
