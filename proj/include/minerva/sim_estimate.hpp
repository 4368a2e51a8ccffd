#pragma once

// Empirical quantities recovered from a simulation's output files, compared
// against the closed-form support-theory predictions.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "minerva/loop.hpp"
#include "minerva/policy.hpp"

namespace minerva {

struct CurvePoint {
  std::size_t step = 0;
  double median_p_gold = 0.0;
  double mean_p_gold = 0.0;
  double detectable_fraction = 0.0;
};

struct SimEstimate {
  std::string mode;  // "minerva" or "grpo"
  std::size_t rollouts = 0;
  double zeta = 0.05;
  double eps = 0.0;
  std::size_t distill_interval = 0;

  std::vector<CurvePoint> curve;  // one point per snapshot, ascending step

  /// Attempts between consecutive accepted traces of the same prompt; runs
  /// still open at the end of the log are dropped.
  std::vector<double> waiting_times;
  /// Mean of 1/alpha over the attempts that make up the completed waits.
  double predicted_waiting = 0.0;

  /// ln p_after - ln p_before for every distilled event.
  std::vector<double> log_increments;
  double mean_increment = 0.0;

  /// First snapshot step at which the median gold probability reaches eps.
  std::optional<std::size_t> crossing_step;
  /// Distillation cycles the median prompt needs at the observed mean increment.
  std::optional<std::uint64_t> predicted_cycles;
};

/// Snapshots named step_<digits>.jsonl in `dir`, sorted by step. Throws
/// IoError when the directory holds none.
std::vector<PolicySnapshot> load_snapshots(const std::string& dir);

/// Requires metadata keys mode and rollouts, at least one snapshot, and a
/// gold index on every snapshot entry.
SimEstimate estimate_from_sim(const MetricsFile& metrics, const std::vector<PolicySnapshot>& snapshots,
                              const std::vector<AcrEvent>& events);

struct TheoryCheck {
  std::string name;
  bool passed = false;
  bool skipped = false;
  std::string detail;
};

inline constexpr std::size_t kMinWaitingSamples = 30;

/// grpo: median p below eps at every snapshot and within a factor 2 of its
/// start. minerva: median crossing within twice the predicted steps, and mean
/// waiting time within 10% of the closed form.
std::vector<TheoryCheck> check_theory(const SimEstimate& estimate);

}  // namespace minerva
