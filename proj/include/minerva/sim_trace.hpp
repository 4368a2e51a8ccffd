#pragma once

#include <string>
#include <string_view>

#include "minerva/rng.hpp"
#include "minerva/task_model.hpp"

namespace minerva {

struct TraceDefects {
  double leakage = 0.0;
  double repetition = 0.0;
  double answer_only = 0.0;
};

enum class TraceDefect { None, Leakage, Repetition, AnswerOnly };

/// Synthetic reasoning text for a sampled answer, built from templates that
/// reuse words of the prompt, ending with a "Final answer:" line. With all
/// defect rates zero the traces pass every heuristic filter.
class SimTraceGenerator {
 public:
  explicit SimTraceGenerator(TraceDefects defects = {});

  const TraceDefects& defects() const { return defects_; }

  std::string generate(const TaskInstance& task, std::string_view answer, Rng& rng,
                       TraceDefect* applied = nullptr) const;

 private:
  TraceDefects defects_;
};

}  // namespace minerva
