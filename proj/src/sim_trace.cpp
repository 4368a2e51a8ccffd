#include "minerva/sim_trace.hpp"

#include <algorithm>
#include <array>

#include "minerva/error.hpp"
#include "minerva/identifiers.hpp"
#include "minerva/text.hpp"

namespace minerva {

namespace {

constexpr std::array<const char*, 4> kTemplates = {
    "The report describes {0} together with {1}, which narrows the plausible behaviours to a "
    "small family.",
    "Details about {2} and {3} line up with how the selected label is usually documented by "
    "defenders.",
    "Telemetry mentioning {4} supports that reading, while {5} rules out the closest "
    "alternatives.",
    "Nothing about {6} or {7} contradicts the mapping, so the conclusion stays consistent with "
    "the evidence.",
};

constexpr const char* kLoop = " the same step repeats";
constexpr int kLoopCount = 16;

std::vector<std::string> content_words(std::string_view prompt) {
  std::vector<std::string> out;
  for (auto& w : text::word_tokens(strip_identifiers(prompt))) {
    if (w.size() < 4) continue;
    if (std::find(out.begin(), out.end(), w) == out.end()) out.push_back(std::move(w));
  }
  return out;
}

std::string fill(std::string_view tmpl, const std::vector<std::string>& words) {
  std::string out;
  for (std::size_t i = 0; i < tmpl.size(); ++i) {
    if (tmpl[i] == '{' && i + 2 < tmpl.size() && tmpl[i + 2] == '}') {
      const std::size_t slot = static_cast<std::size_t>(tmpl[i + 1] - '0');
      out += words.empty() ? std::string("the activity") : words[slot % words.size()];
      i += 2;
    } else {
      out.push_back(tmpl[i]);
    }
  }
  return out;
}

void check_rate(double r, const char* name) {
  if (!(r >= 0.0 && r <= 1.0)) throw ConfigError(std::string("defect rate ") + name + " must lie in [0, 1]");
}

}  // namespace

SimTraceGenerator::SimTraceGenerator(TraceDefects defects) : defects_(defects) {
  check_rate(defects.leakage, "leakage");
  check_rate(defects.repetition, "repetition");
  check_rate(defects.answer_only, "answer_only");
  if (defects.leakage + defects.repetition + defects.answer_only > 1.0 + 1e-12) {
    throw ConfigError("defect rates sum to more than 1");
  }
}

std::string SimTraceGenerator::generate(const TaskInstance& task, std::string_view answer, Rng& rng,
                                        TraceDefect* applied) const {
  const double u = rng.uniform();
  TraceDefect defect = TraceDefect::None;
  if (u < defects_.leakage) {
    defect = TraceDefect::Leakage;
  } else if (u < defects_.leakage + defects_.repetition) {
    defect = TraceDefect::Repetition;
  } else if (u < defects_.leakage + defects_.repetition + defects_.answer_only) {
    defect = TraceDefect::AnswerOnly;
  }
  if (applied) *applied = defect;

  auto words = content_words(task.prompt);
  for (std::size_t i = words.size(); i > 1; --i) std::swap(words[i - 1], words[rng.index(i)]);

  const std::string answer_line = "Final answer: " + std::string(answer);
  if (defect == TraceDefect::AnswerOnly) return answer_line;

  std::string out;
  if (defect == TraceDefect::Leakage) out += "Given the answer, t";
  for (std::size_t i = 0; i < kTemplates.size(); ++i) {
    std::string sentence = fill(kTemplates[i], words);
    if (i == 0 && defect == TraceDefect::Leakage) sentence.erase(0, 1);
    out += sentence;
    out.push_back(i + 1 == kTemplates.size() ? '\n' : ' ');
  }
  if (defect == TraceDefect::Repetition) {
    out.pop_back();
    for (int i = 0; i < kLoopCount; ++i) out += kLoop;
    out.push_back('\n');
  }
  return out + answer_line;
}

}  // namespace minerva
