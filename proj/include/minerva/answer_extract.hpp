#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "minerva/task_model.hpp"

namespace minerva {

/// Strict is the training-time regime, Permissive the evaluation-time one.
/// Always chosen by the caller.
enum class ExtractionMode { Strict, Permissive };

enum class AnswerSource { Boxed, AnswerLine, LastLine, TaggedSpan, RegexSweep };

const char* to_string(AnswerSource source);
const char* to_string(ExtractionMode mode);
std::optional<ExtractionMode> parse_extraction_mode(std::string_view name);

struct ExtractedAnswer {
  std::string span;
  std::vector<std::string> ids;  // normalized, first-occurrence order, unique
  AnswerSource source = AnswerSource::Boxed;

  bool operator==(const ExtractedAnswer&) const = default;
};

/// Contents of every balanced \boxed{...} group, in order. Nested braces are
/// kept verbatim; an unterminated box is skipped.
std::vector<std::string> boxed_spans(std::string_view completion);

/// Payload of the last line that starts with "Answer:" or "Final answer:"
/// (case-insensitive, leading markdown bullets and emphasis allowed).
std::optional<std::string> answer_line(std::string_view completion);

/// Payload of the last <answer>...</answer> block or trailing **Answer** block.
std::optional<std::string> tagged_span(std::string_view completion);

/// Rule priority: final boxed span, then the last answer line. Permissive mode
/// continues with the last non-empty line, tagged spans and finally a sweep of
/// the whole completion. Strict single-label kinds require exactly one
/// identifier in the chosen span.
std::optional<ExtractedAnswer> extract(std::string_view completion, TaskKind kind,
                                       ExtractionMode mode);

}  // namespace minerva
