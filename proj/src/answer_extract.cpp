#include "minerva/answer_extract.hpp"

#include "minerva/identifiers.hpp"
#include "minerva/text.hpp"

namespace minerva {

namespace {

constexpr std::string_view kBoxed = "\\boxed{";

bool single_label(TaskKind kind) {
  return kind == TaskKind::SingleId || kind == TaskKind::AttackTechnique;
}

std::string_view strip_emphasis(std::string_view s) {
  s = text::trim(s);
  while (!s.empty() && (s.front() == '*' || s.front() == '_' || s.front() == '`')) {
    s.remove_prefix(1);
    s = text::trim(s);
  }
  while (!s.empty() && (s.back() == '*' || s.back() == '_' || s.back() == '`')) {
    s.remove_suffix(1);
    s = text::trim(s);
  }
  return s;
}

ExtractedAnswer make_answer(std::string_view span, TaskKind kind, AnswerSource source) {
  ExtractedAnswer ans;
  ans.span = std::string(text::trim(span));
  ans.ids = identifier_regexes(kind).scan(ans.span);
  ans.source = source;
  return ans;
}

// Whether a permissive fallback candidate carries a usable answer.
bool usable(const ExtractedAnswer& ans, TaskKind kind) {
  if (kind == TaskKind::ActorAttribution) return !ans.span.empty();
  if (single_label(kind)) return ans.ids.size() == 1;
  return !ans.ids.empty();
}

std::optional<ExtractedAnswer> last_line_answer(std::string_view completion, TaskKind kind) {
  auto all = text::lines(completion);
  for (auto it = all.rbegin(); it != all.rend(); ++it) {
    if (!text::trim(*it).empty()) {
      auto ans = make_answer(strip_emphasis(*it), kind, AnswerSource::LastLine);
      if (usable(ans, kind)) return ans;
      return std::nullopt;
    }
  }
  return std::nullopt;
}

}  // namespace

const char* to_string(AnswerSource source) {
  switch (source) {
    case AnswerSource::Boxed: return "boxed";
    case AnswerSource::AnswerLine: return "answer_line";
    case AnswerSource::LastLine: return "last_line";
    case AnswerSource::TaggedSpan: return "tagged_span";
    case AnswerSource::RegexSweep: return "regex_sweep";
  }
  return "unknown";
}

const char* to_string(ExtractionMode mode) {
  return mode == ExtractionMode::Strict ? "strict" : "permissive";
}

std::optional<ExtractionMode> parse_extraction_mode(std::string_view name) {
  if (name == "strict") return ExtractionMode::Strict;
  if (name == "permissive") return ExtractionMode::Permissive;
  return std::nullopt;
}

std::vector<std::string> boxed_spans(std::string_view completion) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while ((pos = completion.find(kBoxed, pos)) != std::string_view::npos) {
    const std::size_t open = pos + kBoxed.size();
    int depth = 1;
    std::size_t i = open;
    for (; i < completion.size(); ++i) {
      if (completion[i] == '{') {
        ++depth;
      } else if (completion[i] == '}' && --depth == 0) {
        break;
      }
    }
    if (depth == 0) {
      out.emplace_back(completion.substr(open, i - open));
      pos = i + 1;
    } else {
      pos = open;
    }
  }
  return out;
}

std::optional<std::string> answer_line(std::string_view completion) {
  auto all = text::lines(completion);
  for (auto it = all.rbegin(); it != all.rend(); ++it) {
    std::string_view line = *it;
    std::size_t i = 0;
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '*' ||
                               line[i] == '-' || line[i] == '+' || line[i] == '#' ||
                               line[i] == '>' || line[i] == '_')) {
      ++i;
    }
    std::string_view rest = line.substr(i);
    if (text::istarts_with(rest, "final answer")) {
      rest.remove_prefix(12);
    } else if (text::istarts_with(rest, "answer")) {
      rest.remove_prefix(6);
    } else {
      continue;
    }
    std::size_t j = 0;
    while (j < rest.size() && (rest[j] == '*' || rest[j] == '_' || rest[j] == ' ')) ++j;
    if (j >= rest.size() || rest[j] != ':') continue;
    return std::string(strip_emphasis(rest.substr(j + 1)));
  }
  return std::nullopt;
}

std::optional<std::string> tagged_span(std::string_view completion) {
  const std::string lower = text::to_lower(completion);
  std::optional<std::string> best;
  std::size_t best_pos = 0;

  if (auto open = lower.rfind("<answer>"); open != std::string::npos) {
    const std::size_t body = open + 8;
    const std::size_t close = lower.find("</answer>", body);
    if (close != std::string::npos) {
      best = std::string(text::trim(completion.substr(body, close - body)));
      best_pos = open;
    }
  }
  if (auto bold = lower.rfind("**answer**"); bold != std::string::npos &&
                                             (!best || bold > best_pos)) {
    std::string_view rest = completion.substr(bold + 10);
    rest = text::trim(rest);
    if (!rest.empty() && rest.front() == ':') rest.remove_prefix(1);
    best = std::string(strip_emphasis(rest));
  }
  return best;
}

std::optional<ExtractedAnswer> extract(std::string_view completion, TaskKind kind,
                                       ExtractionMode mode) {
  auto finalize = [&](std::string_view span, AnswerSource source) -> std::optional<ExtractedAnswer> {
    auto ans = make_answer(span, kind, source);
    if (mode == ExtractionMode::Strict && single_label(kind) && ans.ids.size() != 1) {
      return std::nullopt;
    }
    return ans;
  };

  if (auto boxes = boxed_spans(completion); !boxes.empty()) {
    return finalize(boxes.back(), AnswerSource::Boxed);
  }
  if (auto line = answer_line(completion)) {
    return finalize(*line, AnswerSource::AnswerLine);
  }
  if (mode == ExtractionMode::Strict) return std::nullopt;

  if (auto last = last_line_answer(completion, kind)) return last;
  if (auto tagged = tagged_span(completion)) {
    auto ans = make_answer(*tagged, kind, AnswerSource::TaggedSpan);
    if (usable(ans, kind)) return ans;
  }
  if (kind != TaskKind::ActorAttribution) {
    auto ans = make_answer(completion, kind, AnswerSource::RegexSweep);
    if (!ans.ids.empty()) return ans;
  }
  return std::nullopt;
}

}  // namespace minerva
