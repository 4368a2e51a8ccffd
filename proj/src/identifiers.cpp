#include "minerva/identifiers.hpp"

#include <algorithm>
#include <array>

#include "minerva/normalize.hpp"
#include "minerva/text.hpp"

namespace minerva {

namespace {

constexpr std::string_view kTechnique = R"(T\d{4}(?:\.\d{1,3})?)";
constexpr std::string_view kTactic = R"(TA\d{4})";
constexpr std::string_view kMitigation = R"(M\d{4})";
constexpr std::string_view kCwe = R"(CWE-\d+)";
constexpr std::string_view kCapec = R"(CAPEC-\d+)";
constexpr std::string_view kCvss = R"(CVSS:3\.1/[A-Za-z0-9:/.]*)";

constexpr auto kFlags = std::regex::ECMAScript | std::regex::icase | std::regex::optimize;

std::string alternation(const std::vector<std::string>& patterns) {
  std::string alt;
  for (const auto& p : patterns) {
    if (!alt.empty()) alt += '|';
    alt += p;
  }
  return alt;
}

bool cvss_token_char(char c) {
  return text::is_alnum(c) || c == ':' || c == '/' || c == '.';
}

}  // namespace

IdentifierGrammar::IdentifierGrammar(std::vector<std::string> patterns, bool cvss)
    : patterns_(std::move(patterns)), cvss_(cvss) {
  if (patterns_.empty()) return;
  const std::string alt = alternation(patterns_);
  full_ = std::regex("^(?:" + alt + ")$", kFlags);
  search_ = std::regex("(^|[^A-Za-z0-9_])(" + alt + ")(?![A-Za-z0-9_])", kFlags);
}

bool IdentifierGrammar::matches(std::string_view token) const {
  if (patterns_.empty()) return false;
  if (cvss_) return text::istarts_with(token, "CVSS:3.1/");
  return std::regex_match(token.begin(), token.end(), full_);
}

std::vector<std::string> IdentifierGrammar::scan(std::string_view input) const {
  std::vector<std::string> out;
  if (patterns_.empty()) return out;
  if (cvss_) {
    if (auto tok = find_cvss_token(input); tok && text::istarts_with(*tok, "CVSS:3.1/")) {
      out.push_back(*tok);
    }
    return out;
  }
  using It = std::string_view::const_iterator;
  for (std::regex_iterator<It> it(input.begin(), input.end(), search_), end; it != end; ++it) {
    std::string id = norm_id((*it)[2].str());
    if (std::find(out.begin(), out.end(), id) == out.end()) out.push_back(std::move(id));
  }
  return out;
}

const IdentifierGrammar& family_grammar(IdFamily family) {
  static const std::array<IdentifierGrammar, 5> grammars = {
      IdentifierGrammar({std::string(kTechnique)}), IdentifierGrammar({std::string(kTactic)}),
      IdentifierGrammar({std::string(kMitigation)}), IdentifierGrammar({std::string(kCwe)}),
      IdentifierGrammar({std::string(kCapec)})};
  return grammars[static_cast<std::size_t>(family)];
}

const IdentifierGrammar& identifier_regexes(TaskKind kind) {
  static const IdentifierGrammar all_ids({std::string(kTactic), std::string(kTechnique),
                                          std::string(kMitigation), std::string(kCwe),
                                          std::string(kCapec)});
  static const IdentifierGrammar technique({std::string(kTechnique)});
  static const IdentifierGrammar cvss({std::string(kCvss)}, true);
  static const IdentifierGrammar none;
  switch (kind) {
    case TaskKind::SingleId:
    case TaskKind::IdSet: return all_ids;
    case TaskKind::AttackTechnique: return technique;
    case TaskKind::CvssVector: return cvss;
    case TaskKind::ActorAttribution: return none;
  }
  return none;
}

std::optional<IdFamily> family_of(std::string_view id) {
  for (IdFamily f : kAllIdFamilies) {
    if (family_grammar(f).matches(id)) return f;
  }
  return std::nullopt;
}

std::optional<std::string> find_cvss_token(std::string_view input) {
  std::optional<std::string> best_31;
  std::optional<std::string> best_any;
  std::size_t pos = 0;
  while (pos + 5 <= input.size()) {
    std::size_t hit = std::string_view::npos;
    for (std::size_t i = pos; i + 5 <= input.size(); ++i) {
      if (text::istarts_with(input.substr(i), "CVSS:") &&
          (i == 0 || !text::is_alnum(input[i - 1]))) {
        hit = i;
        break;
      }
    }
    if (hit == std::string_view::npos) break;
    std::size_t end = hit;
    while (end < input.size() && cvss_token_char(input[end])) ++end;
    std::string_view token = input.substr(hit, end - hit);
    while (!token.empty() && (token.back() == '.' || token.back() == '/')) token.remove_suffix(1);
    std::string tok(token);
    if (text::istarts_with(tok, "CVSS:3.1/")) {
      if (!best_31 || tok.size() > best_31->size()) best_31 = tok;
    } else if (!best_any || tok.size() > best_any->size()) {
      best_any = tok;
    }
    pos = end > hit ? end : hit + 1;
  }
  return best_31 ? best_31 : best_any;
}

std::string strip_identifiers(std::string_view input) {
  static const std::regex ids(
      "(^|[^A-Za-z0-9_])(" +
          alternation({std::string(kCvss), std::string(kTactic), std::string(kTechnique),
                       std::string(kMitigation), std::string(kCwe), std::string(kCapec)}) +
          ")(?![A-Za-z0-9_])",
      kFlags);
  std::string out(input);
  return std::regex_replace(out, ids, "$1 ");
}

}  // namespace minerva
