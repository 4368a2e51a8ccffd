#pragma once

// Identifier token grammars per task kind:
//   technique  T\d{4}(\.\d{1,3})?     tactic  TA\d{4}     mitigation  M\d{4}
//   weakness   CWE-\d+                attack pattern  CAPEC-\d+
//   CVSS       vectors starting with "CVSS:3.1/"
// Matching is case-insensitive and bounded by non-word characters.

#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include "minerva/task_model.hpp"

namespace minerva {

class IdentifierGrammar {
 public:
  IdentifierGrammar() = default;
  explicit IdentifierGrammar(std::vector<std::string> patterns, bool cvss = false);

  const std::vector<std::string>& patterns() const { return patterns_; }
  bool empty() const { return patterns_.empty(); }
  bool is_cvss() const { return cvss_; }

  /// Whole-token match.
  bool matches(std::string_view token) const;

  /// Identifiers found in `text`, normalized, deduplicated, in order of first
  /// occurrence. For the CVSS grammar this is the single longest vector token.
  std::vector<std::string> scan(std::string_view text) const;

 private:
  std::vector<std::string> patterns_;
  bool cvss_ = false;
  std::regex full_;
  std::regex search_;
};

const IdentifierGrammar& identifier_regexes(TaskKind kind);
const IdentifierGrammar& family_grammar(IdFamily family);

/// Family of a normalized identifier, if it is well formed.
std::optional<IdFamily> family_of(std::string_view id);

/// Longest whitespace-free token starting with "CVSS:3.1/"; when none exists,
/// the longest token starting with "CVSS:" of any version.
std::optional<std::string> find_cvss_token(std::string_view text);

/// `text` with every identifier occurrence (all families and CVSS vectors)
/// replaced by a space.
std::string strip_identifiers(std::string_view text);

}  // namespace minerva
