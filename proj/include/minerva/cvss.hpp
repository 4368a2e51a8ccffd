#pragma once

// CVSS v3.1 base vectors: parsing and base-score computation.
//
// Weights and equations follow the FIRST CVSS v3.1 specification. Scores are
// quantized to one decimal place with the specification's integer Roundup, so
// they are exposed both as a double and as an integer count of tenths.

#include <optional>
#include <string>
#include <string_view>

namespace minerva {

enum class AttackVector { Network, Adjacent, Local, Physical };
enum class AttackComplexity { Low, High };
enum class PrivilegesRequired { None, Low, High };
enum class UserInteraction { None, Required };
enum class Scope { Unchanged, Changed };
enum class ImpactLevel { High, Low, None };

struct CvssVector {
  AttackVector av = AttackVector::Network;
  AttackComplexity ac = AttackComplexity::Low;
  PrivilegesRequired pr = PrivilegesRequired::None;
  UserInteraction ui = UserInteraction::None;
  Scope s = Scope::Unchanged;
  ImpactLevel c = ImpactLevel::None;
  ImpactLevel i = ImpactLevel::None;
  ImpactLevel a = ImpactLevel::None;

  bool operator==(const CvssVector&) const = default;

  /// "CVSS:3.1/AV:N/AC:L/PR:N/UI:N/S:U/C:H/I:H/A:H" in canonical metric order.
  std::string to_string() const;
};

enum class CvssParseError {
  None,
  Prefix,         // does not start with "CVSS:"
  Version,        // "CVSS:" with a version other than 3.1
  Malformed,      // empty component or missing ':' separator
  UnknownMetric,  // metric key outside base/temporal/environmental sets
  InvalidValue,   // base metric with a value outside its domain
  DuplicateMetric,
  MissingMetric,
};

const char* to_string(CvssParseError e);

struct CvssParseResult {
  std::optional<CvssVector> vector;
  CvssParseError error = CvssParseError::None;
  std::string detail;  // offending metric, when applicable

  bool ok() const { return vector.has_value(); }
};

/// Accepts base metrics in any order; temporal and environmental metrics are
/// skipped without validation. Reports the first violated rule.
CvssParseResult parse_cvss(std::string_view text);

/// Base score in tenths (0..100).
int cvss_base_score_tenths(const CvssVector& v);

/// Base score in [0, 10] with at most one decimal digit.
double cvss_base_score(const CvssVector& v);

/// CVSS v3.1 Roundup: smallest one-decimal value >= x, computed on x scaled by
/// 100000 to avoid floating-point ceiling drift. Returns tenths.
int cvss_roundup_tenths(double x);

}  // namespace minerva
