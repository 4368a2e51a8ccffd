#include "minerva/cvss.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "minerva/text.hpp"

namespace minerva {

namespace {

constexpr double kAvNetwork = 0.85;
constexpr double kAvAdjacent = 0.62;
constexpr double kAvLocal = 0.55;
constexpr double kAvPhysical = 0.2;
constexpr double kAcLow = 0.77;
constexpr double kAcHigh = 0.44;
constexpr double kPrNone = 0.85;
constexpr double kPrLowUnchanged = 0.62;
constexpr double kPrHighUnchanged = 0.27;
constexpr double kPrLowChanged = 0.68;
constexpr double kPrHighChanged = 0.5;
constexpr double kUiNone = 0.85;
constexpr double kUiRequired = 0.62;
constexpr double kCiaHigh = 0.56;
constexpr double kCiaLow = 0.22;
constexpr double kCiaNone = 0.0;

double weight(AttackVector v) {
  switch (v) {
    case AttackVector::Network: return kAvNetwork;
    case AttackVector::Adjacent: return kAvAdjacent;
    case AttackVector::Local: return kAvLocal;
    case AttackVector::Physical: return kAvPhysical;
  }
  return 0.0;
}

double weight(AttackComplexity v) { return v == AttackComplexity::Low ? kAcLow : kAcHigh; }

double weight(PrivilegesRequired v, Scope s) {
  switch (v) {
    case PrivilegesRequired::None: return kPrNone;
    case PrivilegesRequired::Low: return s == Scope::Changed ? kPrLowChanged : kPrLowUnchanged;
    case PrivilegesRequired::High: return s == Scope::Changed ? kPrHighChanged : kPrHighUnchanged;
  }
  return 0.0;
}

double weight(UserInteraction v) { return v == UserInteraction::None ? kUiNone : kUiRequired; }

double weight(ImpactLevel v) {
  switch (v) {
    case ImpactLevel::High: return kCiaHigh;
    case ImpactLevel::Low: return kCiaLow;
    case ImpactLevel::None: return kCiaNone;
  }
  return 0.0;
}

char letter(ImpactLevel v) {
  return v == ImpactLevel::High ? 'H' : (v == ImpactLevel::Low ? 'L' : 'N');
}

bool is_ignored_metric(std::string_view key) {
  static constexpr std::array<std::string_view, 14> kIgnored = {
      "E", "RL", "RC", "CR", "IR", "AR", "MAV", "MAC", "MPR", "MUI", "MS", "MC", "MI", "MA"};
  return std::find(kIgnored.begin(), kIgnored.end(), key) != kIgnored.end();
}

enum Base { kAV, kAC, kPR, kUI, kS, kC, kI, kA, kBaseCount };

int base_index(std::string_view key) {
  static constexpr std::array<std::string_view, kBaseCount> kKeys = {"AV", "AC", "PR", "UI",
                                                                     "S",  "C",  "I",  "A"};
  for (int i = 0; i < kBaseCount; ++i) {
    if (kKeys[i] == key) return i;
  }
  return -1;
}

bool assign(CvssVector& v, int metric, std::string_view value) {
  if (value.size() != 1) return false;
  const char c = value[0];
  auto impact = [&](ImpactLevel& out) {
    if (c == 'H') out = ImpactLevel::High;
    else if (c == 'L') out = ImpactLevel::Low;
    else if (c == 'N') out = ImpactLevel::None;
    else return false;
    return true;
  };
  switch (metric) {
    case kAV:
      if (c == 'N') v.av = AttackVector::Network;
      else if (c == 'A') v.av = AttackVector::Adjacent;
      else if (c == 'L') v.av = AttackVector::Local;
      else if (c == 'P') v.av = AttackVector::Physical;
      else return false;
      return true;
    case kAC:
      if (c == 'L') v.ac = AttackComplexity::Low;
      else if (c == 'H') v.ac = AttackComplexity::High;
      else return false;
      return true;
    case kPR:
      if (c == 'N') v.pr = PrivilegesRequired::None;
      else if (c == 'L') v.pr = PrivilegesRequired::Low;
      else if (c == 'H') v.pr = PrivilegesRequired::High;
      else return false;
      return true;
    case kUI:
      if (c == 'N') v.ui = UserInteraction::None;
      else if (c == 'R') v.ui = UserInteraction::Required;
      else return false;
      return true;
    case kS:
      if (c == 'U') v.s = Scope::Unchanged;
      else if (c == 'C') v.s = Scope::Changed;
      else return false;
      return true;
    case kC: return impact(v.c);
    case kI: return impact(v.i);
    case kA: return impact(v.a);
    default: return false;
  }
}

CvssParseResult failure(CvssParseError e, std::string detail = {}) {
  CvssParseResult r;
  r.error = e;
  r.detail = std::move(detail);
  return r;
}

}  // namespace

std::string CvssVector::to_string() const {
  std::string out = "CVSS:3.1/AV:";
  constexpr std::array<char, 4> av_letters = {'N', 'A', 'L', 'P'};
  out += av_letters[static_cast<int>(av)];
  out += ac == AttackComplexity::Low ? "/AC:L" : "/AC:H";
  out += pr == PrivilegesRequired::None ? "/PR:N" : (pr == PrivilegesRequired::Low ? "/PR:L" : "/PR:H");
  out += ui == UserInteraction::None ? "/UI:N" : "/UI:R";
  out += s == Scope::Unchanged ? "/S:U" : "/S:C";
  out += "/C:";
  out += letter(c);
  out += "/I:";
  out += letter(i);
  out += "/A:";
  out += letter(a);
  return out;
}

const char* to_string(CvssParseError e) {
  switch (e) {
    case CvssParseError::None: return "none";
    case CvssParseError::Prefix: return "prefix";
    case CvssParseError::Version: return "version";
    case CvssParseError::Malformed: return "malformed";
    case CvssParseError::UnknownMetric: return "unknown_metric";
    case CvssParseError::InvalidValue: return "invalid_value";
    case CvssParseError::DuplicateMetric: return "duplicate_metric";
    case CvssParseError::MissingMetric: return "missing_metric";
  }
  return "unknown";
}

CvssParseResult parse_cvss(std::string_view input) {
  const std::string_view text = text::trim(input);
  if (text.substr(0, 5) != "CVSS:") return failure(CvssParseError::Prefix);
  const auto first_slash = text.find('/');
  const std::string_view version = text.substr(5, first_slash == std::string_view::npos
                                                       ? std::string_view::npos
                                                       : first_slash - 5);
  if (version != "3.1") return failure(CvssParseError::Version, std::string(version));
  if (first_slash == std::string_view::npos) return failure(CvssParseError::MissingMetric, "AV");

  CvssVector v;
  std::array<bool, kBaseCount> seen{};
  std::string_view rest = text.substr(first_slash + 1);
  while (true) {
    const auto slash = rest.find('/');
    const std::string_view part = rest.substr(0, slash);
    const auto colon = part.find(':');
    if (part.empty() || colon == std::string_view::npos || colon == 0) {
      return failure(CvssParseError::Malformed, std::string(part));
    }
    const std::string_view key = part.substr(0, colon);
    const std::string_view value = part.substr(colon + 1);
    const int metric = base_index(key);
    if (metric >= 0) {
      if (seen[metric]) return failure(CvssParseError::DuplicateMetric, std::string(key));
      if (!assign(v, metric, value)) return failure(CvssParseError::InvalidValue, std::string(part));
      seen[metric] = true;
    } else if (!is_ignored_metric(key)) {
      return failure(CvssParseError::UnknownMetric, std::string(key));
    }
    if (slash == std::string_view::npos) break;
    rest = rest.substr(slash + 1);
  }
  static constexpr std::array<const char*, kBaseCount> kNames = {"AV", "AC", "PR", "UI",
                                                                 "S",  "C",  "I",  "A"};
  for (int m = 0; m < kBaseCount; ++m) {
    if (!seen[m]) return failure(CvssParseError::MissingMetric, kNames[m]);
  }
  CvssParseResult ok;
  ok.vector = v;
  return ok;
}

int cvss_roundup_tenths(double x) {
  const long long scaled = std::llround(x * 100000.0);
  if (scaled % 10000 == 0) return static_cast<int>(scaled / 10000);
  return static_cast<int>(scaled / 10000 + 1);
}

int cvss_base_score_tenths(const CvssVector& v) {
  const double iss = 1.0 - (1.0 - weight(v.c)) * (1.0 - weight(v.i)) * (1.0 - weight(v.a));
  const bool changed = v.s == Scope::Changed;
  const double impact =
      changed ? 7.52 * (iss - 0.029) - 3.25 * std::pow(iss - 0.02, 15) : 6.42 * iss;
  const double exploitability =
      8.22 * weight(v.av) * weight(v.ac) * weight(v.pr, v.s) * weight(v.ui);
  if (impact <= 0.0) return 0;
  const double raw = changed ? std::min(1.08 * (impact + exploitability), 10.0)
                             : std::min(impact + exploitability, 10.0);
  return cvss_roundup_tenths(raw);
}

double cvss_base_score(const CvssVector& v) { return cvss_base_score_tenths(v) / 10.0; }

}  // namespace minerva
