#pragma once

// Task instances, gold labels, actor alias tables and identifier catalogs,
// plus the newline-delimited JSON dataset format that carries them.
//
// Dataset record (one per line):
//   {"uid": "...", "kind": "attack_technique", "prompt": "...",
//    "gold": "T1059.003" | ["CWE-79", ...], "label_details": "..."}

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "minerva/cvss.hpp"

namespace minerva {

enum class TaskKind { SingleId, AttackTechnique, IdSet, CvssVector, ActorAttribution };

inline constexpr std::array<TaskKind, 5> kAllTaskKinds = {
    TaskKind::SingleId, TaskKind::AttackTechnique, TaskKind::IdSet, TaskKind::CvssVector,
    TaskKind::ActorAttribution};

const char* to_string(TaskKind kind);
std::optional<TaskKind> parse_task_kind(std::string_view name);

struct IdLabel {
  std::string id;  // normalized
  bool operator==(const IdLabel&) const = default;
};

struct IdSetLabel {
  std::set<std::string> ids;  // normalized, deduplicated
  bool operator==(const IdSetLabel&) const = default;
};

struct ActorLabel {
  std::string name;  // canonical actor name as stored in the alias table
  bool operator==(const ActorLabel&) const = default;
};

using GoldLabel = std::variant<IdLabel, IdSetLabel, minerva::CvssVector, ActorLabel>;

struct TaskInstance {
  std::string uid;
  TaskKind kind = TaskKind::SingleId;
  std::string prompt;
  GoldLabel gold;
  std::optional<std::string> label_details;

  bool operator==(const TaskInstance&) const = default;
};

/// Canonical actor name -> aliases. Every alias set contains the canonical
/// name; lookups go through norm_actor.
class AliasTable {
 public:
  /// Throws ConfigError when a normalized alias already resolves to a
  /// different canonical name.
  void add(const std::string& canonical, const std::vector<std::string>& aliases);

  std::optional<std::string> resolve(std::string_view name) const;

  /// Normalized alias set for a canonical name, or nullptr.
  const std::set<std::string>* aliases(std::string_view canonical) const;

  bool contains(std::string_view canonical) const { return aliases(canonical) != nullptr; }
  std::size_t size() const { return by_canonical_.size(); }
  const std::map<std::string, std::set<std::string>, std::less<>>& entries() const {
    return by_canonical_;
  }

 private:
  std::map<std::string, std::set<std::string>, std::less<>> by_canonical_;
  std::map<std::string, std::string, std::less<>> by_alias_;
};

std::optional<std::string> resolve_actor(std::string_view name, const AliasTable& table);

/// Reads records {"canonical": "...", "aliases": ["...", ...]}, one per line.
AliasTable load_alias_table(const std::filesystem::path& path);

enum class IdFamily { Technique, Tactic, Mitigation, Cwe, Capec };

inline constexpr std::array<IdFamily, 5> kAllIdFamilies = {
    IdFamily::Technique, IdFamily::Tactic, IdFamily::Mitigation, IdFamily::Cwe, IdFamily::Capec};

/// Known-valid identifiers per family, all in normalized form.
struct Catalog {
  std::map<IdFamily, std::set<std::string>> valid;

  /// True when the identifier's family has no catalog loaded or the
  /// identifier is listed.
  bool accepts(std::string_view normalized_id) const;
};

/// Loads any of techniques.txt, tactics.txt, mitigations.txt, cwes.txt,
/// capecs.txt present in `dir` (one identifier per line, '#' comments).
Catalog load_catalog(const std::filesystem::path& dir);

struct LoadIssue {
  std::size_t line = 0;
  std::string field;
  std::string message;
};

/// Strict mode throws SchemaError on the first malformed record; otherwise
/// malformed records are skipped and reported through `issues`.
std::vector<TaskInstance> load_dataset(const std::filesystem::path& path, bool strict,
                                       const Catalog* catalog = nullptr,
                                       std::vector<LoadIssue>* issues = nullptr);

/// Parses one record; throws SchemaError(line, field).
TaskInstance parse_task_record(std::string_view json_line, std::size_t line_number,
                               const Catalog* catalog = nullptr);

std::string serialize_task(const TaskInstance& task);
void write_dataset(const std::filesystem::path& path, const std::vector<TaskInstance>& tasks);

/// Original prompt plus label reference, the grounding context for traces.
std::string grounding_context(const TaskInstance& task);

/// Gold label rendered as a list of label strings (one per identifier).
std::vector<std::string> gold_strings(const GoldLabel& gold);

}  // namespace minerva
