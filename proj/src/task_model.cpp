#include "minerva/task_model.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "minerva/error.hpp"
#include "minerva/identifiers.hpp"
#include "minerva/normalize.hpp"
#include "minerva/text.hpp"

namespace minerva {

using json = nlohmann::json;

namespace {

struct KindName {
  TaskKind kind;
  const char* name;
};

constexpr std::array<KindName, 5> kKindNames = {{
    {TaskKind::SingleId, "single_id"},
    {TaskKind::AttackTechnique, "attack_technique"},
    {TaskKind::IdSet, "id_set"},
    {TaskKind::CvssVector, "cvss_vector"},
    {TaskKind::ActorAttribution, "actor_attribution"},
}};

std::string required_string(const json& rec, const char* field, std::size_t line) {
  auto it = rec.find(field);
  if (it == rec.end()) throw SchemaError(line, field, "missing");
  if (!it->is_string()) throw SchemaError(line, field, "expected a string");
  return it->get<std::string>();
}

std::string checked_id(const std::string& raw, TaskKind kind, std::size_t line,
                       const Catalog* catalog) {
  std::string id = norm_id(raw);
  if (!identifier_regexes(kind).matches(id)) {
    throw SchemaError(line, "gold", "'" + raw + "' is not a valid identifier for " +
                                        to_string(kind));
  }
  if (catalog != nullptr && !catalog->accepts(id)) {
    throw SchemaError(line, "gold", "'" + id + "' is not in the catalog");
  }
  return id;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::string> out;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    out.push_back(std::move(line));
  }
  if (in.bad()) throw IoError("read failure on " + path.string());
  return out;
}

}  // namespace

const char* to_string(TaskKind kind) {
  for (const auto& kn : kKindNames) {
    if (kn.kind == kind) return kn.name;
  }
  return "unknown";
}

std::optional<TaskKind> parse_task_kind(std::string_view name) {
  for (const auto& kn : kKindNames) {
    if (name == kn.name) return kn.kind;
  }
  return std::nullopt;
}

void AliasTable::add(const std::string& canonical, const std::vector<std::string>& aliases) {
  auto& set = by_canonical_[canonical];
  auto insert = [&](const std::string& raw) {
    std::string norm = norm_actor(raw);
    if (norm.empty()) return;
    auto [it, inserted] = by_alias_.emplace(norm, canonical);
    if (!inserted && it->second != canonical) {
      throw ConfigError("alias '" + raw + "' maps to both '" + it->second + "' and '" +
                        canonical + "'");
    }
    set.insert(std::move(norm));
  };
  insert(canonical);
  for (const auto& a : aliases) insert(a);
}

std::optional<std::string> AliasTable::resolve(std::string_view name) const {
  auto it = by_alias_.find(norm_actor(name));
  if (it == by_alias_.end()) return std::nullopt;
  return it->second;
}

const std::set<std::string>* AliasTable::aliases(std::string_view canonical) const {
  auto it = by_canonical_.find(canonical);
  return it == by_canonical_.end() ? nullptr : &it->second;
}

std::optional<std::string> resolve_actor(std::string_view name, const AliasTable& table) {
  return table.resolve(name);
}

AliasTable load_alias_table(const std::filesystem::path& path) {
  AliasTable table;
  std::size_t line_no = 0;
  for (const auto& line : read_lines(path)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      throw SchemaError(line_no, "<record>", e.what());
    }
    if (!rec.is_object()) throw SchemaError(line_no, "<record>", "expected an object");
    std::string canonical = required_string(rec, "canonical", line_no);
    std::vector<std::string> aliases;
    if (auto it = rec.find("aliases"); it != rec.end()) {
      if (!it->is_array()) throw SchemaError(line_no, "aliases", "expected an array");
      for (const auto& a : *it) {
        if (!a.is_string()) throw SchemaError(line_no, "aliases", "expected strings");
        aliases.push_back(a.get<std::string>());
      }
    }
    try {
      table.add(canonical, aliases);
    } catch (const ConfigError& e) {
      throw SchemaError(line_no, "aliases", e.what());
    }
  }
  return table;
}

bool Catalog::accepts(std::string_view normalized_id) const {
  auto fam = family_of(normalized_id);
  if (!fam) return false;
  auto it = valid.find(*fam);
  if (it == valid.end()) return true;
  return it->second.find(std::string(normalized_id)) != it->second.end();
}

Catalog load_catalog(const std::filesystem::path& dir) {
  static const std::array<std::pair<IdFamily, const char*>, 5> kFiles = {{
      {IdFamily::Technique, "techniques.txt"},
      {IdFamily::Tactic, "tactics.txt"},
      {IdFamily::Mitigation, "mitigations.txt"},
      {IdFamily::Cwe, "cwes.txt"},
      {IdFamily::Capec, "capecs.txt"},
  }};
  if (!std::filesystem::is_directory(dir)) throw IoError("catalog directory not found: " + dir.string());
  Catalog catalog;
  for (const auto& [family, name] : kFiles) {
    const auto path = dir / name;
    if (!std::filesystem::exists(path)) continue;
    auto& set = catalog.valid[family];
    std::size_t line_no = 0;
    for (const auto& line : read_lines(path)) {
      ++line_no;
      auto entry = text::trim(line);
      if (entry.empty() || entry.front() == '#') continue;
      std::string id = norm_id(entry);
      if (!family_grammar(family).matches(id)) {
        throw SchemaError(line_no, name, "'" + std::string(entry) + "' is not a valid identifier");
      }
      set.insert(std::move(id));
    }
  }
  return catalog;
}

TaskInstance parse_task_record(std::string_view json_line, std::size_t line,
                               const Catalog* catalog) {
  json rec;
  try {
    rec = json::parse(json_line);
  } catch (const json::parse_error& e) {
    throw SchemaError(line, "<record>", e.what());
  }
  if (!rec.is_object()) throw SchemaError(line, "<record>", "expected an object");

  TaskInstance task;
  task.uid = required_string(rec, "uid", line);
  if (task.uid.empty()) throw SchemaError(line, "uid", "empty");
  const std::string kind_name = required_string(rec, "kind", line);
  auto kind = parse_task_kind(kind_name);
  if (!kind) throw SchemaError(line, "kind", "unknown kind '" + kind_name + "'");
  task.kind = *kind;
  task.prompt = required_string(rec, "prompt", line);

  auto gold_it = rec.find("gold");
  if (gold_it == rec.end()) throw SchemaError(line, "gold", "missing");
  const json& gold = *gold_it;
  switch (task.kind) {
    case TaskKind::SingleId:
    case TaskKind::AttackTechnique: {
      if (!gold.is_string()) throw SchemaError(line, "gold", "expected a string");
      task.gold = IdLabel{checked_id(gold.get<std::string>(), task.kind, line, catalog)};
      break;
    }
    case TaskKind::IdSet: {
      if (!gold.is_array()) throw SchemaError(line, "gold", "expected an array");
      IdSetLabel set;
      for (const auto& g : gold) {
        if (!g.is_string()) throw SchemaError(line, "gold", "expected strings");
        set.ids.insert(checked_id(g.get<std::string>(), task.kind, line, catalog));
      }
      if (set.ids.empty()) throw SchemaError(line, "gold", "empty identifier set");
      task.gold = std::move(set);
      break;
    }
    case TaskKind::CvssVector: {
      if (!gold.is_string()) throw SchemaError(line, "gold", "expected a string");
      auto parsed = parse_cvss(gold.get<std::string>());
      if (!parsed.ok()) {
        throw SchemaError(line, "gold", std::string("invalid CVSS vector (") +
                                            to_string(parsed.error) + ")");
      }
      task.gold = *parsed.vector;
      break;
    }
    case TaskKind::ActorAttribution: {
      if (!gold.is_string()) throw SchemaError(line, "gold", "expected a string");
      std::string name(text::trim(gold.get<std::string>()));
      if (name.empty()) throw SchemaError(line, "gold", "empty actor name");
      task.gold = ActorLabel{std::move(name)};
      break;
    }
  }

  if (auto it = rec.find("label_details"); it != rec.end() && !it->is_null()) {
    if (!it->is_string()) throw SchemaError(line, "label_details", "expected a string");
    task.label_details = it->get<std::string>();
  }
  return task;
}

std::vector<TaskInstance> load_dataset(const std::filesystem::path& path, bool strict,
                                       const Catalog* catalog, std::vector<LoadIssue>* issues) {
  std::vector<TaskInstance> out;
  std::set<std::string, std::less<>> seen;
  std::size_t line_no = 0;
  for (const auto& line : read_lines(path)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      TaskInstance task = parse_task_record(line, line_no, catalog);
      if (!seen.insert(task.uid).second) {
        throw SchemaError(line_no, "uid", "duplicate uid '" + task.uid + "'");
      }
      out.push_back(std::move(task));
    } catch (const SchemaError& e) {
      if (strict) throw;
      if (issues != nullptr) issues->push_back({e.line(), e.field(), e.what()});
    }
  }
  return out;
}

std::string serialize_task(const TaskInstance& task) {
  json rec;
  rec["uid"] = task.uid;
  rec["kind"] = to_string(task.kind);
  rec["prompt"] = task.prompt;
  std::visit(
      [&](const auto& g) {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, IdLabel>) {
          rec["gold"] = g.id;
        } else if constexpr (std::is_same_v<T, IdSetLabel>) {
          rec["gold"] = g.ids;
        } else if constexpr (std::is_same_v<T, minerva::CvssVector>) {
          rec["gold"] = g.to_string();
        } else {
          rec["gold"] = g.name;
        }
      },
      task.gold);
  if (task.label_details) rec["label_details"] = *task.label_details;
  return rec.dump();
}

void write_dataset(const std::filesystem::path& path, const std::vector<TaskInstance>& tasks) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  for (const auto& t : tasks) out << serialize_task(t) << '\n';
  if (!out) throw IoError("write failure on " + path.string());
}

std::string grounding_context(const TaskInstance& task) {
  if (!task.label_details) return task.prompt;
  return task.prompt + "\n" + *task.label_details;
}

std::vector<std::string> gold_strings(const GoldLabel& gold) {
  return std::visit(
      [](const auto& g) -> std::vector<std::string> {
        using T = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<T, IdLabel>) {
          return {g.id};
        } else if constexpr (std::is_same_v<T, IdSetLabel>) {
          return {g.ids.begin(), g.ids.end()};
        } else if constexpr (std::is_same_v<T, minerva::CvssVector>) {
          return {g.to_string()};
        } else {
          return {g.name};
        }
      },
      gold);
}

}  // namespace minerva
