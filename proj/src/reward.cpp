#include "minerva/reward.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "minerva/error.hpp"
#include "minerva/identifiers.hpp"
#include "minerva/text.hpp"

namespace minerva {

namespace {

RewardReport parse_failure(std::string why) {
  RewardReport r;
  r.reward = 0.0;
  r.evidence = EvidenceKind::ParseFailure;
  r.failure = std::move(why);
  return r;
}

RewardReport with(EvidenceKind kind, double reward) {
  RewardReport r;
  r.reward = reward;
  r.evidence = kind;
  return r;
}

}  // namespace

const char* to_string(EvidenceKind kind) {
  switch (kind) {
    case EvidenceKind::ExactMatch: return "exact_match";
    case EvidenceKind::BaseTechniqueHalf: return "base_technique_half";
    case EvidenceKind::SetOverlap: return "set_overlap";
    case EvidenceKind::CvssDistance: return "cvss_distance";
    case EvidenceKind::AliasHit: return "alias_hit";
    case EvidenceKind::ParseFailure: return "parse_failure";
    case EvidenceKind::NoMatch: return "no_match";
  }
  return "unknown";
}

RewardFamily reward_family(TaskKind kind) {
  switch (kind) {
    case TaskKind::SingleId: return RewardFamily::Exact;
    case TaskKind::AttackTechnique: return RewardFamily::Technique;
    case TaskKind::IdSet: return RewardFamily::SetF1;
    case TaskKind::CvssVector: return RewardFamily::Cvss;
    case TaskKind::ActorAttribution: return RewardFamily::Actor;
  }
  throw ConfigError("unhandled task kind");
}

RewardReport reward_exact(const std::optional<ExtractedAnswer>& pred, const IdLabel& gold) {
  if (!pred) return parse_failure("no answer extracted");
  if (pred->ids.empty()) return parse_failure("no identifier in answer");
  return norm_id(pred->ids.front()) == norm_id(gold.id) ? with(EvidenceKind::ExactMatch, 1.0)
                                                        : with(EvidenceKind::NoMatch, 0.0);
}

RewardReport reward_technique(const std::optional<ExtractedAnswer>& pred, const IdLabel& gold) {
  if (!pred) return parse_failure("no answer extracted");
  if (pred->ids.empty()) return parse_failure("no technique identifier in answer");
  const std::string y = norm_id(pred->ids.front());
  const std::string t = norm_id(gold.id);
  if (y == t) return with(EvidenceKind::ExactMatch, 1.0);
  if (base_technique(y) == base_technique(t) && (has_subtechnique(y) || has_subtechnique(t))) {
    return with(EvidenceKind::BaseTechniqueHalf, 0.5);
  }
  return with(EvidenceKind::NoMatch, 0.0);
}

RewardReport set_f1(const std::set<std::string>& pred, const std::set<std::string>& gold) {
  RewardReport r;
  r.evidence = EvidenceKind::SetOverlap;
  r.pred_size = pred.size();
  r.gold_size = gold.size();
  for (const auto& id : pred) {
    if (gold.count(id) != 0) ++r.intersection;
  }
  if (pred.empty() && gold.empty()) {
    r.reward = 1.0;
  } else if (pred.empty() || gold.empty()) {
    r.reward = 0.0;
  } else {
    r.reward = static_cast<double>(2 * r.intersection) /
               static_cast<double>(pred.size() + gold.size());
  }
  return r;
}

RewardReport reward_set_f1(const std::optional<ExtractedAnswer>& pred, const IdSetLabel& gold,
                           const Catalog* catalog) {
  if (!pred) return parse_failure("no answer extracted");
  std::set<std::string> predicted;
  const auto& grammar = identifier_regexes(TaskKind::IdSet);
  for (const auto& raw : pred->ids) {
    std::string id = norm_id(raw);
    if (!grammar.matches(id)) continue;
    if (catalog != nullptr && !catalog->accepts(id)) continue;
    predicted.insert(std::move(id));
  }
  return set_f1(predicted, gold.ids);
}

RewardReport reward_cvss(const std::optional<ExtractedAnswer>& pred, const CvssVector& gold) {
  if (!pred) return parse_failure("no answer extracted");
  std::string candidate;
  if (!pred->ids.empty()) {
    candidate = pred->ids.front();
  } else if (auto token = find_cvss_token(pred->span)) {
    candidate = *token;
  } else {
    candidate = std::string(text::trim(pred->span));
  }
  auto parsed = parse_cvss(candidate);
  if (!parsed.ok()) {
    std::string why = to_string(parsed.error);
    if (!parsed.detail.empty()) why += ":" + parsed.detail;
    return parse_failure(std::move(why));
  }
  RewardReport r;
  r.evidence = EvidenceKind::CvssDistance;
  r.pred_score_tenths = cvss_base_score_tenths(*parsed.vector);
  r.gold_score_tenths = cvss_base_score_tenths(gold);
  const int diff = std::abs(r.pred_score_tenths - r.gold_score_tenths);
  r.reward = std::max(0, 100 - diff) / 100.0;
  return r;
}

RewardReport reward_actor(const std::optional<ExtractedAnswer>& pred, const ActorLabel& gold,
                          const AliasTable& table) {
  const auto* aliases = table.aliases(gold.name);
  if (aliases == nullptr) throw ConfigError("gold actor '" + gold.name + "' not in alias table");
  if (!pred) return parse_failure("no answer extracted");
  std::string_view rest = pred->span;
  while (true) {
    const auto cut = rest.find_first_of(",;");
    const std::string candidate = norm_actor(rest.substr(0, cut));
    if (!candidate.empty() && aliases->count(candidate) != 0) {
      RewardReport r = with(EvidenceKind::AliasHit, 1.0);
      r.matched_alias = candidate;
      return r;
    }
    if (cut == std::string_view::npos) break;
    rest.remove_prefix(cut + 1);
  }
  return with(EvidenceKind::NoMatch, 0.0);
}

RewardReport score_answer(const TaskInstance& task, const std::optional<ExtractedAnswer>& pred,
                          const RewardContext& ctx) {
  switch (reward_family(task.kind)) {
    case RewardFamily::Exact: return reward_exact(pred, std::get<IdLabel>(task.gold));
    case RewardFamily::Technique: return reward_technique(pred, std::get<IdLabel>(task.gold));
    case RewardFamily::SetF1:
      return reward_set_f1(pred, std::get<IdSetLabel>(task.gold), ctx.catalog);
    case RewardFamily::Cvss: return reward_cvss(pred, std::get<CvssVector>(task.gold));
    case RewardFamily::Actor:
      if (ctx.aliases == nullptr) throw ConfigError("actor attribution requires an alias table");
      return reward_actor(pred, std::get<ActorLabel>(task.gold), *ctx.aliases);
  }
  throw ConfigError("unhandled reward family");
}

ScoredCompletion score_completion(const TaskInstance& task, std::string_view completion,
                                  ExtractionMode mode, const RewardContext& ctx) {
  ScoredCompletion out;
  out.extracted = extract(completion, task.kind, mode);
  out.report = score_answer(task, out.extracted, ctx);
  return out;
}

double vsp_eval_score(std::span<const std::pair<double, double>> pairs) {
  if (pairs.empty()) throw DomainError("vsp_eval_score needs at least one pair");
  double total = 0.0;
  for (const auto& [pred, gold] : pairs) total += std::abs(pred - gold);
  return 1.0 - (total / static_cast<double>(pairs.size())) / 7.7;
}

}  // namespace minerva
