#pragma once

// Verifiable rewards for structured CTI answers. Every reward is a scalar in
// [0, 1] accompanied by the evidence that produced it.

#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "minerva/answer_extract.hpp"
#include "minerva/cvss.hpp"
#include "minerva/normalize.hpp"
#include "minerva/task_model.hpp"

namespace minerva {

enum class EvidenceKind {
  ExactMatch,
  BaseTechniqueHalf,
  SetOverlap,
  CvssDistance,
  AliasHit,
  ParseFailure,
  NoMatch,
};

const char* to_string(EvidenceKind kind);

struct RewardReport {
  double reward = 0.0;
  EvidenceKind evidence = EvidenceKind::NoMatch;

  // SetOverlap
  std::size_t intersection = 0;
  std::size_t pred_size = 0;
  std::size_t gold_size = 0;
  // CvssDistance, in tenths of a score point
  int pred_score_tenths = 0;
  int gold_score_tenths = 0;
  // AliasHit
  std::string matched_alias;
  // ParseFailure
  std::string failure;
};

/// Which reward family scores a task kind. One family per kind.
enum class RewardFamily { Exact, Technique, SetF1, Cvss, Actor };
RewardFamily reward_family(TaskKind kind);

RewardReport reward_exact(const std::optional<ExtractedAnswer>& pred, const IdLabel& gold);

/// 1.0 on exact match, 0.5 when the base techniques agree and either side
/// carries a sub-technique, 0.0 otherwise.
RewardReport reward_technique(const std::optional<ExtractedAnswer>& pred, const IdLabel& gold);

/// Set F1 on raw identifier sets: 1 if both empty, 0 if exactly one is empty,
/// else 2|P∩T| / (|P|+|T|).
RewardReport set_f1(const std::set<std::string>& pred, const std::set<std::string>& gold);

/// Predicted identifiers are filtered to the catalog (when given) before
/// scoring.
RewardReport reward_set_f1(const std::optional<ExtractedAnswer>& pred, const IdSetLabel& gold,
                           const Catalog* catalog = nullptr);

/// 1 - |s(pred) - s(gold)| / 10 on base scores; parse failures score 0.
RewardReport reward_cvss(const std::optional<ExtractedAnswer>& pred, const CvssVector& gold);

/// Throws ConfigError when the gold actor is missing from the table.
RewardReport reward_actor(const std::optional<ExtractedAnswer>& pred, const ActorLabel& gold,
                          const AliasTable& table);

struct RewardContext {
  const AliasTable* aliases = nullptr;
  const Catalog* catalog = nullptr;
};

/// Dispatches on the task's gold label.
RewardReport score_answer(const TaskInstance& task, const std::optional<ExtractedAnswer>& pred,
                          const RewardContext& ctx = {});

struct ScoredCompletion {
  std::optional<ExtractedAnswer> extracted;
  RewardReport report;
};

/// extract() followed by score_answer().
ScoredCompletion score_completion(const TaskInstance& task, std::string_view completion,
                                  ExtractionMode mode, const RewardContext& ctx = {});

/// Evaluation aggregate over (predicted, gold) base scores:
/// 1 - mean|pred - gold| / 7.7. Throws DomainError on an empty list.
double vsp_eval_score(std::span<const std::pair<double, double>> pairs);

}  // namespace minerva
