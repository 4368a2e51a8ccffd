#pragma once

// Acceptance pipeline for answer-conditioned reasoning traces: heuristic
// checks (leakage, reasoning length, grounding, degeneracy), a pluggable
// quality scorer, and per-uid argmax-q selection.

#include <cstdint>
#include <memory>
#include <optional>
#include <regex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace minerva {

// ---- leakage -------------------------------------------------------------

class LeakageList {
 public:
  /// The shipped list (same contents as data/leakage_phrases.txt).
  static LeakageList builtin();

  /// Format: first line "# minerva-leakage v1"; then one entry per line,
  /// "phrase: <text>" or "regex: <ECMAScript pattern>"; '#' lines and blank
  /// lines are ignored. Throws IoError / SchemaError.
  static LeakageList load(const std::string& path);

  void add_phrase(std::string phrase);
  void add_regex(std::string pattern);
  void merge(const LeakageList& other);

  /// First matching cue, if any. Phrases match case-insensitively as
  /// substrings; regexes case-insensitively anywhere.
  std::optional<std::string> find(std::string_view response) const;

  const std::vector<std::string>& phrases() const { return phrases_; }
  const std::vector<std::string>& regex_sources() const { return regex_sources_; }

 private:
  std::vector<std::string> phrases_;  // lowercased
  std::vector<std::string> regex_sources_;
  std::vector<std::regex> regexes_;
};

bool check_leakage(std::string_view response, const LeakageList& list = LeakageList::builtin());

// ---- length and grounding --------------------------------------------------

/// Every line except the last non-empty one, trimmed.
std::string reasoning_portion(std::string_view response);

/// Code points in the reasoning portion.
std::size_t reasoning_length(std::string_view response);

bool check_reasoning_length(std::string_view response, std::size_t min_chars = 100);

/// Jaccard of word-token sets, identifiers removed from both sides first.
/// Both sets empty gives 0.
double grounding_jaccard(std::string_view response, std::string_view context);

// ---- degeneracy ------------------------------------------------------------

enum class DegeneracyReason {
  None,
  Rep3,
  Rep4,
  WindowRepeat,
  WindowJaccard,
  SentenceRepeat,
};

const char* to_string(DegeneracyReason reason);

struct DegeneracyConfig {
  std::size_t min_tokens = 30;
  double rep3_threshold = 0.70;
  double rep4_threshold = 0.75;
  std::size_t window = 24;
  std::size_t stride = 12;
  double window_jaccard = 0.9;
  std::size_t sentence_window = 6;
  std::size_t min_sentence_words = 6;
  double sentence_similarity = 0.75;
};

/// 1 - distinct/total n-grams over the token list; 0 when there are none.
double rep_n(std::span<const std::string_view> tokens, std::size_t n);

/// Split after [.!?] that is followed by whitespace; pieces trimmed, empty
/// pieces dropped.
std::vector<std::string_view> split_sentences(std::string_view text);

struct DegeneracyResult {
  bool flagged = false;
  DegeneracyReason reason = DegeneracyReason::None;
  std::size_t tokens = 0;
  double rep3 = 0.0;
  double rep4 = 0.0;
};

DegeneracyResult check_degenerate(std::string_view response, const DegeneracyConfig& config = {});

// ---- quality scorers -------------------------------------------------------

class QualityScorer {
 public:
  virtual ~QualityScorer() = default;
  virtual std::string name() const = 0;
  /// tokens are lowercased word tokens, already truncated.
  virtual double score(std::span<const std::string> tokens, std::string_view trace_id) const = 0;
};

class ConstantPassScorer final : public QualityScorer {
 public:
  std::string name() const override { return "constant"; }
  double score(std::span<const std::string>, std::string_view) const override { return 1.0; }
};

class ExternalScores final : public QualityScorer {
 public:
  explicit ExternalScores(std::unordered_map<std::string, double> scores)
      : scores_(std::move(scores)) {}
  /// JSONL records {"id": str, "q": number in [0,1]}.
  static ExternalScores load(const std::string& path);
  std::string name() const override { return "external"; }
  /// Unknown ids score 0.
  double score(std::span<const std::string>, std::string_view trace_id) const override;
  std::size_t size() const { return scores_.size(); }

 private:
  std::unordered_map<std::string, double> scores_;
};

/// Logistic model over binary hashed unigram + bigram features, each
/// document's feature vector scaled to unit L2 norm.
class HashedNgramLinearScorer final : public QualityScorer {
 public:
  HashedNgramLinearScorer(std::size_t dims, std::vector<double> weights, double bias);

  static constexpr std::size_t kDefaultDims = 1u << 16;

  /// Text file: "minerva-linear-scorer v1", "dims <n>", "bias <x>",
  /// "weights <count>", then "<index> <value>" for each non-zero weight.
  static HashedNgramLinearScorer load(const std::string& path);
  void save(const std::string& path) const;

  std::string name() const override { return "linear"; }
  double score(std::span<const std::string> tokens, std::string_view trace_id) const override;

  std::size_t dims() const { return dims_; }
  double bias() const { return bias_; }
  const std::vector<double>& weights() const { return weights_; }

  /// Sorted distinct feature indices of a token sequence.
  static std::vector<std::uint32_t> features(std::span<const std::string> tokens, std::size_t dims);

 private:
  std::size_t dims_;
  std::vector<double> weights_;
  double bias_;
};

constexpr std::size_t kScorerMaxTokens = 1024;

/// Lowercased word tokens, first kScorerMaxTokens kept.
std::vector<std::string> scorer_tokens(std::string_view response);

double score_quality(std::string_view response, const QualityScorer& scorer,
                     std::string_view trace_id = {});

struct LabeledText {
  std::string text;
  bool good = false;
};

struct LinearTrainConfig {
  std::size_t dims = HashedNgramLinearScorer::kDefaultDims;
  std::size_t epochs = 12;
  double learning_rate = 0.5;
  double l2 = 1e-6;
  double holdout_fraction = 0.2;
  std::uint64_t seed = 1;
};

struct TrainedScorer {
  std::shared_ptr<HashedNgramLinearScorer> scorer;
  double heldout_accuracy = 0.0;
  std::size_t train_size = 0;
  std::size_t heldout_size = 0;
};

/// Throws DomainError on empty or single-class input.
TrainedScorer train_linear_scorer(std::span<const LabeledText> labeled,
                                  const LinearTrainConfig& config = {});

// ---- verdicts and selection ------------------------------------------------

struct FilterConfig {
  std::size_t min_reasoning_chars = 100;
  double min_grounding = 0.05;
  double quality_threshold = 0.5;
  DegeneracyConfig degeneracy;
  LeakageList leakage = LeakageList::builtin();
};

struct FilterVerdict {
  double verifier_score = 0.0;
  bool leakage = false;
  bool short_reasoning = false;
  double grounding = 0.0;
  bool degenerate = false;
  DegeneracyReason degeneracy_reason = DegeneracyReason::None;
  double quality = 0.0;
  bool heuristic_pass = false;
  bool eligible = false;
};

FilterVerdict evaluate_trace(std::string_view response, std::string_view context,
                             double verifier_score, const QualityScorer& scorer,
                             const FilterConfig& config = {}, std::string_view trace_id = {});

/// Index of the max-quality eligible candidate; exact ties are broken
/// uniformly at random from `seed`. Absent when nothing is eligible.
std::optional<std::size_t> select_trace(std::span<const FilterVerdict> candidates,
                                        std::uint64_t seed);

}  // namespace minerva
