#pragma once

// Answer-level policies: a finite answer space per prompt with softmax logits.

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "minerva/rng.hpp"

namespace minerva {

/// The surface the training loop needs from an actor or teacher.
class Policy {
 public:
  virtual ~Policy() = default;

  virtual std::vector<std::string> uids() const = 0;
  virtual bool contains(std::string_view uid) const = 0;
  /// Throws DomainError for unknown uids.
  virtual const std::vector<std::string>& answers(std::string_view uid) const = 0;
  virtual std::vector<double> probabilities(std::string_view uid) const = 0;

  /// Group-normalized policy-gradient step from one prompt's rollouts.
  virtual void grpo_update(std::string_view uid, std::span<const std::size_t> picks,
                           std::span<const double> rewards, double lr) = 0;
  /// One cross-entropy step toward `target`.
  virtual void sft_step(std::string_view uid, std::size_t target, double lr) = 0;

  virtual std::unique_ptr<Policy> clone() const = 0;
  /// this = decay * this + (1 - decay) * actor, parameter-wise.
  virtual void ema_toward(const Policy& actor, double decay) = 0;
};

/// Per-prompt logit vectors; the distribution is softmax(logits / temperature).
class ToyPolicy final : public Policy {
 public:
  explicit ToyPolicy(double temperature = 1.0);

  void add_prompt(std::string uid, std::vector<std::string> answers, std::vector<double> logits);

  double temperature() const { return temperature_; }
  std::size_t size() const { return prompts_.size(); }
  const std::vector<double>& logits(std::string_view uid) const;

  std::vector<std::string> uids() const override;
  bool contains(std::string_view uid) const override;
  const std::vector<std::string>& answers(std::string_view uid) const override;
  std::vector<double> probabilities(std::string_view uid) const override;
  void grpo_update(std::string_view uid, std::span<const std::size_t> picks,
                   std::span<const double> rewards, double lr) override;
  void sft_step(std::string_view uid, std::size_t target, double lr) override;
  std::unique_ptr<Policy> clone() const override;
  void ema_toward(const Policy& actor, double decay) override;

 private:
  struct Prompt {
    std::string uid;
    std::vector<std::string> answers;
    std::vector<double> logits;
  };
  Prompt& at(std::string_view uid);
  const Prompt& at(std::string_view uid) const;

  double temperature_;
  std::vector<Prompt> prompts_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Logits placing probability p_gold on `gold` and spreading the rest evenly.
std::vector<double> logits_with_gold_probability(std::size_t answers, std::size_t gold, double p_gold);

/// Group-normalized advantages (r - mean) / (std + 1e-8), population std.
std::vector<double> group_advantages(std::span<const double> rewards);

/// EMA copy of the actor used to sample answer-conditioned traces.
class TeacherState {
 public:
  TeacherState(const Policy& actor, double decay);
  void update(const Policy& actor);
  const Policy& policy() const { return *teacher_; }
  double decay() const { return decay_; }

 private:
  std::unique_ptr<Policy> teacher_;
  double decay_;
};

/// Index drawn from a probability vector by inverse CDF.
std::size_t sample_index(std::span<const double> probs, Rng& rng);

/// n independent draws from the policy. Throws for unknown uid or n == 0.
std::vector<std::size_t> sample_answers(const Policy& policy, std::string_view uid, std::size_t n, Rng& rng);

/// Exposure mixture: each of k draws is `gold` with probability beta, else a
/// teacher sample.
std::vector<std::size_t> acr_sample_answers(const Policy& teacher, std::string_view uid,
                                            std::size_t gold, std::size_t k, double beta, Rng& rng);

/// P(at least one gold draw among k) = 1 - (1 - beta - (1 - beta) p)^k.
double acr_success_probability(double beta, double p_gold, std::size_t k);

/// Shannon entropy in nats.
double entropy(std::span<const double> probs);
double entropy(const Policy& policy, std::string_view uid);

// ---- snapshots -------------------------------------------------------------

struct SnapshotEntry {
  std::string uid;
  std::vector<std::string> answers;
  std::vector<double> logits;
  std::optional<std::size_t> gold;
};

struct PolicySnapshot {
  std::size_t step = 0;
  double temperature = 1.0;
  std::vector<SnapshotEntry> prompts;

  ToyPolicy to_policy() const;
  std::vector<double> probabilities(const SnapshotEntry& entry) const;
};

/// Header line "# minerva-policy-snapshot v1", then one JSON object line with
/// {step, temperature}, then one JSON line per prompt. Doubles are written
/// with round-trip precision.
void write_snapshot(const std::string& path, const ToyPolicy& policy, std::size_t step,
                    const std::unordered_map<std::string, std::size_t>& gold = {});
PolicySnapshot read_snapshot(const std::string& path);

}  // namespace minerva
