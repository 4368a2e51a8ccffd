#include "minerva/policy.hpp"

#include <cmath>
#include <fstream>

#include "json.hpp"
#include "minerva/error.hpp"
#include "minerva/kernels/kernels.hpp"

namespace minerva {

namespace {

constexpr const char* kSnapshotHeader = "# minerva-policy-snapshot v1";

std::vector<double> softmax_of(const std::vector<double>& logits, double temperature) {
  std::vector<double> p(logits.size());
  kernels::softmax(logits, temperature, p);
  return p;
}

}  // namespace

ToyPolicy::ToyPolicy(double temperature) : temperature_(temperature) {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) throw DomainError("temperature must be positive");
}

void ToyPolicy::add_prompt(std::string uid, std::vector<std::string> answers, std::vector<double> logits) {
  if (answers.empty()) throw DomainError("answer space for '" + uid + "' is empty");
  if (answers.size() != logits.size()) throw DomainError("answers and logits differ in length for '" + uid + "'");
  if (index_.contains(uid)) throw DomainError("duplicate prompt uid '" + uid + "'");
  index_.emplace(uid, prompts_.size());
  prompts_.push_back({std::move(uid), std::move(answers), std::move(logits)});
}

ToyPolicy::Prompt& ToyPolicy::at(std::string_view uid) {
  const auto it = index_.find(std::string(uid));
  if (it == index_.end()) throw DomainError("unknown prompt uid '" + std::string(uid) + "'");
  return prompts_[it->second];
}

const ToyPolicy::Prompt& ToyPolicy::at(std::string_view uid) const {
  return const_cast<ToyPolicy*>(this)->at(uid);
}

const std::vector<double>& ToyPolicy::logits(std::string_view uid) const { return at(uid).logits; }

std::vector<std::string> ToyPolicy::uids() const {
  std::vector<std::string> out;
  out.reserve(prompts_.size());
  for (const auto& p : prompts_) out.push_back(p.uid);
  return out;
}

bool ToyPolicy::contains(std::string_view uid) const { return index_.contains(std::string(uid)); }

const std::vector<std::string>& ToyPolicy::answers(std::string_view uid) const { return at(uid).answers; }

std::vector<double> ToyPolicy::probabilities(std::string_view uid) const {
  return softmax_of(at(uid).logits, temperature_);
}

void ToyPolicy::grpo_update(std::string_view uid, std::span<const std::size_t> picks,
                            std::span<const double> rewards, double lr) {
  if (picks.size() != rewards.size()) throw DomainError("picks and rewards differ in length");
  if (picks.size() < 2) throw DomainError("group normalization needs at least two rollouts");
  Prompt& p = at(uid);
  for (std::size_t a : picks) {
    if (a >= p.answers.size()) throw DomainError("rollout answer index out of range");
  }
  bool constant = true;
  for (double r : rewards) constant = constant && r == rewards.front();
  if (constant || lr == 0.0) return;

  const auto adv = group_advantages(rewards);
  const auto probs = softmax_of(p.logits, temperature_);
  const double step = lr / temperature_;
  double total = 0.0;
  for (double a : adv) total += a;
  // grad of sum_j A_j log softmax(z/T)_{a_j} = (sum_j A_j e_{a_j} - (sum_j A_j) p) / T
  std::vector<double> grad(p.logits.size(), 0.0);
  for (std::size_t j = 0; j < picks.size(); ++j) grad[picks[j]] += adv[j];
  kernels::axpy(grad, probs, -total);
  kernels::axpy(p.logits, grad, step);
}

void ToyPolicy::sft_step(std::string_view uid, std::size_t target, double lr) {
  Prompt& p = at(uid);
  if (target >= p.answers.size()) throw DomainError("distillation target outside the answer space");
  if (lr == 0.0) return;
  const auto probs = softmax_of(p.logits, temperature_);
  const double step = lr / temperature_;
  // grad of log softmax(z/T)_target = (e_target - p) / T
  kernels::axpy(p.logits, probs, -step);
  p.logits[target] += step;
}

std::unique_ptr<Policy> ToyPolicy::clone() const { return std::make_unique<ToyPolicy>(*this); }

void ToyPolicy::ema_toward(const Policy& actor, double decay) {
  const auto* toy = dynamic_cast<const ToyPolicy*>(&actor);
  if (toy == nullptr) throw DomainError("EMA requires a ToyPolicy actor");
  if (toy->prompts_.size() != prompts_.size()) throw DomainError("EMA actor has a different prompt set");
  for (std::size_t i = 0; i < prompts_.size(); ++i) {
    if (prompts_[i].uid != toy->prompts_[i].uid) throw DomainError("EMA actor has a different prompt order");
    kernels::blend(prompts_[i].logits, toy->prompts_[i].logits, decay);
  }
}

std::vector<double> logits_with_gold_probability(std::size_t answers, std::size_t gold, double p_gold) {
  if (answers == 0 || gold >= answers) throw DomainError("gold index outside the answer space");
  std::vector<double> z(answers, 0.0);
  if (answers == 1) return z;
  if (!(p_gold > 0.0 && p_gold < 1.0)) throw DomainError("p_gold must lie in (0, 1)");
  const double other = (1.0 - p_gold) / static_cast<double>(answers - 1);
  z[gold] = std::log(p_gold / other);
  return z;
}

std::vector<double> group_advantages(std::span<const double> rewards) {
  const double n = static_cast<double>(rewards.size());
  double mean = 0.0;
  for (double r : rewards) mean += r;
  mean /= n;
  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  const double sd = std::sqrt(var / n);
  std::vector<double> out;
  out.reserve(rewards.size());
  for (double r : rewards) out.push_back((r - mean) / (sd + 1e-8));
  return out;
}

TeacherState::TeacherState(const Policy& actor, double decay) : teacher_(actor.clone()), decay_(decay) {
  if (!(decay >= 0.0 && decay <= 1.0)) throw DomainError("EMA decay must lie in [0, 1]");
}

void TeacherState::update(const Policy& actor) { teacher_->ema_toward(actor, decay_); }

std::size_t sample_index(std::span<const double> probs, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] <= 0.0) continue;
    acc += probs[i];
    last_positive = i;
    if (u < acc) return i;
  }
  return last_positive;
}

std::vector<std::size_t> sample_answers(const Policy& policy, std::string_view uid, std::size_t n, Rng& rng) {
  if (n == 0) throw DomainError("rollout count must be at least 1");
  const auto probs = policy.probabilities(uid);
  std::vector<std::size_t> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(sample_index(probs, rng));
  return out;
}

std::vector<std::size_t> acr_sample_answers(const Policy& teacher, std::string_view uid,
                                            std::size_t gold, std::size_t k, double beta, Rng& rng) {
  if (!(beta >= 0.0 && beta <= 1.0)) throw DomainError("exposure beta must lie in [0, 1]");
  const auto probs = teacher.probabilities(uid);
  if (gold >= probs.size()) throw DomainError("gold index outside the answer space");
  std::vector<std::size_t> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    out.push_back(rng.uniform() < beta ? gold : sample_index(probs, rng));
  }
  return out;
}

double acr_success_probability(double beta, double p_gold, std::size_t k) {
  const double per_draw = beta + (1.0 - beta) * p_gold;
  return 1.0 - std::pow(1.0 - per_draw, static_cast<double>(k));
}

double entropy(std::span<const double> probs) {
  double h = 0.0;
  for (double p : probs) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

double entropy(const Policy& policy, std::string_view uid) { return entropy(policy.probabilities(uid)); }

// ---- snapshots -------------------------------------------------------------

ToyPolicy PolicySnapshot::to_policy() const {
  ToyPolicy policy(temperature);
  for (const auto& e : prompts) policy.add_prompt(e.uid, e.answers, e.logits);
  return policy;
}

std::vector<double> PolicySnapshot::probabilities(const SnapshotEntry& entry) const {
  return softmax_of(entry.logits, temperature);
}

void write_snapshot(const std::string& path, const ToyPolicy& policy, std::size_t step,
                    const std::unordered_map<std::string, std::size_t>& gold) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write snapshot: " + path);
  out << kSnapshotHeader << '\n';
  out << nlohmann::json{{"step", step}, {"temperature", policy.temperature()}}.dump() << '\n';
  for (const auto& uid : policy.uids()) {
    nlohmann::json rec{{"uid", uid}, {"answers", policy.answers(uid)}, {"logits", policy.logits(uid)}};
    if (const auto it = gold.find(uid); it != gold.end()) rec["gold"] = it->second;
    out << rec.dump() << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

PolicySnapshot read_snapshot(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open snapshot: " + path);
  std::string line;
  if (!std::getline(in, line) || line != kSnapshotHeader) {
    throw SchemaError(1, "header", "expected '" + std::string(kSnapshotHeader) + "'");
  }
  PolicySnapshot snap;
  std::size_t lineno = 1;
  auto parse = [&](const std::string& text) {
    try {
      return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
      throw SchemaError(lineno, "record", e.what());
    }
  };
  if (!std::getline(in, line)) throw SchemaError(2, "meta", "missing");
  ++lineno;
  try {
    const auto meta = parse(line);
    snap.step = meta.at("step").get<std::size_t>();
    snap.temperature = meta.at("temperature").get<double>();
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      const auto rec = parse(line);
      SnapshotEntry e;
      e.uid = rec.at("uid").get<std::string>();
      e.answers = rec.at("answers").get<std::vector<std::string>>();
      e.logits = rec.at("logits").get<std::vector<double>>();
      if (e.answers.size() != e.logits.size() || e.answers.empty()) {
        throw SchemaError(lineno, "logits", "length does not match answers");
      }
      if (rec.contains("gold")) {
        e.gold = rec["gold"].get<std::size_t>();
        if (*e.gold >= e.answers.size()) throw SchemaError(lineno, "gold", "index out of range");
      }
      snap.prompts.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(lineno, "record", e.what());
  }
  return snap;
}

}  // namespace minerva
