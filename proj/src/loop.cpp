#include "minerva/loop.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "minerva/error.hpp"
#include "minerva/support_theory.hpp"
#include "minerva/text.hpp"

namespace minerva {

namespace {

constexpr const char* kMetricsHeader = "# minerva-metrics v1";
constexpr const char* kEventsHeader = "# minerva-acr-events v1";
constexpr const char* kLabelMarker = "GROUND_TRUTH_LABELS:";

constexpr const char* kMetricColumns =
    "step,zero_solve_fraction,expected_zero_solve,mean_reward,mean_entropy,median_p_gold,"
    "detectable_fraction,acr_buffer,heuristic_pass_fraction,ml_pass_fraction,uid_coverage_fraction,"
    "distilled";
constexpr const char* kEventColumns =
    "step,uid,attempt,teacher_p_gold,alpha,heuristic_pass,eligible,accepted,distilled,p_gold_before,"
    "p_gold_after";

const char* reasoning_hint(TaskKind kind) {
  switch (kind) {
    case TaskKind::SingleId: return "Tie the identifier to the specific weakness, pattern or behaviour the input describes.";
    case TaskKind::AttackTechnique: return "Point to the observed adversary behaviour that the technique covers.";
    case TaskKind::IdSet: return "Account for every listed identifier using evidence from the input.";
    case TaskKind::CvssVector: return "Justify each base metric from the vulnerability description.";
    case TaskKind::ActorAttribution: return "Cite the tooling, targeting or infrastructure that links the activity to the actor.";
  }
  return "";
}

std::string join_first_tokens(std::string_view s, std::size_t n) {
  const auto tokens = text::whitespace_tokens(s);
  std::string out;
  for (std::size_t i = 0; i < tokens.size() && i < n; ++i) {
    if (i) out.push_back(' ');
    out.append(tokens[i]);
  }
  return out;
}

std::string assemble_acr(std::string_view prompt, const std::vector<std::string>& labels,
                         const std::optional<std::string>& details, TaskKind kind) {
  std::string out(prompt);
  out += "\n\nYou are writing a reasoning trace that will be used for training.\n\n";
  out += kLabelMarker;
  out += "\n";
  for (const auto& l : labels) out += "- " + l + "\n";
  if (details) out += "\nLABEL_REFERENCE:\n" + *details + "\n";
  out += "\nInstructions:\n";
  out += "- Explain, using only the input, why the label(s) above are correct.\n";
  out += std::string("- ") + reasoning_hint(kind) + "\n";
  out += "- Do not mention or hint that the label(s) were supplied to you.\n";
  out += "- Finish with the final answer in the format the original task asks for.\n";
  return out;
}

double sum_at(const std::vector<double>& probs, const std::vector<std::size_t>& idx) {
  double s = 0.0;
  for (std::size_t i : idx) s += probs[i];
  return s;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string fmt(double v, const char* spec = "%.6f") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s, std::size_t line, const char* field) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw SchemaError(line, field, "not a number: '" + s + "'");
  }
}

std::size_t parse_count(const std::string& s, std::size_t line, const char* field) {
  if (s.empty() || !std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    throw SchemaError(line, field, "not a count: '" + s + "'");
  }
  return static_cast<std::size_t>(std::stoull(s));
}

template <typename T, typename F>
std::optional<T> parse_optional(const std::string& s, F&& parse) {
  if (s.empty()) return std::nullopt;
  return parse(s);
}

const QualityScorer& pass_scorer() {
  static const ConstantPassScorer scorer;
  return scorer;
}

class LoopRunner {
 public:
  LoopRunner(const std::vector<TaskInstance>& tasks, Policy& policy, const LoopConfig& config,
             const LoopOptions& options, bool minerva)
      : tasks_(tasks), policy_(policy), cfg_(config), opt_(options), minerva_(minerva),
        traces_(options.defects), scorer_(options.scorer ? *options.scorer : pass_scorer()) {
    validate(config);
    if (tasks.empty()) throw ConfigError("dataset is empty");
    keys_ = build_answer_keys(tasks, policy, options);
    for (std::size_t i = 0; i < tasks.size(); ++i) uid_index_.emplace(tasks[i].uid, i);
    filter_ = options.filter;
    filter_.quality_threshold = config.quality_threshold;
    eps_ = detect_threshold(config.rollouts_per_prompt, options.detect_zeta);
    if (minerva_) teacher_.emplace(policy, config.ema_decay);
  }

  LoopResult run() {
    LoopResult result;
    for (std::size_t t = 1; t <= cfg_.total_steps; ++t) {
      StepMetrics m = rlvr_step(t);
      if (teacher_) teacher_->update(policy_);
      m.acr_buffer = buffer_.size();
      if (minerva_ && t % cfg_.distill_interval == 0) acr_interval(t, m, result.events);
      population_metrics(m);
      result.metrics.push_back(m);
      if (opt_.on_step) opt_.on_step(t, policy_);
    }
    return result;
  }

 private:
  StepMetrics rlvr_step(std::size_t t) {
    Rng rng(mix_seed(cfg_.seed, 2 * t));
    const std::size_t n = tasks_.size();
    const std::size_t b = std::min(cfg_.batch_size, n);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t i = 0; i < b; ++i) std::swap(order[i], order[i + rng.index(n - i)]);

    StepMetrics m;
    m.step = t;
    std::size_t zero = 0;
    double reward_total = 0.0;
    for (std::size_t bi = 0; bi < b; ++bi) {
      const std::size_t i = order[bi];
      const TaskInstance& task = tasks_[i];
      const auto& answers = policy_.answers(task.uid);
      const auto picks = sample_answers(policy_, task.uid, cfg_.rollouts_per_prompt, rng);
      std::vector<double> rewards;
      rewards.reserve(picks.size());
      for (std::size_t a : picks) {
        const std::string completion = traces_.generate(task, answers[a], rng);
        rewards.push_back(score_completion(task, completion, opt_.extraction, opt_.reward).report.reward);
      }
      const double best = *std::max_element(rewards.begin(), rewards.end());
      zero += best == 0.0;
      for (double r : rewards) reward_total += r;
      policy_.grpo_update(task.uid, picks, rewards, cfg_.lr_rlvr);
      if (minerva_ && best < 1.0 && !opt_.acr_excluded.contains(task.kind)) {
        if (in_buffer_.insert(i).second) buffer_.push_back(i);
      }
    }
    m.zero_solve_fraction = static_cast<double>(zero) / static_cast<double>(b);
    m.mean_reward = reward_total / static_cast<double>(b * cfg_.rollouts_per_prompt);
    return m;
  }

  void acr_interval(std::size_t t, StepMetrics& m, std::vector<AcrEvent>& events) {
    Rng rng(mix_seed(cfg_.seed, 2 * t + 1));
    std::vector<DistillPair> queue;
    std::unordered_map<std::string, std::size_t> event_of;
    std::unordered_map<std::string, std::string> acr_prompts;
    std::size_t generated = 0, heuristic = 0, ml = 0;
    const std::size_t first_event = events.size();

    for (std::size_t i : buffer_) {
      const TaskInstance& task = tasks_[i];
      const auto& answers = policy_.answers(task.uid);
      const std::size_t gold = keys_[i].full_credit.front();
      const std::string acr_prompt = build_acr_prompt(task);
      const std::string context = grounding_context(task);

      AcrEvent ev;
      ev.step = t;
      ev.uid = task.uid;
      ev.attempt = ++attempts_[task.uid];
      ev.teacher_p_gold = teacher_->policy().probabilities(task.uid)[gold];
      ev.alpha = acr_success_probability(cfg_.exposure, ev.teacher_p_gold, cfg_.acr_rollouts);

      const auto draws = acr_sample_answers(teacher_->policy(), task.uid, gold, cfg_.acr_rollouts,
                                            cfg_.exposure, rng);
      std::vector<std::string> candidates;
      std::vector<FilterVerdict> verdicts;
      for (std::size_t k = 0; k < draws.size(); ++k) {
        candidates.push_back(traces_.generate(task, answers[draws[k]], rng));
        const double s = score_completion(task, candidates.back(), opt_.extraction, opt_.reward).report.reward;
        const std::string trace_id = task.uid + "@" + std::to_string(t) + "#" + std::to_string(k);
        verdicts.push_back(evaluate_trace(candidates.back(), context, s, scorer_, filter_, trace_id));
        const FilterVerdict& v = verdicts.back();
        ++generated;
        if (v.heuristic_pass) {
          ++heuristic;
          ++ev.heuristic_pass;
          ml += v.quality >= filter_.quality_threshold - 1e-12;
        }
        ev.eligible += v.eligible;
      }
      const auto pick = select_trace(verdicts, mix_seed(cfg_.seed ^ text::fnv1a64(task.uid), t));
      if (pick) {
        ev.accepted = true;
        queue.push_back({task.uid, task.prompt, draws[*pick], candidates[*pick]});
      }
      acr_prompts.emplace(task.uid, acr_prompt);
      event_of.emplace(task.uid, events.size());
      events.push_back(std::move(ev));
    }

    for (const DistillPair& pair : queue) check_label_free(pair, acr_prompts.at(pair.uid));
    for (const DistillPair& pair : queue) {
      events[event_of.at(pair.uid)].p_gold_before = p_gold(pair.uid);
    }
    Rng drng(mix_seed(cfg_.seed ^ 0xD157111ULL, t));
    const auto used = distill_batch(queue, policy_, cfg_.distill_cap, cfg_.lr_scale * cfg_.lr_rlvr, drng);
    for (const DistillPair& pair : queue) {
      AcrEvent& ev = events[event_of.at(pair.uid)];
      ev.distilled = std::any_of(used.begin(), used.end(), [&](const DistillPair& u) { return u.uid == pair.uid; });
      if (ev.distilled) {
        ev.p_gold_after = p_gold(pair.uid);
      } else {
        ev.p_gold_before.reset();
      }
    }
    const std::size_t count = used.size();

    const std::size_t buffered = events.size() - first_event;
    m.heuristic_pass_fraction = generated ? static_cast<double>(heuristic) / static_cast<double>(generated) : 0.0;
    m.ml_pass_fraction = heuristic ? static_cast<double>(ml) / static_cast<double>(heuristic) : 0.0;
    m.uid_coverage_fraction = buffered ? static_cast<double>(queue.size()) / static_cast<double>(buffered) : 0.0;
    m.distilled = count;
    buffer_.clear();
    in_buffer_.clear();
  }

  void check_label_free(const DistillPair& pair, const std::string& acr_prompt) const {
    const TaskInstance& task = tasks_[index_of(pair.uid)];
    if (pair.prompt != task.prompt || pair.prompt == acr_prompt ||
        pair.prompt.find(kLabelMarker) != std::string::npos) {
      throw std::logic_error("distillation pair for '" + pair.uid + "' does not use the original prompt");
    }
  }

  double p_gold(const std::string& uid) const {
    return sum_at(policy_.probabilities(uid), keys_[index_of(uid)].full_credit);
  }

  std::size_t index_of(const std::string& uid) const { return uid_index_.at(uid); }

  void population_metrics(StepMetrics& m) const {
    std::vector<double> p_gold;
    p_gold.reserve(tasks_.size());
    double h = 0.0, z = 0.0;
    std::size_t detectable = 0;
    for (std::size_t i = 0; i < tasks_.size(); ++i) {
      const auto probs = policy_.probabilities(tasks_[i].uid);
      h += entropy(probs);
      const double pg = sum_at(probs, keys_[i].full_credit);
      const double pa = std::min(1.0, sum_at(probs, keys_[i].any_credit));
      z += std::pow(1.0 - pa, static_cast<double>(cfg_.rollouts_per_prompt));
      detectable += pg >= eps_;
      p_gold.push_back(pg);
    }
    const double n = static_cast<double>(tasks_.size());
    m.mean_entropy = h / n;
    m.expected_zero_solve = z / n;
    m.median_p_gold = median(std::move(p_gold));
    m.detectable_fraction = static_cast<double>(detectable) / n;
  }

  const std::vector<TaskInstance>& tasks_;
  Policy& policy_;
  LoopConfig cfg_;
  const LoopOptions& opt_;
  bool minerva_;
  SimTraceGenerator traces_;
  const QualityScorer& scorer_;
  FilterConfig filter_;
  double eps_ = 0.0;
  std::vector<AnswerKey> keys_;
  std::optional<TeacherState> teacher_;
  std::vector<std::size_t> buffer_;
  std::set<std::size_t> in_buffer_;
  std::unordered_map<std::string, std::size_t> attempts_;
  std::unordered_map<std::string, std::size_t> uid_index_;
};

}  // namespace

void validate(const LoopConfig& c) {
  auto fail = [](const char* field, const char* rule) {
    throw ConfigError(std::string("config field '") + field + "' must satisfy " + rule);
  };
  if (c.rollouts_per_prompt < 2) fail("rollouts_per_prompt", ">= 2");
  if (c.acr_rollouts < 1) fail("acr_rollouts", ">= 1");
  if (c.distill_interval < 1) fail("distill_interval", ">= 1");
  if (c.distill_cap < 1) fail("distill_cap", ">= 1");
  if (!(c.lr_rlvr >= 0.0) || !std::isfinite(c.lr_rlvr)) fail("lr_rlvr", ">= 0 and finite");
  if (!(c.lr_scale > 0.0 && c.lr_scale <= 1.0)) fail("lr_scale", "0 < gamma <= 1");
  if (!(c.ema_decay >= 0.0 && c.ema_decay <= 1.0)) fail("ema_decay", "0 <= decay <= 1");
  if (!(c.quality_threshold >= 0.0 && c.quality_threshold <= 1.0)) fail("quality_threshold", "0 <= tau_q <= 1");
  if (c.batch_size < 1) fail("batch_size", ">= 1");
  if (!(c.exposure >= 0.0 && c.exposure <= 1.0)) fail("exposure", "0 <= beta <= 1");
}

std::string build_acr_prompt(const TaskInstance& task, std::size_t token_budget) {
  const auto labels = gold_strings(task.gold);
  std::optional<std::string> details = task.label_details;
  std::string prompt = task.prompt;
  auto count = [](const std::string& s) { return text::whitespace_tokens(s).size(); };

  std::string out = assemble_acr(prompt, labels, details, task.kind);
  std::size_t total = count(out);
  if (total <= token_budget) return out;

  if (details) {
    const std::size_t detail_tokens = count(*details);
    const std::size_t over = total - token_budget;
    if (over < detail_tokens) {
      details = join_first_tokens(*details, detail_tokens - over);
      return assemble_acr(prompt, labels, details, task.kind);
    }
    details.reset();
    out = assemble_acr(prompt, labels, details, task.kind);
    total = count(out);
    if (total <= token_budget) return out;
  }
  const std::size_t prompt_tokens = count(prompt);
  const std::size_t over = total - token_budget;
  prompt = over < prompt_tokens ? join_first_tokens(prompt, prompt_tokens - over) : std::string();
  return assemble_acr(prompt, labels, details, task.kind);
}

std::vector<DistillPair> distill_batch(const std::vector<DistillPair>& queue, Policy& policy,
                                       std::size_t cap, double lr, Rng& rng) {
  const std::size_t count = std::min(queue.size(), cap);
  std::vector<std::size_t> order(queue.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<DistillPair> used;
  used.reserve(count);
  for (std::size_t j = 0; j < count; ++j) {
    std::swap(order[j], order[j + rng.index(order.size() - j)]);
    const DistillPair& pair = queue[order[j]];
    if (pair.prompt.find(kLabelMarker) != std::string::npos) {
      throw std::logic_error("distillation pair for '" + pair.uid + "' carries the label block");
    }
    policy.sft_step(pair.uid, pair.target, lr);
    used.push_back(pair);
  }
  return used;
}

std::vector<AnswerKey> build_answer_keys(const std::vector<TaskInstance>& tasks, const Policy& policy,
                                         const LoopOptions& options) {
  std::vector<AnswerKey> keys;
  std::vector<std::string> missing;
  std::set<std::string> seen;
  for (const auto& task : tasks) {
    if (!seen.insert(task.uid).second) throw ConfigError("duplicate dataset uid '" + task.uid + "'");
    if (!policy.contains(task.uid)) {
      missing.push_back(task.uid);
      continue;
    }
    AnswerKey key;
    const auto& answers = policy.answers(task.uid);
    for (std::size_t a = 0; a < answers.size(); ++a) {
      const double r =
          score_completion(task, "Final answer: " + answers[a], ExtractionMode::Strict, options.reward).report.reward;
      if (r > 0.0) key.any_credit.push_back(a);
      if (r == 1.0) key.full_credit.push_back(a);
    }
    if (key.full_credit.empty()) {
      throw ConfigError("no answer in the policy's space earns full credit for '" + task.uid + "'");
    }
    keys.push_back(std::move(key));
  }
  if (!missing.empty()) {
    std::string list;
    for (std::size_t i = 0; i < missing.size() && i < 10; ++i) list += (i ? ", " : "") + missing[i];
    if (missing.size() > 10) list += ", ...";
    throw ConfigError(std::to_string(missing.size()) + " dataset uid(s) missing from the policy: " + list);
  }
  return keys;
}

LoopResult run_loop(const std::vector<TaskInstance>& tasks, Policy& policy, const LoopConfig& config,
                    const LoopOptions& options) {
  return LoopRunner(tasks, policy, config, options, true).run();
}

LoopResult run_grpo_only(const std::vector<TaskInstance>& tasks, Policy& policy, const LoopConfig& config,
                         const LoopOptions& options) {
  return LoopRunner(tasks, policy, config, options, false).run();
}

// ---- files -----------------------------------------------------------------

std::optional<std::string> MetricsFile::meta_value(std::string_view key) const {
  for (const auto& [k, v] : meta) {
    if (k == key) return v;
  }
  return std::nullopt;
}

void write_metrics_csv(const std::string& path, const std::vector<StepMetrics>& metrics,
                       const std::vector<std::pair<std::string, std::string>>& meta) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write metrics: " + path);
  out << kMetricsHeader << '\n' << '#';
  for (const auto& [k, v] : meta) out << ' ' << k << '=' << v;
  out << '\n' << kMetricColumns << '\n';
  for (const auto& m : metrics) {
    out << m.step << ',' << fmt(m.zero_solve_fraction) << ',' << fmt(m.expected_zero_solve) << ','
        << fmt(m.mean_reward) << ',' << fmt(m.mean_entropy) << ',' << fmt(m.median_p_gold, "%.9f") << ','
        << fmt(m.detectable_fraction) << ',' << m.acr_buffer << ','
        << (m.heuristic_pass_fraction ? fmt(*m.heuristic_pass_fraction) : "") << ','
        << (m.ml_pass_fraction ? fmt(*m.ml_pass_fraction) : "") << ','
        << (m.uid_coverage_fraction ? fmt(*m.uid_coverage_fraction) : "") << ','
        << (m.distilled ? std::to_string(*m.distilled) : "") << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

MetricsFile read_metrics_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open metrics: " + path);
  std::string line;
  if (!std::getline(in, line) || line != kMetricsHeader) {
    throw SchemaError(1, "header", "expected '" + std::string(kMetricsHeader) + "'");
  }
  MetricsFile file;
  if (!std::getline(in, line) || line.empty() || line[0] != '#') throw SchemaError(2, "meta", "missing");
  std::istringstream meta(line.substr(1));
  std::string kv;
  while (meta >> kv) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw SchemaError(2, "meta", "expected key=value, got '" + kv + "'");
    file.meta.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (!std::getline(in, line) || line != kMetricColumns) throw SchemaError(3, "columns", "unexpected column header");
  std::size_t lineno = 3;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 12) throw SchemaError(lineno, "row", "expected 12 fields");
    StepMetrics m;
    m.step = parse_count(f[0], lineno, "step");
    m.zero_solve_fraction = parse_double(f[1], lineno, "zero_solve_fraction");
    m.expected_zero_solve = parse_double(f[2], lineno, "expected_zero_solve");
    m.mean_reward = parse_double(f[3], lineno, "mean_reward");
    m.mean_entropy = parse_double(f[4], lineno, "mean_entropy");
    m.median_p_gold = parse_double(f[5], lineno, "median_p_gold");
    m.detectable_fraction = parse_double(f[6], lineno, "detectable_fraction");
    m.acr_buffer = parse_count(f[7], lineno, "acr_buffer");
    auto num = [&](const char* field) { return [&, field](const std::string& s) { return parse_double(s, lineno, field); }; };
    m.heuristic_pass_fraction = parse_optional<double>(f[8], num("heuristic_pass_fraction"));
    m.ml_pass_fraction = parse_optional<double>(f[9], num("ml_pass_fraction"));
    m.uid_coverage_fraction = parse_optional<double>(f[10], num("uid_coverage_fraction"));
    m.distilled = parse_optional<std::size_t>(f[11], [&](const std::string& s) { return parse_count(s, lineno, "distilled"); });
    file.rows.push_back(m);
  }
  return file;
}

void write_events_csv(const std::string& path, const std::vector<AcrEvent>& events) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write events: " + path);
  out << kEventsHeader << '\n' << kEventColumns << '\n';
  for (const auto& e : events) {
    if (e.uid.find_first_of(",\n\r") != std::string::npos) throw IoError("uid not representable in CSV: " + e.uid);
    out << e.step << ',' << e.uid << ',' << e.attempt << ',' << fmt(e.teacher_p_gold, "%.9g") << ','
        << fmt(e.alpha, "%.9g") << ',' << e.heuristic_pass << ',' << e.eligible << ',' << (e.accepted ? 1 : 0)
        << ',' << (e.distilled ? 1 : 0) << ',' << (e.p_gold_before ? fmt(*e.p_gold_before, "%.17g") : "")
        << ',' << (e.p_gold_after ? fmt(*e.p_gold_after, "%.17g") : "") << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

std::vector<AcrEvent> read_events_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open events: " + path);
  std::string line;
  if (!std::getline(in, line) || line != kEventsHeader) {
    throw SchemaError(1, "header", "expected '" + std::string(kEventsHeader) + "'");
  }
  if (!std::getline(in, line) || line != kEventColumns) throw SchemaError(2, "columns", "unexpected column header");
  std::vector<AcrEvent> out;
  std::size_t lineno = 2;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 11) throw SchemaError(lineno, "row", "expected 11 fields");
    AcrEvent e;
    e.step = parse_count(f[0], lineno, "step");
    e.uid = f[1];
    e.attempt = parse_count(f[2], lineno, "attempt");
    e.teacher_p_gold = parse_double(f[3], lineno, "teacher_p_gold");
    e.alpha = parse_double(f[4], lineno, "alpha");
    e.heuristic_pass = parse_count(f[5], lineno, "heuristic_pass");
    e.eligible = parse_count(f[6], lineno, "eligible");
    e.accepted = parse_count(f[7], lineno, "accepted") != 0;
    e.distilled = parse_count(f[8], lineno, "distilled") != 0;
    auto num = [&](const char* field) { return [&, field](const std::string& s) { return parse_double(s, lineno, field); }; };
    e.p_gold_before = parse_optional<double>(f[9], num("p_gold_before"));
    e.p_gold_after = parse_optional<double>(f[10], num("p_gold_after"));
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace minerva
