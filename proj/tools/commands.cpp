#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "minerva/cvss.hpp"
#include "minerva/error.hpp"
#include "minerva/reward.hpp"
#include "minerva/rng.hpp"
#include "minerva/support_theory.hpp"
#include "minerva/text.hpp"

namespace minerva::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

constexpr const char* kRewardsHeader = "# minerva-rewards v1";
constexpr const char* kVerdictsHeader = "# minerva-verdicts v1";
constexpr const char* kCheckHeader = "# minerva-theory-check v1";
constexpr const char* kRunConfigSchema = "minerva-run-config v1";

template <typename F>
void parallel_for(std::size_t n, unsigned threads, F&& body) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          next = n;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return in;
}

std::ofstream open_out(const std::string& path) {
  if (const auto parent = fs::path(path).parent_path(); !parent.empty()) fs::create_directories(parent);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  return out;
}

// Non-empty lines of a JSONL file parsed as objects, with 1-based line numbers.
std::vector<std::pair<std::size_t, json>> read_jsonl(const std::string& path) {
  auto in = open_in(path);
  std::vector<std::pair<std::size_t, json>> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty() || line.starts_with("#")) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      throw SchemaError(n, "<record>", std::string("invalid JSON: ") + e.what());
    }
    if (!rec.is_object()) throw SchemaError(n, "<record>", "expected an object");
    out.emplace_back(n, std::move(rec));
  }
  return out;
}

std::string get_string(const json& rec, const char* field, std::size_t line) {
  const auto it = rec.find(field);
  if (it == rec.end()) throw SchemaError(line, field, "missing");
  if (!it->is_string()) throw SchemaError(line, field, "expected a string");
  return it->get<std::string>();
}

double get_number(const json& rec, const char* field, std::size_t line) {
  const auto it = rec.find(field);
  if (it == rec.end()) throw SchemaError(line, field, "missing");
  if (!it->is_number()) throw SchemaError(line, field, "expected a number");
  return it->get<double>();
}

// Hand-assembled JSON object so numeric fields keep a fixed rendering.
class Record {
 public:
  Record& str(const char* key, const std::string& v) { return raw(key, json(v).dump()); }
  Record& num(const char* key, double v, int decimals) { return raw(key, fixed(v, decimals)); }
  Record& count(const char* key, std::size_t v) { return raw(key, std::to_string(v)); }
  Record& flag(const char* key, bool v) { return raw(key, v ? "true" : "false"); }
  Record& raw(const char* key, const std::string& v) {
    body_ += body_.empty() ? "{" : ",";
    body_ += json(key).dump() + ":" + v;
    return *this;
  }
  std::string done() const { return body_.empty() ? "{}" : body_ + "}"; }

 private:
  std::string body_;
};

std::string uid_list(const std::vector<std::string>& uids) {
  std::string out;
  for (std::size_t i = 0; i < uids.size() && i < 20; ++i) out += (i ? ", " : "") + uids[i];
  if (uids.size() > 20) out += ", ... (" + std::to_string(uids.size()) + " total)";
  return out;
}

std::string extracted_json(const std::optional<ExtractedAnswer>& e) {
  if (!e) return "null";
  ojson j;
  j["span"] = e->span;
  j["ids"] = e->ids;
  j["source"] = to_string(e->source);
  return j.dump();
}

}  // namespace

std::string fixed(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
  return buf;
}

// ---- score -----------------------------------------------------------------

ScoreSummary cmd_score(const ScoreOptions& o) {
  const std::optional<Catalog> catalog =
      o.catalog.empty() ? std::nullopt : std::optional<Catalog>(load_catalog(o.catalog));
  const std::optional<AliasTable> aliases =
      o.aliases.empty() ? std::nullopt : std::optional<AliasTable>(load_alias_table(o.aliases));
  const auto tasks = load_dataset(o.dataset, true, catalog ? &*catalog : nullptr);
  std::map<std::string, std::size_t, std::less<>> by_uid;
  for (std::size_t i = 0; i < tasks.size(); ++i) by_uid.emplace(tasks[i].uid, i);

  struct Rollout {
    std::size_t task;
    std::string completion;
  };
  std::vector<Rollout> rollouts;
  std::vector<std::string> unknown;
  for (const auto& [line, rec] : read_jsonl(o.rollouts)) {
    const auto uid = get_string(rec, "uid", line);
    const auto completion = get_string(rec, "completion", line);
    const auto it = by_uid.find(uid);
    if (it == by_uid.end()) {
      if (std::find(unknown.begin(), unknown.end(), uid) == unknown.end()) unknown.push_back(uid);
      continue;
    }
    rollouts.push_back({it->second, completion});
  }
  if (!unknown.empty()) throw ConfigError("rollout uids missing from the dataset: " + uid_list(unknown));

  RewardContext ctx;
  ctx.aliases = aliases ? &*aliases : nullptr;
  ctx.catalog = catalog ? &*catalog : nullptr;
  std::vector<ScoredCompletion> scored(rollouts.size());
  parallel_for(rollouts.size(), o.threads, [&](std::size_t i) {
    scored[i] = score_completion(tasks[rollouts[i].task], rollouts[i].completion, o.mode, ctx);
  });

  auto out = open_out(o.out);
  out << kRewardsHeader << "\n";
  ScoreSummary s;
  s.rollouts = rollouts.size();
  std::map<std::size_t, double> best;
  std::vector<std::pair<double, double>> vsp_pairs;
  double total = 0.0;
  for (std::size_t i = 0; i < rollouts.size(); ++i) {
    const TaskInstance& task = tasks[rollouts[i].task];
    const RewardReport& r = scored[i].report;
    Record rec;
    rec.str("uid", task.uid).num("reward", r.reward, 6).str("evidence", to_string(r.evidence));
    rec.raw("extracted", extracted_json(scored[i].extracted));
    switch (r.evidence) {
      case EvidenceKind::SetOverlap:
        rec.count("intersection", r.intersection).count("pred_size", r.pred_size).count("gold_size", r.gold_size);
        break;
      case EvidenceKind::CvssDistance:
        rec.num("pred_score", r.pred_score_tenths / 10.0, 1).num("gold_score", r.gold_score_tenths / 10.0, 1);
        break;
      case EvidenceKind::AliasHit:
        rec.str("matched_alias", r.matched_alias);
        break;
      case EvidenceKind::ParseFailure:
        rec.str("failure", r.failure);
        break;
      default:
        break;
    }
    out << rec.done() << "\n";
    total += r.reward;
    auto [it, fresh] = best.emplace(rollouts[i].task, r.reward);
    if (!fresh) it->second = std::max(it->second, r.reward);
    if (o.vsp && task.kind == TaskKind::CvssVector) {
      const double gold = cvss_base_score_tenths(std::get<CvssVector>(task.gold)) / 10.0;
      const double pred = r.evidence == EvidenceKind::CvssDistance ? r.pred_score_tenths / 10.0 : 0.0;
      vsp_pairs.emplace_back(pred, gold);
    }
  }
  if (!out) throw IoError("write failed: " + o.out);
  s.prompts = best.size();
  s.mean_reward = s.rollouts ? total / static_cast<double>(s.rollouts) : 0.0;
  std::size_t zero = 0;
  for (const auto& [task, r] : best) zero += r == 0.0;
  s.zero_solve_fraction = s.prompts ? static_cast<double>(zero) / static_cast<double>(s.prompts) : 0.0;
  s.vsp_pairs = vsp_pairs.size();
  if (!vsp_pairs.empty()) s.vsp = vsp_eval_score(vsp_pairs);
  return s;
}

// ---- filter ----------------------------------------------------------------

FilterSummary cmd_filter(const FilterOptions& o, std::ostream& warnings) {
  std::shared_ptr<const QualityScorer> scorer;
  if (!o.external_scores.empty()) {
    scorer = std::make_shared<ExternalScores>(ExternalScores::load(o.external_scores));
  } else if (!o.scorer.empty() && fs::exists(o.scorer)) {
    scorer = std::make_shared<HashedNgramLinearScorer>(HashedNgramLinearScorer::load(o.scorer));
  } else {
    warnings << "warning: "
             << (o.scorer.empty() ? std::string("no scorer given") : "scorer file not found: " + o.scorer)
             << "; every trace passes the quality stage\n";
    scorer = std::make_shared<ConstantPassScorer>();
  }

  FilterConfig cfg;
  cfg.quality_threshold = o.quality_threshold;
  cfg.min_grounding = o.min_grounding;
  cfg.min_reasoning_chars = o.min_reasoning_chars;
  if (!o.leakage.empty()) cfg.leakage.merge(LeakageList::load(o.leakage));

  std::map<std::string, std::string, std::less<>> contexts;
  if (!o.dataset.empty()) {
    for (const auto& task : load_dataset(o.dataset, true)) contexts[task.uid] = grounding_context(task);
  }
  if (!o.contexts.empty()) {
    for (const auto& [line, rec] : read_jsonl(o.contexts)) contexts[get_string(rec, "uid", line)] = get_string(rec, "context", line);
  }

  struct Trace {
    std::string uid, id, response, context;
    double s;
  };
  std::vector<Trace> traces;
  std::map<std::string, std::vector<std::size_t>> groups;
  std::vector<std::string> uid_order;
  for (const auto& [line, rec] : read_jsonl(o.traces)) {
    Trace t;
    t.uid = get_string(rec, "uid", line);
    t.response = get_string(rec, "response", line);
    t.s = get_number(rec, "verifier_score", line);
    if (t.s < 0.0 || t.s > 1.0) throw SchemaError(line, "verifier_score", "outside [0, 1]");
    if (rec.contains("context")) {
      t.context = get_string(rec, "context", line);
    } else if (const auto it = contexts.find(t.uid); it != contexts.end()) {
      t.context = it->second;
    } else {
      throw SchemaError(line, "context", "missing and no context for uid '" + t.uid + "'");
    }
    auto& group = groups[t.uid];
    if (group.empty()) uid_order.push_back(t.uid);
    t.id = rec.contains("id") ? get_string(rec, "id", line) : t.uid + "#" + std::to_string(group.size());
    group.push_back(traces.size());
    traces.push_back(std::move(t));
  }

  std::vector<FilterVerdict> verdicts(traces.size());
  parallel_for(traces.size(), o.threads, [&](std::size_t i) {
    verdicts[i] = evaluate_trace(traces[i].response, traces[i].context, traces[i].s, *scorer, cfg, traces[i].id);
  });

  std::vector<bool> chosen(traces.size(), false);
  std::size_t selected = 0;
  for (const auto& uid : uid_order) {
    const auto& idx = groups[uid];
    std::vector<FilterVerdict> group;
    for (std::size_t i : idx) group.push_back(verdicts[i]);
    if (const auto pick = select_trace(group, mix_seed(o.seed ^ text::fnv1a64(uid)))) {
      chosen[idx[*pick]] = true;
      ++selected;
    }
  }

  auto out = open_out(o.out);
  out << kVerdictsHeader << "\n";
  std::size_t heuristic = 0, ml = 0, eligible = 0;
  for (std::size_t i = 0; i < traces.size(); ++i) {
    const FilterVerdict& v = verdicts[i];
    Record rec;
    rec.str("uid", traces[i].uid).str("id", traces[i].id).num("verifier_score", v.verifier_score, 6);
    rec.flag("leakage", v.leakage).flag("short_reasoning", v.short_reasoning).num("grounding", v.grounding, 6);
    rec.flag("degenerate", v.degenerate).str("degeneracy_reason", to_string(v.degeneracy_reason));
    rec.num("quality", v.quality, 6).flag("heuristic_pass", v.heuristic_pass).flag("eligible", v.eligible);
    rec.flag("chosen", chosen[i]);
    out << rec.done() << "\n";
    heuristic += v.heuristic_pass;
    ml += v.heuristic_pass && v.quality >= cfg.quality_threshold - 1e-12;
    eligible += v.eligible;
  }
  if (!out) throw IoError("write failed: " + o.out);

  FilterSummary s;
  s.traces = traces.size();
  s.uids = uid_order.size();
  s.scorer = scorer->name();
  auto frac = [](std::size_t a, std::size_t b) { return b ? static_cast<double>(a) / static_cast<double>(b) : 0.0; };
  s.heuristic_pass_fraction = frac(heuristic, s.traces);
  s.ml_pass_fraction = frac(ml, heuristic);
  s.eligible_fraction = frac(eligible, s.traces);
  s.selection_fraction = frac(selected, s.uids);
  return s;
}

// ---- train-scorer ----------------------------------------------------------

TrainedScorer cmd_train_scorer(const TrainOptions& o) {
  std::vector<LabeledText> labeled;
  for (const auto& [line, rec] : read_jsonl(o.labels)) {
    LabeledText t;
    t.text = get_string(rec, "text", line);
    const auto it = rec.find("label");
    if (it == rec.end()) throw SchemaError(line, "label", "missing");
    if (it->is_boolean()) {
      t.good = it->get<bool>();
    } else if (it->is_number_integer() && (*it == 0 || *it == 1)) {
      t.good = *it == 1;
    } else {
      throw SchemaError(line, "label", "expected true/false or 0/1");
    }
    labeled.push_back(std::move(t));
  }
  auto trained = train_linear_scorer(labeled, o.config);
  trained.scorer->save(o.out);
  return trained;
}

// ---- simulate --------------------------------------------------------------

namespace {

class ConfigReader {
 public:
  ConfigReader(const json& obj, std::string prefix) : obj_(obj), prefix_(std::move(prefix)) {
    if (!obj_.is_object()) throw ConfigError("config " + where() + " must be an object");
  }

  void size(const char* key, std::size_t& out) {
    if (const json* v = take(key)) {
      if (!v->is_number_unsigned()) fail(key, "a non-negative integer");
      out = v->get<std::size_t>();
    }
  }
  void u64(const char* key, std::uint64_t& out) {
    if (const json* v = take(key)) {
      if (!v->is_number_unsigned()) fail(key, "a non-negative integer");
      out = v->get<std::uint64_t>();
    }
  }
  void real(const char* key, double& out) {
    if (const json* v = take(key)) {
      if (!v->is_number()) fail(key, "a number");
      out = v->get<double>();
    }
  }
  void str(const char* key, std::string& out) {
    if (const json* v = take(key)) {
      if (!v->is_string()) fail(key, "a string");
      out = v->get<std::string>();
    }
  }
  const json* object(const char* key) {
    const json* v = take(key);
    if (v && !v->is_object()) fail(key, "an object");
    return v;
  }
  void finish() const {
    for (const auto& [key, value] : obj_.items()) {
      if (!seen_.contains(key)) throw ConfigError("unknown config key '" + prefix_ + key + "'");
    }
  }

 private:
  const json* take(const char* key) {
    seen_.insert(key);
    const auto it = obj_.find(key);
    return it == obj_.end() ? nullptr : &*it;
  }
  [[noreturn]] void fail(const char* key, const char* what) const {
    throw ConfigError("config key '" + prefix_ + key + "' must be " + what);
  }
  std::string where() const { return prefix_.empty() ? "root" : "'" + prefix_.substr(0, prefix_.size() - 1) + "'"; }

  const json& obj_;
  std::string prefix_;
  std::set<std::string> seen_;
};

std::string resolve_relative(const std::string& path, const std::string& base) {
  if (path.empty() || base.empty() || fs::path(path).is_absolute()) return path;
  return (fs::path(base) / path).lexically_normal().string();
}

std::string snapshot_name(std::size_t step) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "step_%06zu.jsonl", step);
  return buf;
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text, const std::string& base_dir) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig c;
  ConfigReader r(root, "");
  std::string schema;
  r.str("schema", schema);
  if (!schema.empty() && schema != kRunConfigSchema) throw ConfigError("unsupported config schema '" + schema + "'");
  r.str("mode", c.mode);
  r.size("rollouts_per_prompt", c.loop.rollouts_per_prompt);
  r.size("acr_rollouts", c.loop.acr_rollouts);
  r.size("distill_interval", c.loop.distill_interval);
  r.size("distill_cap", c.loop.distill_cap);
  r.real("lr_rlvr", c.loop.lr_rlvr);
  r.real("lr_scale", c.loop.lr_scale);
  r.real("ema_decay", c.loop.ema_decay);
  r.real("quality_threshold", c.loop.quality_threshold);
  r.size("batch_size", c.loop.batch_size);
  r.size("total_steps", c.loop.total_steps);
  r.real("exposure", c.loop.exposure);
  r.u64("seed", c.loop.seed);
  r.size("snapshot_every", c.snapshot_every);
  r.real("detect_zeta", c.detect_zeta);
  r.real("min_grounding", c.min_grounding);
  r.size("min_reasoning_chars", c.min_reasoning_chars);
  std::string extraction = to_string(c.extraction);
  r.str("extraction", extraction);
  r.str("tasks", c.tasks);
  r.str("policy", c.policy);
  r.str("aliases", c.aliases);
  r.str("catalog", c.catalog);
  r.str("scorer", c.scorer);
  r.str("leakage", c.leakage);
  if (const json* d = r.object("dataset")) {
    ConfigReader dr(*d, "dataset.");
    dr.size("prompts", c.dataset.prompts);
    dr.size("answers", c.dataset.answers);
    dr.real("p0", c.dataset.p0);
    dr.u64("seed", c.dataset.seed);
    dr.real("temperature", c.dataset.temperature);
    dr.finish();
  }
  if (const json* d = r.object("defects")) {
    ConfigReader dr(*d, "defects.");
    dr.real("leakage", c.defects.leakage);
    dr.real("repetition", c.defects.repetition);
    dr.real("answer_only", c.defects.answer_only);
    dr.finish();
  }
  r.finish();

  if (c.mode != "minerva" && c.mode != "grpo") throw ConfigError("config key 'mode' must be \"minerva\" or \"grpo\"");
  const auto mode = parse_extraction_mode(extraction);
  if (!mode) throw ConfigError("config key 'extraction' must be \"strict\" or \"permissive\"");
  c.extraction = *mode;
  if (c.tasks.empty() != c.policy.empty()) throw ConfigError("config keys 'tasks' and 'policy' must be given together");
  for (std::string* p : {&c.tasks, &c.policy, &c.aliases, &c.catalog, &c.scorer, &c.leakage}) {
    *p = resolve_relative(*p, base_dir);
  }
  return c;
}

RunConfig load_run_config(const std::string& path) {
  auto in = open_in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str(), fs::path(path).parent_path().string());
}

std::string resolve_config_path(const std::string& name) {
  if (fs::is_regular_file(name)) return name;
  if (const char* dir = std::getenv("MINERVA_CONFIG_DIR"); dir && *dir) {
    for (const std::string& candidate : {name, name + ".json"}) {
      const fs::path p = fs::path(dir) / candidate;
      if (fs::is_regular_file(p)) return p.string();
    }
  }
  throw IoError("config not found: " + name);
}

std::string run_config_json(const RunConfig& c) {
  ojson j;
  j["schema"] = kRunConfigSchema;
  j["mode"] = c.mode;
  j["rollouts_per_prompt"] = c.loop.rollouts_per_prompt;
  j["acr_rollouts"] = c.loop.acr_rollouts;
  j["distill_interval"] = c.loop.distill_interval;
  j["distill_cap"] = c.loop.distill_cap;
  j["lr_rlvr"] = c.loop.lr_rlvr;
  j["lr_scale"] = c.loop.lr_scale;
  j["ema_decay"] = c.loop.ema_decay;
  j["quality_threshold"] = c.loop.quality_threshold;
  j["batch_size"] = c.loop.batch_size;
  j["total_steps"] = c.loop.total_steps;
  j["exposure"] = c.loop.exposure;
  j["seed"] = c.loop.seed;
  j["snapshot_every"] = c.snapshot_every;
  j["detect_zeta"] = c.detect_zeta;
  j["min_grounding"] = c.min_grounding;
  j["min_reasoning_chars"] = c.min_reasoning_chars;
  j["extraction"] = to_string(c.extraction);
  if (c.tasks.empty()) {
    j["dataset"] = {{"prompts", c.dataset.prompts}, {"answers", c.dataset.answers}, {"p0", c.dataset.p0},
                    {"seed", c.dataset.seed}, {"temperature", c.dataset.temperature}};
  } else {
    j["tasks"] = c.tasks;
    j["policy"] = c.policy;
  }
  for (const auto& [key, value] : {std::pair{"aliases", &c.aliases}, {"catalog", &c.catalog},
                                   {"scorer", &c.scorer}, {"leakage", &c.leakage}}) {
    if (!value->empty()) j[key] = *value;
  }
  j["defects"] = {{"leakage", c.defects.leakage}, {"repetition", c.defects.repetition},
                  {"answer_only", c.defects.answer_only}};
  return j.dump(2) + "\n";
}

SimulateSummary cmd_simulate(const RunConfig& c, const std::string& out_dir) {
  validate(c.loop);
  if (!(c.detect_zeta > 0.0 && c.detect_zeta < 1.0)) throw ConfigError("config key 'detect_zeta' must lie in (0, 1)");

  std::vector<TaskInstance> tasks;
  ToyPolicy policy;
  std::optional<Catalog> catalog;
  std::optional<AliasTable> aliases;
  if (!c.catalog.empty()) catalog = load_catalog(c.catalog);
  if (!c.aliases.empty()) aliases = load_alias_table(c.aliases);
  if (c.tasks.empty()) {
    auto problem = make_hard_dataset(c.dataset);
    tasks = std::move(problem.tasks);
    policy = std::move(problem.policy);
  } else {
    tasks = load_dataset(c.tasks, true, catalog ? &*catalog : nullptr);
    policy = read_snapshot(c.policy).to_policy();
  }

  LoopOptions opt;
  opt.reward.aliases = aliases ? &*aliases : nullptr;
  opt.reward.catalog = catalog ? &*catalog : nullptr;
  opt.extraction = c.extraction;
  opt.defects = c.defects;
  opt.detect_zeta = c.detect_zeta;
  opt.filter.min_grounding = c.min_grounding;
  opt.filter.min_reasoning_chars = c.min_reasoning_chars;
  if (!c.leakage.empty()) opt.filter.leakage.merge(LeakageList::load(c.leakage));
  if (!c.scorer.empty()) opt.scorer = std::make_shared<HashedNgramLinearScorer>(HashedNgramLinearScorer::load(c.scorer));
  SimTraceGenerator{c.defects};  // rejects invalid defect rates before any compute

  const auto keys = build_answer_keys(tasks, policy, opt);
  std::unordered_map<std::string, std::size_t> gold;
  for (std::size_t i = 0; i < tasks.size(); ++i) gold.emplace(tasks[i].uid, keys[i].full_credit.front());

  const fs::path dir(out_dir);
  fs::create_directories(dir);
  SimulateSummary summary;
  if (c.snapshot_every > 0) {
    fs::create_directories(dir / "snapshots");
    write_snapshot((dir / "snapshots" / snapshot_name(0)).string(), policy, 0, gold);
    ++summary.snapshots;
    opt.on_step = [&](std::size_t step, const Policy& actor) {
      if (step % c.snapshot_every == 0 || step == c.loop.total_steps) {
        write_snapshot((dir / "snapshots" / snapshot_name(step)).string(), dynamic_cast<const ToyPolicy&>(actor),
                       step, gold);
        ++summary.snapshots;
      }
    };
  }

  const LoopResult result =
      c.mode == "grpo" ? run_grpo_only(tasks, policy, c.loop, opt) : run_loop(tasks, policy, c.loop, opt);

  const std::vector<std::pair<std::string, std::string>> meta{
      {"mode", c.mode},
      {"rollouts", std::to_string(c.loop.rollouts_per_prompt)},
      {"zeta", fixed(c.detect_zeta, 6)},
      {"distill_interval", std::to_string(c.loop.distill_interval)},
      {"acr_rollouts", std::to_string(c.loop.acr_rollouts)},
      {"exposure", fixed(c.loop.exposure, 6)},
      {"prompts", std::to_string(tasks.size())},
      {"steps", std::to_string(c.loop.total_steps)},
      {"seed", std::to_string(c.loop.seed)},
  };
  write_metrics_csv((dir / "metrics.csv").string(), result.metrics, meta);
  write_events_csv((dir / "acr_events.csv").string(), result.events);
  write_snapshot((dir / "final_policy.jsonl").string(), policy, c.loop.total_steps, gold);
  open_out((dir / "run_config.json").string()) << run_config_json(c);

  summary.steps = result.metrics.size();
  summary.events = result.events.size();
  if (!result.metrics.empty()) summary.last = result.metrics.back();
  return summary;
}

// ---- theory ----------------------------------------------------------------

std::string cmd_theory(const TheoryOptions& o) {
  std::ostringstream out;
  const double eps = detect_threshold(o.k, o.zeta);
  out << "k=" << o.k << "\n";
  out << "zeta=" << fixed(o.zeta, 6) << "\n";
  out << "eps=" << fixed(eps, 6) << "\n";
  const double p = o.p ? *o.p : std::min(eps, 1.0);
  out << "p=" << fixed(p, 6) << "\n";
  out << "miss_probability=" << fixed(miss_probability(p, o.k), 6) << "\n";
  out << "bound_holds=" << (detectability_bound_holds(p, o.k, o.zeta) ? "true" : "false") << "\n";
  std::optional<double> cycles = o.cycles;
  if (o.p0 || o.delta) {
    if (!o.p0 || !o.delta) throw DomainError("p0 and delta must be given together");
    const auto n = cycles_to_threshold(*o.p0, std::min(eps, 1.0), *o.delta);
    out << "cycles=" << n << "\n";
    if (!cycles) cycles = static_cast<double>(n);
  }
  if (o.alpha_exp) {
    if (!cycles) throw DomainError("alpha_exp needs cycles, or p0 and delta");
    out << "expected_attempts=" << fixed(expected_acr_attempts(*cycles, *o.alpha_exp), 6) << "\n";
  }
  return out.str();
}

bool CheckReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const TheoryCheck& c) { return c.passed || c.skipped; });
}

std::string CheckReport::render() const {
  std::ostringstream out;
  out << kCheckHeader << "\n";
  out << "mode=" << estimate.mode << " rollouts=" << estimate.rollouts << " eps=" << fixed(estimate.eps, 6) << "\n";
  for (const auto& pt : estimate.curve) {
    out << "snapshot step=" << pt.step << " median_p_gold=" << fixed(pt.median_p_gold, 9)
        << " mean_p_gold=" << fixed(pt.mean_p_gold, 9) << " detectable=" << fixed(pt.detectable_fraction, 6) << "\n";
  }
  out << "distilled_increments=" << estimate.log_increments.size()
      << " mean_increment=" << fixed(estimate.mean_increment, 6) << "\n";
  out << "completed_waits=" << estimate.waiting_times.size() << "\n";
  for (const auto& c : checks) {
    out << (c.skipped ? "SKIP" : c.passed ? "PASS" : "FAIL") << " " << c.name << ": " << c.detail << "\n";
  }
  out << (all_passed() ? "RESULT PASS" : "RESULT FAIL") << "\n";
  return out.str();
}

CheckReport cmd_theory_check(const std::string& metrics, const std::string& snapshots, const std::string& events) {
  const auto mf = read_metrics_csv(metrics);
  const auto snaps = load_snapshots(snapshots);
  std::string events_path = events;
  if (events_path.empty()) {
    const auto sibling = fs::path(metrics).parent_path() / "acr_events.csv";
    if (fs::exists(sibling)) events_path = sibling.string();
  }
  const auto ev = events_path.empty() ? std::vector<AcrEvent>{} : read_events_csv(events_path);
  CheckReport report;
  report.estimate = estimate_from_sim(mf, snaps, ev);
  report.checks = check_theory(report.estimate);
  return report;
}

}  // namespace minerva::cli
