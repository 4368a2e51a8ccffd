#include "minerva/trace_filter.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_set>

#include "json.hpp"
#include "minerva/error.hpp"
#include "minerva/identifiers.hpp"
#include "minerva/kernels/kernels.hpp"
#include "minerva/rng.hpp"
#include "minerva/sequence_match.hpp"
#include "minerva/text.hpp"

namespace minerva {

namespace {

constexpr const char* kLeakageHeader = "# minerva-leakage v1";
constexpr const char* kScorerHeader = "minerva-linear-scorer v1";

std::regex compile_cue(const std::string& pattern) {
  return std::regex(pattern, std::regex::ECMAScript | std::regex::icase);
}

std::set<std::string> word_set(std::string_view text) {
  const auto tokens = text::word_tokens(strip_identifiers(text));
  return {tokens.begin(), tokens.end()};
}

template <typename T>
double jaccard(const std::set<T>& a, const std::set<T>& b) {
  if (a.empty() && b.empty()) return 0.0;
  std::size_t inter = 0;
  for (const T& x : a) inter += b.count(x);
  const std::size_t uni = a.size() + b.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

std::string join_tokens(std::span<const std::string_view> tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back('\x1f');
    out.append(tokens[i]);
  }
  return out;
}

std::set<std::string> trigram_set(std::span<const std::string_view> tokens) {
  std::set<std::string> out;
  for (std::size_t i = 0; i + 3 <= tokens.size(); ++i) out.insert(join_tokens(tokens.subspan(i, 3)));
  return out;
}

// Ratio thresholds are compared with a small slack so that values which are
// exactly on a boundary in rational arithmetic are not lost to rounding.
bool at_least(double x, double threshold) { return x >= threshold - 1e-12; }

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double linear_margin(const std::vector<double>& w, double bias,
                     const std::vector<std::uint32_t>& feats) {
  if (feats.empty()) return bias;
  double s = 0.0;
  for (std::uint32_t f : feats) s += w[f];
  return bias + s / std::sqrt(static_cast<double>(feats.size()));
}

}  // namespace

// ---- leakage -------------------------------------------------------------

LeakageList LeakageList::builtin() {
  LeakageList list;
  for (const char* p : {"given the answer", "based on the provided label", "ground truth",
                        "the provided answer", "as stated in the reference", "the label says"}) {
    list.add_phrase(p);
  }
  list.add_regex("ground[- ]?truth");
  list.add_regex("provided (label|answer)s?");
  return list;
}

LeakageList LeakageList::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open leakage list: " + path);
  LeakageList list;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view t = text::trim(line);
    if (lineno == 1) {
      if (t != kLeakageHeader) throw SchemaError(1, "header", "expected '" + std::string(kLeakageHeader) + "'");
      continue;
    }
    if (t.empty() || t.front() == '#') continue;
    const auto colon = t.find(':');
    if (colon == std::string_view::npos) throw SchemaError(lineno, "entry", "missing 'phrase:' or 'regex:' prefix");
    const std::string_view kind = text::trim(t.substr(0, colon));
    const std::string value(text::trim(t.substr(colon + 1)));
    if (value.empty()) throw SchemaError(lineno, std::string(kind), "empty entry");
    if (kind == "phrase") {
      list.add_phrase(value);
    } else if (kind == "regex") {
      try {
        list.add_regex(value);
      } catch (const std::regex_error& e) {
        throw SchemaError(lineno, "regex", e.what());
      }
    } else {
      throw SchemaError(lineno, std::string(kind), "unknown entry kind");
    }
  }
  if (lineno == 0) throw SchemaError(1, "header", "empty file");
  return list;
}

void LeakageList::add_phrase(std::string phrase) { phrases_.push_back(text::to_lower(phrase)); }

void LeakageList::add_regex(std::string pattern) {
  regexes_.push_back(compile_cue(pattern));
  regex_sources_.push_back(std::move(pattern));
}

void LeakageList::merge(const LeakageList& other) {
  for (const auto& p : other.phrases_) {
    if (std::find(phrases_.begin(), phrases_.end(), p) == phrases_.end()) phrases_.push_back(p);
  }
  for (const auto& r : other.regex_sources_) {
    if (std::find(regex_sources_.begin(), regex_sources_.end(), r) == regex_sources_.end()) add_regex(r);
  }
}

std::optional<std::string> LeakageList::find(std::string_view response) const {
  const std::string lowered = text::to_lower(response);
  for (const auto& p : phrases_) {
    if (lowered.find(p) != std::string::npos) return p;
  }
  for (std::size_t i = 0; i < regexes_.size(); ++i) {
    if (std::regex_search(lowered, regexes_[i])) return regex_sources_[i];
  }
  return std::nullopt;
}

bool check_leakage(std::string_view response, const LeakageList& list) {
  return list.find(response).has_value();
}

// ---- length and grounding --------------------------------------------------

std::string reasoning_portion(std::string_view response) {
  const auto all = text::lines(response);
  std::size_t last = all.size();
  for (std::size_t i = all.size(); i-- > 0;) {
    if (!text::trim(all[i]).empty()) {
      last = i;
      break;
    }
  }
  std::string out;
  for (std::size_t i = 0; i < all.size() && i < last; ++i) {
    if (i) out.push_back('\n');
    out.append(all[i]);
  }
  return std::string(text::trim(out));
}

std::size_t reasoning_length(std::string_view response) {
  return text::utf8_length(reasoning_portion(response));
}

bool check_reasoning_length(std::string_view response, std::size_t min_chars) {
  return reasoning_length(response) < min_chars;
}

double grounding_jaccard(std::string_view response, std::string_view context) {
  return jaccard(word_set(reasoning_portion(response)), word_set(context));
}

// ---- degeneracy ------------------------------------------------------------

const char* to_string(DegeneracyReason reason) {
  switch (reason) {
    case DegeneracyReason::None: return "none";
    case DegeneracyReason::Rep3: return "rep3";
    case DegeneracyReason::Rep4: return "rep4";
    case DegeneracyReason::WindowRepeat: return "window_repeat";
    case DegeneracyReason::WindowJaccard: return "window_jaccard";
    case DegeneracyReason::SentenceRepeat: return "sentence_repeat";
  }
  return "none";
}

double rep_n(std::span<const std::string_view> tokens, std::size_t n) {
  if (n == 0 || tokens.size() < n) return 0.0;
  const std::size_t total = tokens.size() - n + 1;
  std::unordered_set<std::string> distinct;
  for (std::size_t i = 0; i < total; ++i) distinct.insert(join_tokens(tokens.subspan(i, n)));
  return 1.0 - static_cast<double>(distinct.size()) / static_cast<double>(total);
}

std::vector<std::string_view> split_sentences(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  auto emit = [&](std::size_t end) {
    const auto piece = text::trim(s.substr(start, end - start));
    if (!piece.empty()) out.push_back(piece);
  };
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    const char c = s[i];
    if ((c == '.' || c == '!' || c == '?') && std::isspace(static_cast<unsigned char>(s[i + 1]))) {
      emit(i + 1);
      start = i + 1;
    }
  }
  emit(s.size());
  return out;
}

DegeneracyResult check_degenerate(std::string_view response, const DegeneracyConfig& cfg) {
  DegeneracyResult r;
  const auto tokens = text::whitespace_tokens(response);
  r.tokens = tokens.size();
  if (tokens.size() < cfg.min_tokens) return r;

  r.rep3 = rep_n(tokens, 3);
  r.rep4 = rep_n(tokens, 4);
  auto flag = [&](DegeneracyReason why) {
    if (!r.flagged) {
      r.flagged = true;
      r.reason = why;
    }
  };
  if (at_least(r.rep3, cfg.rep3_threshold)) flag(DegeneracyReason::Rep3);
  if (at_least(r.rep4, cfg.rep4_threshold)) flag(DegeneracyReason::Rep4);

  std::vector<std::size_t> starts;
  for (std::size_t s = 0; cfg.window > 0 && s + cfg.window <= tokens.size(); s += cfg.stride) {
    starts.push_back(s);
    if (cfg.stride == 0) break;
  }
  const std::span<const std::string_view> all(tokens);
  std::vector<std::string> keys;
  std::vector<std::set<std::string>> grams;
  for (std::size_t s : starts) {
    keys.push_back(join_tokens(all.subspan(s, cfg.window)));
    grams.push_back(trigram_set(all.subspan(s, cfg.window)));
  }
  bool window_repeat = false;
  bool window_similar = false;
  for (std::size_t i = 0; i < starts.size(); ++i) {
    for (std::size_t j = i + 1; j < starts.size(); ++j) {
      if (keys[i] == keys[j]) window_repeat = true;
      if (starts[j] >= starts[i] + cfg.window && at_least(jaccard(grams[i], grams[j]), cfg.window_jaccard)) {
        window_similar = true;
      }
    }
  }
  if (window_repeat) flag(DegeneracyReason::WindowRepeat);
  if (window_similar) flag(DegeneracyReason::WindowJaccard);

  const auto sentences = split_sentences(response);
  std::vector<bool> long_enough;
  for (auto s : sentences) long_enough.push_back(text::whitespace_tokens(s).size() >= cfg.min_sentence_words);
  bool sentence_repeat = false;
  for (std::size_t i = 0; i < sentences.size() && !sentence_repeat; ++i) {
    if (!long_enough[i]) continue;
    for (std::size_t j = i + 1; j < sentences.size() && j < i + cfg.sentence_window; ++j) {
      if (long_enough[j] && at_least(sequence_ratio(sentences[i], sentences[j]), cfg.sentence_similarity)) {
        sentence_repeat = true;
        break;
      }
    }
  }
  if (sentence_repeat) flag(DegeneracyReason::SentenceRepeat);
  return r;
}

// ---- quality scorers -------------------------------------------------------

ExternalScores ExternalScores::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open score file: " + path);
  std::unordered_map<std::string, double> scores;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    nlohmann::json rec;
    try {
      rec = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw SchemaError(lineno, "record", e.what());
    }
    if (!rec.is_object() || !rec.contains("id") || !rec["id"].is_string()) {
      throw SchemaError(lineno, "id", "missing or not a string");
    }
    if (!rec.contains("q") || !rec["q"].is_number()) throw SchemaError(lineno, "q", "missing or not a number");
    const double q = rec["q"].get<double>();
    if (!(q >= 0.0 && q <= 1.0)) throw SchemaError(lineno, "q", "outside [0, 1]");
    scores[rec["id"].get<std::string>()] = q;
  }
  return ExternalScores(std::move(scores));
}

double ExternalScores::score(std::span<const std::string>, std::string_view trace_id) const {
  const auto it = scores_.find(std::string(trace_id));
  return it == scores_.end() ? 0.0 : it->second;
}

HashedNgramLinearScorer::HashedNgramLinearScorer(std::size_t dims, std::vector<double> weights,
                                                 double bias)
    : dims_(dims), weights_(std::move(weights)), bias_(bias) {
  if (dims_ == 0 || dims_ > (1u << 28)) throw ConfigError("scorer dims out of range");
  if (weights_.size() != dims_) throw ConfigError("scorer weight count does not match dims");
}

std::vector<std::uint32_t> HashedNgramLinearScorer::features(std::span<const std::string> tokens,
                                                             std::size_t dims) {
  std::vector<std::uint32_t> out;
  out.reserve(tokens.size() * 2);
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    out.push_back(static_cast<std::uint32_t>(text::fnv1a64(tokens[i]) % dims));
    if (i + 1 < tokens.size()) {
      const std::uint64_t h = text::fnv1a64(tokens[i + 1], text::fnv1a64("\x1f", text::fnv1a64(tokens[i])));
      out.push_back(static_cast<std::uint32_t>(h % dims));
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double HashedNgramLinearScorer::score(std::span<const std::string> tokens, std::string_view) const {
  return sigmoid(linear_margin(weights_, bias_, features(tokens, dims_)));
}

void HashedNgramLinearScorer::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write scorer: " + path);
  std::size_t nnz = 0;
  for (double w : weights_) nnz += w != 0.0;
  char buf[64];
  out << kScorerHeader << '\n' << "dims " << dims_ << '\n';
  std::snprintf(buf, sizeof buf, "%.17g", bias_);
  out << "bias " << buf << '\n' << "weights " << nnz << '\n';
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    if (weights_[i] == 0.0) continue;
    std::snprintf(buf, sizeof buf, "%.17g", weights_[i]);
    out << i << ' ' << buf << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

HashedNgramLinearScorer HashedNgramLinearScorer::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scorer: " + path);
  std::string line;
  std::size_t lineno = 0;
  auto next = [&](const char* field) -> std::istringstream {
    if (!std::getline(in, line)) throw SchemaError(lineno + 1, field, "unexpected end of file");
    ++lineno;
    return std::istringstream(line);
  };
  if (!std::getline(in, line) || text::trim(line) != kScorerHeader) {
    throw SchemaError(1, "header", "expected '" + std::string(kScorerHeader) + "'");
  }
  ++lineno;
  std::string key;
  std::size_t dims = 0, count = 0;
  double bias = 0.0;
  if (auto s = next("dims"); !(s >> key >> dims) || key != "dims") throw SchemaError(lineno, "dims", "malformed");
  if (auto s = next("bias"); !(s >> key >> bias) || key != "bias") throw SchemaError(lineno, "bias", "malformed");
  if (auto s = next("weights"); !(s >> key >> count) || key != "weights") {
    throw SchemaError(lineno, "weights", "malformed");
  }
  if (dims == 0 || dims > (1u << 28)) throw SchemaError(2, "dims", "out of range");
  std::vector<double> weights(dims, 0.0);
  for (std::size_t k = 0; k < count; ++k) {
    auto s = next("weight");
    std::size_t idx = 0;
    double w = 0.0;
    if (!(s >> idx >> w) || idx >= dims || !std::isfinite(w)) throw SchemaError(lineno, "weight", "malformed");
    weights[idx] = w;
  }
  return HashedNgramLinearScorer(dims, std::move(weights), bias);
}

std::vector<std::string> scorer_tokens(std::string_view response) {
  auto tokens = text::word_tokens(response);
  if (tokens.size() > kScorerMaxTokens) tokens.resize(kScorerMaxTokens);
  return tokens;
}

double score_quality(std::string_view response, const QualityScorer& scorer,
                     std::string_view trace_id) {
  const auto tokens = scorer_tokens(response);
  return scorer.score(tokens, trace_id);
}

TrainedScorer train_linear_scorer(std::span<const LabeledText> labeled,
                                  const LinearTrainConfig& config) {
  if (labeled.empty()) throw DomainError("scorer training corpus is empty");
  const auto good = std::count_if(labeled.begin(), labeled.end(), [](const auto& x) { return x.good; });
  if (good == 0 || static_cast<std::size_t>(good) == labeled.size()) {
    throw DomainError("scorer training corpus has a single class");
  }
  if (!(config.holdout_fraction >= 0.0 && config.holdout_fraction < 1.0)) {
    throw ConfigError("holdout_fraction must be in [0, 1)");
  }

  const std::size_t n = labeled.size();
  std::vector<std::vector<std::uint32_t>> feats(n);
  for (std::size_t i = 0; i < n; ++i) {
    feats[i] = HashedNgramLinearScorer::features(scorer_tokens(labeled[i].text), config.dims);
  }

  Rng rng(mix_seed(config.seed, 0x5C0E));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.index(i)]);
  std::size_t held = static_cast<std::size_t>(std::llround(config.holdout_fraction * static_cast<double>(n)));
  if (config.holdout_fraction > 0.0 && held == 0 && n > 1) held = 1;
  std::vector<std::size_t> heldout(order.begin(), order.begin() + held);
  std::vector<std::size_t> train(order.begin() + held, order.end());

  std::vector<double> w(config.dims, 0.0);
  double bias = 0.0;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    for (std::size_t i = train.size(); i > 1; --i) std::swap(train[i - 1], train[rng.index(i)]);
    for (std::size_t idx : train) {
      const auto& f = feats[idx];
      const double y = labeled[idx].good ? 1.0 : 0.0;
      const double g = sigmoid(linear_margin(w, bias, f)) - y;
      const double v = f.empty() ? 0.0 : 1.0 / std::sqrt(static_cast<double>(f.size()));
      for (std::uint32_t k : f) w[k] -= config.learning_rate * g * v;
      bias -= config.learning_rate * g;
    }
    kernels::scale(w, 1.0 - config.learning_rate * config.l2);
  }

  TrainedScorer out;
  out.train_size = train.size();
  out.heldout_size = heldout.size();
  std::size_t correct = 0;
  for (std::size_t idx : heldout) {
    const bool predicted = sigmoid(linear_margin(w, bias, feats[idx])) >= 0.5;
    correct += predicted == labeled[idx].good;
  }
  out.heldout_accuracy = heldout.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(heldout.size());
  out.scorer = std::make_shared<HashedNgramLinearScorer>(config.dims, std::move(w), bias);
  return out;
}

// ---- verdicts and selection ------------------------------------------------

FilterVerdict evaluate_trace(std::string_view response, std::string_view context,
                             double verifier_score, const QualityScorer& scorer,
                             const FilterConfig& config, std::string_view trace_id) {
  FilterVerdict v;
  v.verifier_score = verifier_score;
  v.leakage = check_leakage(response, config.leakage);
  v.short_reasoning = check_reasoning_length(response, config.min_reasoning_chars);
  v.grounding = grounding_jaccard(response, context);
  const DegeneracyResult d = check_degenerate(response, config.degeneracy);
  v.degenerate = d.flagged;
  v.degeneracy_reason = d.reason;
  v.quality = score_quality(response, scorer, trace_id);
  v.heuristic_pass = !v.leakage && !v.short_reasoning && at_least(v.grounding, config.min_grounding) && !v.degenerate;
  v.eligible = verifier_score == 1.0 && v.heuristic_pass && at_least(v.quality, config.quality_threshold);
  return v;
}

std::optional<std::size_t> select_trace(std::span<const FilterVerdict> candidates,
                                        std::uint64_t seed) {
  std::vector<std::size_t> best;
  double best_q = 0.0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (!candidates[i].eligible) continue;
    const double q = candidates[i].quality;
    if (best.empty() || q > best_q) {
      best.assign(1, i);
      best_q = q;
    } else if (q == best_q) {
      best.push_back(i);
    }
  }
  if (best.empty()) return std::nullopt;
  if (best.size() == 1) return best.front();
  Rng rng(mix_seed(seed, 0x7153));
  return best[rng.index(best.size())];
}

}  // namespace minerva
