#include "minerva/sim_estimate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <numeric>
#include <regex>

#include "minerva/error.hpp"
#include "minerva/support_theory.hpp"

namespace minerva {

namespace {

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double mean_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

std::vector<PolicySnapshot> load_snapshots(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw IoError("snapshot directory not found: " + dir);
  static const std::regex name(R"(step_\d+\.jsonl)");
  std::vector<std::string> paths;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && std::regex_match(entry.path().filename().string(), name)) {
      paths.push_back(entry.path().string());
    }
  }
  if (paths.empty()) throw IoError("no policy snapshots in " + dir);
  std::vector<PolicySnapshot> out;
  for (const auto& p : paths) out.push_back(read_snapshot(p));
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.step < b.step; });
  return out;
}

SimEstimate estimate_from_sim(const MetricsFile& metrics, const std::vector<PolicySnapshot>& snapshots,
                              const std::vector<AcrEvent>& events) {
  if (snapshots.empty()) throw ConfigError("estimate needs at least one policy snapshot");
  auto need = [&](const char* key) {
    const auto v = metrics.meta_value(key);
    if (!v) throw ConfigError(std::string("metrics log lacks metadata '") + key + "'");
    return *v;
  };
  SimEstimate est;
  est.mode = need("mode");
  est.rollouts = static_cast<std::size_t>(std::stoull(need("rollouts")));
  if (const auto z = metrics.meta_value("zeta")) est.zeta = std::stod(*z);
  if (const auto i = metrics.meta_value("distill_interval")) est.distill_interval = std::stoull(*i);
  est.eps = detect_threshold(est.rollouts, est.zeta);

  for (const auto& snap : snapshots) {
    std::vector<double> p;
    std::size_t detectable = 0;
    for (const auto& entry : snap.prompts) {
      if (!entry.gold) throw ConfigError("snapshot step " + std::to_string(snap.step) + " has no gold for '" + entry.uid + "'");
      const double pg = snap.probabilities(entry)[*entry.gold];
      detectable += pg >= est.eps;
      p.push_back(pg);
    }
    CurvePoint pt;
    pt.step = snap.step;
    pt.median_p_gold = median_of(p);
    pt.mean_p_gold = mean_of(p);
    pt.detectable_fraction = p.empty() ? 0.0 : static_cast<double>(detectable) / static_cast<double>(p.size());
    est.curve.push_back(pt);
    if (!est.crossing_step && pt.median_p_gold >= est.eps) est.crossing_step = snap.step;
  }

  std::map<std::string, std::vector<const AcrEvent*>> by_uid;
  for (const auto& e : events) by_uid[e.uid].push_back(&e);
  double inv_alpha = 0.0;
  std::size_t inv_count = 0;
  for (const auto& [uid, list] : by_uid) {
    std::size_t run = 0;
    double run_inv = 0.0;
    for (const AcrEvent* e : list) {
      ++run;
      run_inv += 1.0 / std::max(e->alpha, 1e-300);
      if (e->accepted) {
        est.waiting_times.push_back(static_cast<double>(run));
        inv_alpha += run_inv;
        inv_count += run;
        run = 0;
        run_inv = 0.0;
      }
      if (e->distilled && e->p_gold_before && e->p_gold_after && *e->p_gold_before > 0.0) {
        est.log_increments.push_back(std::log(*e->p_gold_after) - std::log(*e->p_gold_before));
      }
    }
  }
  est.predicted_waiting = inv_count ? inv_alpha / static_cast<double>(inv_count) : 0.0;
  est.mean_increment = mean_of(est.log_increments);

  const double p0 = est.curve.front().median_p_gold;
  if (est.mean_increment > 0.0 && p0 > 0.0) {
    est.predicted_cycles = cycles_to_threshold(p0, std::min(est.eps, 1.0), est.mean_increment);
  }
  return est;
}

std::vector<TheoryCheck> check_theory(const SimEstimate& est) {
  std::vector<TheoryCheck> out;
  if (est.mode == "grpo") {
    TheoryCheck below{"median p_gold stays below eps", true, false, ""};
    for (const auto& pt : est.curve) {
      if (pt.median_p_gold >= est.eps) {
        below.passed = false;
        below.detail = "step " + std::to_string(pt.step) + " median " + num(pt.median_p_gold);
        break;
      }
    }
    if (below.passed) below.detail = "eps " + num(est.eps) + " over " + std::to_string(est.curve.size()) + " snapshots";
    out.push_back(below);

    const double first = est.curve.front().median_p_gold, last = est.curve.back().median_p_gold;
    TheoryCheck flat{"median p_gold flat", false, false, ""};
    flat.passed = first > 0.0 && last > 0.0 && std::abs(std::log(last / first)) <= std::log(2.0);
    flat.detail = num(first) + " -> " + num(last);
    out.push_back(flat);
    return out;
  }

  TheoryCheck cross{"median crossing within 2x predicted cycles", false, false, ""};
  if (!est.predicted_cycles || est.distill_interval == 0) {
    cross.skipped = true;
    cross.detail = "no distillation increments or interval";
  } else {
    const double predicted_steps = static_cast<double>(*est.predicted_cycles * est.distill_interval);
    cross.passed = est.crossing_step && static_cast<double>(*est.crossing_step) <= 2.0 * predicted_steps;
    cross.detail = "observed " + (est.crossing_step ? std::to_string(*est.crossing_step) : std::string("never")) +
                   ", predicted " + num(predicted_steps) + " steps (" + std::to_string(*est.predicted_cycles) +
                   " cycles at mean increment " + num(est.mean_increment) + ")";
  }
  out.push_back(cross);

  TheoryCheck wait{"waiting time within 10% of 1/alpha", false, false, ""};
  if (est.waiting_times.size() < kMinWaitingSamples) {
    wait.skipped = true;
    wait.detail = std::to_string(est.waiting_times.size()) + " completed waits";
  } else {
    const double observed = mean_of(est.waiting_times);
    wait.passed = std::abs(observed - est.predicted_waiting) <= 0.1 * est.predicted_waiting;
    wait.detail = "observed " + num(observed) + ", predicted " + num(est.predicted_waiting) + " over " +
                  std::to_string(est.waiting_times.size()) + " waits";
  }
  out.push_back(wait);
  return out;
}

}  // namespace minerva
