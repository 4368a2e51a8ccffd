#include "minerva/loop.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <sstream>

#include "minerva/error.hpp"
#include "minerva/sim_trace.hpp"
#include "minerva/text.hpp"
#include "minerva/toy_dataset.hpp"
#include "temp_dir.hpp"

namespace minerva {
namespace {

using testing_util::TempDir;

TaskInstance technique_task(std::string uid, std::string id) {
  TaskInstance t;
  t.uid = std::move(uid);
  t.kind = TaskKind::AttackTechnique;
  t.prompt = "The implant schedules a recurring task named updater that launches the payload at logon.";
  t.gold = IdLabel{std::move(id)};
  return t;
}

TaskInstance cvss_task(std::string uid) {
  TaskInstance t;
  t.uid = std::move(uid);
  t.kind = TaskKind::CvssVector;
  t.prompt = "A remote unauthenticated attacker can read arbitrary files through a path traversal in the upload handler.";
  t.gold = *parse_cvss("CVSS:3.1/AV:N/AC:L/PR:N/UI:N/S:U/C:H/I:N/A:N").vector;
  return t;
}

LoopConfig fast_config() {
  LoopConfig c;
  c.lr_rlvr = 0.1;
  c.lr_scale = 1.0;
  c.batch_size = 16;
  c.total_steps = 20;
  c.distill_interval = 5;
  return c;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

TEST(ToyDataset, Shape) {
  HardDatasetConfig cfg;
  cfg.prompts = 30;
  cfg.answers = 12;
  const auto problem = make_hard_dataset(cfg);
  ASSERT_EQ(problem.tasks.size(), 30u);
  std::set<std::string> uids;
  for (const auto& task : problem.tasks) {
    uids.insert(task.uid);
    const auto& answers = problem.policy.answers(task.uid);
    EXPECT_EQ(answers.size(), 12u);
    EXPECT_EQ(std::set<std::string>(answers.begin(), answers.end()).size(), 12u);
    const std::size_t gold = problem.gold.at(task.uid);
    EXPECT_EQ(answers[gold], gold_strings(task.gold).front());
    EXPECT_NEAR(problem.policy.probabilities(task.uid)[gold], 0.002, 1e-12);
    EXPECT_TRUE(task.label_details.has_value());
  }
  EXPECT_EQ(uids.size(), 30u);
  EXPECT_EQ(make_hard_dataset(cfg).tasks, problem.tasks);
}

TEST(SimTrace, DefectFreeTracesPassHeuristics) {
  const auto problem = make_hard_dataset({});
  const SimTraceGenerator gen;
  Rng rng(4);
  for (const auto& task : problem.tasks) {
    const auto& answers = problem.policy.answers(task.uid);
    for (int k = 0; k < 3; ++k) {
      const std::string answer = answers[rng.index(answers.size())];
      TraceDefect applied = TraceDefect::AnswerOnly;
      const std::string trace = gen.generate(task, answer, rng, &applied);
      EXPECT_EQ(applied, TraceDefect::None);
      const auto v = evaluate_trace(trace, grounding_context(task), 1.0, ConstantPassScorer(), FilterConfig{});
      EXPECT_TRUE(v.heuristic_pass) << trace;
      EXPECT_TRUE(trace.ends_with("Final answer: " + answer));
    }
  }
}

TEST(SimTrace, DefectsAreCaughtByTheirFilter) {
  const auto problem = make_hard_dataset({});
  const auto& task = problem.tasks.front();
  Rng rng(5);
  auto run = [&](TraceDefects d) {
    const std::string trace = SimTraceGenerator(d).generate(task, "T1001", rng);
    return evaluate_trace(trace, grounding_context(task), 1.0, ConstantPassScorer(), FilterConfig{});
  };
  EXPECT_TRUE(run({1.0, 0, 0}).leakage);
  EXPECT_TRUE(run({0, 1.0, 0}).degenerate);
  EXPECT_TRUE(run({0, 0, 1.0}).short_reasoning);
  EXPECT_THROW(SimTraceGenerator({0.6, 0.6, 0.0}), ConfigError);
  EXPECT_THROW(SimTraceGenerator({-0.1, 0, 0}), ConfigError);
}

TEST(AcrPrompt, WorkedExamples) {
  auto task = technique_task("u", "T1059.001");
  const auto p = build_acr_prompt(task);
  EXPECT_TRUE(p.starts_with(task.prompt));
  EXPECT_NE(p.find("GROUND_TRUTH_LABELS:\n- T1059.001\n"), std::string::npos);
  EXPECT_EQ(p.find("LABEL_REFERENCE:"), std::string::npos);

  task.label_details = "Scheduled task creation.";
  EXPECT_NE(build_acr_prompt(task).find("LABEL_REFERENCE:\nScheduled task creation."), std::string::npos);

  std::string big;
  for (int i = 0; i < 10000; ++i) big += "word" + std::to_string(i) + " ";
  task.label_details = big;
  const auto clipped = build_acr_prompt(task);
  EXPECT_LE(text::whitespace_tokens(clipped).size(), 4096u);
  EXPECT_TRUE(clipped.starts_with(task.prompt));
  EXPECT_NE(clipped.find("- T1059.001"), std::string::npos);
  EXPECT_NE(clipped.find("word0 word1"), std::string::npos);
  EXPECT_EQ(clipped.find("word9999"), std::string::npos);
}

TEST(DistillBatch, CapExamples) {
  ToyPolicy policy;
  std::vector<DistillPair> queue;
  for (int i = 0; i < 300; ++i) {
    const std::string uid = "u" + std::to_string(i);
    policy.add_prompt(uid, {"a", "b"}, {0.0, 0.0});
    queue.push_back({uid, "prompt " + uid, 1, "trace"});
  }
  Rng rng(1);
  const auto used = distill_batch(queue, policy, 256, 0.1, rng);
  EXPECT_EQ(used.size(), 256u);
  std::set<std::string> distinct;
  for (const auto& p : used) distinct.insert(p.uid);
  EXPECT_EQ(distinct.size(), 256u);
  std::size_t moved = 0;
  for (const auto& uid : policy.uids()) moved += policy.probabilities(uid)[1] > 0.5;
  EXPECT_EQ(moved, 256u);

  EXPECT_EQ(distill_batch(std::vector<DistillPair>(queue.begin(), queue.begin() + 10), policy, 256, 0.1, rng).size(), 10u);
  EXPECT_TRUE(distill_batch({}, policy, 256, 0.1, rng).empty());

  std::vector<DistillPair> leaky{{"u0", "x\nGROUND_TRUTH_LABELS:\n- b", 1, "t"}};
  EXPECT_THROW(distill_batch(leaky, policy, 4, 0.1, rng), std::logic_error);
}

TEST(Loop, ValidationNamesField) {
  LoopConfig c;
  c.rollouts_per_prompt = 1;
  try {
    validate(c);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("rollouts_per_prompt"), std::string::npos);
  }
  c = LoopConfig{};
  c.exposure = 1.5;
  EXPECT_THROW(validate(c), ConfigError);
  c = LoopConfig{};
  c.lr_scale = 0.0;
  EXPECT_THROW(validate(c), ConfigError);
}

TEST(Loop, ZeroStepsIsANoOp) {
  auto problem = make_hard_dataset({.prompts = 10, .answers = 8});
  const auto before = problem.policy;
  auto cfg = fast_config();
  cfg.total_steps = 0;
  const auto result = run_loop(problem.tasks, problem.policy, cfg);
  EXPECT_TRUE(result.metrics.empty());
  EXPECT_TRUE(result.events.empty());
  for (const auto& uid : before.uids()) EXPECT_EQ(problem.policy.logits(uid), before.logits(uid));
}

TEST(Loop, UidMismatchFailsAtStartup) {
  auto problem = make_hard_dataset({.prompts = 5, .answers = 8});
  auto tasks = problem.tasks;
  tasks.push_back(technique_task("ghost", "T1053"));
  try {
    run_loop(tasks, problem.policy, fast_config());
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("ghost"), std::string::npos);
  }
  tasks.pop_back();
  tasks.push_back(tasks.front());
  EXPECT_THROW(run_loop(tasks, problem.policy, fast_config()), ConfigError);

  ToyPolicy wrong;
  wrong.add_prompt("x", {"T1001", "T1002"}, {0, 0});
  EXPECT_THROW(run_loop({technique_task("x", "T1053")}, wrong, fast_config()), ConfigError);
}

TEST(Loop, EasyPromptIsAlwaysSolved) {
  ToyPolicy policy;
  policy.add_prompt("easy", {"T1053", "T1001", "T1002"}, logits_with_gold_probability(3, 0, 0.9));
  auto cfg = fast_config();
  cfg.total_steps = 1;
  const auto r = run_loop({technique_task("easy", "T1053")}, policy, cfg);
  EXPECT_EQ(r.metrics[0].zero_solve_fraction, 0.0);
  EXPECT_LT(r.metrics[0].expected_zero_solve, 1e-6);
}

TEST(Loop, NoRewardMeansNoMovement) {
  ToyPolicy policy;
  policy.add_prompt("a", {"T1053", "T1001", "T1002", "T1003"}, logits_with_gold_probability(4, 0, 1e-15));
  const auto before = policy.logits("a");
  auto cfg = fast_config();
  const auto r = run_grpo_only({technique_task("a", "T1053")}, policy, cfg);
  EXPECT_EQ(policy.logits("a"), before);
  for (const auto& m : r.metrics) {
    EXPECT_EQ(m.zero_solve_fraction, 1.0);
    EXPECT_EQ(m.acr_buffer, 0u);
    EXPECT_FALSE(m.distilled.has_value());
  }
}

TEST(Loop, ExcludedKindsNeverBuffered) {
  ToyPolicy policy;
  const std::vector<std::string> vectors{"CVSS:3.1/AV:N/AC:L/PR:N/UI:N/S:U/C:H/I:N/A:N",
                                         "CVSS:3.1/AV:L/AC:H/PR:H/UI:R/S:C/C:L/I:L/A:L"};
  policy.add_prompt("cv", vectors, logits_with_gold_probability(2, 0, 1e-15));
  policy.add_prompt("t", {"T1053", "T1001"}, logits_with_gold_probability(2, 0, 1e-15));
  auto cfg = fast_config();
  cfg.lr_rlvr = 0.0;
  const auto r = run_loop({cvss_task("cv"), technique_task("t", "T1053")}, policy, cfg);
  for (const auto& m : r.metrics) EXPECT_EQ(m.acr_buffer, 1u);
  ASSERT_FALSE(r.events.empty());
  for (const auto& e : r.events) EXPECT_EQ(e.uid, "t");
}

TEST(Loop, BufferAndQueueFlushEachInterval) {
  auto problem = make_hard_dataset({.prompts = 12, .answers = 8, .p0 = 1e-6});
  auto cfg = fast_config();
  cfg.batch_size = 12;
  cfg.distill_interval = 3;
  cfg.total_steps = 9;
  cfg.lr_rlvr = 0.0;  // frozen actor and teacher keep every prompt hard
  cfg.exposure = 1.0;
  cfg.distill_cap = 5;
  const auto r = run_loop(problem.tasks, problem.policy, cfg);
  ASSERT_EQ(r.events.size(), 36u);
  for (const auto& m : r.metrics) {
    EXPECT_EQ(m.acr_buffer, 12u);
    if (m.step % 3 == 0) {
      EXPECT_EQ(*m.distilled, 5u);
      EXPECT_EQ(*m.uid_coverage_fraction, 1.0);
      EXPECT_EQ(*m.heuristic_pass_fraction, 1.0);
    } else {
      EXPECT_FALSE(m.distilled.has_value());
    }
  }
  std::map<std::string, std::size_t> attempts;
  std::size_t distilled = 0;
  for (const auto& e : r.events) {
    EXPECT_EQ(e.attempt, ++attempts[e.uid]);
    EXPECT_TRUE(e.accepted);
    EXPECT_NEAR(e.alpha, 1.0, 1e-15);
    distilled += e.distilled;
    EXPECT_EQ(e.p_gold_before.has_value(), e.distilled);
  }
  EXPECT_EQ(distilled, 15u);
}

TEST(Loop, DistillationRaisesGoldProbability) {
  auto problem = make_hard_dataset({.prompts = 20, .answers = 10, .p0 = 1e-4});
  auto cfg = fast_config();
  cfg.batch_size = 20;
  const auto r = run_loop(problem.tasks, problem.policy, cfg);
  std::size_t checked = 0;
  for (const auto& e : r.events) {
    if (!e.distilled) continue;
    EXPECT_GT(*e.p_gold_after, *e.p_gold_before);
    ++checked;
  }
  EXPECT_GT(checked, 0u);
}

TEST(Loop, FirstStepMatchesGrpoOnly) {
  auto a = make_hard_dataset({.prompts = 40, .answers = 10});
  auto b = make_hard_dataset({.prompts = 40, .answers = 10});
  auto cfg = fast_config();
  cfg.total_steps = 12;
  const auto ra = run_loop(a.tasks, a.policy, cfg);
  const auto rb = run_grpo_only(b.tasks, b.policy, cfg);
  EXPECT_EQ(ra.metrics[0].mean_reward, rb.metrics[0].mean_reward);
  EXPECT_EQ(ra.metrics[0].expected_zero_solve, rb.metrics[0].expected_zero_solve);
  EXPECT_NE(ra.metrics.back().median_p_gold, rb.metrics.back().median_p_gold);
  EXPECT_TRUE(rb.events.empty());
}

TEST(Loop, DeterministicFiles) {
  TempDir dir;
  std::vector<std::string> metrics, events;
  for (int run = 0; run < 2; ++run) {
    auto problem = make_hard_dataset({.prompts = 30, .answers = 10});
    LoopOptions opt;
    opt.defects = {0.1, 0.1, 0.1};
    const auto r = run_loop(problem.tasks, problem.policy, fast_config(), opt);
    const auto m = (dir / ("m" + std::to_string(run))).string();
    const auto e = (dir / ("e" + std::to_string(run))).string();
    write_metrics_csv(m, r.metrics, {{"seed", "1"}});
    write_events_csv(e, r.events);
    metrics.push_back(slurp(m));
    events.push_back(slurp(e));
  }
  EXPECT_EQ(metrics[0], metrics[1]);
  EXPECT_EQ(events[0], events[1]);
}

TEST(Loop, CsvRoundTrip) {
  TempDir dir;
  auto problem = make_hard_dataset({.prompts = 20, .answers = 10});
  const auto r = run_loop(problem.tasks, problem.policy, fast_config());
  const auto m = (dir / "m.csv").string();
  const auto e = (dir / "e.csv").string();
  write_metrics_csv(m, r.metrics, {{"mode", "minerva"}, {"seed", "1"}});
  write_events_csv(e, r.events);
  const auto mf = read_metrics_csv(m);
  EXPECT_EQ(mf.meta_value("mode"), "minerva");
  EXPECT_FALSE(mf.meta_value("nope").has_value());
  ASSERT_EQ(mf.rows.size(), r.metrics.size());
  for (std::size_t i = 0; i < r.metrics.size(); ++i) {
    EXPECT_EQ(mf.rows[i].step, r.metrics[i].step);
    EXPECT_NEAR(mf.rows[i].median_p_gold, r.metrics[i].median_p_gold, 1e-9);
    EXPECT_EQ(mf.rows[i].distilled, r.metrics[i].distilled);
  }
  const auto ev = read_events_csv(e);
  ASSERT_EQ(ev.size(), r.events.size());
  for (std::size_t i = 0; i < ev.size(); ++i) {
    EXPECT_EQ(ev[i].uid, r.events[i].uid);
    EXPECT_EQ(ev[i].distilled, r.events[i].distilled);
    EXPECT_NEAR(ev[i].alpha, r.events[i].alpha, 1e-6);
  }
  EXPECT_THROW(read_metrics_csv(dir.file("bad.csv", "step\n1\n").string()), SchemaError);
}

}  // namespace
}  // namespace minerva
