#include "minerva/policy.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "minerva/error.hpp"
#include "temp_dir.hpp"

namespace minerva {
namespace {

using testing_util::TempDir;

ToyPolicy single(std::vector<double> logits, double temperature = 1.0) {
  ToyPolicy p(temperature);
  std::vector<std::string> answers;
  for (std::size_t i = 0; i < logits.size(); ++i) answers.push_back("T" + std::to_string(1000 + i));
  p.add_prompt("u", answers, std::move(logits));
  return p;
}

std::vector<double> random_logits(Rng& rng, std::size_t n) {
  std::vector<double> z(n);
  for (auto& v : z) v = rng.uniform() * 4 - 2;
  return z;
}

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

TEST(Sampling, WorkedExamples) {
  Rng rng(1);
  auto one = single({0.3});
  for (auto a : sample_answers(one, "u", 10, rng)) EXPECT_EQ(a, 0u);

  auto uniform = single({0, 0, 0, 0});
  std::vector<double> freq(4, 0.0);
  for (auto a : sample_answers(uniform, "u", 40000, rng)) freq[a] += 1.0 / 40000;
  for (double f : freq) EXPECT_NEAR(f, 0.25, 0.01);

  auto cold = single({0.0, 1.0, 0.5}, 1e-3);
  for (auto a : sample_answers(cold, "u", 1000, rng)) EXPECT_EQ(a, 1u);
}

TEST(Sampling, Errors) {
  Rng rng(1);
  auto p = single({0, 0});
  EXPECT_THROW(sample_answers(p, "nope", 1, rng), DomainError);
  EXPECT_THROW(sample_answers(p, "u", 0, rng), DomainError);
  EXPECT_THROW(ToyPolicy(0.0), DomainError);
  EXPECT_THROW(p.add_prompt("u", {"a"}, {0.0}), DomainError);
  EXPECT_THROW(p.add_prompt("v", {"a", "b"}, {0.0}), DomainError);
}

TEST(Sampling, SeedDeterminism) {
  auto p = single({0.1, 0.2, 0.3, -1.0});
  Rng a(99), b(99);
  EXPECT_EQ(sample_answers(p, "u", 500, a), sample_answers(p, "u", 500, b));
}

TEST(Grpo, WorkedExamples) {
  auto p = single({0.0, 0.5, -0.5, 1.0});
  const auto before = p.logits("u");
  const std::vector<std::size_t> picks{0, 1, 2, 3};
  p.grpo_update("u", picks, std::vector<double>{0, 0, 0, 0}, 0.5);
  EXPECT_EQ(p.logits("u"), before);
  p.grpo_update("u", picks, std::vector<double>{1, 1, 1, 1}, 0.5);
  EXPECT_EQ(p.logits("u"), before);

  const double p2 = p.probabilities("u")[2];
  p.grpo_update("u", std::vector<std::size_t>{2, 0, 0, 1}, std::vector<double>{1, 0, 0, 0}, 0.5);
  EXPECT_GT(p.probabilities("u")[2], p2);
  EXPECT_THROW(p.grpo_update("u", std::vector<std::size_t>{0}, std::vector<double>{1}, 0.5), DomainError);
}

TEST(Grpo, Advantages) {
  const auto a = group_advantages(std::vector<double>{1, 0, 0, 0});
  // mean 0.25, population std sqrt(3)/4
  EXPECT_NEAR(a[0], 0.75 / (std::sqrt(3.0) / 4 + 1e-8), 1e-12);
  EXPECT_NEAR(a[1], -0.25 / (std::sqrt(3.0) / 4 + 1e-8), 1e-12);
  for (double v : group_advantages(std::vector<double>{0.5, 0.5})) EXPECT_EQ(v, 0.0);
}

// J(z) = sum_j A_j log softmax(z / T)_{a_j}
double grpo_objective(const std::vector<double>& z, double t, const std::vector<std::size_t>& picks,
                      const std::vector<double>& adv) {
  double m = -INFINITY;
  for (double v : z) m = std::max(m, v / t);
  double s = 0;
  for (double v : z) s += std::exp(v / t - m);
  double j = 0;
  for (std::size_t k = 0; k < picks.size(); ++k) j += adv[k] * (z[picks[k]] / t - m - std::log(s));
  return j;
}

void expect_gradient_match(const std::vector<double>& update, const std::vector<double>& numeric) {
  double diff = 0, scale = 0;
  for (std::size_t i = 0; i < update.size(); ++i) {
    diff += (update[i] - numeric[i]) * (update[i] - numeric[i]);
    scale += numeric[i] * numeric[i];
  }
  EXPECT_LT(std::sqrt(diff), 1e-4 * std::max(std::sqrt(scale), 1e-12));
}

TEST(Grpo, MatchesFiniteDifferences) {
  Rng rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    const double t = 0.5 + rng.uniform();
    auto z = random_logits(rng, 5);
    auto p = single(z, t);
    std::vector<std::size_t> picks;
    std::vector<double> rewards;
    for (int j = 0; j < 6; ++j) {
      picks.push_back(rng.index(5));
      rewards.push_back(static_cast<double>(rng.index(3)) / 2.0);
    }
    if (std::all_of(rewards.begin(), rewards.end(), [&](double r) { return r == rewards[0]; })) rewards[0] = 1 - rewards[0];
    const auto adv = group_advantages(rewards);
    const double lr = 1e-3;
    p.grpo_update("u", picks, rewards, lr);
    std::vector<double> update(5), numeric(5);
    for (std::size_t i = 0; i < 5; ++i) {
      update[i] = (p.logits("u")[i] - z[i]) / lr;
      auto hi = z, lo = z;
      const double h = 1e-5;
      hi[i] += h;
      lo[i] -= h;
      numeric[i] = (grpo_objective(hi, t, picks, adv) - grpo_objective(lo, t, picks, adv)) / (2 * h);
    }
    expect_gradient_match(update, numeric);
  }
}

TEST(Sft, MatchesFiniteDifferences) {
  Rng rng(23);
  for (int trial = 0; trial < 50; ++trial) {
    const double t = 0.5 + rng.uniform();
    auto z = random_logits(rng, 5);
    auto p = single(z, t);
    const std::size_t target = rng.index(5);
    const double lr = 1e-3;
    p.sft_step("u", target, lr);
    std::vector<double> update(5), numeric(5);
    for (std::size_t i = 0; i < 5; ++i) {
      update[i] = (p.logits("u")[i] - z[i]) / lr;
      auto hi = z, lo = z;
      const double h = 1e-5;
      hi[i] += h;
      lo[i] -= h;
      numeric[i] = (grpo_objective(hi, t, {target}, {1.0}) - grpo_objective(lo, t, {target}, {1.0})) / (2 * h);
    }
    expect_gradient_match(update, numeric);
  }
}

TEST(Sft, WorkedExamples) {
  auto p = single({0.0, 1.0, 2.0, -1.0});
  double last = p.probabilities("u")[3];
  for (int i = 0; i < 200; ++i) {
    p.sft_step("u", 3, 0.5);
    const double now = p.probabilities("u")[3];
    EXPECT_GT(now, last);
    last = now;
  }
  EXPECT_GT(last, 0.99);

  const auto before = p.logits("u");
  p.sft_step("u", 3, 0.0);
  EXPECT_EQ(p.logits("u"), before);

  auto sat = single({30.0, 0.0, 0.0});
  const double lp0 = std::log(sat.probabilities("u")[0]);
  sat.sft_step("u", 0, 0.5);
  EXPECT_LT(std::log(sat.probabilities("u")[0]) - lp0, 1e-9);

  EXPECT_THROW(p.sft_step("u", 4, 0.1), DomainError);
}

TEST(Policy, ProbabilityConservation) {
  Rng rng(5);
  auto p = single(random_logits(rng, 7), 0.7);
  for (int step = 0; step < 500; ++step) {
    if (rng.bernoulli(0.5)) {
      std::vector<std::size_t> picks(8);
      std::vector<double> rewards(8);
      for (int j = 0; j < 8; ++j) {
        picks[j] = rng.index(7);
        rewards[j] = rng.bernoulli(0.3) ? 1.0 : 0.0;
      }
      p.grpo_update("u", picks, rewards, 0.3);
    } else {
      p.sft_step("u", rng.index(7), 0.3);
    }
    EXPECT_NEAR(sum(p.probabilities("u")), 1.0, 1e-9);
  }
}

TEST(Teacher, EmaContraction) {
  Rng rng(8);
  auto actor = single(random_logits(rng, 6));
  auto start = single(random_logits(rng, 6));
  TeacherState teacher(start, 0.9);
  std::vector<double> gap(6);
  for (std::size_t i = 0; i < 6; ++i) gap[i] = start.logits("u")[i] - actor.logits("u")[i];
  for (int step = 1; step <= 50; ++step) {
    teacher.update(actor);
    const auto& t = dynamic_cast<const ToyPolicy&>(teacher.policy()).logits("u");
    for (std::size_t i = 0; i < 6; ++i) {
      gap[i] *= 0.9;
      EXPECT_NEAR(t[i] - actor.logits("u")[i], gap[i], 1e-12);
    }
  }
}

TEST(Acr, WorkedExamples) {
  Rng rng(3);
  auto teacher = single({0.0, 0.0, 0.0, 0.0});
  for (auto a : acr_sample_answers(teacher, "u", 2, 4, 1.0, rng)) EXPECT_EQ(a, 2u);
  EXPECT_NEAR(acr_success_probability(0.5, 0.1, 4), 1 - std::pow(0.45, 4), 1e-15);
  EXPECT_NEAR(acr_success_probability(0.5, 0.1, 4), 0.9590, 5e-5);
  EXPECT_THROW(acr_sample_answers(teacher, "u", 2, 4, 1.5, rng), DomainError);
}

TEST(Acr, ZeroExposureMatchesTeacherLaw) {
  Rng rng(4);
  auto teacher = single({0.0, 1.0, -1.0, 0.5});
  const auto probs = teacher.probabilities("u");
  const int n = 40000;
  std::vector<double> counts(4, 0.0);
  for (auto a : acr_sample_answers(teacher, "u", 0, n, 0.0, rng)) counts[a] += 1;
  double chi2 = 0;
  for (int i = 0; i < 4; ++i) chi2 += std::pow(counts[i] - n * probs[i], 2) / (n * probs[i]);
  EXPECT_LT(chi2, 16.27);  // 0.1% critical value, 3 degrees of freedom
}

TEST(Acr, MixtureFrequencyMatchesClosedForm) {
  Rng rng(6);
  auto teacher = single(logits_with_gold_probability(10, 3, 0.1));
  const int episodes = 20000;
  int hits = 0;
  for (int e = 0; e < episodes; ++e) {
    const auto draws = acr_sample_answers(teacher, "u", 3, 4, 0.5, rng);
    hits += std::find(draws.begin(), draws.end(), 3u) != draws.end();
  }
  EXPECT_NEAR(static_cast<double>(hits) / episodes, acr_success_probability(0.5, 0.1, 4), 0.005);
}

TEST(Entropy, WorkedExamples) {
  EXPECT_NEAR(entropy(std::vector<double>{0.25, 0.25, 0.25, 0.25}), std::log(4.0), 1e-15);
  EXPECT_EQ(entropy(std::vector<double>{1.0, 0.0}), 0.0);
  EXPECT_NEAR(entropy(std::vector<double>{0.5, 0.5, 0.0, 0.0}), std::log(2.0), 1e-15);
  EXPECT_NEAR(entropy(single({0, 0, 0, 0}), "u"), std::log(4.0), 1e-12);
}

TEST(Logits, GoldProbability) {
  const auto z = logits_with_gold_probability(50, 7, 0.002);
  auto p = single(z);
  EXPECT_NEAR(p.probabilities("u")[7], 0.002, 1e-15);
  EXPECT_NEAR(p.probabilities("u")[0], 0.998 / 49, 1e-15);
}

TEST(Snapshot, RoundTrip) {
  TempDir dir;
  Rng rng(12);
  ToyPolicy p(0.7);
  p.add_prompt("a", {"T1001", "T1002", "T1003"}, random_logits(rng, 3));
  p.add_prompt("b, \"odd\"", {"x y", "z"}, random_logits(rng, 2));
  const auto path = (dir / "s.jsonl").string();
  write_snapshot(path, p, 42, {{"a", 2}});
  const auto snap = read_snapshot(path);
  EXPECT_EQ(snap.step, 42u);
  EXPECT_EQ(snap.temperature, 0.7);
  ASSERT_EQ(snap.prompts.size(), 2u);
  EXPECT_EQ(snap.prompts[0].gold, 2u);
  EXPECT_FALSE(snap.prompts[1].gold.has_value());
  const auto back = snap.to_policy();
  for (const auto& uid : p.uids()) {
    EXPECT_EQ(back.logits(uid), p.logits(uid));
    EXPECT_EQ(back.answers(uid), p.answers(uid));
  }
  EXPECT_THROW(read_snapshot(dir.file("bad", "nope\n").string()), SchemaError);
  EXPECT_THROW(read_snapshot(dir.file("bad2", "# minerva-policy-snapshot v1\n{\"step\":1,\"temperature\":1}\n"
                                              "{\"uid\":\"a\",\"answers\":[\"x\"],\"logits\":[1,2]}\n").string()),
               SchemaError);
}

}  // namespace
}  // namespace minerva
