#include "minerva/reward.hpp"

#include <gtest/gtest.h>

#include <array>
#include <random>

#include "minerva/error.hpp"

namespace minerva {
namespace {

std::optional<ExtractedAnswer> ids(std::vector<std::string> v) {
  ExtractedAnswer a;
  a.ids = std::move(v);
  for (const auto& id : a.ids) a.span += id + " ";
  return a;
}

std::optional<ExtractedAnswer> span(std::string s) {
  ExtractedAnswer a;
  a.span = std::move(s);
  return a;
}

TEST(RewardExact, NormalizedEquality) {
  EXPECT_EQ(reward_exact(ids({"CAPEC-66"}), {"CAPEC-66"}).reward, 1.0);
  EXPECT_EQ(reward_exact(ids({"capec-66"}), {"CAPEC-66"}).reward, 1.0);
  auto miss = reward_exact(ids({"CAPEC-63"}), {"CAPEC-66"});
  EXPECT_EQ(miss.reward, 0.0);
  EXPECT_EQ(miss.evidence, EvidenceKind::NoMatch);
  EXPECT_EQ(reward_exact(std::nullopt, {"CAPEC-66"}).evidence, EvidenceKind::ParseFailure);
}

TEST(RewardTechnique, GradedCredit) {
  EXPECT_EQ(reward_technique(ids({"T1059.003"}), {"T1059.003"}).reward, 1.0);
  auto half = reward_technique(ids({"T1059"}), {"T1059.003"});
  EXPECT_EQ(half.reward, 0.5);
  EXPECT_EQ(half.evidence, EvidenceKind::BaseTechniqueHalf);
  EXPECT_EQ(reward_technique(ids({"T1059.001"}), {"T1059.003"}).reward, 0.5);
  EXPECT_EQ(reward_technique(ids({"T1059.003"}), {"T1059"}).reward, 0.5);
  EXPECT_EQ(reward_technique(ids({"T1027"}), {"T1059.003"}).reward, 0.0);
  EXPECT_EQ(reward_technique(ids({"T1059.3"}), {"T1059.003"}).reward, 1.0);
}

TEST(RewardTechnique, Trichotomy) {
  const std::array<std::string, 6> universe = {"T1059", "T1059.001", "T1059.003",
                                               "T1027", "T1027.002", "T1055"};
  for (const auto& y : universe) {
    for (const auto& t : universe) {
      const double r = reward_technique(ids({y}), {t}).reward;
      EXPECT_TRUE(r == 1.0 || r == 0.5 || r == 0.0);
      if (r == 0.5) {
        EXPECT_EQ(base_technique(y), base_technique(t));
      }
      EXPECT_EQ(r == 1.0, y == t);
    }
  }
}

TEST(RewardSetF1, Branches) {
  EXPECT_EQ(set_f1({}, {}).reward, 1.0);
  EXPECT_EQ(set_f1({"CWE-79"}, {"CWE-79", "CWE-89"}).reward, 2.0 / 3.0);
  EXPECT_EQ(set_f1({"TA0001"}, {}).reward, 0.0);
  EXPECT_EQ(set_f1({}, {"TA0001"}).reward, 0.0);
}

TEST(RewardSetF1, DeduplicatesAndFiltersPredictions) {
  auto r = reward_set_f1(ids({"CWE-79", "cwe-79", "CWE-89"}), IdSetLabel{{"CWE-79"}});
  EXPECT_EQ(r.pred_size, 2u);
  EXPECT_EQ(r.reward, 2.0 / 3.0);
  Catalog cat;
  cat.valid[IdFamily::Cwe] = {"CWE-79"};
  auto filtered = reward_set_f1(ids({"CWE-79", "CWE-99999"}), IdSetLabel{{"CWE-79"}}, &cat);
  EXPECT_EQ(filtered.reward, 1.0);
}

// Independent oracle: recompute F1 from bitmasks over a six-identifier universe.
TEST(RewardSetF1, MatchesBitmaskOracle) {
  const std::array<std::string, 6> universe = {"TA0001", "TA0002", "TA0003",
                                               "TA0004", "TA0005", "TA0006"};
  auto to_set = [&](unsigned mask) {
    std::set<std::string> s;
    for (unsigned i = 0; i < 6; ++i) {
      if (mask & (1u << i)) s.insert(universe[i]);
    }
    return s;
  };
  for (unsigned p = 0; p < 64; ++p) {
    for (unsigned t = 0; t < 64; ++t) {
      if (__builtin_popcount(p) > 4 || __builtin_popcount(t) > 4) continue;
      const int inter = __builtin_popcount(p & t);
      const int np = __builtin_popcount(p);
      const int nt = __builtin_popcount(t);
      const double expected = (np == 0 && nt == 0)  ? 1.0
                              : (np == 0 || nt == 0) ? 0.0
                                                     : static_cast<double>(2 * inter) / (np + nt);
      EXPECT_EQ(set_f1(to_set(p), to_set(t)).reward, expected);
      EXPECT_EQ(set_f1(to_set(p), to_set(t)).reward, set_f1(to_set(t), to_set(p)).reward);
    }
  }
}

CvssVector vec(const char* s) { return *parse_cvss(s).vector; }

TEST(RewardCvss, Distance) {
  const auto gold = vec("CVSS:3.1/AV:N/AC:L/PR:N/UI:N/S:U/C:H/I:H/A:H");
  auto same = reward_cvss(span("CVSS:3.1/AV:N/AC:L/PR:N/UI:N/S:U/C:H/I:H/A:H"), gold);
  EXPECT_EQ(same.reward, 1.0);
  auto five = reward_cvss(span("CVSS:3.1/AV:A/AC:L/PR:N/UI:N/S:U/C:L/I:L/A:N"), gold);
  ASSERT_EQ(five.evidence, EvidenceKind::CvssDistance);
  EXPECT_EQ(five.pred_score_tenths, 54);
  EXPECT_EQ(five.reward, 0.56);
  auto bad = reward_cvss(span("CVSS:3.0/AV:N/AC:L/PR:N/UI:N/S:U/C:H/I:H/A:H"), gold);
  EXPECT_EQ(bad.reward, 0.0);
  EXPECT_EQ(bad.evidence, EvidenceKind::ParseFailure);
  EXPECT_EQ(bad.failure, "version:3.0");
}

TEST(RewardCvss, FivePointZeroAgainstCritical) {
  // AV:N/AC:H/PR:N/UI:R/S:U/C:L/I:L/A:L scores 5.0 in the reference table.
  const auto gold = vec("CVSS:3.1/AV:N/AC:L/PR:N/UI:N/S:U/C:H/I:H/A:H");
  auto r = reward_cvss(span("CVSS:3.1/AV:N/AC:H/PR:N/UI:R/S:U/C:L/I:L/A:L"), gold);
  EXPECT_EQ(r.pred_score_tenths, 50);
  EXPECT_EQ(r.reward, 0.52);
}

TEST(RewardCvss, MonotoneInScoreDistance) {
  const auto gold = vec("CVSS:3.1/AV:N/AC:L/PR:N/UI:N/S:U/C:H/I:H/A:H");
  std::mt19937_64 rng(3);
  const char* av = "NALP";
  const char* cia = "HLN";
  for (int trial = 0; trial < 500; ++trial) {
    auto make = [&] {
      std::string s = "CVSS:3.1/AV:";
      s += av[rng() % 4];
      s += rng() % 2 ? "/AC:L" : "/AC:H";
      s += "/PR:N/UI:N/S:U/C:";
      s += cia[rng() % 3];
      s += "/I:";
      s += cia[rng() % 3];
      s += "/A:";
      s += cia[rng() % 3];
      return s;
    };
    auto a = reward_cvss(span(make()), gold);
    auto b = reward_cvss(span(make()), gold);
    const int da = std::abs(a.pred_score_tenths - a.gold_score_tenths);
    const int db = std::abs(b.pred_score_tenths - b.gold_score_tenths);
    if (da <= db) {
      EXPECT_GE(a.reward, b.reward);
    }
    EXPECT_GE(a.reward, 0.0);
    EXPECT_LE(a.reward, 1.0);
  }
}

TEST(RewardActor, AliasSets) {
  AliasTable t;
  t.add("FancyBear", {"APT28", "Fancy Bear", "fancybear", "Sofacy"});
  t.add("Lazarus Group", {"Lazarus"});
  auto hit = reward_actor(span("APT28; Sofacy"), {"FancyBear"}, t);
  EXPECT_EQ(hit.reward, 1.0);
  EXPECT_EQ(hit.evidence, EvidenceKind::AliasHit);
  EXPECT_EQ(hit.matched_alias, "apt28");
  EXPECT_EQ(reward_actor(span("FancyBear"), {"FancyBear"}, t).reward, 1.0);
  EXPECT_EQ(reward_actor(span("Lazarus"), {"FancyBear"}, t).reward, 0.0);
  EXPECT_EQ(reward_actor(span(" ,;, fancy  bear"), {"FancyBear"}, t).reward, 1.0);
  EXPECT_THROW(reward_actor(span("APT28"), {"Nobody"}, t), ConfigError);
}

TEST(Vsp, Aggregate) {
  std::vector<std::pair<double, double>> equal = {{9.8, 9.8}, {5.0, 5.0}};
  EXPECT_EQ(vsp_eval_score(equal), 1.0);
  std::vector<std::pair<double, double>> one = {{0.0, 7.7}};
  EXPECT_NEAR(vsp_eval_score(one), 0.0, 1e-15);
  std::vector<std::pair<double, double>> two = {{5.0, 5.0}, {3.0, 5.0}};
  EXPECT_NEAR(vsp_eval_score(two), 1.0 - 1.0 / 7.7, 1e-15);
  EXPECT_NEAR(vsp_eval_score(two), 0.8701, 5e-5);
  EXPECT_THROW(vsp_eval_score({}), DomainError);
}

TEST(ScoreCompletion, EndToEndDispatch) {
  TaskInstance t{"u", TaskKind::AttackTechnique, "p", IdLabel{"T1059.003"}, std::nullopt};
  auto s = score_completion(t, "cmd usage...\n\\boxed{T1059}", ExtractionMode::Strict);
  EXPECT_EQ(s.report.reward, 0.5);
  auto none = score_completion(t, "no idea", ExtractionMode::Strict);
  EXPECT_FALSE(none.extracted);
  EXPECT_EQ(none.report.evidence, EvidenceKind::ParseFailure);
  TaskInstance actor{"v", TaskKind::ActorAttribution, "p", ActorLabel{"X"}, std::nullopt};
  EXPECT_THROW(score_completion(actor, "\\boxed{X}", ExtractionMode::Strict), ConfigError);
}

}  // namespace
}  // namespace minerva
