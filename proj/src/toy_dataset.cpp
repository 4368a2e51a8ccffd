#include "minerva/toy_dataset.hpp"

#include <array>
#include <cstdio>

#include "minerva/error.hpp"
#include "minerva/rng.hpp"

namespace minerva {

namespace {

constexpr std::array<const char*, 48> kVocabulary = {
    "powershell",  "macro",      "scheduled",   "registry",   "beacon",      "credential",
    "lsass",       "archive",    "loader",      "payload",    "webshell",    "tunnel",
    "kerberos",    "ticket",     "service",     "driver",     "browser",     "cookie",
    "clipboard",   "keylogger",  "screenshot",  "mailbox",    "phishing",    "attachment",
    "installer",   "updater",    "sideloading", "injection",  "hollowing",   "rundll",
    "mshta",       "certutil",   "bitsadmin",   "wmic",       "startup",     "autorun",
    "firewall",    "proxy",      "exfiltration", "staging",   "compression", "encryption",
    "obfuscation", "packing",    "sandbox",     "debugger",   "discovery",   "enumeration"};

constexpr std::array<const char*, 8> kHosts = {"finance", "domain", "build",   "kiosk",
                                               "backup",  "mail",   "jumpbox", "research"};

}  // namespace

ToyProblem make_hard_dataset(const HardDatasetConfig& config) {
  if (config.prompts == 0) throw ConfigError("toy dataset needs at least one prompt");
  if (config.answers == 0 || config.answers > 999) throw ConfigError("toy answer space must hold 1..999 answers");
  if (!(config.p0 > 0.0 && config.p0 < 1.0)) throw ConfigError("toy p0 must lie in (0, 1)");

  Rng rng(mix_seed(config.seed, 0x70F));
  ToyProblem out{{}, ToyPolicy(config.temperature), {}};
  for (std::size_t i = 0; i < config.prompts; ++i) {
    char uid[32];
    std::snprintf(uid, sizeof uid, "hard-%04zu", i + 1);

    std::vector<int> pool(999);
    for (int k = 0; k < 999; ++k) pool[k] = 1001 + k;
    std::vector<std::string> answers;
    for (std::size_t k = 0; k < config.answers; ++k) {
      const std::size_t pick = k + rng.index(pool.size() - k);
      std::swap(pool[k], pool[pick]);
      answers.push_back("T" + std::to_string(pool[k]));
    }
    const std::size_t gold = rng.index(config.answers);

    auto word = [&] { return std::string(kVocabulary[rng.index(kVocabulary.size())]); };
    TaskInstance task;
    task.uid = uid;
    task.kind = TaskKind::AttackTechnique;
    task.prompt = "Incident " + task.uid + ": responders observed " + word() + ", " + word() + " and " +
                  word() + " on a " + kHosts[rng.index(kHosts.size())] + " host after " + word() +
                  " activity. Which ATT&CK technique best describes this behaviour?";
    task.gold = IdLabel{answers[gold]};
    task.label_details = "Reference notes for " + answers[gold] + ": " + word() + " and " + word() +
                         " behaviour.";

    out.gold.emplace(task.uid, gold);
    out.policy.add_prompt(task.uid, answers,
                          config.answers == 1 ? std::vector<double>{0.0}
                                              : logits_with_gold_probability(config.answers, gold, config.p0));
    out.tasks.push_back(std::move(task));
  }
  return out;
}

}  // namespace minerva
