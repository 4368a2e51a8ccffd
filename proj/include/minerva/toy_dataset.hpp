#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "minerva/policy.hpp"
#include "minerva/task_model.hpp"

namespace minerva {

struct HardDatasetConfig {
  std::size_t prompts = 200;
  std::size_t answers = 50;
  double p0 = 0.002;
  std::uint64_t seed = 1;
  double temperature = 1.0;
};

struct ToyProblem {
  std::vector<TaskInstance> tasks;
  ToyPolicy policy;
  std::unordered_map<std::string, std::size_t> gold;  // uid -> gold answer index
};

/// Technique-mapping prompts, each with its own set of distinct candidate
/// technique ids and an initial policy assigning p0 to the gold id.
ToyProblem make_hard_dataset(const HardDatasetConfig& config);

}  // namespace minerva
