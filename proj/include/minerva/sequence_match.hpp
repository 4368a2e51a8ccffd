#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

namespace minerva {

struct MatchingBlock {
  std::size_t a = 0;
  std::size_t b = 0;
  std::size_t size = 0;
  bool operator==(const MatchingBlock&) const = default;
};

/// Matching blocks between two byte strings, computed the same way as
/// Python's difflib.SequenceMatcher with no junk predicate and autojunk on:
/// when len(b) >= 200, elements of b occurring more than len(b)/100 + 1 times
/// are treated as popular and cannot seed a match. Blocks are sorted and
/// adjacent blocks merged; the trailing sentinel is omitted.
std::vector<MatchingBlock> matching_blocks(std::string_view a, std::string_view b);

/// 2*M / (len(a) + len(b)) over the matching blocks; 1.0 when both are empty.
double sequence_ratio(std::string_view a, std::string_view b);

}  // namespace minerva
