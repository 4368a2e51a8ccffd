#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace minerva::text {

std::string_view trim(std::string_view s);
std::string to_upper(std::string_view s);
std::string to_lower(std::string_view s);

bool is_alnum(char c);

/// Splits on '\n' (a trailing '\r' is dropped from each line).
std::vector<std::string_view> lines(std::string_view s);

/// Whitespace-delimited tokens.
std::vector<std::string_view> whitespace_tokens(std::string_view s);

/// Word tokens matching [A-Za-z0-9_]+, lowercased.
std::vector<std::string> word_tokens(std::string_view s);

/// Number of Unicode code points in a UTF-8 string.
std::size_t utf8_length(std::string_view s);

bool iequals(std::string_view a, std::string_view b);
bool istarts_with(std::string_view s, std::string_view prefix);

/// 64-bit FNV-1a, optionally continuing from a previous hash value.
constexpr std::uint64_t fnv1a64(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace minerva::text
