#include "minerva/normalize.hpp"

#include "minerva/text.hpp"

namespace minerva {

namespace {
bool is_digit(char c) { return c >= '0' && c <= '9'; }

// T + 4 digits + '.' + 1..3 digits, already uppercased.
bool is_technique_with_suffix(std::string_view s) {
  if (s.size() < 7 || s.size() > 9 || s[0] != 'T' || s[5] != '.') return false;
  for (std::size_t i = 1; i < 5; ++i) {
    if (!is_digit(s[i])) return false;
  }
  for (std::size_t i = 6; i < s.size(); ++i) {
    if (!is_digit(s[i])) return false;
  }
  return true;
}
}  // namespace

std::string norm_id(std::string_view id) {
  std::string out = text::to_upper(text::trim(id));
  if (is_technique_with_suffix(out)) {
    const std::size_t digits = out.size() - 6;
    out.insert(6, 3 - digits, '0');
  }
  return out;
}

std::string norm_actor(std::string_view name) {
  std::string out;
  out.reserve(name.size());
  bool pending_space = false;
  for (char c : name) {
    const auto u = static_cast<unsigned char>(c);
    if (text::is_alnum(c) || u >= 0x80) {
      if (pending_space && !out.empty()) out.push_back(' ');
      pending_space = false;
      out.push_back((c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c);
    } else {
      pending_space = true;
    }
  }
  return out;
}

std::string_view base_technique(std::string_view normalized_id) {
  const auto dot = normalized_id.find('.');
  return dot == std::string_view::npos ? normalized_id : normalized_id.substr(0, dot);
}

bool has_subtechnique(std::string_view normalized_id) {
  return normalized_id.find('.') != std::string_view::npos;
}

}  // namespace minerva
