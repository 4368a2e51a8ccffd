#pragma once

#include <string>
#include <string_view>

namespace minerva {

/// Canonical identifier form: trimmed, uppercased, and for ATT&CK techniques
/// the sub-technique suffix left-padded to three digits (T1059.3 -> T1059.003).
std::string norm_id(std::string_view id);

/// Canonical actor form: lowercase ASCII, every run of non-alphanumeric
/// characters collapsed to one space, trimmed. Bytes >= 0x80 are kept so
/// non-Latin names survive.
std::string norm_actor(std::string_view name);

/// Base technique of a technique identifier ("T1059.003" -> "T1059").
std::string_view base_technique(std::string_view normalized_id);
bool has_subtechnique(std::string_view normalized_id);

}  // namespace minerva
