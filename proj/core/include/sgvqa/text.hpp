#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace sgvqa {

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);

/// Label identity: trimmed, lowercase, inner whitespace runs collapsed to one space.
std::string normalize_label(std::string_view s);

/// Answer identity used for open-ended matching and MC option matching:
/// lowercase, punctuation removed, whitespace collapsed, leading articles
/// (a / an / the) stripped.
std::string normalize_answer(std::string_view s);

/// True iff the trimmed, lowercased response starts with "yes".
bool is_affirmative(std::string_view response);

std::vector<std::string> split_lines(std::string_view text);

}  // namespace sgvqa
