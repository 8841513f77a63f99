#include "sgvqa/text.hpp"

#include <cctype>
#include <sstream>

namespace sgvqa {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string collapse_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char c : s) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

}  // namespace

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string normalize_label(std::string_view s) { return collapse_whitespace(to_lower(s)); }

std::string normalize_answer(std::string_view s) {
  std::string stripped;
  stripped.reserve(s.size());
  for (char c : to_lower(s)) {
    if (std::ispunct(static_cast<unsigned char>(c))) {
      // "bike-riding" and "bike riding" compare equal
      if (c == '-' || c == '/') stripped.push_back(' ');
      continue;
    }
    stripped.push_back(c);
  }
  std::string out = collapse_whitespace(stripped);
  for (std::string_view article : {"a ", "an ", "the "}) {
    if (out.size() > article.size() && out.compare(0, article.size(), article) == 0) {
      out.erase(0, article.size());
      break;
    }
  }
  return out;
}

bool is_affirmative(std::string_view response) {
  return to_lower(trim(response)).rfind("yes", 0) == 0;
}

std::vector<std::string> split_lines(std::string_view text) {
  std::vector<std::string> lines;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

}  // namespace sgvqa
