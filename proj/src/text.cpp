#include "sead/text.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>

namespace sead {

namespace {

bool is_word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)); }

}  // namespace

std::vector<std::string> tokenize_text(const std::string& text) {
  std::vector<std::string> out;
  const size_t n = text.size();
  size_t i = 0;
  while (i < n) {
    char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (!is_word_char(c)) {
      out.emplace_back(1, c);
      ++i;
      continue;
    }
    size_t j = i + 1;
    while (j < n) {
      if (is_word_char(text[j])) {
        ++j;
      } else if ((text[j] == '.' || text[j] == ',') && j + 1 < n &&
                 is_digit(text[j - 1]) && is_digit(text[j + 1])) {
        j += 2;
      } else {
        break;
      }
    }
    out.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

std::string join_tokens(const std::vector<std::string>& tokens) {
  std::string out;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

std::string normalize_text(const std::string& text) {
  return join_tokens(tokenize_text(text));
}

std::string trim(const std::string& s) {
  const auto start = s.find_first_not_of(" \t\r\n");
  if (start == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(start, end - start + 1);
}

std::string lower(const std::string& s) {
  std::string out = s;
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

std::optional<double> parse_number(const std::string& s) {
  std::string t = trim(s);
  if (t.empty()) return std::nullopt;
  // Drop digit-grouping commas ("1,000,000") before parsing.
  std::string cleaned;
  cleaned.reserve(t.size());
  for (size_t i = 0; i < t.size(); ++i) {
    if (t[i] == ',' && i > 0 && i + 1 < t.size() && is_digit(t[i - 1]) &&
        is_digit(t[i + 1])) {
      continue;
    }
    cleaned += t[i];
  }
  const char* begin = cleaned.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (end != begin + cleaned.size()) return std::nullopt;
  return v;
}

}  // namespace sead
