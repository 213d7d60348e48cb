#pragma once

#include <optional>
#include <string>
#include <vector>

namespace sead {

// Splits text into word tokens. Alphanumeric runs stay together, '.' and ','
// stay inside a token only between digits ("3.0", "1,000"), every other
// non-space character becomes a single-character token. The backtick is
// reserved as a quoting token and is always emitted on its own.
std::vector<std::string> tokenize_text(const std::string& text);

// Joins tokens with single spaces.
std::string join_tokens(const std::vector<std::string>& tokens);

// Tokenize-then-join: collapses whitespace and spaces out punctuation.
std::string normalize_text(const std::string& text);

std::string trim(const std::string& s);
std::string lower(const std::string& s);

// Numeric parse used by the executor and table loader: trims, strips
// digit-grouping commas, then requires the whole remainder to parse.
std::optional<double> parse_number(const std::string& s);

}  // namespace sead
