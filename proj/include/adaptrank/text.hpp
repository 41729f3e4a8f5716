#pragma once

#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace adaptrank {

using Tokens = std::vector<std::string>;
using StopwordSet = std::unordered_set<std::string>;

/// Lowercases and splits on every non-alphanumeric codepoint. Input is read
/// as UTF-8: ASCII letters and digits are word characters, ASCII punctuation
/// and the Latin-1, general and CJK punctuation blocks are separators, and
/// any other non-ASCII codepoint is kept inside the token. Latin-1 capitals
/// are folded; no other case mapping is attempted.
Tokens tokenize(std::string_view text);

/// As above, dropping tokens found in `stopwords`.
Tokens tokenize(std::string_view text, const StopwordSet& stopwords);

std::string join(const Tokens& tokens, std::string_view sep = " ");

}  // namespace adaptrank
