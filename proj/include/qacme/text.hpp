#pragma once

#include <string>
#include <string_view>

namespace qacme {

// Lowercases ASCII letters, collapses whitespace runs to one space and trims
// both ends. Bytes >= 0x80 pass through untouched.
std::string normalize_query(std::string_view raw);

// Like normalize_query() but keeps a single trailing space when the raw input
// ends in whitespace after some content: "best " is a meaningful prefix of
// "best query" and must not collapse to "best".
std::string normalize_prefix(std::string_view raw);

bool is_normalized_query(std::string_view s);

}  // namespace qacme
