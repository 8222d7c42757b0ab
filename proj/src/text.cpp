#include "qacme/text.hpp"

namespace qacme {

namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

char lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

std::string collapse(std::string_view raw, bool keep_trailing) {
  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  for (char c : raw) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(lower(c));
  }
  if (keep_trailing && pending_space) out.push_back(' ');
  return out;
}

}  // namespace

std::string normalize_query(std::string_view raw) { return collapse(raw, false); }

std::string normalize_prefix(std::string_view raw) { return collapse(raw, true); }

bool is_normalized_query(std::string_view s) { return !s.empty() && normalize_query(s) == s; }

}  // namespace qacme
