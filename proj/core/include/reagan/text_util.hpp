#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace reagan {

std::string trim(const std::string& s);
std::string to_lower(const std::string& s);

// Collapses every internal whitespace run to a single space (after trimming).
std::string collapse_spaces(const std::string& s);

// Longest prefix of s with at most max_bytes bytes that does not split a
// UTF-8 sequence.
std::string utf8_truncate(const std::string& s, std::size_t max_bytes);

// Approximate token count used for prompt budgeting: each run of
// [A-Za-z0-9_] or of bytes >= 0x80 counts as one token, and every other
// non-whitespace byte counts as a token by itself.
std::size_t count_tokens(const std::string& s);

std::uint64_t fnv1a64(const std::string& s);

std::string join(const std::vector<std::string>& parts, const std::string& sep);

} // namespace reagan
