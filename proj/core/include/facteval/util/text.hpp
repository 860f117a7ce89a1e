#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace facteval::text {

/// Trim ASCII whitespace from both ends.
std::string_view trim(std::string_view s);

/// Lowercase ASCII letters in place; other bytes untouched.
std::string lowercase_ascii(std::string_view s);

/// Collapse runs of whitespace to single spaces and trim the ends.
std::string normalize_whitespace(std::string_view s);

/// Number of whitespace-separated words.
std::size_t count_words(std::string_view s);

/// Whitespace-separated tokens, verbatim.
std::vector<std::string> split_words(std::string_view s);

/// Case-insensitive substring search over ASCII. Returns npos if absent.
std::size_t ifind(std::string_view haystack, std::string_view needle);

/// Sentence segmentation: splits on . ! ? followed by whitespace and an
/// uppercase letter or digit (or end of text). A '.' does not split when the
/// word it terminates is a protected abbreviation, a single-letter initial
/// ("J."), or a dotted acronym ("U.S.", "M.I.T."). Segments are trimmed and
/// empty ones dropped.
std::vector<std::string> split_sentence_strings(std::string_view s);
std::vector<std::string> split_sentence_strings(std::string_view s,
                                                std::span<const std::string> protected_abbreviations);

/// Default protected abbreviation list used by split_sentence_strings.
const std::vector<std::string>& default_abbreviations();

}  // namespace facteval::text
