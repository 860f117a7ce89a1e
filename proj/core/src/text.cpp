#include "facteval/util/text.hpp"

#include <algorithm>
#include <cctype>

namespace facteval::text {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }
bool is_upper(char c) { return std::isupper(static_cast<unsigned char>(c)) != 0; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }
bool is_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }

char to_lower(char c) {
  return static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
}

/// Word ending at (and including) position `end` in `s`: the maximal run of
/// non-space characters terminating there.
std::string_view word_ending_at(std::string_view s, std::size_t end) {
  std::size_t begin = end;
  while (begin > 0 && !is_space(s[begin - 1])) --begin;
  return s.substr(begin, end - begin + 1);
}

/// "U.S." / "M.I.T." style: one or more (letter '.') groups.
bool is_dotted_acronym(std::string_view w) {
  if (w.size() < 2 || w.size() % 2 != 0) return false;
  for (std::size_t i = 0; i < w.size(); i += 2) {
    if (!is_alpha(w[i]) || w[i + 1] != '.') return false;
  }
  return true;
}

}  // namespace

std::string_view trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return s.substr(b, e - b);
}

std::string lowercase_ascii(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), to_lower);
  return out;
}

std::string normalize_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool in_space = true;  // swallows leading whitespace
  for (char c : s) {
    if (is_space(c)) {
      in_space = true;
    } else {
      if (in_space && !out.empty()) out.push_back(' ');
      in_space = false;
      out.push_back(c);
    }
  }
  return out;
}

std::size_t count_words(std::string_view s) {
  std::size_t n = 0;
  bool in_word = false;
  for (char c : s) {
    if (is_space(c)) {
      in_word = false;
    } else if (!in_word) {
      in_word = true;
      ++n;
    }
  }
  return n;
}

std::vector<std::string> split_words(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_space(s[i])) ++i;
    std::size_t b = i;
    while (i < s.size() && !is_space(s[i])) ++i;
    if (i > b) out.emplace_back(s.substr(b, i - b));
  }
  return out;
}

std::size_t ifind(std::string_view haystack, std::string_view needle) {
  if (needle.empty()) return 0;
  if (needle.size() > haystack.size()) return std::string_view::npos;
  for (std::size_t i = 0; i + needle.size() <= haystack.size(); ++i) {
    bool hit = true;
    for (std::size_t j = 0; j < needle.size(); ++j) {
      if (to_lower(haystack[i + j]) != to_lower(needle[j])) {
        hit = false;
        break;
      }
    }
    if (hit) return i;
  }
  return std::string_view::npos;
}

const std::vector<std::string>& default_abbreviations() {
  static const std::vector<std::string> kAbbrev = {
      "Dr.", "Mr.", "Mrs.", "Ms.", "Prof.", "Jr.", "Sr.", "St.",
      "vs.", "etc.", "e.g.", "i.e.", "U.S.", "U.K.", "Inc.", "Ltd.",
  };
  return kAbbrev;
}

std::vector<std::string> split_sentence_strings(std::string_view s) {
  return split_sentence_strings(s, default_abbreviations());
}

std::vector<std::string> split_sentence_strings(std::string_view s,
                                                std::span<const std::string> protected_abbreviations) {
  std::vector<std::string> out;
  auto emit = [&](std::size_t begin, std::size_t end) {
    std::string_view seg = trim(s.substr(begin, end - begin));
    if (!seg.empty()) out.emplace_back(seg);
  };

  std::size_t start = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if (c != '.' && c != '!' && c != '?') continue;

    // Require whitespace after the punctuation, then an uppercase letter or digit.
    std::size_t j = i + 1;
    if (j >= s.size() || !is_space(s[j])) continue;
    while (j < s.size() && is_space(s[j])) ++j;
    if (j < s.size() && !is_upper(s[j]) && !is_digit(s[j])) continue;

    if (c == '.') {
      std::string_view word = word_ending_at(s, i);
      bool protected_word =
          std::find(protected_abbreviations.begin(), protected_abbreviations.end(), word) !=
              protected_abbreviations.end() ||
          (word.size() == 2 && is_upper(word[0])) ||  // initial: "J."
          is_dotted_acronym(word);
      if (protected_word) continue;
    }

    emit(start, i + 1);
    start = j;
    i = j - 1;
  }
  emit(start, s.size());
  return out;
}

}  // namespace facteval::text
