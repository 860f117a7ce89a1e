#include "doctest.h"

#include "facteval/util/text.hpp"

using namespace facteval;

TEST_SUITE("text") {
  TEST_CASE("normalize_whitespace collapses runs and trims") {
    CHECK(text::normalize_whitespace("  a \t b\n\nc ") == "a b c");
    CHECK(text::normalize_whitespace("") == "");
    CHECK(text::normalize_whitespace("   \n\t ") == "");
    CHECK(text::normalize_whitespace("one") == "one");
  }

  TEST_CASE("count_words") {
    CHECK(text::count_words("") == 0);
    CHECK(text::count_words("one two  three") == 3);
    CHECK(text::count_words("  padded  ") == 1);
  }

  TEST_CASE("ifind is case-insensitive") {
    CHECK(text::ifind("Hello World", "world") == 6);
    CHECK(text::ifind("Hello", "nope") == std::string_view::npos);
    CHECK(text::ifind("abc", "") == 0);
  }

  TEST_CASE("sentence split on terminal punctuation") {
    auto s = text::split_sentence_strings("He was born in 1815. He died in 1852.");
    REQUIRE(s.size() == 2);
    CHECK(s[0] == "He was born in 1815.");
    CHECK(s[1] == "He died in 1852.");
  }

  TEST_CASE("abbreviations and initials never split") {
    CHECK(text::split_sentence_strings("Dr. Smith studied at M.I.T. in 1990.").size() == 1);
    CHECK(text::split_sentence_strings("J. K. Rowling wrote novels. She lives in Britain.")
              .size() == 2);
    CHECK(text::split_sentence_strings("He works at the U.S. Department of State.").size() == 1);
    CHECK(text::split_sentence_strings("Mr. Jones met Mrs. Smith. They spoke.").size() == 2);
  }

  TEST_CASE("split requires uppercase or digit after whitespace") {
    CHECK(text::split_sentence_strings("He said hello. then he left.").size() == 1);
    CHECK(text::split_sentence_strings("It happened. 1815 was the year.").size() == 2);
    CHECK(text::split_sentence_strings("Really! Yes. Why? Because.").size() == 4);
  }

  TEST_CASE("empty and whitespace-only inputs") {
    CHECK(text::split_sentence_strings("").empty());
    CHECK(text::split_sentence_strings("   \n ").empty());
  }

  TEST_CASE("split_words keeps tokens verbatim") {
    auto words = text::split_words(" Ada  Lovelace\t1815 ");
    REQUIRE(words.size() == 3);
    CHECK(words[0] == "Ada");
    CHECK(words[2] == "1815");
  }
}
