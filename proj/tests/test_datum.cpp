#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "ilp/datum.hpp"

using namespace ilp;

namespace {

DatumPtr random_datum(std::mt19937_64& rng, int depth) {
  auto pick = rng() % (depth > 0 ? 6 : 4);
  switch (pick) {
    case 0: {
      static const char* syms[] = {"a", "foo", "take-right", "null?", "+", "x1",
                                   "list->vector", "<=", "set!"};
      return Datum::symbol(syms[rng() % 9]);
    }
    case 1:
      return Datum::number(std::to_string(static_cast<int>(rng() % 2000) - 1000));
    case 2:
      return Datum::boolean(rng() % 2 == 0);
    case 3: {
      static const char* texts[] = {"", "hello", "two words", "with \"quote\"",
                                    "line\nbreak"};
      return Datum::text(texts[rng() % 5]);
    }
    case 4: {
      std::vector<DatumPtr> xs;
      std::size_t n = rng() % 4;
      for (std::size_t i = 0; i < n; ++i) xs.push_back(random_datum(rng, depth - 1));
      return Datum::list(std::move(xs));
    }
    default:
      return Datum::quoted(random_datum(rng, depth - 1));
  }
}

}  // namespace

TEST_CASE("print/parse round-trip on basic forms") {
  auto check_roundtrip = [](const std::string& text) {
    auto d = parse_datum(text);
    CHECK(print_datum(d.value) == text);
  };
  check_roundtrip("(a b c)");
  check_roundtrip("'(1 2 3)");
  check_roundtrip("(define (f x) (+ x 1))");
  check_roundtrip("#t");
  check_roundtrip("(#f \"text\" sym 42)");
  check_roundtrip("(quicksort '(3 1 4 1 5 9 2 6 5 3))");
}

TEST_CASE("round-trip property on random datums") {
  std::mt19937_64 rng(20250825);
  for (int i = 0; i < 500; ++i) {
    DatumPtr d = random_datum(rng, 4);
    std::string printed = print_datum(d);
    auto back = parse_datum(printed);
    CAPTURE(printed);
    CHECK(datum_equal(d, back.value));
    CHECK(print_datum(back.value) == printed);
  }
}

TEST_CASE("keywords lex as their own atoms") {
  auto d = parse_datum("(#:pattern \"divide-and-conquer\")");
  REQUIRE(d.value->items.size() == 2);
  CHECK(d.value->items[0]->kind == Datum::Kind::Keyword);
  CHECK(d.value->items[0]->atom == "pattern");
  CHECK(d.value->items[1]->kind == Datum::Kind::Text);
  CHECK(d.value->items[1]->atom == "divide-and-conquer");
}

TEST_CASE("comments are skipped by the reader but kept by the lexer") {
  std::string text = "(a ; trailing words\n b)";
  auto d = parse_datum(text);
  REQUIRE(d.value->items.size() == 2);
  CHECK(d.value->items[1]->atom == "b");

  auto toks = lex_sex(text);
  bool saw_comment = false;
  for (const auto& t : toks)
    if (t.kind == SexToken::Kind::Comment) {
      saw_comment = true;
      CHECK(text.substr(t.begin, t.end - t.begin) == "; trailing words");
    }
  CHECK(saw_comment);
}

TEST_CASE("parse_all_datums returns every top-level form") {
  auto ds = parse_all_datums("(define x 1)\n;; note\n(define y 2)\n'z");
  REQUIRE(ds.size() == 3);
  CHECK(ds[0]->items[1]->atom == "x");
  CHECK(ds[2]->kind == Datum::Kind::Quoted);
}

TEST_CASE("quoted sub-expressions nest") {
  auto d = parse_datum("(take-right '(a b c d e) 2)");
  REQUIRE(d.value->items.size() == 3);
  CHECK(d.value->items[1]->kind == Datum::Kind::Quoted);
  CHECK(d.value->items[1]->items[0]->items.size() == 5);
  CHECK(d.value->items[2]->kind == Datum::Kind::Number);
}

TEST_CASE("datum_equal distinguishes structure") {
  CHECK(datum_equal(parse_datum("(a (b c))").value, parse_datum("(a (b c))").value));
  CHECK_FALSE(datum_equal(parse_datum("(a (b c))").value, parse_datum("(a b c)").value));
  CHECK_FALSE(datum_equal(parse_datum("1").value, parse_datum("\"1\"").value));
  CHECK_FALSE(datum_equal(parse_datum("'x").value, parse_datum("x").value));
}

TEST_CASE("malformed input raises ParseError") {
  CHECK_THROWS_AS(parse_datum("(a b"), ParseError);
  CHECK_THROWS_AS(parse_datum(")"), ParseError);
  CHECK_THROWS_AS(parse_datum("\"unterminated"), ParseError);
  CHECK_THROWS_AS(parse_datum("#q"), ParseError);
}

TEST_CASE("string escapes round-trip") {
  auto d = parse_datum("\"a\\\"b\\\\c\\nd\"");
  CHECK(d.value->atom == "a\"b\\c\nd");
  auto back = parse_datum(print_datum(d.value));
  CHECK(datum_equal(d.value, back.value));
}
