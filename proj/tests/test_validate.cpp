#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <sstream>

#include "ilp/project.hpp"

using namespace ilp;

namespace {

DocumentSet make_set(std::initializer_list<std::pair<std::string, std::string>> docs) {
  DocumentSet set;
  for (const auto& [path, text] : docs) set.docs.push_back(parse_document(path, text));
  return set;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("well-formed take-right fixture validates cleanly") {
  auto set = make_set({{"take_right.md",
                        read_file(std::string(ILP_FIXTURES_DIR) +
                                  "/take_right/take_right.md")}});
  CHECK(validate(set).empty());
}

TEST_CASE("all shipped fixtures validate cleanly") {
  for (const char* rel :
       {"/g1_doctest/take_right_g1.md", "/quicksort/quicksort.md",
        "/fig6_stages/stages.md", "/obfuscation/map.md"}) {
    auto set = make_set(
        {{rel, read_file(std::string(ILP_FIXTURES_DIR) + rel)}});
    CAPTURE(rel);
    CHECK(validate(set).empty());
  }
  auto fig5 = make_set(
      {{"chapter2.md", read_file(std::string(ILP_FIXTURES_DIR) + "/fig5_dag/chapter2.md")},
       {"chapter3.md", read_file(std::string(ILP_FIXTURES_DIR) + "/fig5_dag/chapter3.md")},
       {"chapter6.md", read_file(std::string(ILP_FIXTURES_DIR) + "/fig5_dag/chapter6.md")}});
  CHECK(validate(fig5).empty());
}

TEST_CASE("duplicate annotation names error") {
  auto set = make_set(
      {{"a.md", "```scheme doc\n(define-with-docs f #:examples '(f) => 1)\n```\n"},
       {"b.md", "```scheme doc\n(define-with-docs f #:examples '(f) => 2)\n```\n"}});
  auto diags = validate(set);
  REQUIRE(diags.size() == 1);
  CHECK(diags[0].severity == Severity::Error);
  CHECK(diags[0].message.find("duplicate annotation") != std::string::npos);
}

TEST_CASE("unresolved chunk reference errors") {
  auto set = make_set({{"a.md", "```py file=a.py\n<<missing>>\n```\n"}});
  auto diags = validate(set);
  REQUIRE(diags.size() == 1);
  CHECK(diags[0].message.find("<<missing>>") != std::string::npos);
}

TEST_CASE("unresolved depends and link references error") {
  auto set = make_set(
      {{"a.md",
        "See [[ghost]].\n\n```scheme doc\n"
        "(define-with-docs f #:depends '(phantom))\n```\n"}});
  auto diags = validate(set);
  REQUIRE(diags.size() == 2);
  CHECK(diags[0].message.find("[[ghost]]") != std::string::npos);
  CHECK(diags[1].message.find("phantom") != std::string::npos);
}

TEST_CASE("links resolve against names and heading anchors") {
  auto set = make_set(
      {{"a.md", "# Intro Section\n\nSee [[intro-section]] and [[Intro Section]].\n"}});
  CHECK(validate(set).empty());
}

TEST_CASE("path escape errors") {
  // Any `..` component is rejected, even ones that normalize harmlessly.
  for (const char* target :
       {"../../etc/x", "/etc/passwd", "a/../../b.py", "sub/../ok.py"}) {
    auto set = make_set(
        {{"a.md", std::string("```py file=") + target + "\nx\n```\n"}});
    CAPTURE(target);
    auto diags = validate(set);
    REQUIRE(diags.size() == 1);
    CHECK(diags[0].message.find("escapes the project root") != std::string::npos);
  }
  auto fine = make_set({{"a.md", "```py file=sub/ok.py\nx\n```\n"}});
  CHECK(validate(fine).empty());
}

TEST_CASE("chunk with neither name nor file nor doc errors") {
  auto set = make_set({{"a.md", "```py\nx\n```\n"}});
  auto diags = validate(set);
  REQUIRE(diags.size() == 1);
  CHECK(diags[0].severity == Severity::Error);
}

TEST_CASE("step spec without matching annotation or chunk warns") {
  auto set = make_set(
      {{"a.md", "## mystery\n\n### Zero-Step Logic\n\nx\n\n### Succ-Step Logic\n\ny\n"}});
  auto diags = validate(set);
  REQUIRE(diags.size() == 1);
  CHECK(diags[0].severity == Severity::Warning);
  CHECK(diags[0].message.find("mystery") != std::string::npos);
}

TEST_CASE("doc chunk with file target but no tangle attribute warns") {
  auto set = make_set({{"a.md", "```scheme doc file=a.scm chunk=c\n(x)\n```\n"}});
  auto diags = validate(set);
  REQUIRE(diags.size() == 1);
  CHECK(diags[0].severity == Severity::Warning);

  auto ok = make_set({{"a.md", "```scheme doc file=a.scm chunk=c tangle=true\n(x)\n```\n"}});
  CHECK(validate(ok).empty());
}

TEST_CASE("diagnostics are order-independent across document order") {
  std::string a = "See [[ghost]].\n";
  std::string b = "```py file=../x.py\nx\n```\n";
  auto d1 = validate(make_set({{"a.md", a}, {"b.md", b}}));
  auto d2 = validate(make_set({{"b.md", b}, {"a.md", a}}));
  REQUIRE(d1.size() == d2.size());
  for (std::size_t i = 0; i < d1.size(); ++i) {
    CHECK(d1[i].message == d2[i].message);
    CHECK(d1[i].span.document_path == d2[i].span.document_path);
  }
}

TEST_CASE("diagnostic format matches compiler convention") {
  Diagnostic d{Severity::Error, {"doc.md", 10, 20, 7}, "boom"};
  CHECK(d.format() == "doc.md:7: error: boom");
}
