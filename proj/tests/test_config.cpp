#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "ilp/config.hpp"

using namespace ilp;
namespace fs = std::filesystem;

namespace {

fs::path make_project(const std::string& tag, const std::string& config_json,
                      std::initializer_list<std::pair<std::string, std::string>> files) {
  fs::path root = fs::temp_directory_path() / ("ilp_cfg_" + tag);
  fs::remove_all(root);
  fs::create_directories(root);
  {
    std::ofstream f(root / "ilp.json");
    f << config_json;
  }
  for (const auto& [rel, text] : files) {
    fs::path p = root / rel;
    fs::create_directories(p.parent_path());
    std::ofstream f(p);
    f << text;
  }
  return root;
}

}  // namespace

TEST_CASE("fixture configs load with schema 1") {
  for (const char* rel : {"take_right", "g1_doctest", "quicksort", "fig5_dag",
                          "fig6_stages", "obfuscation"}) {
    CAPTURE(rel);
    auto cfg = load_config(fs::path(ILP_FIXTURES_DIR) / rel / "ilp.json");
    CHECK(!cfg.documents.empty());
    auto set = load_documents(cfg);
    CHECK(!set.docs.empty());
  }
}

TEST_CASE("defaults apply when keys are absent") {
  auto root = make_project("defaults", R"({"schema": 1, "documents": ["*.md"]})",
                           {{"a.md", "hello\n"}});
  auto cfg = load_config(root / "ilp.json");
  CHECK(cfg.out_root == ".");
  CHECK(cfg.default_language == "scheme");
  CHECK(cfg.evaluator.empty());
  CHECK(cfg.document_order.empty());
  CHECK(cfg.project_root == root);
}

TEST_CASE("unsupported schema and malformed JSON are rejected") {
  auto bad = make_project("schema2", R"({"schema": 2, "documents": ["*.md"]})", {});
  CHECK_THROWS_WITH_AS(load_config(bad / "ilp.json"),
                       doctest::Contains("unsupported schema 2"),
                       std::runtime_error);
  auto missing = make_project("noschema", R"({"documents": ["*.md"]})", {});
  CHECK_THROWS_AS(load_config(missing / "ilp.json"), std::runtime_error);
  auto garbage = make_project("garbage", "not json at all", {});
  CHECK_THROWS_AS(load_config(garbage / "ilp.json"), std::runtime_error);
  CHECK_THROWS_AS(load_config("/no/such/ilp.json"), std::runtime_error);
}

TEST_CASE("glob semantics") {
  using ilp::detail::glob_match;
  CHECK(glob_match("*.md", "a.md"));
  CHECK_FALSE(glob_match("*.md", "sub/a.md"));  // `*` stays within a segment
  CHECK(glob_match("**/*.md", "a.md"));
  CHECK(glob_match("**/*.md", "sub/deep/a.md"));
  CHECK(glob_match("docs/*.md", "docs/a.md"));
  CHECK_FALSE(glob_match("docs/*.md", "docs/sub/a.md"));
  CHECK(glob_match("ch?.md", "ch1.md"));
  CHECK_FALSE(glob_match("ch?.md", "ch10.md"));
}

TEST_CASE("document resolution is sorted, unique, and recursive") {
  auto root = make_project(
      "resolve", R"({"schema": 1, "documents": ["**/*.md", "*.md"]})",
      {{"b.md", "b\n"}, {"a.md", "a\n"}, {"sub/c.md", "c\n"}, {"skip.txt", "no\n"}});
  auto cfg = load_config(root / "ilp.json");
  auto docs = load_documents(cfg);
  REQUIRE(docs.docs.size() == 3);
  CHECK(docs.docs[0].path == "a.md");
  CHECK(docs.docs[1].path == "b.md");
  CHECK(docs.docs[2].path == "sub/c.md");
}

TEST_CASE("document_order overrides lexicographic order") {
  auto root = make_project(
      "order",
      R"({"schema": 1, "documents": ["*.md"], "document_order": ["z.md", "a.md"]})",
      {{"a.md", "a\n"}, {"m.md", "m\n"}, {"z.md", "z\n"}});
  auto docs = load_documents(load_config(root / "ilp.json"));
  REQUIRE(docs.docs.size() == 3);
  CHECK(docs.docs[0].path == "z.md");
  CHECK(docs.docs[1].path == "a.md");
  CHECK(docs.docs[2].path == "m.md");  // unlisted files follow, sorted
}

TEST_CASE("zero glob matches is a startup failure") {
  auto root = make_project("none", R"({"schema": 1, "documents": ["*.md"]})",
                           {{"only.txt", "x\n"}});
  auto cfg = load_config(root / "ilp.json");
  CHECK_THROWS_WITH_AS(resolve_documents(cfg),
                       doctest::Contains("matched no files"), std::runtime_error);
}

TEST_CASE("all config keys are honored") {
  auto root = make_project(
      "full",
      R"({"schema": 1, "documents": ["*.md"], "out_root": "src",
          "evaluator": "goldfish", "default_language": "python",
          "templates_dir": "tpl"})",
      {{"a.md", "x\n"}});
  auto cfg = load_config(root / "ilp.json");
  CHECK(cfg.out_root == "src");
  CHECK(cfg.evaluator == "goldfish");
  CHECK(cfg.default_language == "python");
  CHECK(cfg.templates_dir == "tpl");
}
