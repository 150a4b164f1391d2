#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "ilp/tangle.hpp"

using namespace ilp;
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

DocumentSet one_doc(const std::string& text, const std::string& path = "doc.md") {
  DocumentSet set;
  set.docs.push_back(parse_document(path, text));
  return set;
}

DocumentSet fig6() {
  return one_doc(read_file(fs::path(ILP_FIXTURES_DIR) / "fig6_stages/stages.md"),
                 "stages.md");
}

fs::path temp_dir(const std::string& tag) {
  fs::path p = fs::temp_directory_path() / ("ilp_tangle_" + tag);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

/// Oracle for the randomized chunk trees: structure generated alongside an
/// expected expansion computed independently of the library's expander.
struct TreeNode {
  std::string name;
  std::vector<std::string> own_lines;           // literal lines
  std::vector<std::pair<std::string, std::string>> includes;  // (indent, child)
};

void oracle_expand(const std::map<std::string, TreeNode>& tree, const std::string& name,
                   const std::string& indent, std::vector<std::string>* out) {
  const TreeNode& n = tree.at(name);
  std::size_t inc = 0;
  for (const auto& item : n.own_lines) {
    if (item == "@@") {
      const auto& [extra, child] = n.includes[inc++];
      oracle_expand(tree, child, indent + extra, out);
    } else {
      out->push_back(indent + item);
    }
  }
}

}  // namespace

TEST_CASE("fig6 tangles into exactly the two documented files") {
  auto out = tangle_project(fig6(), false);
  REQUIRE(out.files.size() == 2);
  CHECK(out.files.at("processing.scm") ==
        "(define (stage-one input)\n  (process-initial input))\n"
        "(define (stage-three processed-data)\n  (generate-result processed-data))\n");
  CHECK(out.files.at("transform.scm") ==
        "(define (stage-two data)\n  (transform-intermediate data))\n");
}

TEST_CASE("tangle output ends with exactly one trailing newline") {
  auto set = one_doc("```py file=a.py chunk=c\nx = 1\n\n\n```\n");
  auto out = tangle_project(set, false);
  CHECK(out.files.at("a.py") == "x = 1\n\n\n");
  auto set2 = one_doc("```py file=b.py chunk=c\nx\n```\n");
  CHECK(tangle_project(set2, false).files.at("b.py") == "x\n");
}

TEST_CASE("indentation propagates through nested inclusion") {
  auto set = one_doc(
      "```py file=app.py chunk=main\ndef f():\n    <<body>>\n```\n\n"
      "```py chunk=body\nif x:\n    <<inner>>\n```\n\n"
      "```py chunk=inner\ny = 1\n```\n");
  auto out = tangle_project(set, false);
  CHECK(out.files.at("app.py") ==
        "def f():\n    if x:\n        y = 1\n");
}

TEST_CASE("continuation chunks concatenate when referenced by name") {
  auto set = one_doc(
      "```py file=a.py chunk=main\n<<c>>\n```\n\n"
      "```py chunk=c\nfirst\n```\n\n```py chunk=c\nsecond\n```\n");
  CHECK(tangle_project(set, false).files.at("a.py") == "first\nsecond\n");
  auto lines = expand_chunk(set.chunks(), "c");
  CHECK(lines == std::vector<std::string>{"first", "second"});
}

TEST_CASE("continuations across documents follow document-set order") {
  DocumentSet set;
  set.docs.push_back(parse_document("a.md", "```py file=x.py chunk=m\n<<c>>\n```\n\n"
                                            "```py chunk=c\nA\n```\n"));
  set.docs.push_back(parse_document("b.md", "```py chunk=c\nB\n```\n"));
  CHECK(tangle_project(set, false).files.at("x.py") == "A\nB\n");
}

TEST_CASE("doc chunks are excluded unless tangle=true") {
  auto set = one_doc(
      "```scheme doc file=a.scm chunk=keep tangle=true\n(kept)\n```\n\n"
      "```scheme doc chunk=skip\n(skipped)\n```\n\n"
      "```scheme file=a.scm chunk=plain\n(plain)\n```\n");
  auto out = tangle_project(set, false);
  CHECK(out.files.at("a.scm") == "(kept)\n(plain)\n");
}

TEST_CASE("inclusion cycle raises CycleError naming the cycle") {
  auto set = one_doc(
      "```py file=a.py chunk=a\n<<b>>\n```\n\n"
      "```py chunk=b\n<<c>>\n```\n\n```py chunk=c\n<<a>>\n```\n");
  try {
    tangle_project(set, false);
    FAIL("expected CycleError");
  } catch (const CycleError& e) {
    const auto& cyc = e.cycle();
    REQUIRE(cyc.size() >= 3);
    CHECK(cyc.front() == cyc.back());
    for (const auto& n : {std::string("a"), std::string("b"), std::string("c")})
      CHECK(std::find(cyc.begin(), cyc.end(), n) != cyc.end());
  }
}

TEST_CASE("unresolved inclusion raises") {
  auto set = one_doc("```py file=a.py chunk=a\n<<nope>>\n```\n");
  CHECK_THROWS_AS(tangle_project(set, false), std::runtime_error);
}

TEST_CASE("markers carry chunk id and definition site") {
  auto set = one_doc(
      "```scheme file=a.scm chunk=f\n(f)\n```\n\n"
      "```python file=b.py chunk=g\npass\n```\n",
      "doc.md");
  auto out = tangle_project(set, true);
  CHECK(out.files.at("a.scm") ==
        ";; ILP:BEGIN f doc.md:1\n(f)\n;; ILP:END f\n");
  CHECK(out.files.at("b.py") ==
        "# ILP:BEGIN g doc.md:5\npass\n# ILP:END g\n");
}

TEST_CASE("write_tangle is idempotent") {
  auto dir = temp_dir("idem");
  auto out = tangle_project(fig6(), false);
  auto first = write_tangle(out, dir);
  CHECK(first.size() == 2);
  auto mtime = fs::last_write_time(dir / "processing.scm");
  auto second = write_tangle(out, dir);
  CHECK(second.empty());
  CHECK(fs::last_write_time(dir / "processing.scm") == mtime);
}

TEST_CASE("check_drift reports sync, modification, and absence") {
  auto dir = temp_dir("drift");
  auto out = tangle_project(fig6(), false);
  write_tangle(out, dir);
  for (const auto& r : check_drift(fig6(), dir, false))
    CHECK(r.status == DriftStatus::InSync);
  {
    std::ofstream f(dir / "transform.scm", std::ios::app);
    f << ";; local edit\n";
  }
  fs::remove(dir / "processing.scm");
  std::ofstream(dir / "stray.txt") << "not ours\n";
  std::map<std::string, DriftStatus> st;
  for (const auto& r : check_drift(fig6(), dir, false)) st[r.path] = r.status;
  CHECK(st.at("transform.scm") == DriftStatus::Modified);
  CHECK(st.at("processing.scm") == DriftStatus::Missing);
  CHECK(st.at("stray.txt") == DriftStatus::Extra);
}

TEST_CASE("1000 randomized chunk trees expand deterministically with correct indentation") {
  std::mt19937_64 rng(424242);
  for (int iter = 0; iter < 1000; ++iter) {
    int n = 1 + rng() % 6;
    std::map<std::string, TreeNode> tree;
    std::string doc;
    for (int i = 0; i < n; ++i) {
      TreeNode node;
      node.name = "c" + std::to_string(i);
      int lines = 1 + rng() % 4;
      for (int l = 0; l < lines; ++l) {
        // Children may only be higher-numbered nodes: acyclic by construction.
        if (i + 1 < n && rng() % 3 == 0) {
          int child = i + 1 + rng() % (n - i - 1);
          std::string indent(rng() % 4, ' ');
          node.own_lines.push_back("@@");
          node.includes.push_back({indent, "c" + std::to_string(child)});
        } else {
          node.own_lines.push_back(rng() % 5 == 0
                                       ? ""
                                       : std::string(rng() % 3, ' ') + "line" +
                                             std::to_string(l));
        }
      }
      tree[node.name] = node;
    }
    for (int i = 0; i < n; ++i) {
      const TreeNode& node = tree["c" + std::to_string(i)];
      doc += "```py " + std::string(i == 0 ? "file=out.py " : "") + "chunk=" +
             node.name + "\n";
      std::size_t inc = 0;
      for (const auto& l : node.own_lines) {
        if (l == "@@") {
          const auto& [indent, child] = node.includes[inc++];
          doc += indent + "<<" + child + ">>\n";
        } else {
          doc += l + "\n";
        }
      }
      doc += "```\n\n";
    }
    auto set = one_doc(doc);
    auto out = tangle_project(set, false);
    std::vector<std::string> expected;
    oracle_expand(tree, "c0", "", &expected);
    std::string expected_text;
    for (const auto& l : expected) expected_text += l + "\n";
    CAPTURE(doc);
    CHECK(out.files.at("out.py") == expected_text);
    // Determinism: a fresh parse and expansion yields identical bytes.
    CHECK(tangle_project(one_doc(doc), false).files.at("out.py") == expected_text);
  }
}

TEST_CASE("injected cycles in random trees always raise with a real cycle path") {
  std::mt19937_64 rng(31337);
  for (int iter = 0; iter < 100; ++iter) {
    int n = 2 + rng() % 5;
    std::string doc;
    // Chain c0 -> c1 -> ... -> c(n-1) -> c(k) for random k: guaranteed cycle.
    int back = rng() % n;
    for (int i = 0; i < n; ++i) {
      doc += "```py " + std::string(i == 0 ? "file=out.py " : "") + "chunk=c" +
             std::to_string(i) + "\n";
      int next = i + 1 < n ? i + 1 : back;
      doc += "<<c" + std::to_string(next) + ">>\n```\n\n";
    }
    try {
      tangle_project(one_doc(doc), false);
      FAIL("expected CycleError");
    } catch (const CycleError& e) {
      const auto& cyc = e.cycle();
      REQUIRE(cyc.size() >= 2);
      CHECK(cyc.front() == cyc.back());
      // Every consecutive pair must be a real inclusion.
      auto set = one_doc(doc);
      auto chunks = set.chunks();
      for (std::size_t i = 0; i + 1 < cyc.size(); ++i) {
        bool found = false;
        for (const auto& c : chunks.at(cyc[i]))
          for (const auto& line : c.body) {
            std::string ref;
            if (ilp::detail::parse_include_ref(line, nullptr, &ref) && ref == cyc[i + 1])
              found = true;
          }
        CAPTURE(cyc[i]);
        CHECK(found);
      }
    }
  }
}

TEST_CASE("detangle with no edits is a fixed point") {
  auto dir = temp_dir("dt_clean");
  auto set = one_doc(read_file(fs::path(ILP_FIXTURES_DIR) / "take_right/take_right.md"),
                     "take_right.md");
  write_tangle(tangle_project(set, true), dir);
  auto updated = detangle(set, dir);
  CHECK(updated.docs[0].raw_text == set.docs[0].raw_text);
}

TEST_CASE("detangle folds an edit back and tangling reproduces it") {
  auto dir = temp_dir("dt_edit");
  auto set = one_doc(read_file(fs::path(ILP_FIXTURES_DIR) / "take_right/take_right.md"),
                     "take_right.md");
  write_tangle(tangle_project(set, true), dir);
  std::string tangled = read_file(dir / "take-right.scm");
  std::string marker = "((or (null? lst) (<= n 0)) lst)";
  auto pos = tangled.find(marker);
  REQUIRE(pos != std::string::npos);
  tangled.replace(pos, marker.size(), "((or (null? lst) (< n 1)) lst)  ; edited");
  {
    std::ofstream f(dir / "take-right.scm", std::ios::binary | std::ios::trunc);
    f << tangled;
  }
  auto updated = detangle(set, dir);
  CHECK(updated.docs[0].raw_text.find("(< n 1)) lst)  ; edited") != std::string::npos);
  // Round trip: tangling the updated documents reproduces the edited file.
  auto out2 = tangle_project(updated, true);
  CHECK(out2.files.at("take-right.scm") == tangled);
}

TEST_CASE("detangle refuses edits inside an included expansion") {
  auto dir = temp_dir("dt_incl");
  auto set = one_doc(
      "```py file=app.py chunk=main\nstart\n<<helper>>\nend\n```\n\n"
      "```py chunk=helper\nh1\nh2\n```\n");
  write_tangle(tangle_project(set, true), dir);
  std::string text = read_file(dir / "app.py");
  auto pos = text.find("h1");
  REQUIRE(pos != std::string::npos);
  text.replace(pos, 2, "hX");
  {
    std::ofstream f(dir / "app.py", std::ios::binary | std::ios::trunc);
    f << text;
  }
  CHECK_THROWS_AS(detangle(set, dir), DetangleError);
}

TEST_CASE("detangle refuses damaged markers") {
  auto dir = temp_dir("dt_marker");
  auto set = one_doc("```py file=a.py chunk=c\nx\n```\n");
  write_tangle(tangle_project(set, true), dir);
  std::string text = read_file(dir / "a.py");
  auto pos = text.find("ILP:END");
  REQUIRE(pos != std::string::npos);
  text = text.substr(0, pos - 2);  // chop the end marker
  {
    std::ofstream f(dir / "a.py", std::ios::binary | std::ios::trunc);
    f << text;
  }
  CHECK_THROWS_AS(detangle(set, dir), DetangleError);
}

TEST_CASE("detangle edits outside markers are ignored") {
  auto dir = temp_dir("dt_outside");
  auto set = one_doc("```py file=a.py chunk=c\nx\n```\n");
  write_tangle(tangle_project(set, true), dir);
  std::string text = "# file header added by hand\n" + read_file(dir / "a.py");
  {
    std::ofstream f(dir / "a.py", std::ios::binary | std::ios::trunc);
    f << text;
  }
  auto updated = detangle(set, dir);
  CHECK(updated.docs[0].raw_text == set.docs[0].raw_text);
}
