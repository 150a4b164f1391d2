#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "ilp/graph.hpp"

using namespace ilp;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

DocumentSet fig5() {
  DocumentSet set;
  for (const char* name : {"chapter2.md", "chapter3.md", "chapter6.md"})
    set.docs.push_back(parse_document(
        name, read_file(std::string(ILP_FIXTURES_DIR) + "/fig5_dag/" + name)));
  return set;
}

DocumentSet take_right() {
  DocumentSet set;
  set.docs.push_back(parse_document(
      "take_right.md",
      read_file(std::string(ILP_FIXTURES_DIR) + "/take_right/take_right.md")));
  return set;
}

bool has_edge(const DependencyGraph& g, const std::string& from,
              const std::string& to, EdgeKind kind) {
  for (const auto& e : g.edges)
    if (e.from == from && e.to == to && e.kind == kind) return true;
  return false;
}

}  // namespace

TEST_CASE("fig5 declared edges match the documented call structure") {
  auto g = build_graph(fig5());
  CHECK(has_edge(g, "add", "extended-+", EdgeKind::Declared));
  CHECK(has_edge(g, "extended-+", "add-rat", EdgeKind::Declared));
  CHECK(has_edge(g, "extended-+", "make-rat", EdgeKind::Declared));
  CHECK(has_edge(g, "extended-+", "pairs?", EdgeKind::Declared));
}

TEST_CASE("fig5 reachable from add proceeds in BFS layers") {
  auto g = build_graph(fig5());
  auto r = reachable(g, "add", kHardEdgeKinds);
  REQUIRE(r.size() == 4);
  CHECK(r[0] == "extended-+");
  std::set<std::string> layer2(r.begin() + 1, r.end());
  CHECK(layer2 == std::set<std::string>{"add-rat", "make-rat", "pairs?"});
}

TEST_CASE("fig5 topological order places dependencies before add") {
  auto g = build_graph(fig5());
  auto order = topological_order(g, kHardEdgeKinds);
  auto pos = [&](const std::string& n) {
    return std::find(order.begin(), order.end(), n) - order.begin();
  };
  for (const char* dep : {"extended-+", "add-rat", "make-rat", "pairs?"}) {
    CAPTURE(dep);
    CHECK(pos(dep) < pos("add"));
  }
  CHECK(pos("add-rat") < pos("extended-+"));
}

TEST_CASE("take-right fixture edges") {
  auto g = build_graph(take_right());
  CHECK(has_edge(g, "take-right", "drop", EdgeKind::Declared));
  auto r = reachable(g, "take-right", kHardEdgeKinds);
  REQUIRE(!r.empty());
  CHECK(r[0] == "drop");
}

TEST_CASE("inclusion edges from chunk references and file targets") {
  DocumentSet set;
  set.docs.push_back(parse_document(
      "a.md",
      "```py file=app.py chunk=main\n<<helper>>\n```\n\n"
      "```py chunk=helper\nx = 1\n```\n"));
  auto g = build_graph(set);
  CHECK(has_edge(g, "main", "helper", EdgeKind::Inclusion));
  CHECK(has_edge(g, "app.py", "main", EdgeKind::Inclusion));
}

TEST_CASE("textual edges skip string literals") {
  DocumentSet set;
  set.docs.push_back(parse_document(
      "a.md",
      "```py chunk=alpha\nbeta()\nprint(\"gamma\")\n```\n\n"
      "```py chunk=beta\npass\n```\n\n```py chunk=gamma\npass\n```\n"));
  auto g = build_graph(set);
  CHECK(has_edge(g, "alpha", "beta", EdgeKind::Textual));
  CHECK_FALSE(has_edge(g, "alpha", "gamma", EdgeKind::Textual));
}

TEST_CASE("token occurrences respect word boundaries") {
  auto occ = ilp::detail::token_occurrences(
      "drop droplet dropped (drop x) drop-right", {"drop"});
  CHECK(occ.size() == 2);
  CHECK(ilp::detail::token_occurrences("take-right takes", {"take-right"}).size() == 1);
}

TEST_CASE("unknown reachable target throws") {
  auto g = build_graph(fig5());
  CHECK_THROWS_AS(reachable(g, "nope", kHardEdgeKinds), std::invalid_argument);
}

TEST_CASE("declared cycles yield CycleError with the cycle path") {
  DocumentSet set;
  set.docs.push_back(parse_document(
      "a.md",
      "```scheme doc\n(define-with-docs f #:depends '(g))\n```\n\n"
      "```scheme doc\n(define-with-docs g #:depends '(f))\n```\n"));
  auto g = build_graph(set);
  try {
    topological_order(g, kHardEdgeKinds);
    FAIL("expected CycleError");
  } catch (const CycleError& e) {
    const auto& cyc = e.cycle();
    REQUIRE(cyc.size() >= 2);
    // The reported path must actually close on itself through real edges.
    CHECK(cyc.front() == cyc.back());
  }
}

TEST_CASE("topological order property on random DAGs") {
  std::mt19937_64 rng(99);
  for (int iter = 0; iter < 100; ++iter) {
    int n = 2 + rng() % 12;
    DependencyGraph g;
    for (int i = 0; i < n; ++i) g.add_node("n" + std::to_string(i));
    // Edges only from higher to lower index: acyclic by construction.
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < i; ++j)
        if (rng() % 3 == 0)
          g.add_edge({"n" + std::to_string(i), "n" + std::to_string(j),
                      EdgeKind::Declared, {}});
    auto order = topological_order(g, kHardEdgeKinds);
    REQUIRE(order.size() == static_cast<std::size_t>(n));
    auto pos = [&](const std::string& m) {
      return std::find(order.begin(), order.end(), m) - order.begin();
    };
    for (const auto& e : g.edges) CHECK(pos(e.to) < pos(e.from));
    // Determinism.
    CHECK(order == topological_order(g, kHardEdgeKinds));
  }
}

TEST_CASE("injected cycles on random graphs always raise") {
  std::mt19937_64 rng(123);
  for (int iter = 0; iter < 100; ++iter) {
    int n = 3 + rng() % 8;
    DependencyGraph g;
    for (int i = 0; i < n; ++i) g.add_node("n" + std::to_string(i));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < i; ++j)
        if (rng() % 3 == 0)
          g.add_edge({"n" + std::to_string(i), "n" + std::to_string(j),
                      EdgeKind::Declared, {}});
    // Close a cycle along a random back edge.
    int a = rng() % n, b = rng() % n;
    if (a == b) b = (b + 1) % n;
    int lo = std::min(a, b), hi = std::max(a, b);
    g.add_edge({"n" + std::to_string(hi), "n" + std::to_string(lo), EdgeKind::Declared, {}});
    g.add_edge({"n" + std::to_string(lo), "n" + std::to_string(hi), EdgeKind::Declared, {}});
    CHECK_THROWS_AS(topological_order(g, kHardEdgeKinds), CycleError);
  }
}

TEST_CASE("textual cycles do not break topological order over hard edges") {
  DocumentSet set;
  set.docs.push_back(parse_document(
      "a.md",
      "```py chunk=ping\npong()\n```\n\n```py chunk=pong\nping()\n```\n"));
  auto g = build_graph(set);
  CHECK(has_edge(g, "ping", "pong", EdgeKind::Textual));
  CHECK(has_edge(g, "pong", "ping", EdgeKind::Textual));
  CHECK_NOTHROW(topological_order(g, kHardEdgeKinds));
  CHECK_THROWS_AS(topological_order(g, kAllEdgeKinds), CycleError);
}

TEST_CASE("dot export lists nodes and labeled edges") {
  auto g = build_graph(fig5());
  auto dot = to_dot(g);
  CHECK(dot.rfind("digraph", 0) == 0);
  CHECK(dot.find("\"add\" -> \"extended-+\"") != std::string::npos);
  CHECK(dot.find("declared") != std::string::npos);
}
