#pragma once

#include <atomic>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "ilp/graph.hpp"
#include "ilp/project.hpp"
#include "ilp/subprocess.hpp"
#include "ilp/tangle.hpp"

namespace ilp {

struct TestCase {
  std::string annotation_name;
  std::string program;         // definitions + probe expression
  std::string expected_stdout; // "#t\n"
  SourceSpan origin;
  bool skipped = false;
  std::string skip_reason;
};

enum class TestStatus { Pass, Fail, Error, Skipped };

inline const char* to_string(TestStatus s) {
  switch (s) {
    case TestStatus::Pass: return "pass";
    case TestStatus::Fail: return "fail";
    case TestStatus::Error: return "error";
    case TestStatus::Skipped: return "skipped";
  }
  return "?";
}

struct TestResult {
  TestCase test;
  TestStatus status = TestStatus::Error;
  std::string output;  // captured stdout (or error detail)
};

struct TestReport {
  std::vector<TestResult> results;
  std::size_t count(TestStatus s) const {
    std::size_t n = 0;
    for (const auto& r : results)
      if (r.status == s) ++n;
    return n;
  }
};

/// One TestCase per ExampleCase. The program is built from in-memory chunk
/// expansion: reachable implementation chunks (dependencies first) followed by
/// an equality probe printed as #t/#f.
inline std::vector<TestCase> extract_tests(const DocumentSet& set,
                                           const std::vector<std::string>& targets = {}) {
  std::vector<TestCase> tests;
  auto annotations = set.annotations();
  auto chunks = set.chunks();
  DependencyGraph graph = build_graph(set);

  for (const auto& doc : set.docs) {
    for (const auto& ann : doc.annotations) {
      if (!targets.empty() &&
          std::find(targets.begin(), targets.end(), ann.name) == targets.end())
        continue;
      if (ann.examples.empty()) continue;

      // Definition order: dependencies of the annotation first, then its own
      // chunks. Falls back over declared+inclusion edges.
      std::vector<std::string> wanted;
      if (graph.has_node(ann.name)) {
        auto deps = reachable(graph, ann.name, kHardEdgeKinds);
        std::set<std::string> keep(deps.begin(), deps.end());
        keep.insert(ann.name);
        try {
          for (const auto& n : topological_order(graph, kHardEdgeKinds))
            if (keep.count(n)) wanted.push_back(n);
        } catch (const CycleError&) {
          // Mutual recursion among declared deps: reversed BFS is close enough.
          wanted.assign(deps.rbegin(), deps.rend());
          wanted.push_back(ann.name);
        }
      } else {
        wanted.push_back(ann.name);
      }

      std::string defs;
      bool has_impl = false;
      std::set<std::string> emitted;
      for (const auto& name : wanted) {
        if (!chunks.count(name) || !emitted.insert(name).second) continue;
        bool tangleable = false;
        for (const auto& c : chunks[name])
          if (!c.is_doc || c.attributes.count("tangle")) tangleable = true;
        if (!tangleable) continue;
        for (const auto& line : expand_chunk(chunks, name)) {
          defs += line;
          defs += '\n';
        }
        has_impl = true;
      }

      for (const auto& ex : ann.examples) {
        TestCase tc;
        tc.annotation_name = ann.name;
        tc.origin = ex.span;
        tc.expected_stdout = "#t\n";
        tc.program = defs + "(display (equal? " + print_datum(ex.input_expr) +
                     " (quote " + print_datum(ex.expected) + "))) (newline)\n";
        if (!has_impl) {
          tc.skipped = true;
          tc.skip_reason = "annotation '" + ann.name +
                           "' has examples but no reachable implementation chunk";
        }
        tests.push_back(std::move(tc));
      }
    }
  }
  return tests;
}

inline std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

/// Evaluator protocol: program on stdin, result on stdout, exit 0 required.
inline TestReport run_tests(const std::vector<TestCase>& tests,
                            const std::string& evaluator_command,
                            int jobs = 1, int timeout_ms = 10000) {
  TestReport report;
  report.results.resize(tests.size());
  auto argv = split_command(evaluator_command);
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= tests.size()) return;
      TestResult& r = report.results[i];
      r.test = tests[i];
      if (tests[i].skipped) {
        r.status = TestStatus::Skipped;
        r.output = tests[i].skip_reason;
        continue;
      }
      ProcessResult p = run_process(argv, tests[i].program, timeout_ms);
      if (!p.spawned) {
        r.status = TestStatus::Error;
        r.output = "evaluator not found: " + evaluator_command;
      } else if (p.timed_out) {
        r.status = TestStatus::Error;
        r.output = "timeout";
      } else if (p.exit_code != 0) {
        r.status = TestStatus::Error;
        r.output = "exit status " + std::to_string(p.exit_code) +
                   (p.err.empty() ? "" : ": " + trim(p.err));
      } else {
        r.output = p.out;
        r.status = trim(p.out) == trim(tests[i].expected_stdout) ? TestStatus::Pass
                                                                 : TestStatus::Fail;
      }
    }
  };

  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return report;
}

}  // namespace ilp
