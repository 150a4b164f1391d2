// ilp: literate-programming toolchain driver.
//
// Exit codes: 0 success, 1 validation/test failure, 2 usage error,
// 3 environment error (missing evaluator, endpoint, config...).

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "ilp/config.hpp"
#include "ilp/context.hpp"
#include "ilp/doctests.hpp"
#include "ilp/graph.hpp"
#include "ilp/llm.hpp"
#include "ilp/llm_http.hpp"
#include "ilp/tangle.hpp"
#include "ilp/weave.hpp"

namespace fs = std::filesystem;

namespace {

struct Options {
  std::string config_path = "ilp.json";
  bool json = false;
};

void emit_diag(const Options& opt, const ilp::Diagnostic& d) {
  if (opt.json) {
    nlohmann::json j = {
        {"path", d.span.document_path},
        {"line", d.span.line_start},
        {"severity", d.severity == ilp::Severity::Error ? "error" : "warning"},
        {"message", d.message},
    };
    std::cerr << j.dump() << "\n";
  } else {
    std::cerr << d.format() << "\n";
  }
}

void emit_error(const Options& opt, const std::string& message) {
  if (opt.json) {
    nlohmann::json j = {{"severity", "error"}, {"message", message}};
    std::cerr << j.dump() << "\n";
  } else {
    std::cerr << "ilp: error: " << message << "\n";
  }
}

struct Loaded {
  ilp::ProjectConfig config;
  ilp::DocumentSet docs;
};

Loaded load(const Options& opt) {
  Loaded loaded;
  loaded.config = ilp::load_config(opt.config_path);
  loaded.docs = ilp::load_documents(loaded.config);
  return loaded;
}

/// Validation gate shared by every subcommand that consumes the document set.
/// Returns false (after printing diagnostics) when errors are present.
bool check_documents(const Options& opt, const ilp::DocumentSet& docs,
                     bool print_warnings = true) {
  auto diags = ilp::validate(docs);
  for (const auto& d : diags)
    if (d.severity == ilp::Severity::Error || print_warnings) emit_diag(opt, d);
  return !ilp::has_errors(diags);
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
}

void write_documents(const ilp::ProjectConfig& cfg, const ilp::DocumentSet& docs) {
  for (const auto& doc : docs.docs) write_file(cfg.project_root / doc.path, doc.raw_text);
}

int cmd_check(const Options& opt) {
  Loaded loaded = load(opt);
  return check_documents(opt, loaded.docs) ? 0 : 1;
}

int cmd_tangle(const Options& opt, const std::string& out_dir, bool markers) {
  Loaded loaded = load(opt);
  if (!check_documents(opt, loaded.docs)) return 1;
  auto output = ilp::tangle_project(loaded.docs, markers);
  for (const auto& w : output.warnings) emit_diag(opt, w);
  fs::path root = loaded.config.project_root /
                  (out_dir.empty() ? loaded.config.out_root : out_dir);
  auto written = ilp::write_tangle(output, root);
  for (const auto& p : written) {
    if (opt.json)
      std::cout << nlohmann::json{{"written", p}}.dump() << "\n";
    else
      std::cout << p << "\n";
  }
  return 0;
}

int cmd_weave(const Options& opt, const std::string& format, const std::string& out) {
  Loaded loaded = load(opt);
  if (!check_documents(opt, loaded.docs)) return 1;
  auto fmt = format == "html" ? ilp::WeaveFormat::Html : ilp::WeaveFormat::Markdown;
  auto woven = ilp::weave(loaded.docs, fmt);
  if (out.empty())
    std::cout << woven.body;
  else
    write_file(out, woven.body);
  return 0;
}

int cmd_doctest(const Options& opt, std::string evaluator, int jobs,
                const std::vector<std::string>& targets) {
  Loaded loaded = load(opt);
  if (!check_documents(opt, loaded.docs)) return 1;
  if (evaluator.empty()) evaluator = loaded.config.evaluator;
  if (evaluator.empty()) {
    emit_error(opt, "no evaluator configured (use --evaluator or the config key)");
    return 3;
  }
  auto tests = ilp::extract_tests(loaded.docs, targets);
  auto report = ilp::run_tests(tests, evaluator, jobs);
  bool evaluator_missing = false;
  for (const auto& r : report.results) {
    if (r.status == ilp::TestStatus::Error &&
        r.output.rfind("evaluator not found", 0) == 0)
      evaluator_missing = true;
    if (opt.json) {
      std::cout << nlohmann::json{{"target", r.test.annotation_name},
                                  {"status", ilp::to_string(r.status)},
                                  {"detail", r.output}}
                       .dump()
                << "\n";
    } else {
      std::cout << r.test.annotation_name << ": " << ilp::to_string(r.status);
      if (r.status != ilp::TestStatus::Pass && !r.output.empty())
        std::cout << " (" << ilp::trim(r.output) << ")";
      std::cout << "\n";
    }
  }
  if (evaluator_missing) {
    emit_error(opt, "evaluator not found: " + evaluator);
    return 3;
  }
  std::size_t pass = report.count(ilp::TestStatus::Pass);
  std::size_t fail = report.count(ilp::TestStatus::Fail);
  std::size_t errors = report.count(ilp::TestStatus::Error);
  std::size_t skipped = report.count(ilp::TestStatus::Skipped);
  if (!opt.json)
    std::cout << pass << " passed, " << fail << " failed, " << errors
              << " errors, " << skipped << " skipped\n";
  return fail + errors > 0 ? 1 : 0;
}

int cmd_context(const Options& opt, const std::string& target, std::size_t budget,
                const std::string& tmpl, std::string language) {
  Loaded loaded = load(opt);
  if (!check_documents(opt, loaded.docs, false)) return 1;
  if (language.empty()) language = loaded.config.default_language;
  auto graph = ilp::build_graph(loaded.docs);
  auto bundle = ilp::pack_context(loaded.docs, graph, target, budget);
  std::cout << ilp::render_prompt(bundle, tmpl, language);
  return 0;
}

int cmd_obfuscate(const Options& opt, const std::string& names_file,
                  std::uint64_t seed, const std::string& map_out) {
  Loaded loaded = load(opt);
  if (!check_documents(opt, loaded.docs)) return 1;
  std::ifstream in(names_file);
  if (!in) {
    emit_error(opt, "cannot open names file " + names_file);
    return 3;
  }
  std::vector<std::string> names;
  for (std::string line; std::getline(in, line);) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (!line.empty() && line[0] != '#') names.push_back(line);
  }
  auto result = ilp::obfuscate(loaded.docs, names, seed);
  write_documents(loaded.config, result.documents);
  write_file(map_out, result.mapping.serialize());
  if (opt.json) {
    for (const auto& [from, to] : result.mapping.pairs)
      std::cout << nlohmann::json{{"from", from}, {"to", to}}.dump() << "\n";
  } else {
    for (const auto& [from, to] : result.mapping.pairs)
      std::cout << from << " -> " << to << "\n";
  }
  return 0;
}

int cmd_graph(const Options& opt, bool dot) {
  Loaded loaded = load(opt);
  if (!check_documents(opt, loaded.docs, false)) return 1;
  auto graph = ilp::build_graph(loaded.docs);
  if (dot) {
    std::cout << ilp::to_dot(graph);
    return 0;
  }
  for (const auto& e : graph.edges) {
    if (opt.json)
      std::cout << nlohmann::json{{"from", e.from},
                                  {"to", e.to},
                                  {"kind", ilp::to_string(e.kind)}}
                       .dump()
                << "\n";
    else
      std::cout << e.from << " -> " << e.to << " [" << ilp::to_string(e.kind) << "]\n";
  }
  return 0;
}

int cmd_generate(const Options& opt, const std::string& target, const std::string& place,
                 std::string language, std::size_t budget, const std::string& tmpl,
                 const std::string& replay) {
  Loaded loaded = load(opt);
  if (!check_documents(opt, loaded.docs)) return 1;
  if (language.empty()) language = loaded.config.default_language;

  std::unique_ptr<ilp::CompletionProvider> provider;
  auto env = ilp::HttpProviderConfig::from_env();
  if (!replay.empty()) {
    provider = std::make_unique<ilp::FileReplayProvider>(replay);
  } else if (env.usable()) {
    provider = std::make_unique<ilp::HttpProvider>(env);
  } else {
    emit_error(opt, "no provider available: set ILP_LLM_ENDPOINT/ILP_LLM_MODEL "
                    "or pass --replay FILE");
    return 3;
  }

  auto graph = ilp::build_graph(loaded.docs);
  auto bundle = ilp::pack_context(loaded.docs, graph, target, budget);
  auto chunk = ilp::generate_for_target(*provider, bundle, tmpl, language);
  if (!chunk.fence_found)
    emit_diag(opt, {ilp::Severity::Warning, {},
                    "response had no fenced code block; using whole text"});

  std::string placement = place.empty() ? target : place;
  auto merged = ilp::merge_generated(loaded.docs, chunk, placement, "");
  if (merged.renamed)
    emit_diag(opt, {ilp::Severity::Warning, {},
                    "chunk name collision; generated chunk stored as " +
                        merged.chunk_name});
  if (!check_documents(opt, merged.documents)) return 1;
  write_documents(loaded.config, merged.documents);
  if (opt.json)
    std::cout << nlohmann::json{{"chunk", merged.chunk_name},
                                {"provider", chunk.provider_id},
                                {"digest", chunk.prompt_digest}}
                     .dump()
              << "\n";
  else
    std::cout << merged.chunk_name << "\n";
  return 0;
}

int cmd_detangle(const Options& opt, const std::string& root) {
  Loaded loaded = load(opt);
  if (!check_documents(opt, loaded.docs)) return 1;
  fs::path tangle_root =
      loaded.config.project_root / (root.empty() ? loaded.config.out_root : root);
  auto updated = ilp::detangle(loaded.docs, tangle_root);
  write_documents(loaded.config, updated);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"interoperable literate programming toolchain"};
  app.require_subcommand(1);
  Options opt;
  app.add_option("--config", opt.config_path, "project config file");
  app.add_flag("--json", opt.json, "machine-readable output, one JSON value per line");

  auto* tangle = app.add_subcommand("tangle", "extract code chunks into source files");
  std::string tangle_out;
  bool markers = false;
  tangle->add_option("--out", tangle_out, "output directory (default: config out_root)");
  tangle->add_flag("--markers", markers, "emit provenance markers for detangling");

  auto* weave = app.add_subcommand("weave", "render reviewable documentation");
  std::string weave_format = "md", weave_out;
  weave->add_option("--format", weave_format, "md or html")
      ->check(CLI::IsMember({"md", "html"}));
  weave->add_option("--out", weave_out, "output file (default: stdout)");

  app.add_subcommand("check", "parse and validate the document set");

  auto* doctest = app.add_subcommand("doctest", "run annotation examples as tests");
  std::string evaluator;
  int jobs = 1;
  std::vector<std::string> doctest_targets;
  doctest->add_option("--evaluator", evaluator, "evaluator command");
  doctest->add_option("--jobs", jobs, "parallel workers")->check(CLI::PositiveNumber);
  doctest->add_option("targets", doctest_targets, "annotation names (default: all)");

  auto* context = app.add_subcommand("context", "pack and render a prompt for a target");
  std::string ctx_target, ctx_template = "fully-based", ctx_language;
  std::size_t budget = 100000;
  context->add_option("target", ctx_target, "annotation or chunk name")->required();
  context->add_option("--budget", budget, "token budget");
  context->add_option("--template", ctx_template, "stepwise or fully-based");
  context->add_option("--language", ctx_language, "target language");

  auto* obfuscate = app.add_subcommand("obfuscate", "rename listed names to pseudo-names");
  std::string names_file, map_out = "ilp.map";
  std::uint64_t seed = 0;
  obfuscate->add_option("--names", names_file, "file with one name per line")->required();
  obfuscate->add_option("--seed", seed, "rng seed")->required();
  obfuscate->add_option("--map-out", map_out, "where to write the rename mapping");

  auto* graph = app.add_subcommand("graph", "print the dependency graph");
  bool dot = false;
  graph->add_flag("--dot", dot, "graphviz output");

  auto* generate = app.add_subcommand("generate", "generate code for a target and merge it");
  std::string gen_target, gen_place, gen_language, gen_template = "fully-based", replay;
  generate->add_option("target", gen_target, "annotation or chunk name")->required();
  generate->add_option("--place", gen_place, "section anchor or file target");
  generate->add_option("--language", gen_language, "target language");
  generate->add_option("--template", gen_template, "prompt template");
  generate->add_option("--replay", replay, "replay a recorded response instead of HTTP");

  auto* detangle = app.add_subcommand("detangle", "fold tangled-file edits back");
  std::string detangle_root;
  detangle->add_option("--root", detangle_root, "tangle root (default: config out_root)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (tangle->parsed()) return cmd_tangle(opt, tangle_out, markers);
    if (weave->parsed()) return cmd_weave(opt, weave_format, weave_out);
    if (app.get_subcommand("check")->parsed()) return cmd_check(opt);
    if (doctest->parsed()) return cmd_doctest(opt, evaluator, jobs, doctest_targets);
    if (context->parsed())
      return cmd_context(opt, ctx_target, budget, ctx_template, ctx_language);
    if (obfuscate->parsed()) return cmd_obfuscate(opt, names_file, seed, map_out);
    if (graph->parsed()) return cmd_graph(opt, dot);
    if (generate->parsed())
      return cmd_generate(opt, gen_target, gen_place, gen_language, 100000,
                          gen_template, replay);
    if (detangle->parsed()) return cmd_detangle(opt, detangle_root);
  } catch (const ilp::ParseError& e) {
    // what() already carries the path:line: prefix
    std::cerr << e.what() << "\n";
    return 1;
  } catch (const ilp::CycleError& e) {
    emit_error(opt, e.what());
    return 1;
  } catch (const ilp::DetangleError& e) {
    emit_error(opt, e.what());
    return 1;
  } catch (const ilp::ProviderError& e) {
    emit_error(opt, e.what());
    return 3;
  } catch (const std::exception& e) {
    emit_error(opt, e.what());
    return 3;
  }
  return 2;
}
