#pragma once

#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "ilp/diag.hpp"
#include "ilp/parser.hpp"
#include "ilp/project.hpp"

namespace ilp {

struct ProjectConfig {
  std::vector<std::string> documents;       // glob patterns, project-relative
  std::vector<std::string> document_order;  // explicit order; empty = lexicographic
  std::string out_root = ".";
  std::string evaluator;
  std::string default_language = "scheme";
  std::string templates_dir;
  std::filesystem::path project_root = ".";
};

namespace detail {

/// Minimal glob: `*` matches within a path segment, `**/` matches any prefix.
inline bool glob_match(const std::string& pattern, const std::string& path) {
  if (pattern.rfind("**/", 0) == 0) {
    std::string rest = pattern.substr(3);
    if (glob_match(rest, path)) return true;
    std::size_t slash = path.find('/');
    return slash != std::string::npos && glob_match(pattern, path.substr(slash + 1));
  }
  std::size_t p = 0, s = 0, star = std::string::npos, mark = 0;
  while (s < path.size()) {
    if (p < pattern.size() && (pattern[p] == path[s] || pattern[p] == '?')) {
      ++p;
      ++s;
    } else if (p < pattern.size() && pattern[p] == '*') {
      star = p++;
      mark = s;
    } else if (star != std::string::npos && path[mark] != '/') {
      p = star + 1;
      s = ++mark;
    } else {
      return false;
    }
  }
  while (p < pattern.size() && pattern[p] == '*') ++p;
  return p == pattern.size();
}

}  // namespace detail

inline ProjectConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_object())
    throw std::runtime_error(path.string() + ": not a JSON object");
  int schema = j.value("schema", 0);
  if (schema != 1)
    throw std::runtime_error(path.string() + ": unsupported schema " +
                             std::to_string(schema) + " (expected 1)");
  ProjectConfig cfg;
  cfg.project_root = path.has_parent_path() ? path.parent_path() : ".";
  for (const auto& g : j.value("documents", nlohmann::json::array()))
    cfg.documents.push_back(g.get<std::string>());
  for (const auto& d : j.value("document_order", nlohmann::json::array()))
    cfg.document_order.push_back(d.get<std::string>());
  cfg.out_root = j.value("out_root", cfg.out_root);
  cfg.evaluator = j.value("evaluator", cfg.evaluator);
  cfg.default_language = j.value("default_language", cfg.default_language);
  cfg.templates_dir = j.value("templates_dir", cfg.templates_dir);
  return cfg;
}

/// Expand globs against the project root; explicit order wins, otherwise
/// lexicographic. Zero matches is a startup failure per the config contract.
inline std::vector<std::filesystem::path> resolve_documents(const ProjectConfig& cfg) {
  namespace fs = std::filesystem;
  std::vector<std::string> matched;
  for (auto it = fs::recursive_directory_iterator(cfg.project_root);
       it != fs::recursive_directory_iterator(); ++it) {
    if (!it->is_regular_file()) continue;
    std::string rel = fs::relative(it->path(), cfg.project_root).generic_string();
    for (const auto& pat : cfg.documents)
      if (detail::glob_match(pat, rel)) {
        matched.push_back(rel);
        break;
      }
  }
  std::sort(matched.begin(), matched.end());
  matched.erase(std::unique(matched.begin(), matched.end()), matched.end());
  if (matched.empty())
    throw std::runtime_error("config document globs matched no files");

  if (!cfg.document_order.empty()) {
    std::vector<std::string> ordered;
    for (const auto& d : cfg.document_order) {
      auto it = std::find(matched.begin(), matched.end(), d);
      if (it != matched.end()) {
        ordered.push_back(*it);
        matched.erase(it);
      }
    }
    ordered.insert(ordered.end(), matched.begin(), matched.end());
    matched = std::move(ordered);
  }
  std::vector<fs::path> paths;
  for (const auto& m : matched) paths.push_back(cfg.project_root / m);
  return paths;
}

inline DocumentSet load_documents(const ProjectConfig& cfg) {
  DocumentSet set;
  for (const auto& p : resolve_documents(cfg)) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + p.string());
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    std::string rel =
        std::filesystem::relative(p, cfg.project_root).generic_string();
    set.docs.push_back(parse_document(rel, text));
  }
  return set;
}

}  // namespace ilp
