#pragma once

#include <cctype>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "ilp/context.hpp"
#include "ilp/project.hpp"
#include "ilp/tangle.hpp"

namespace ilp {

class ProviderError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

class CompletionProvider {
 public:
  virtual ~CompletionProvider() = default;
  virtual std::string id() const = 0;
  virtual std::string complete(const std::string& prompt) = 0;
};

/// Deterministic stub returning one canned response.
class FixedResponseProvider : public CompletionProvider {
 public:
  explicit FixedResponseProvider(std::string response)
      : response_(std::move(response)) {}
  std::string id() const override { return "fixed-stub"; }
  std::string complete(const std::string&) override { return response_; }

 private:
  std::string response_;
};

/// Replays a recorded model response from a file.
class FileReplayProvider : public CompletionProvider {
 public:
  explicit FileReplayProvider(std::string path) : path_(std::move(path)) {
    std::ifstream in(path_, std::ios::binary);
    if (!in) throw ProviderError("cannot open replay file " + path_);
    std::stringstream ss;
    ss << in.rdbuf();
    response_ = ss.str();
  }
  std::string id() const override { return "replay:" + path_; }
  std::string complete(const std::string&) override { return response_; }

 private:
  std::string path_;
  std::string response_;
};

/// Chat-completion endpoint configured via ILP_LLM_ENDPOINT, ILP_LLM_API_KEY
/// and ILP_LLM_MODEL. Declared here, defined in llm_http.hpp so that offline
/// builds need not pull in the HTTP client.
struct HttpProviderConfig {
  std::string endpoint;
  std::string api_key;
  std::string model;
  int timeout_seconds = 30;

  static HttpProviderConfig from_env() {
    HttpProviderConfig cfg;
    if (const char* e = std::getenv("ILP_LLM_ENDPOINT")) cfg.endpoint = e;
    if (const char* k = std::getenv("ILP_LLM_API_KEY")) cfg.api_key = k;
    if (const char* m = std::getenv("ILP_LLM_MODEL")) cfg.model = m;
    return cfg;
  }
  bool usable() const { return !endpoint.empty() && !model.empty(); }
};

struct GeneratedChunk {
  std::string target_name;
  std::string language;
  std::vector<std::string> body;
  std::string provider_id;
  std::string timestamp;     // ISO-8601 UTC
  std::string prompt_digest; // stable hash of the exact prompt text
  bool fence_found = true;   // false => whole response used, warning emitted
};

namespace detail {

inline std::string fnv1a_hex(const std::string& data) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline std::string utc_now() {
  auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::tm tm{};
  gmtime_r(&t, &tm);
  strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

/// First fenced code block of a model response, if any.
inline bool extract_fenced_block(const std::string& response,
                                 std::vector<std::string>* body,
                                 std::string* language) {
  std::size_t pos = 0;
  while (pos < response.size()) {
    std::size_t eol = response.find('\n', pos);
    if (eol == std::string::npos) eol = response.size();
    std::string line = response.substr(pos, eol - pos);
    std::size_t indent = line.find_first_not_of(" \t");
    if (indent != std::string::npos && line.compare(indent, 3, "```") == 0) {
      std::string lang = line.substr(indent + 3);
      while (!lang.empty() && (lang.back() == ' ' || lang.back() == '\r')) lang.pop_back();
      std::size_t scan = eol + 1;
      while (scan <= response.size()) {
        std::size_t leol = response.find('\n', scan);
        if (leol == std::string::npos) leol = response.size();
        std::string l = response.substr(scan, leol - scan);
        std::size_t li = l.find_first_not_of(" \t");
        if (li != std::string::npos && l.compare(li, 3, "```") == 0) {
          if (language && !lang.empty()) *language = lang;
          return true;
        }
        body->push_back(l);
        if (leol >= response.size()) break;
        scan = leol + 1;
      }
      return false;  // unterminated fence: treat as not found
    }
    if (eol >= response.size()) break;
    pos = eol + 1;
  }
  return false;
}

}  // namespace detail

inline GeneratedChunk generate_for_target(CompletionProvider& provider,
                                          const ContextBundle& bundle,
                                          const std::string& template_name,
                                          const std::string& language,
                                          const std::string& user_template = "") {
  std::string prompt = render_prompt(bundle, template_name, language, user_template);
  std::string response = provider.complete(prompt);
  if (response.empty()) throw ProviderError("empty response from " + provider.id());

  GeneratedChunk chunk;
  chunk.target_name = bundle.target;
  chunk.language = language;
  chunk.provider_id = provider.id();
  chunk.timestamp = detail::utc_now();
  chunk.prompt_digest = detail::fnv1a_hex(prompt);

  std::vector<std::string> body;
  std::string fence_lang;
  if (detail::extract_fenced_block(response, &body, &fence_lang)) {
    chunk.body = std::move(body);
    if (!fence_lang.empty()) chunk.language = fence_lang;
  } else {
    chunk.fence_found = false;
    for (const auto& l : detail::split_lines(response)) chunk.body.push_back(l);
  }
  while (!chunk.body.empty() && chunk.body.back().empty()) chunk.body.pop_back();
  if (chunk.body.empty()) throw ProviderError("response contained no code");
  return chunk;
}

struct MergeResult {
  DocumentSet documents;
  std::string chunk_name;  // may carry a -2/-3... suffix on collision
  bool renamed = false;
};

/// Insert the generated chunk as a new ChunkBlock right after the placement
/// anchor (a section heading) or after the last chunk of a file target.
inline MergeResult merge_generated(const DocumentSet& set, const GeneratedChunk& chunk,
                                   const std::string& placement,
                                   const std::string& file_target) {
  // Find the insertion point.
  const Document* target_doc = nullptr;
  std::size_t insert_at = 0;
  for (const auto& doc : set.docs) {
    for (const auto& b : doc.blocks) {
      if (const auto* n = std::get_if<Narrative>(&b)) {
        for (const auto& h : n->headings)
          if (h.anchor == placement || h.title == placement) {
            std::size_t eol = doc.raw_text.find('\n', h.byte_start);
            target_doc = &doc;
            insert_at = eol == std::string::npos ? doc.raw_text.size() : eol + 1;
          }
      } else {
        const Chunk& c = std::get<ChunkBlock>(b).chunk;
        if (c.file_target && *c.file_target == placement) {
          target_doc = &doc;
          insert_at = c.span.byte_end;
        }
      }
    }
    if (target_doc) break;
  }
  if (!target_doc)
    throw std::runtime_error("placement '" + placement + "' not found in any document");

  auto chunks = set.chunks();
  std::string name = chunk.target_name + "-gen";
  bool renamed = false;
  for (int k = 2; chunks.count(name); ++k) {
    name = chunk.target_name + "-gen-" + std::to_string(k);
    renamed = true;
  }

  std::string ft = file_target;
  if (ft.empty()) {
    // placement may itself be a file target
    for (const auto& [t, cs] : set.file_targets())
      if (t == placement) ft = t;
  }
  if (ft.empty()) {
    // Anchor placement: give the chunk its own file so it tangles.
    std::string stem;
    for (char c : chunk.target_name) stem += std::isalnum(static_cast<unsigned char>(c)) ? c : '_';
    std::string ext = chunk.language == "python" ? ".py"
                      : chunk.language == "scheme" ? ".scm"
                                                   : ".txt";
    ft = stem + ext;
  }
  std::string info = chunk.language.empty() ? "text" : chunk.language;
  std::string block = "\n```" + info;
  if (!ft.empty()) block += " file=" + ft;
  block += " chunk=" + name + "\n";
  for (const auto& l : chunk.body) {
    block += l;
    block += '\n';
  }
  block += "```\n";

  MergeResult result;
  result.chunk_name = name;
  result.renamed = renamed;
  for (const auto& doc : set.docs) {
    if (&doc != target_doc) {
      result.documents.docs.push_back(doc);
      continue;
    }
    std::string text = doc.raw_text;
    text.insert(insert_at, block);
    result.documents.docs.push_back(parse_document(doc.path, text));
  }
  return result;
}

}  // namespace ilp
