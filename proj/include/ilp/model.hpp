#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "ilp/datum.hpp"
#include "ilp/diag.hpp"

namespace ilp {

struct Heading {
  int level = 1;
  std::string title;
  std::string anchor;        // unique within the document
  std::size_t byte_start = 0;
  std::size_t line = 1;
};

struct CrossLink {
  std::string name;  // the X of [[X]]
  SourceSpan span;
};

struct CodeSpan {
  std::string text;  // inline `code` contents
  SourceSpan span;   // covers the backticks
};

struct Narrative {
  std::string markdown_text;  // raw slice, byte-exact
  std::vector<Heading> headings;
  std::vector<CrossLink> links;
  std::vector<CodeSpan> code_spans;
  SourceSpan span;
};

struct Chunk {
  std::optional<std::string> name;
  std::string language;
  std::optional<std::string> file_target;
  std::map<std::string, std::string> attributes;  // unrecognized info-string keys
  std::vector<std::string> body;                  // lines, no trailing newline
  bool is_doc = false;
  SourceSpan span;  // the whole fenced block including both fence lines

  // Parser bookkeeping, used for detangle / obfuscation splices.
  std::size_t body_byte_start = 0;
  std::size_t body_byte_end = 0;
  std::size_t anon_index = 0;                   // per-document counter for unnamed chunks
  std::size_t info_name_value_start = 0;        // byte range of the chunk= value, if any
  std::size_t info_name_value_end = 0;

  bool tangleable() const {
    if (!file_target) return false;
    if (!is_doc) return true;
    auto it = attributes.find("tangle");
    return it != attributes.end() && it->second == "true";
  }

  std::string id() const {
    return name ? *name : "anon-" + std::to_string(anon_index);
  }
};

struct ChunkBlock {
  Chunk chunk;
};

using Block = std::variant<Narrative, ChunkBlock>;

struct StepSpec {
  std::string api_name;
  std::string zero_step;
  std::string succ_step;
  std::vector<std::string> helper_refs;
  SourceSpan span;
  std::string anchor;  // anchor of the `## api` heading
};

struct ExampleCase {
  DatumPtr input_expr;
  DatumPtr expected;
  SourceSpan span;
};

enum class Stability { Stable, Unstable, Unspecified };

inline const char* to_string(Stability s) {
  switch (s) {
    case Stability::Stable: return "stable";
    case Stability::Unstable: return "unstable";
    case Stability::Unspecified: return "unspecified";
  }
  return "unspecified";
}

struct Annotation {
  std::string name;
  std::string pattern;
  std::string complexity;
  Stability stability = Stability::Unspecified;
  std::vector<ExampleCase> examples;
  std::vector<std::string> depends;
  DatumPtr body;
  std::map<std::string, DatumPtr> extra_keywords;  // unknown #:keys, preserved
  SourceSpan span;
};

struct Document {
  std::string path;
  std::vector<Block> blocks;
  std::string raw_text;

  // Derived during parse.
  std::vector<StepSpec> step_specs;
  std::vector<Annotation> annotations;
  std::vector<Diagnostic> parse_diags;  // warning-level findings from sub-parsers

  /// Lossless by construction; blocks hold raw slices.
  std::string serialize() const {
    std::string out;
    for (const auto& b : blocks) {
      if (const auto* n = std::get_if<Narrative>(&b)) {
        out += n->markdown_text;
      } else {
        const auto& c = std::get<ChunkBlock>(b).chunk;
        out += raw_text.substr(c.span.byte_start, c.span.byte_end - c.span.byte_start);
      }
    }
    return out;
  }
};

/// Named chunks in document order; continuations share a key.
inline std::map<std::string, std::vector<Chunk>> chunk_table(const Document& doc) {
  std::map<std::string, std::vector<Chunk>> table;
  for (const auto& b : doc.blocks) {
    if (const auto* cb = std::get_if<ChunkBlock>(&b)) {
      if (cb->chunk.name) table[*cb->chunk.name].push_back(cb->chunk);
    }
  }
  return table;
}

}  // namespace ilp
