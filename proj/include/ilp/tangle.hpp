#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "ilp/project.hpp"

namespace ilp {

inline std::string comment_leader(const std::string& language) {
  if (language == "scheme" || language == "scm" || language == "goldfish" ||
      language == "lisp" || language == "racket")
    return ";;";
  if (language == "python" || language == "py" || language == "sh" ||
      language == "bash" || language == "shell" || language == "ruby" ||
      language == "yaml" || language == "toml")
    return "#";
  return "//";
}

inline bool known_comment_leader(const std::string& language) {
  return language == "scheme" || language == "scm" || language == "goldfish" ||
         language == "lisp" || language == "racket" || language == "python" ||
         language == "py" || language == "sh" || language == "bash" ||
         language == "shell" || language == "ruby" || language == "yaml" ||
         language == "toml" || language == "c" || language == "cpp" ||
         language == "c++" || language == "rust" || language == "js" ||
         language == "javascript" || language == "java" || language == "go";
}

using ChunkTable = std::map<std::string, std::vector<Chunk>>;

namespace detail {

inline void expand_into(const ChunkTable& table, const std::string& name,
                        const std::string& indent, std::vector<std::string>& out,
                        std::vector<std::string>& path) {
  for (const auto& seen : path)
    if (seen == name) {
      std::vector<std::string> cycle(std::find(path.begin(), path.end(), name),
                                     path.end());
      cycle.push_back(name);
      throw CycleError(cycle);
    }
  auto it = table.find(name);
  if (it == table.end())
    throw std::runtime_error("unresolved chunk reference <<" + name + ">>");
  path.push_back(name);
  for (const Chunk& chunk : it->second) {
    for (const auto& line : chunk.body) {
      std::string ref, ref_indent;
      if (parse_include_ref(line, &ref_indent, &ref)) {
        expand_into(table, ref, indent + ref_indent, out, path);
      } else {
        out.push_back(line.empty() && indent.empty() ? line : indent + line);
      }
    }
  }
  path.pop_back();
}

}  // namespace detail

/// Concatenated bodies of all chunks named `name`, with `<<other>>` lines
/// replaced by the expansion of `other`, indentation propagated.
inline std::vector<std::string> expand_chunk(const ChunkTable& table,
                                             const std::string& name) {
  std::vector<std::string> out;
  std::vector<std::string> path;
  detail::expand_into(table, name, "", out, path);
  return out;
}

/// Expansion of a single chunk occurrence (continuations not pulled in).
inline std::vector<std::string> expand_chunk_body(const ChunkTable& table,
                                                  const Chunk& chunk) {
  std::vector<std::string> out;
  std::vector<std::string> path;
  if (chunk.name) path.push_back(*chunk.name);
  for (const auto& line : chunk.body) {
    std::string ref, ref_indent;
    if (detail::parse_include_ref(line, &ref_indent, &ref)) {
      detail::expand_into(table, ref, ref_indent, out, path);
    } else {
      out.push_back(line);
    }
  }
  return out;
}

// Per-chunk expansion with ownership info, used by detangle to map tangled
// lines back to body lines.
struct ExpandSegment {
  bool included = false;
  std::size_t ref_line = 0;  // body line index of the `<<...>>` reference
  std::size_t own_begin = 0, own_end = 0;  // body line range for own segments
  std::vector<std::string> lines;
};

inline std::vector<ExpandSegment> expand_with_segments(const ChunkTable& table,
                                                       const Chunk& chunk) {
  std::vector<ExpandSegment> segs;
  ExpandSegment own;
  own.own_begin = 0;
  std::vector<std::string> path;
  if (chunk.name) path.push_back(*chunk.name);
  for (std::size_t i = 0; i < chunk.body.size(); ++i) {
    const std::string& line = chunk.body[i];
    std::string ref, ref_indent;
    if (detail::parse_include_ref(line, &ref_indent, &ref)) {
      own.own_end = i;
      if (own.own_end > own.own_begin || !own.lines.empty()) segs.push_back(own);
      ExpandSegment inc;
      inc.included = true;
      inc.ref_line = i;
      detail::expand_into(table, ref, ref_indent, inc.lines, path);
      segs.push_back(std::move(inc));
      own = ExpandSegment{};
      own.own_begin = i + 1;
    } else {
      own.lines.push_back(line);
    }
  }
  own.own_end = chunk.body.size();
  segs.push_back(own);  // trailing own segment, possibly empty
  return segs;
}

struct ProvenanceEntry {
  std::string file;
  std::size_t first_line = 0;  // 1-based, inclusive
  std::size_t last_line = 0;
  std::string chunk_id;
  SourceSpan chunk_span;
};

struct TangleOutput {
  std::map<std::string, std::string> files;  // normalized relative path -> text
  std::vector<ProvenanceEntry> provenance;
  std::vector<Diagnostic> warnings;
};

inline std::string normalize_target(const std::string& target) {
  return std::filesystem::path(target).lexically_normal().generic_string();
}

inline TangleOutput tangle_project(const DocumentSet& set, bool markers) {
  TangleOutput out;
  auto table = set.chunks();
  std::set<std::string> warned_langs;

  // Deterministic file order; chunk order within a file is document order.
  for (const auto& [target, chunks] : set.file_targets()) {
    std::vector<std::string> lines;
    std::vector<ProvenanceEntry> prov;
    for (const Chunk& chunk : chunks) {
      if (!chunk.tangleable()) continue;
      if (markers && !known_comment_leader(chunk.language) &&
          warned_langs.insert(chunk.language).second)
        out.warnings.push_back(
            {Severity::Warning, chunk.span,
             "no comment leader known for language '" + chunk.language +
                 "', using //"});
      auto body = expand_chunk_body(table, chunk);
      std::string leader = comment_leader(chunk.language);
      std::size_t first = lines.size() + 1;
      if (markers)
        lines.push_back(leader + " ILP:BEGIN " + chunk.id() + " " +
                        chunk.span.document_path + ":" +
                        std::to_string(chunk.span.line_start));
      for (auto& l : body) lines.push_back(std::move(l));
      if (markers) lines.push_back(leader + " ILP:END " + chunk.id());
      prov.push_back({normalize_target(target), first, lines.size(), chunk.id(),
                      chunk.span});
    }
    if (prov.empty()) continue;
    std::string text;
    for (const auto& l : lines) {
      text += l;
      text += '\n';
    }
    out.files[normalize_target(target)] = std::move(text);
    for (auto& p : prov) out.provenance.push_back(std::move(p));
  }
  return out;
}

/// Writes only files whose content differs (idempotent). Returns written paths.
inline std::vector<std::string> write_tangle(const TangleOutput& out,
                                             const std::filesystem::path& root) {
  std::vector<std::string> written;
  for (const auto& [rel, text] : out.files) {
    if (detail::escapes_root(rel))
      throw std::runtime_error("file target '" + rel + "' escapes the output root");
    std::filesystem::path dest = root / rel;
    std::error_code ec;
    if (std::filesystem::exists(dest)) {
      std::ifstream in(dest, std::ios::binary);
      std::stringstream ss;
      ss << in.rdbuf();
      if (ss.str() == text) continue;
    }
    std::filesystem::create_directories(dest.parent_path(), ec);
    std::ofstream f(dest, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + dest.string());
    f << text;
    written.push_back(rel);
  }
  return written;
}

enum class DriftStatus { InSync, Modified, Missing, Extra };

inline const char* to_string(DriftStatus s) {
  switch (s) {
    case DriftStatus::InSync: return "in-sync";
    case DriftStatus::Modified: return "modified";
    case DriftStatus::Missing: return "missing";
    case DriftStatus::Extra: return "extra";
  }
  return "?";
}

struct DriftReport {
  std::string path;
  DriftStatus status = DriftStatus::InSync;
  std::size_t first_diff_line = 0;  // set for Modified
};

inline std::vector<DriftReport> check_drift(const DocumentSet& set,
                                            const std::filesystem::path& root,
                                            bool markers) {
  auto out = tangle_project(set, markers);
  std::vector<DriftReport> reports;
  for (const auto& [rel, text] : out.files) {
    std::filesystem::path dest = root / rel;
    if (!std::filesystem::exists(dest)) {
      reports.push_back({rel, DriftStatus::Missing, 0});
      continue;
    }
    std::ifstream in(dest, std::ios::binary);
    if (!in) throw std::runtime_error("unreadable file " + dest.string());
    std::stringstream ss;
    ss << in.rdbuf();
    std::string disk = ss.str();
    if (disk == text) {
      reports.push_back({rel, DriftStatus::InSync, 0});
      continue;
    }
    std::size_t line = 1;
    std::size_t n = std::min(disk.size(), text.size());
    std::size_t i = 0;
    for (; i < n && disk[i] == text[i]; ++i)
      if (disk[i] == '\n') ++line;
    reports.push_back({rel, DriftStatus::Modified, line});
  }
  // Files on disk not produced by tangling.
  if (std::filesystem::exists(root)) {
    for (auto it = std::filesystem::recursive_directory_iterator(root);
         it != std::filesystem::recursive_directory_iterator(); ++it) {
      if (!it->is_regular_file()) continue;
      std::string rel =
          std::filesystem::relative(it->path(), root).generic_string();
      if (!out.files.count(rel)) reports.push_back({rel, DriftStatus::Extra, 0});
    }
  }
  std::sort(reports.begin(), reports.end(),
            [](const DriftReport& a, const DriftReport& b) { return a.path < b.path; });
  return reports;
}

// --- detangle ---------------------------------------------------------------

class DetangleError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

struct MarkedRegion {
  std::string chunk_id;
  std::string doc_path;
  std::size_t doc_line = 0;
  std::vector<std::string> interior;
};

inline std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) {
      lines.push_back(text.substr(pos));
      break;
    }
    lines.push_back(text.substr(pos, eol - pos));
    pos = eol + 1;
  }
  return lines;
}

inline std::optional<std::pair<bool, std::string>> marker_line(const std::string& line) {
  auto scan = [&](const std::string& tag) -> std::optional<std::string> {
    std::size_t p = line.find(tag);
    if (p == std::string::npos) return std::nullopt;
    return line.substr(p + tag.size());
  };
  if (auto rest = scan(" ILP:BEGIN ")) return std::make_pair(true, *rest);
  if (auto rest = scan(" ILP:END ")) return std::make_pair(false, *rest);
  return std::nullopt;
}

inline std::vector<MarkedRegion> parse_marked_regions(const std::string& file,
                                                      const std::string& text) {
  std::vector<MarkedRegion> regions;
  std::optional<MarkedRegion> open;
  for (const auto& line : split_lines(text)) {
    auto m = marker_line(line);
    if (!m) {
      if (open) open->interior.push_back(line);
      continue;
    }
    if (m->first) {
      if (open)
        throw DetangleError(file + ": nested or unbalanced ILP:BEGIN marker");
      MarkedRegion r;
      std::istringstream ss(m->second);
      std::string id, origin;
      ss >> id >> origin;
      if (id.empty() || origin.empty())
        throw DetangleError(file + ": damaged ILP:BEGIN marker");
      std::size_t colon = origin.rfind(':');
      if (colon == std::string::npos)
        throw DetangleError(file + ": damaged ILP:BEGIN marker");
      r.chunk_id = id;
      r.doc_path = origin.substr(0, colon);
      r.doc_line = std::stoul(origin.substr(colon + 1));
      open = std::move(r);
    } else {
      if (!open) throw DetangleError(file + ": ILP:END without matching BEGIN");
      std::istringstream ss(m->second);
      std::string id;
      ss >> id;
      if (id != open->chunk_id)
        throw DetangleError(file + ": mismatched ILP:END marker for " + id);
      regions.push_back(std::move(*open));
      open.reset();
    }
  }
  if (open) throw DetangleError(file + ": missing ILP:END marker");
  return regions;
}

/// Rebuild a chunk body from an edited marked region. Included expansions must
/// survive verbatim; edits inside them have no unambiguous owner.
inline std::vector<std::string> rebuild_body(const std::vector<ExpandSegment>& segs,
                                             const Chunk& chunk,
                                             const std::vector<std::string>& interior,
                                             const std::string& file) {
  std::vector<std::string> body;
  std::size_t pos = 0;
  for (std::size_t s = 0; s < segs.size(); ++s) {
    const ExpandSegment& seg = segs[s];
    if (!seg.included) continue;
    // Find this inclusion's lines verbatim, in order.
    std::size_t found = std::string::npos;
    for (std::size_t p = pos; p + seg.lines.size() <= interior.size(); ++p) {
      bool ok = true;
      for (std::size_t k = 0; k < seg.lines.size(); ++k)
        if (interior[p + k] != seg.lines[k]) {
          ok = false;
          break;
        }
      if (ok) {
        found = p;
        break;
      }
    }
    if (found == std::string::npos)
      throw DetangleError(file + ": edit inside expanded <<...>> inclusion of chunk '" +
                          chunk.id() + "' has no unambiguous owner");
    for (std::size_t k = pos; k < found; ++k) body.push_back(interior[k]);
    body.push_back(chunk.body[seg.ref_line]);
    pos = found + seg.lines.size();
  }
  for (std::size_t k = pos; k < interior.size(); ++k) body.push_back(interior[k]);
  return body;
}

}  // namespace detail

/// Propagate edits in marker-tangled files back into the documents. Throws
/// before touching anything when markers are damaged or edits are ambiguous.
inline DocumentSet detangle(const DocumentSet& set,
                            const std::filesystem::path& root) {
  auto expected = tangle_project(set, /*markers=*/true);
  auto table = set.chunks();

  struct Edit {
    std::string doc_path;
    std::size_t byte_start, byte_end;
    std::string replacement;
  };
  std::vector<Edit> edits;

  for (const auto& [rel, text] : expected.files) {
    std::filesystem::path dest = root / rel;
    if (!std::filesystem::exists(dest)) continue;  // drift, not detangle's job
    std::ifstream in(dest, std::ios::binary);
    if (!in) throw DetangleError("unreadable file " + dest.string());
    std::stringstream ss;
    ss << in.rdbuf();
    std::string disk = ss.str();
    if (disk == text) continue;

    auto want = detail::parse_marked_regions(rel, text);
    auto got = detail::parse_marked_regions(rel, disk);
    if (want.size() != got.size())
      throw DetangleError(rel + ": marker structure does not match the documents");

    for (std::size_t i = 0; i < want.size(); ++i) {
      if (got[i].chunk_id != want[i].chunk_id ||
          got[i].doc_path != want[i].doc_path ||
          got[i].doc_line != want[i].doc_line)
        throw DetangleError(rel + ": marker structure does not match the documents");
      if (got[i].interior == want[i].interior) continue;

      // Locate the chunk this region came from.
      const Document* doc = set.find(want[i].doc_path);
      if (!doc) throw DetangleError(rel + ": unknown document " + want[i].doc_path);
      const Chunk* chunk = nullptr;
      for (const auto& b : doc->blocks)
        if (const auto* cb = std::get_if<ChunkBlock>(&b))
          if (cb->chunk.id() == want[i].chunk_id &&
              cb->chunk.span.line_start == want[i].doc_line)
            chunk = &cb->chunk;
      if (!chunk) throw DetangleError(rel + ": marker refers to a missing chunk");

      auto segs = expand_with_segments(table, *chunk);
      auto body = detail::rebuild_body(segs, *chunk, got[i].interior, rel);
      std::string replacement;
      for (std::size_t k = 0; k < body.size(); ++k) {
        if (k) replacement += '\n';
        replacement += body[k];
      }
      edits.push_back({doc->path, chunk->body_byte_start, chunk->body_byte_end,
                       std::move(replacement)});
    }
  }

  DocumentSet updated;
  for (const auto& doc : set.docs) {
    std::vector<const Edit*> mine;
    for (const auto& e : edits)
      if (e.doc_path == doc.path) mine.push_back(&e);
    if (mine.empty()) {
      updated.docs.push_back(doc);
      continue;
    }
    std::sort(mine.begin(), mine.end(),
              [](const Edit* a, const Edit* b) { return a->byte_start > b->byte_start; });
    std::string text = doc.raw_text;
    for (const Edit* e : mine)
      text.replace(e->byte_start, e->byte_end - e->byte_start, e->replacement);
    updated.docs.push_back(parse_document(doc.path, text));
  }
  return updated;
}

}  // namespace ilp
