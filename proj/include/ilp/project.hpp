#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "ilp/model.hpp"
#include "ilp/parser.hpp"

namespace ilp {

/// Ordered set of parsed documents, treated as one concatenated chunk stream.
struct DocumentSet {
  std::vector<Document> docs;

  /// Named chunks across all documents, document order preserved.
  std::map<std::string, std::vector<Chunk>> chunks() const {
    std::map<std::string, std::vector<Chunk>> table;
    for (const auto& doc : docs)
      for (const auto& b : doc.blocks)
        if (const auto* cb = std::get_if<ChunkBlock>(&b))
          if (cb->chunk.name) table[*cb->chunk.name].push_back(cb->chunk);
    return table;
  }

  std::map<std::string, const Annotation*> annotations() const {
    std::map<std::string, const Annotation*> table;
    for (const auto& doc : docs)
      for (const auto& ann : doc.annotations)
        if (!table.count(ann.name)) table[ann.name] = &ann;
    return table;
  }

  std::map<std::string, const StepSpec*> step_specs() const {
    std::map<std::string, const StepSpec*> table;
    for (const auto& doc : docs)
      for (const auto& spec : doc.step_specs)
        if (!table.count(spec.api_name)) table[spec.api_name] = &spec;
    return table;
  }

  /// file_target -> contributing chunks in document order.
  std::map<std::string, std::vector<Chunk>> file_targets() const {
    std::map<std::string, std::vector<Chunk>> table;
    for (const auto& doc : docs)
      for (const auto& b : doc.blocks)
        if (const auto* cb = std::get_if<ChunkBlock>(&b))
          if (cb->chunk.file_target) table[*cb->chunk.file_target].push_back(cb->chunk);
    return table;
  }

  /// Chunk names, annotation names, and step-spec api names.
  std::set<std::string> known_names() const {
    std::set<std::string> names;
    for (const auto& [n, _] : chunks()) names.insert(n);
    for (const auto& [n, _] : annotations()) names.insert(n);
    for (const auto& [n, _] : step_specs()) names.insert(n);
    return names;
  }

  const Document* find(const std::string& path) const {
    for (const auto& d : docs)
      if (d.path == path) return &d;
    return nullptr;
  }
};

namespace detail {

inline bool escapes_root(const std::string& target) {
  if (target.empty()) return true;
  if (target[0] == '/') return true;
  if (target.size() >= 2 && target[1] == ':') return true;  // windows drive
  // Reject any `..` path component.
  std::size_t pos = 0;
  while (pos <= target.size()) {
    std::size_t sep = target.find('/', pos);
    if (sep == std::string::npos) sep = target.size();
    if (target.substr(pos, sep - pos) == "..") return true;
    pos = sep + 1;
  }
  return false;
}

/// `<<name>>` reference on a line of its own (optional indentation).
inline bool parse_include_ref(const std::string& line, std::string* indent,
                              std::string* name) {
  std::size_t i = 0;
  while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
  if (line.compare(i, 2, "<<") != 0) return false;
  std::size_t j = line.size();
  while (j > i && (line[j - 1] == ' ' || line[j - 1] == '\r')) --j;
  if (j < i + 4 || line.compare(j - 2, 2, ">>") != 0) return false;
  std::string inner = line.substr(i + 2, j - i - 4);
  if (inner.empty()) return false;
  for (char c : inner)
    if (!is_link_char(c)) return false;
  if (indent) *indent = line.substr(0, i);
  if (name) *name = inner;
  return true;
}

}  // namespace detail

/// All findings for the whole document set, sorted by path then byte offset.
inline std::vector<Diagnostic> validate(const DocumentSet& set) {
  std::vector<Diagnostic> diags;
  auto chunks = set.chunks();
  auto annotations = set.annotations();
  auto names = set.known_names();

  std::set<std::string> anchors;
  for (const auto& doc : set.docs) {
    for (const auto& b : doc.blocks)
      if (const auto* n = std::get_if<Narrative>(&b))
        for (const auto& h : n->headings) {
          anchors.insert(h.anchor);
          anchors.insert(h.title);
        }
    for (const auto& d : doc.parse_diags) diags.push_back(d);
  }

  std::set<std::string> seen_annotations;
  for (const auto& doc : set.docs) {
    for (const auto& ann : doc.annotations) {
      if (!seen_annotations.insert(ann.name).second)
        diags.push_back({Severity::Error, ann.span,
                         "duplicate annotation name '" + ann.name + "'"});
      for (const auto& dep : ann.depends)
        if (!names.count(dep))
          diags.push_back({Severity::Error, ann.span,
                           "unresolved #:depends reference '" + dep + "' in '" +
                               ann.name + "'"});
    }

    for (const auto& b : doc.blocks) {
      if (const auto* n = std::get_if<Narrative>(&b)) {
        for (const auto& link : n->links)
          if (!names.count(link.name) && !anchors.count(link.name))
            diags.push_back({Severity::Error, link.span,
                             "unresolved [[" + link.name + "]] reference"});
        continue;
      }
      const Chunk& c = std::get<ChunkBlock>(b).chunk;
      if (!c.name && !c.file_target && !c.is_doc)
        diags.push_back({Severity::Error, c.span,
                         "code chunk has neither a chunk= name nor a file= target"});
      if (c.file_target && detail::escapes_root(*c.file_target))
        diags.push_back({Severity::Error, c.span,
                         "file target '" + *c.file_target +
                             "' escapes the project root"});
      if (c.is_doc && c.file_target && !c.attributes.count("tangle"))
        diags.push_back({Severity::Warning, c.span,
                         "doc chunk has a file= target but no explicit tangle "
                         "attribute; it will not be tangled"});
      for (const auto& line : c.body) {
        std::string ref;
        if (detail::parse_include_ref(line, nullptr, &ref) && !chunks.count(ref))
          diags.push_back({Severity::Error, c.span,
                           "unresolved <<" + ref + ">> chunk reference"});
      }
    }

    for (const auto& spec : doc.step_specs) {
      if (!annotations.count(spec.api_name) && !chunks.count(spec.api_name))
        diags.push_back({Severity::Warning, spec.span,
                         "step spec '" + spec.api_name +
                             "' has no matching annotation or chunk"});
      for (const auto& helper : spec.helper_refs)
        if (!names.count(helper))
          diags.push_back({Severity::Error, spec.span,
                           "unresolved helper reference '" + helper + "' in step spec '" +
                               spec.api_name + "'"});
    }
  }

  std::stable_sort(diags.begin(), diags.end(),
                   [](const Diagnostic& a, const Diagnostic& b) {
                     if (a.span.document_path != b.span.document_path)
                       return a.span.document_path < b.span.document_path;
                     return a.span.byte_start < b.span.byte_start;
                   });
  return diags;
}

}  // namespace ilp
