#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "ilp/graph.hpp"
#include "ilp/project.hpp"

namespace ilp {

enum class WeaveFormat { Markdown, Html };

struct IndexEntry {
  std::string name;
  std::string kind;  // annotation | chunk | step-spec
  std::string pattern;
  std::string complexity;
  std::string stability;
  std::string defined_at;                 // anchor in the woven body
  std::vector<std::string> referenced_at; // anchors of referencing definitions
};

struct WovenDoc {
  std::string body;
  std::vector<IndexEntry> index_entries;
};

namespace detail {

inline std::string def_anchor(const std::string& name) {
  return "def-" + slugify(name);
}

inline std::string rewrite_links(const Narrative& narr,
                                 const std::set<std::string>& names,
                                 const std::map<std::string, std::string>& anchors) {
  // Replace [[name]] with a markdown link to the definition anchor.
  const std::string& s = narr.markdown_text;
  std::string out;
  std::size_t pos = 0;
  for (const auto& link : narr.links) {
    std::size_t begin = link.span.byte_start - narr.span.byte_start;
    std::size_t end = link.span.byte_end - narr.span.byte_start;
    out += s.substr(pos, begin - pos);
    if (names.count(link.name)) {
      out += "[" + link.name + "](#" + def_anchor(link.name) + ")";
    } else if (auto it = anchors.find(link.name); it != anchors.end()) {
      out += "[" + link.name + "](#" + it->second + ")";
    } else {
      out += s.substr(begin, end - begin);
    }
    pos = end;
  }
  out += s.substr(pos);
  return out;
}

inline std::string html_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      default: out += c;
    }
  }
  return out;
}

// Just enough markdown-to-html for review output: headings, fences, anchors,
// [text](#anchor) links, paragraphs. No scripts, static anchors only.
inline std::string markdown_to_html(const std::string& md) {
  std::string out = "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\">"
                    "<title>woven</title></head><body>\n";
  bool in_fence = false, in_para = false;
  auto close_para = [&] {
    if (in_para) {
      out += "</p>\n";
      in_para = false;
    }
  };
  std::size_t pos = 0;
  while (pos <= md.size()) {
    std::size_t eol = md.find('\n', pos);
    if (eol == std::string::npos) eol = md.size();
    std::string line = md.substr(pos, eol - pos);
    pos = eol + 1;
    if (line.rfind("```", 0) == 0) {
      close_para();
      out += in_fence ? "</code></pre>\n" : "<pre><code>";
      in_fence = !in_fence;
      if (pos > md.size()) break;
      continue;
    }
    if (in_fence) {
      out += html_escape(line) + "\n";
      if (pos > md.size()) break;
      continue;
    }
    int level = 0;
    while (level < static_cast<int>(line.size()) && line[level] == '#') ++level;
    if (level >= 1 && level <= 6 && level < static_cast<int>(line.size()) &&
        line[level] == ' ') {
      close_para();
      std::string title = line.substr(level + 1);
      out += "<h" + std::to_string(level) + " id=\"" + slugify(title) + "\">" +
             html_escape(title) + "</h" + std::to_string(level) + ">\n";
    } else if (line.rfind("<a id=", 0) == 0) {
      close_para();
      out += line + "\n";
    } else if (line.empty()) {
      close_para();
    } else {
      // Inline [text](#anchor) links survive; everything else is escaped.
      std::string rendered;
      std::size_t i = 0;
      while (i < line.size()) {
        if (line[i] == '[') {
          std::size_t close = line.find("](#", i);
          std::size_t paren = close == std::string::npos ? std::string::npos
                                                         : line.find(')', close);
          if (close != std::string::npos && paren != std::string::npos) {
            std::string text = line.substr(i + 1, close - i - 1);
            std::string anchor = line.substr(close + 3, paren - close - 3);
            rendered += "<a href=\"#" + anchor + "\">" + html_escape(text) + "</a>";
            i = paren + 1;
            continue;
          }
        }
        rendered += html_escape(std::string(1, line[i]));
        ++i;
      }
      if (!in_para) {
        out += "<p>";
        in_para = true;
      } else {
        out += "\n";
      }
      out += rendered;
    }
    if (pos > md.size()) break;
  }
  close_para();
  if (in_fence) out += "</code></pre>\n";
  out += "</body></html>\n";
  return out;
}

}  // namespace detail

inline WovenDoc weave(const DocumentSet& set, WeaveFormat format) {
  WovenDoc woven;
  auto chunk_counts = set.chunks();
  auto annotations = set.annotations();
  auto specs = set.step_specs();
  auto names = set.known_names();
  DependencyGraph graph = build_graph(set);

  std::map<std::string, std::string> heading_anchors;
  for (const auto& doc : set.docs)
    for (const auto& b : doc.blocks)
      if (const auto* n = std::get_if<Narrative>(&b))
        for (const auto& h : n->headings) {
          if (!heading_anchors.count(h.anchor)) heading_anchors[h.anchor] = h.anchor;
          if (!heading_anchors.count(h.title)) heading_anchors[h.title] = h.anchor;
        }

  std::string body;
  std::map<std::string, std::size_t> part_counter;
  std::set<std::string> anchored;
  for (const auto& doc : set.docs) {
    for (const auto& b : doc.blocks) {
      if (const auto* n = std::get_if<Narrative>(&b)) {
        body += detail::rewrite_links(*n, names, heading_anchors);
        continue;
      }
      const Chunk& c = std::get<ChunkBlock>(b).chunk;
      std::string display = c.name ? *c.name : c.id();
      if (c.name && anchored.insert(*c.name).second)
        body += "<a id=\"" + detail::def_anchor(*c.name) + "\"></a>\n";
      std::size_t part = ++part_counter[display];
      std::size_t total = c.name ? chunk_counts[*c.name].size() : 1;
      body += "**\xE2\x9F\xA8" + display + "\xE2\x9F\xA9**";
      if (c.file_target) body += " \xC2\xB7 file: `" + *c.file_target + "`";
      if (total > 1)
        body += " \xC2\xB7 part " + std::to_string(part) + " of " +
                std::to_string(total);
      body += "\n\n";
      body += doc.raw_text.substr(c.span.byte_start, c.span.byte_end - c.span.byte_start);
      if (body.back() != '\n') body += '\n';
    }
    body += '\n';
  }

  // Annotation and step-spec definition anchors for names with no chunk.
  // Annotations live inside chunks; anchor at the chunk site already exists
  // when the names coincide, otherwise fall back to the section anchor.
  std::map<std::string, std::string> defined_at;
  for (const auto& name : names) {
    if (anchored.count(name)) {
      defined_at[name] = detail::def_anchor(name);
    } else if (auto it = specs.find(name); it != specs.end()) {
      defined_at[name] = it->second->anchor;
    }
  }
  // Names defined only by an annotation in some chunk: anchor them at the end
  // of the narrative via the index itself.
  body += "## Index\n\n";
  body += "| Name | Kind | Pattern | Complexity | Stability | Defined | Referenced at |\n";
  body += "|---|---|---|---|---|---|---|\n";

  std::map<std::string, std::vector<std::string>> refs;
  for (const auto& e : graph.edges) {
    if (e.kind == EdgeKind::Inclusion) continue;
    if (!names.count(e.from) || !names.count(e.to)) continue;
    refs[e.to].push_back(e.from);
  }

  for (const auto& name : names) {
    IndexEntry entry;
    entry.name = name;
    const Annotation* ann = nullptr;
    if (auto it = annotations.find(name); it != annotations.end()) ann = it->second;
    if (ann) {
      entry.kind = "annotation";
      entry.pattern = ann->pattern;
      entry.complexity = ann->complexity;
      entry.stability = to_string(ann->stability);
    } else if (chunk_counts.count(name)) {
      entry.kind = "chunk";
    } else {
      entry.kind = "step-spec";
    }
    if (auto it = defined_at.find(name); it != defined_at.end()) {
      entry.defined_at = it->second;
    } else {
      entry.defined_at = "index";
    }
    if (auto it = refs.find(name); it != refs.end()) {
      std::set<std::string> seen;
      for (const auto& from : it->second) {
        std::string anchor =
            defined_at.count(from) ? defined_at[from] : "index";
        if (seen.insert(anchor).second) entry.referenced_at.push_back(anchor);
      }
    }
    woven.index_entries.push_back(entry);

    body += "| [" + name + "](#" + entry.defined_at + ") | " + entry.kind + " | " +
            entry.pattern + " | " + entry.complexity + " | " + entry.stability +
            " | #" + entry.defined_at + " | ";
    for (std::size_t i = 0; i < entry.referenced_at.size(); ++i) {
      if (i) body += ", ";
      body += "#" + entry.referenced_at[i];
    }
    body += " |\n";
  }
  body += "\n<a id=\"index\"></a>\n";

  woven.body = format == WeaveFormat::Html ? detail::markdown_to_html(body) : body;
  return woven;
}

}  // namespace ilp
