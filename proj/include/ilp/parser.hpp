#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "ilp/datum.hpp"
#include "ilp/diag.hpp"
#include "ilp/model.hpp"

namespace ilp {

// ILP Markdown carrier format:
//   - fenced code blocks (three backticks, column 0) with an info string
//     `lang (WS key(=value)?)*` become chunks; recognized keys are file=,
//     chunk=, doc, tangle=true|false; values may be double-quoted
//   - `## api` sections with `### Zero-Step Logic` / `### Succ-Step Logic`
//     sub-headings become step specs; `### Helper Function: \`name\``
//     sub-headings populate helper_refs
//   - [[name]] tokens in narrative are recorded as cross-reference links
//   - scheme chunks are scanned for (define-with-docs ...) annotation forms

namespace detail {

inline bool is_link_char(char c) {
  if (c >= 'a' && c <= 'z') return true;
  if (c >= 'A' && c <= 'Z') return true;
  if (c >= '0' && c <= '9') return true;
  switch (c) {
    case '_': case '?': case '!': case '+': case '*': case '/': case '<':
    case '>': case '=': case '-':
      return true;
    default:
      return false;
  }
}

inline std::string slugify(const std::string& title) {
  std::string out;
  for (char c : title) {
    if (c >= 'A' && c <= 'Z') {
      out += static_cast<char>(c - 'A' + 'a');
    } else if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9')) {
      out += c;
    } else if (!out.empty() && out.back() != '-') {
      out += '-';
    }
  }
  while (!out.empty() && out.back() == '-') out.pop_back();
  return out.empty() ? "section" : out;
}

inline std::size_t line_of(const std::string& text, std::size_t byte) {
  return 1 + static_cast<std::size_t>(
                 std::count(text.begin(), text.begin() + static_cast<long>(byte), '\n'));
}

struct InfoString {
  std::string language;
  std::map<std::string, std::string> keys;  // in info-string order is irrelevant
  std::size_t chunk_value_start = 0;        // byte range of the chunk= value
  std::size_t chunk_value_end = 0;
};

// Grammar: lang (WS key(=value)?)*; values may be double-quoted.
inline InfoString parse_info_string(const std::string& text, std::size_t begin,
                                    std::size_t end, const std::string& path,
                                    std::size_t line) {
  InfoString info;
  std::size_t pos = begin;
  auto skip_ws = [&] {
    while (pos < end && (text[pos] == ' ' || text[pos] == '\t')) ++pos;
  };
  auto fail = [&](const std::string& msg) -> InfoString {
    throw ParseError("malformed info string: " + msg, {path, begin, end, line});
  };
  skip_ws();
  std::size_t lang_start = pos;
  while (pos < end && text[pos] != ' ' && text[pos] != '\t') {
    if (text[pos] == '=' || text[pos] == '"') fail("language tag expected first");
    ++pos;
  }
  info.language = text.substr(lang_start, pos - lang_start);
  if (info.language.empty()) fail("missing language tag");
  for (;;) {
    skip_ws();
    if (pos >= end) break;
    std::size_t key_start = pos;
    while (pos < end && text[pos] != '=' && text[pos] != ' ' && text[pos] != '\t') ++pos;
    std::string key = text.substr(key_start, pos - key_start);
    if (key.empty()) fail("empty key");
    std::string value;
    std::size_t value_start = pos, value_end = pos;
    if (pos < end && text[pos] == '=') {
      ++pos;
      if (pos < end && text[pos] == '"') {
        ++pos;
        value_start = pos;
        while (pos < end && text[pos] != '"') ++pos;
        if (pos >= end) fail("unterminated quoted value");
        value_end = pos;
        value = text.substr(value_start, value_end - value_start);
        ++pos;
      } else {
        value_start = pos;
        while (pos < end && text[pos] != ' ' && text[pos] != '\t') ++pos;
        value_end = pos;
        value = text.substr(value_start, value_end - value_start);
        if (value.empty()) fail("empty value for key '" + key + "'");
      }
    }
    if (info.keys.count(key)) fail("duplicate key '" + key + "'");
    info.keys[key] = value;
    if (key == "chunk") {
      info.chunk_value_start = value_start;
      info.chunk_value_end = value_end;
    }
  }
  if (auto it = info.keys.find("tangle");
      it != info.keys.end() && it->second != "true" && it->second != "false")
    fail("tangle must be true or false");
  return info;
}

inline void scan_narrative(Narrative& narr, const std::string& text,
                           const std::string& path) {
  const std::string& s = narr.markdown_text;
  std::size_t base = narr.span.byte_start;
  // Headings and code spans / links, line by line.
  std::size_t pos = 0;
  while (pos < s.size()) {
    std::size_t eol = s.find('\n', pos);
    if (eol == std::string::npos) eol = s.size();
    std::size_t h = pos;
    int level = 0;
    while (h < eol && s[h] == '#') {
      ++level;
      ++h;
    }
    if (level >= 1 && level <= 6 && h < eol && s[h] == ' ') {
      std::string title = s.substr(h + 1, eol - h - 1);
      while (!title.empty() && (title.back() == ' ' || title.back() == '\r'))
        title.pop_back();
      Heading hd;
      hd.level = level;
      hd.title = title;
      hd.byte_start = base + pos;
      hd.line = line_of(text, base + pos);
      narr.headings.push_back(hd);
    }
    pos = eol + 1;
  }
  // [[name]] links.
  for (std::size_t i = 0; i + 3 < s.size(); ++i) {
    if (s[i] != '[' || s[i + 1] != '[') continue;
    std::size_t j = i + 2;
    while (j < s.size() && is_link_char(s[j])) ++j;
    if (j > i + 2 && j + 1 < s.size() && s[j] == ']' && s[j + 1] == ']') {
      CrossLink link;
      link.name = s.substr(i + 2, j - i - 2);
      link.span = {path, base + i, base + j + 2, line_of(text, base + i)};
      narr.links.push_back(link);
      i = j + 1;
    }
  }
  // Inline `code` spans (single backticks, same line).
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '`') continue;
    std::size_t j = i + 1;
    while (j < s.size() && s[j] != '`' && s[j] != '\n') ++j;
    if (j < s.size() && s[j] == '`') {
      CodeSpan span;
      span.text = s.substr(i + 1, j - i - 1);
      span.span = {path, base + i, base + j + 1, line_of(text, base + i)};
      narr.code_spans.push_back(span);
      i = j;
    }
  }
}

inline void assign_anchors(Document& doc) {
  std::set<std::string> used;
  for (auto& b : doc.blocks) {
    auto* n = std::get_if<Narrative>(&b);
    if (!n) continue;
    for (auto& h : n->headings) {
      std::string slug = slugify(h.title);
      std::string anchor = slug;
      for (int k = 2; used.count(anchor); ++k) anchor = slug + "-" + std::to_string(k);
      used.insert(anchor);
      h.anchor = anchor;
    }
  }
}

// Flattened heading view plus the byte offset where each heading's own text ends.
struct HeadingRef {
  const Heading* heading;
  std::size_t content_start;  // byte offset just past the heading line
};

inline std::vector<HeadingRef> all_headings(const Document& doc) {
  std::vector<HeadingRef> out;
  for (const auto& b : doc.blocks) {
    if (const auto* n = std::get_if<Narrative>(&b)) {
      for (const auto& h : n->headings) {
        std::size_t eol = doc.raw_text.find('\n', h.byte_start);
        if (eol == std::string::npos) eol = doc.raw_text.size();
        out.push_back({&h, eol + 1 > doc.raw_text.size() ? doc.raw_text.size() : eol + 1});
      }
    }
  }
  return out;
}

inline std::string trim_copy(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline void extract_step_specs(Document& doc, const std::string& path) {
  auto heads = all_headings(doc);
  for (std::size_t i = 0; i < heads.size(); ++i) {
    const Heading& h = *heads[i].heading;
    if (h.level != 2) continue;
    std::size_t section_end = doc.raw_text.size();
    std::size_t last = heads.size();
    for (std::size_t j = i + 1; j < heads.size(); ++j) {
      if (heads[j].heading->level <= 2) {
        section_end = heads[j].heading->byte_start;
        last = j;
        break;
      }
    }
    // Narrative text under a sub-heading runs to the next heading of any level
    // (or to the section end).
    auto sub_text = [&](std::size_t j) {
      std::size_t begin = heads[j].content_start;
      std::size_t end = section_end;
      if (j + 1 < heads.size() && heads[j + 1].heading->byte_start < section_end)
        end = heads[j + 1].heading->byte_start;
      if (begin >= end) return std::string();
      return trim_copy(doc.raw_text.substr(begin, end - begin));
    };
    StepSpec spec;
    bool saw_zero = false, saw_succ = false;
    for (std::size_t j = i + 1; j < last && j < heads.size(); ++j) {
      const Heading& sub = *heads[j].heading;
      if (sub.level != 3) continue;
      if (sub.title == "Zero-Step Logic") {
        saw_zero = true;
        spec.zero_step = sub_text(j);
      } else if (sub.title == "Succ-Step Logic") {
        saw_succ = true;
        spec.succ_step = sub_text(j);
      } else if (sub.title.rfind("Helper Function: `", 0) == 0 &&
                 sub.title.size() > 19 && sub.title.back() == '`') {
        spec.helper_refs.push_back(
            sub.title.substr(18, sub.title.size() - 19));
      }
    }
    if (!saw_zero && !saw_succ) continue;
    spec.api_name = h.title;
    spec.anchor = h.anchor;
    spec.span = {path, h.byte_start, section_end, h.line};
    if (spec.zero_step.empty() || spec.succ_step.empty()) {
      doc.parse_diags.push_back(
          {Severity::Warning, spec.span,
           "step spec for '" + spec.api_name +
               "' is missing its " +
               (spec.zero_step.empty() ? std::string("zero-step")
                                       : std::string("succ-step")) +
               " text"});
    }
    doc.step_specs.push_back(std::move(spec));
  }
}

}  // namespace detail

/// Parse one define-with-docs form. `diags` receives warning-level findings;
/// hard errors throw ParseError.
inline Annotation parse_annotation(const DatumPtr& datum, SourceSpan span,
                                   std::vector<Diagnostic>* diags = nullptr) {
  if (!datum || datum->kind != Datum::Kind::List || datum->items.empty() ||
      !datum->items[0]->is_symbol("define-with-docs"))
    throw ParseError("not a define-with-docs form", span);
  if (datum->items.size() < 2 || datum->items[1]->kind != Datum::Kind::Symbol)
    throw ParseError("define-with-docs is missing its name", span);

  Annotation ann;
  ann.name = datum->items[1]->atom;
  ann.span = span;

  auto text_of = [&](const DatumPtr& d, const std::string& key) {
    if (d->kind == Datum::Kind::Text || d->kind == Datum::Kind::Symbol ||
        d->kind == Datum::Kind::Number)
      return d->atom;
    throw ParseError("#:" + key + " expects a text value", span);
  };

  const auto& items = datum->items;
  std::size_t i = 2;
  while (i < items.size()) {
    const DatumPtr& d = items[i];
    if (d->kind != Datum::Kind::Keyword) {
      ann.body = d;  // trailing non-keyword datum (typically the lambda form)
      ++i;
      continue;
    }
    const std::string& key = d->atom;
    ++i;
    if (key == "pattern" || key == "complexity" || key == "stability") {
      if (i >= items.size()) throw ParseError("#:" + key + " is missing its value", span);
      std::string v = text_of(items[i], key);
      ++i;
      if (key == "pattern") {
        ann.pattern = v;
      } else if (key == "complexity") {
        ann.complexity = v;
      } else {
        if (v == "stable") {
          ann.stability = Stability::Stable;
        } else if (v == "unstable") {
          ann.stability = Stability::Unstable;
        } else {
          ann.stability = Stability::Unspecified;
          if (diags)
            diags->push_back({Severity::Warning, span,
                              "unknown stability '" + v + "' for '" + ann.name + "'"});
        }
      }
    } else if (key == "depends") {
      if (i >= items.size()) throw ParseError("#:depends is missing its value", span);
      DatumPtr v = items[i];
      ++i;
      if (v->kind == Datum::Kind::Quoted) v = v->items[0];
      if (v->kind != Datum::Kind::List)
        throw ParseError("#:depends expects a list of names", span);
      for (const auto& e : v->items) {
        if (e->kind != Datum::Kind::Symbol)
          throw ParseError("#:depends entries must be symbols", span);
        ann.depends.push_back(e->atom);
      }
    } else if (key == "examples") {
      if (i >= items.size()) throw ParseError("#:examples is missing its value", span);
      const DatumPtr& first = items[i];
      bool quoted_list_shape = false;
      if (first->kind == Datum::Kind::Quoted &&
          first->items[0]->kind == Datum::Kind::List) {
        for (const auto& e : first->items[0]->items)
          if (e->is_symbol("=>")) quoted_list_shape = true;
      }
      if (quoted_list_shape) {
        // '((expr => expected) ...) written as a flat expr => expected sequence
        const auto& xs = first->items[0]->items;
        if (xs.size() % 3 != 0)
          throw ParseError("#:examples does not match the (expr => expected) shape", span);
        for (std::size_t k = 0; k < xs.size(); k += 3) {
          if (!xs[k + 1]->is_symbol("=>"))
            throw ParseError("#:examples does not match the (expr => expected) shape",
                             span);
          ann.examples.push_back({xs[k], xs[k + 2], span});
        }
        ++i;
      } else {
        // bare `expr => expected` triple
        if (i + 2 >= items.size() || !items[i + 1]->is_symbol("=>"))
          throw ParseError("#:examples does not match either accepted shape", span);
        DatumPtr expr = items[i];
        if (expr->kind == Datum::Kind::Quoted) expr = expr->items[0];
        ann.examples.push_back({expr, items[i + 2], span});
        i += 3;
      }
    } else {
      if (diags)
        diags->push_back({Severity::Warning, span,
                          "unknown keyword #:" + key + " in define-with-docs '" +
                              ann.name + "'"});
      if (i < items.size() && items[i]->kind != Datum::Kind::Keyword) {
        ann.extra_keywords[key] = items[i];
        ++i;
      } else {
        ann.extra_keywords[key] = nullptr;
      }
    }
  }
  return ann;
}

namespace detail {

inline void extract_annotations(Document& doc, Chunk& chunk) {
  const std::string body_text = doc.raw_text.substr(
      chunk.body_byte_start, chunk.body_byte_end - chunk.body_byte_start);
  if (body_text.find("define-with-docs") == std::string::npos) return;
  try {
    auto toks = lex_sex(body_text, 0, doc.path);
    std::size_t ti = 0;
    for (;;) {
      while (ti < toks.size() && toks[ti].kind == SexToken::Kind::Comment) ++ti;
      if (ti >= toks.size()) break;
      std::size_t start_byte = toks[ti].begin;
      DatumPtr d = ilp::detail::read_datum(body_text, toks, ti, doc.path);
      std::size_t end_byte = ti > 0 ? toks[ti - 1].end : start_byte;
      if (d->kind != Datum::Kind::List || d->items.empty() ||
          !d->items[0]->is_symbol("define-with-docs"))
        continue;
      SourceSpan span{doc.path, chunk.body_byte_start + start_byte,
                      chunk.body_byte_start + end_byte,
                      line_of(doc.raw_text, chunk.body_byte_start + start_byte)};
      try {
        doc.annotations.push_back(parse_annotation(d, span, &doc.parse_diags));
      } catch (const ParseError& e) {
        doc.parse_diags.push_back({Severity::Error, e.span(), e.what()});
      }
    }
  } catch (const ParseError& e) {
    doc.parse_diags.push_back({Severity::Error, e.span(),
                               std::string("unparseable scheme chunk: ") + e.what()});
  }
}

}  // namespace detail

inline Document parse_document(const std::string& path, const std::string& input) {
  Document doc;
  doc.path = path;
  // Newline normalization up front keeps every downstream byte offset stable.
  doc.raw_text.reserve(input.size());
  for (std::size_t i = 0; i < input.size(); ++i) {
    if (input[i] == '\r' && i + 1 < input.size() && input[i + 1] == '\n') continue;
    doc.raw_text += input[i];
  }
  const std::string& text = doc.raw_text;

  std::size_t pos = 0;
  std::size_t narrative_start = 0;
  std::size_t line = 1;
  std::size_t anon_counter = 0;

  auto flush_narrative = [&](std::size_t end) {
    if (end <= narrative_start) return;
    Narrative n;
    n.span = {path, narrative_start, end, detail::line_of(text, narrative_start)};
    n.markdown_text = text.substr(narrative_start, end - narrative_start);
    detail::scan_narrative(n, text, path);
    doc.blocks.push_back(std::move(n));
  };

  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    if (text.compare(pos, 3, "```") == 0) {
      flush_narrative(pos);
      std::size_t fence_line = detail::line_of(text, pos);
      auto info = detail::parse_info_string(text, pos + 3, eol, path, fence_line);
      std::size_t body_start = eol < text.size() ? eol + 1 : text.size();
      // Find the closing fence.
      std::size_t scan = body_start;
      std::size_t close_start = std::string::npos, close_end = 0;
      ++line;
      while (scan <= text.size()) {
        std::size_t leol = text.find('\n', scan);
        if (leol == std::string::npos) leol = text.size();
        std::string ln = text.substr(scan, leol - scan);
        std::string stripped = ln;
        while (!stripped.empty() && (stripped.back() == ' ' || stripped.back() == '\r'))
          stripped.pop_back();
        if (stripped == "```") {
          close_start = scan;
          close_end = leol < text.size() ? leol + 1 : text.size();
          break;
        }
        if (scan >= text.size()) break;
        scan = leol + 1;
        ++line;
      }
      if (close_start == std::string::npos)
        throw ParseError("unterminated fence", {path, pos, text.size(), fence_line});

      Chunk chunk;
      chunk.language = info.language;
      if (auto it = info.keys.find("file"); it != info.keys.end())
        chunk.file_target = it->second;
      if (auto it = info.keys.find("chunk"); it != info.keys.end()) {
        chunk.name = it->second;
        chunk.info_name_value_start = info.chunk_value_start;
        chunk.info_name_value_end = info.chunk_value_end;
      }
      chunk.is_doc = info.keys.count("doc") > 0;
      for (const auto& [k, v] : info.keys)
        if (k != "file" && k != "chunk" && k != "doc") chunk.attributes[k] = v;
      if (auto it = info.keys.find("tangle"); it != info.keys.end())
        chunk.attributes["tangle"] = it->second;
      chunk.span = {path, pos, close_end, fence_line};
      chunk.body_byte_start = body_start;
      chunk.body_byte_end = close_start > body_start ? close_start - 1 : body_start;
      if (!chunk.name) chunk.anon_index = ++anon_counter;
      // Split the body into lines. A body of just "\n" is one empty line.
      if (close_start > body_start) {
        std::size_t p = chunk.body_byte_start;
        while (p <= chunk.body_byte_end) {
          std::size_t le = text.find('\n', p);
          if (le == std::string::npos || le > chunk.body_byte_end)
            le = chunk.body_byte_end;
          chunk.body.push_back(text.substr(p, le - p));
          if (le >= chunk.body_byte_end) break;
          p = le + 1;
        }
      }
      doc.blocks.push_back(ChunkBlock{std::move(chunk)});
      pos = close_end;
      narrative_start = pos;
      ++line;
      continue;
    }
    pos = eol < text.size() ? eol + 1 : text.size();
    ++line;
  }
  flush_narrative(text.size());

  detail::assign_anchors(doc);
  detail::extract_step_specs(doc, path);
  for (auto& b : doc.blocks)
    if (auto* cb = std::get_if<ChunkBlock>(&b)) detail::extract_annotations(doc, cb->chunk);
  return doc;
}

}  // namespace ilp
