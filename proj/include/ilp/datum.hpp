#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "ilp/diag.hpp"

namespace ilp {

// S-expression values as used by the define-with-docs sub-language.
// Datums are immutable; sharing via shared_ptr keeps copies cheap.

struct Datum;
using DatumPtr = std::shared_ptr<const Datum>;

struct Datum {
  enum class Kind { Symbol, Number, Text, Boolean, List, Quoted, Keyword };

  Kind kind = Kind::List;
  std::string atom;            // symbol / number spelling / string value / keyword name
  bool truth = false;          // Boolean only
  std::vector<DatumPtr> items; // List elements; Quoted payload at items[0]

  static DatumPtr symbol(std::string s) {
    auto d = std::make_shared<Datum>();
    d->kind = Kind::Symbol;
    d->atom = std::move(s);
    return d;
  }
  static DatumPtr number(std::string s) {
    auto d = std::make_shared<Datum>();
    d->kind = Kind::Number;
    d->atom = std::move(s);
    return d;
  }
  static DatumPtr text(std::string s) {
    auto d = std::make_shared<Datum>();
    d->kind = Kind::Text;
    d->atom = std::move(s);
    return d;
  }
  static DatumPtr boolean(bool b) {
    auto d = std::make_shared<Datum>();
    d->kind = Kind::Boolean;
    d->truth = b;
    return d;
  }
  static DatumPtr keyword(std::string s) {
    auto d = std::make_shared<Datum>();
    d->kind = Kind::Keyword;
    d->atom = std::move(s);
    return d;
  }
  static DatumPtr list(std::vector<DatumPtr> xs) {
    auto d = std::make_shared<Datum>();
    d->kind = Kind::List;
    d->items = std::move(xs);
    return d;
  }
  static DatumPtr quoted(DatumPtr inner) {
    auto d = std::make_shared<Datum>();
    d->kind = Kind::Quoted;
    d->items.push_back(std::move(inner));
    return d;
  }

  bool is_symbol(const std::string& name) const {
    return kind == Kind::Symbol && atom == name;
  }
};

inline bool datum_equal(const Datum& a, const Datum& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Datum::Kind::Symbol:
    case Datum::Kind::Number:
    case Datum::Kind::Text:
    case Datum::Kind::Keyword:
      return a.atom == b.atom;
    case Datum::Kind::Boolean:
      return a.truth == b.truth;
    case Datum::Kind::List:
    case Datum::Kind::Quoted: {
      if (a.items.size() != b.items.size()) return false;
      for (std::size_t i = 0; i < a.items.size(); ++i)
        if (!datum_equal(*a.items[i], *b.items[i])) return false;
      return true;
    }
  }
  return false;
}

inline bool datum_equal(const DatumPtr& a, const DatumPtr& b) {
  if (!a || !b) return a == b;
  return datum_equal(*a, *b);
}

inline std::string print_datum(const Datum& d) {
  switch (d.kind) {
    case Datum::Kind::Symbol:
    case Datum::Kind::Number:
      return d.atom;
    case Datum::Kind::Keyword:
      return "#:" + d.atom;
    case Datum::Kind::Boolean:
      return d.truth ? "#t" : "#f";
    case Datum::Kind::Text: {
      std::string out = "\"";
      for (char c : d.atom) {
        if (c == '"' || c == '\\') out += '\\';
        if (c == '\n') {
          out += "\\n";
          continue;
        }
        out += c;
      }
      out += '"';
      return out;
    }
    case Datum::Kind::Quoted:
      return "'" + print_datum(*d.items[0]);
    case Datum::Kind::List: {
      std::string out = "(";
      for (std::size_t i = 0; i < d.items.size(); ++i) {
        if (i) out += ' ';
        out += print_datum(*d.items[i]);
      }
      out += ')';
      return out;
    }
  }
  return "";
}

inline std::string print_datum(const DatumPtr& d) { return print_datum(*d); }

// --- lexer -----------------------------------------------------------------

// Comment tokens are kept (with spans) so the obfuscator can rename inside
// comments; the reader skips them.
struct SexToken {
  enum class Kind { LParen, RParen, Quote, Atom, Text, Comment };
  Kind kind;
  std::size_t begin = 0;  // byte offsets into the lexed text
  std::size_t end = 0;
};

inline bool is_symbol_char(char c) {
  if (c >= 'a' && c <= 'z') return true;
  if (c >= 'A' && c <= 'Z') return true;
  if (c >= '0' && c <= '9') return true;
  switch (c) {
    case '_': case '?': case '!': case '+': case '*': case '/': case '<':
    case '>': case '=': case '-': case '.': case '%': case '&': case '~':
    case '^': case '$': case '@':
      return true;
    default:
      return false;
  }
}

inline std::vector<SexToken> lex_sex(const std::string& text, std::size_t pos = 0,
                                     const std::string& path = "<datum>") {
  std::vector<SexToken> out;
  const std::size_t n = text.size();
  std::size_t line = 1;
  while (pos < n) {
    char c = text[pos];
    if (c == '\n') {
      ++line;
      ++pos;
      continue;
    }
    if (c == ' ' || c == '\t' || c == '\r') {
      ++pos;
      continue;
    }
    if (c == ';') {
      std::size_t start = pos;
      while (pos < n && text[pos] != '\n') ++pos;
      out.push_back({SexToken::Kind::Comment, start, pos});
      continue;
    }
    if (c == '(') {
      out.push_back({SexToken::Kind::LParen, pos, pos + 1});
      ++pos;
      continue;
    }
    if (c == ')') {
      out.push_back({SexToken::Kind::RParen, pos, pos + 1});
      ++pos;
      continue;
    }
    if (c == '\'') {
      out.push_back({SexToken::Kind::Quote, pos, pos + 1});
      ++pos;
      continue;
    }
    if (c == '"') {
      std::size_t start = pos;
      ++pos;
      while (pos < n && text[pos] != '"') {
        if (text[pos] == '\\' && pos + 1 < n) ++pos;
        if (text[pos] == '\n') ++line;
        ++pos;
      }
      if (pos >= n)
        throw ParseError("unterminated text literal", {path, start, n, line});
      ++pos;  // closing quote
      out.push_back({SexToken::Kind::Text, start, pos});
      continue;
    }
    if (c == '#') {
      // #t, #f, or #:keyword
      std::size_t start = pos;
      ++pos;
      if (pos < n && text[pos] == ':') {
        ++pos;
        while (pos < n && is_symbol_char(text[pos]) && text[pos] != ':') ++pos;
      } else {
        while (pos < n && is_symbol_char(text[pos])) ++pos;
      }
      out.push_back({SexToken::Kind::Atom, start, pos});
      continue;
    }
    if (is_symbol_char(c)) {
      std::size_t start = pos;
      while (pos < n && is_symbol_char(text[pos])) ++pos;
      out.push_back({SexToken::Kind::Atom, start, pos});
      continue;
    }
    throw ParseError(std::string("unexpected character '") + c + "' in datum",
                     {path, pos, pos + 1, line});
  }
  return out;
}

namespace detail {

inline bool looks_like_number(const std::string& s) {
  std::size_t i = 0;
  if (i < s.size() && (s[i] == '+' || s[i] == '-')) ++i;
  if (i >= s.size()) return false;
  bool digits = false, dot = false;
  for (; i < s.size(); ++i) {
    if (s[i] >= '0' && s[i] <= '9') {
      digits = true;
    } else if (s[i] == '.' && !dot) {
      dot = true;
    } else {
      return false;
    }
  }
  return digits;
}

inline DatumPtr atom_to_datum(const std::string& text, const SexToken& tok,
                              const std::string& path) {
  std::string s = text.substr(tok.begin, tok.end - tok.begin);
  if (s == "#t" || s == "#true") return Datum::boolean(true);
  if (s == "#f" || s == "#false") return Datum::boolean(false);
  if (s.size() >= 2 && s[0] == '#' && s[1] == ':') return Datum::keyword(s.substr(2));
  if (s[0] == '#')
    throw ParseError("unsupported # syntax '" + s + "'", {path, tok.begin, tok.end, 1});
  if (looks_like_number(s)) return Datum::number(s);
  return Datum::symbol(s);
}

inline DatumPtr unescape_text(const std::string& text, const SexToken& tok) {
  std::string out;
  for (std::size_t i = tok.begin + 1; i + 1 < tok.end; ++i) {
    char c = text[i];
    if (c == '\\' && i + 2 < tok.end) {
      char nxt = text[i + 1];
      if (nxt == 'n') {
        out += '\n';
        ++i;
        continue;
      }
      if (nxt == 't') {
        out += '\t';
        ++i;
        continue;
      }
      if (nxt == '"' || nxt == '\\') {
        out += nxt;
        ++i;
        continue;
      }
    }
    out += c;
  }
  return Datum::text(out);
}

inline DatumPtr read_datum(const std::string& text, const std::vector<SexToken>& toks,
                           std::size_t& ti, const std::string& path) {
  while (ti < toks.size() && toks[ti].kind == SexToken::Kind::Comment) ++ti;
  if (ti >= toks.size())
    throw ParseError("expected datum, found end of input", {path, text.size(), text.size(), 1});
  const SexToken& tok = toks[ti];
  switch (tok.kind) {
    case SexToken::Kind::Quote: {
      ++ti;
      return Datum::quoted(read_datum(text, toks, ti, path));
    }
    case SexToken::Kind::Atom:
      ++ti;
      return atom_to_datum(text, tok, path);
    case SexToken::Kind::Text:
      ++ti;
      return unescape_text(text, tok);
    case SexToken::Kind::LParen: {
      ++ti;
      std::vector<DatumPtr> items;
      for (;;) {
        while (ti < toks.size() && toks[ti].kind == SexToken::Kind::Comment) ++ti;
        if (ti >= toks.size())
          throw ParseError("unbalanced parenthesis", {path, tok.begin, text.size(), 1});
        if (toks[ti].kind == SexToken::Kind::RParen) {
          ++ti;
          return Datum::list(std::move(items));
        }
        items.push_back(read_datum(text, toks, ti, path));
      }
    }
    case SexToken::Kind::RParen:
      throw ParseError("unbalanced parenthesis", {path, tok.begin, tok.end, 1});
    case SexToken::Kind::Comment:
      break;  // unreachable, skipped above
  }
  throw ParseError("malformed datum", {path, tok.begin, tok.end, 1});
}

}  // namespace detail

struct ParsedDatum {
  DatumPtr value;
  std::size_t next = 0;  // byte offset just past the datum
};

/// Longest valid datum from the front of `text` starting at `pos`.
inline ParsedDatum parse_datum(const std::string& text, std::size_t pos = 0,
                               const std::string& path = "<datum>") {
  auto toks = lex_sex(text, pos, path);
  std::size_t ti = 0;
  DatumPtr d = detail::read_datum(text, toks, ti, path);
  std::size_t next = ti > 0 ? toks[ti - 1].end : pos;
  return {d, next};
}

/// All top-level datums in `text`; comments skipped.
inline std::vector<DatumPtr> parse_all_datums(const std::string& text,
                                              const std::string& path = "<datum>") {
  auto toks = lex_sex(text, 0, path);
  std::vector<DatumPtr> out;
  std::size_t ti = 0;
  for (;;) {
    while (ti < toks.size() && toks[ti].kind == SexToken::Kind::Comment) ++ti;
    if (ti >= toks.size()) break;
    out.push_back(detail::read_datum(text, toks, ti, path));
  }
  return out;
}

}  // namespace ilp
