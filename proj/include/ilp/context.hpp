#pragma once

#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "ilp/graph.hpp"
#include "ilp/project.hpp"

namespace ilp {

enum class SegmentRole { TargetAnnotation, StepSpec, HardDep, SoftDep, Narrative };

inline const char* to_string(SegmentRole r) {
  switch (r) {
    case SegmentRole::TargetAnnotation: return "target-annotation";
    case SegmentRole::StepSpec: return "step-spec";
    case SegmentRole::HardDep: return "hard-dep";
    case SegmentRole::SoftDep: return "soft-dep";
    case SegmentRole::Narrative: return "narrative";
  }
  return "?";
}

struct Segment {
  SegmentRole role;
  std::string name;
  std::string text;
  std::size_t cost = 0;  // ceil(chars / 4), a tokenizer-free estimate
};

struct ContextBundle {
  std::string target;
  std::vector<Segment> segments;  // dependencies precede dependents
  std::size_t budget = 0;
  std::string rendered;           // segments joined, ready for templating
};

namespace detail {

inline std::size_t segment_cost(const std::string& text) {
  return (text.size() + 3) / 4;
}

inline std::string slice(const Document& doc, const SourceSpan& span) {
  return doc.raw_text.substr(span.byte_start, span.byte_end - span.byte_start);
}

constexpr int kSoftDepDepthCap = 8;

}  // namespace detail

inline ContextBundle pack_context(const DocumentSet& set, const DependencyGraph& graph,
                                  const std::string& target, std::size_t budget) {
  auto annotations = set.annotations();
  auto specs = set.step_specs();
  auto chunks = set.chunks();
  if (!annotations.count(target) && !chunks.count(target))
    throw std::invalid_argument("unknown context target '" + target + "'");

  auto annotation_text = [&](const std::string& name) -> std::string {
    auto it = annotations.find(name);
    if (it == annotations.end()) return "";
    const Document* doc = set.find(it->second->span.document_path);
    return doc ? detail::slice(*doc, it->second->span) : "";
  };

  // Candidates in admission priority order; final placement reorders so that
  // dependencies come before the target.
  struct Candidate {
    Segment seg;
    int order;  // final position group
  };
  std::vector<Candidate> candidates;

  if (annotations.count(target)) {
    candidates.push_back(
        {{SegmentRole::TargetAnnotation, target, annotation_text(target), 0}, 3});
  }
  if (auto it = specs.find(target); it != specs.end()) {
    const Document* doc = set.find(it->second->span.document_path);
    if (doc)
      candidates.push_back(
          {{SegmentRole::StepSpec, target, detail::slice(*doc, it->second->span), 0}, 4});
  }

  std::set<std::string> included_names{target};
  if (graph.has_node(target)) {
    // Hard deps: declared + inclusion edges, dependencies first.
    auto hard = reachable(graph, target, kHardEdgeKinds);
    std::vector<std::string> ordered(hard.rbegin(), hard.rend());
    std::set<std::string> keep(hard.begin(), hard.end());
    try {
      std::vector<std::string> topo;
      for (const auto& n : topological_order(graph, kHardEdgeKinds))
        if (keep.count(n)) topo.push_back(n);
      ordered = topo;
    } catch (const CycleError&) {
    }
    for (const auto& name : ordered) {
      if (!included_names.insert(name).second) continue;
      std::string text = annotation_text(name);
      if (text.empty()) {
        // Unannotated dependency: fall back to its first chunk, fence and all.
        auto ct = chunks.find(name);
        if (ct != chunks.end() && !ct->second.empty()) {
          const Document* doc = set.find(ct->second.front().span.document_path);
          if (doc) text = detail::slice(*doc, ct->second.front().span);
        }
      }
      if (text.empty()) continue;
      candidates.push_back({{SegmentRole::HardDep, name, text, 0}, 1});
    }
    // Soft deps: textual edges, breadth-first, bounded depth.
    std::set<std::string> visited{target};
    for (const auto& n : included_names) visited.insert(n);
    auto adj = graph.adjacency({EdgeKind::Textual});
    std::vector<std::string> frontier{target};
    for (int depth = 0; depth < detail::kSoftDepDepthCap && !frontier.empty(); ++depth) {
      std::vector<std::string> next;
      for (const auto& n : frontier) {
        auto it = adj.find(n);
        if (it == adj.end()) continue;
        for (const auto& m : it->second)
          if (visited.insert(m).second) next.push_back(m);
      }
      for (const auto& name : next) {
        std::string text = annotation_text(name);
        if (!text.empty()) candidates.push_back({{SegmentRole::SoftDep, name, text, 0}, 2});
      }
      frontier = std::move(next);
    }
  }

  // Enclosing narrative section of the target's definition site.
  {
    const SourceSpan* site = nullptr;
    if (auto it = annotations.find(target); it != annotations.end())
      site = &it->second->span;
    else if (auto ct = chunks.find(target); ct != chunks.end() && !ct->second.empty())
      site = &ct->second.front().span;
    if (site) {
      const Document* doc = set.find(site->document_path);
      if (doc) {
        const Narrative* best = nullptr;  // nearest narrative preceding the site
        for (const auto& b : doc->blocks)
          if (const auto* n = std::get_if<Narrative>(&b))
            if (n->span.byte_start <= site->byte_start) best = n;
        if (best && !detail::trim_copy(best->markdown_text).empty())
          candidates.push_back(
              {{SegmentRole::Narrative, target, best->markdown_text, 0}, 5});
      }
    }
  }

  // Whole-segment admission in priority order: target annotation, step spec,
  // hard deps, soft deps, narrative.
  ContextBundle bundle;
  bundle.target = target;
  bundle.budget = budget;
  std::vector<int> admission{3, 4, 1, 2, 5};
  std::size_t used = 0;
  std::vector<Candidate> admitted;
  for (int group : admission) {
    for (auto& c : candidates) {
      if (c.order != group) continue;
      c.seg.cost = detail::segment_cost(c.seg.text);
      if (used + c.seg.cost > budget) continue;  // dropped whole, never truncated
      used += c.seg.cost;
      admitted.push_back(c);
    }
  }
  std::stable_sort(admitted.begin(), admitted.end(),
                   [](const Candidate& a, const Candidate& b) { return a.order < b.order; });
  for (auto& c : admitted) bundle.segments.push_back(std::move(c.seg));
  for (const auto& s : bundle.segments) {
    bundle.rendered += s.text;
    if (!s.text.empty() && s.text.back() != '\n') bundle.rendered += '\n';
    bundle.rendered += '\n';
  }
  return bundle;
}

// --- prompt templates -------------------------------------------------------

inline const char* kStepwiseTemplate =
    "Implement the requested API using the zero-step/succ-step approach: start\n"
    "from the base case, then apply the transition that builds each next state.\n"
    "\n"
    "{segments}\n"
    "Write the function {target} in {language} using the zero-step/succ-step "
    "approach described above.\n";

inline const char* kFullyBasedTemplate =
    "{segments}\n"
    "Fully based on the file, generate a function in {language} for {target} "
    "API mentioned in the document?\n";

inline std::string render_template(const std::string& tmpl, const ContextBundle& bundle,
                                   const std::string& language) {
  std::string out;
  std::size_t pos = 0;
  while (pos < tmpl.size()) {
    std::size_t open = tmpl.find('{', pos);
    if (open == std::string::npos) {
      out += tmpl.substr(pos);
      break;
    }
    out += tmpl.substr(pos, open - pos);
    std::size_t close = tmpl.find('}', open);
    if (close == std::string::npos)
      throw std::runtime_error("unterminated placeholder in template");
    std::string key = tmpl.substr(open + 1, close - open - 1);
    if (key == "target") {
      out += bundle.target;
    } else if (key == "language") {
      out += language;
    } else if (key == "segments") {
      out += bundle.rendered;
    } else {
      throw std::runtime_error("unknown placeholder {" + key + "} in template");
    }
    pos = close + 1;
  }
  return out;
}

inline std::string render_prompt(const ContextBundle& bundle, const std::string& tmpl_name,
                                 const std::string& language,
                                 const std::string& user_template = "") {
  if (!user_template.empty()) return render_template(user_template, bundle, language);
  if (tmpl_name == "stepwise") return render_template(kStepwiseTemplate, bundle, language);
  if (tmpl_name == "fully-based")
    return render_template(kFullyBasedTemplate, bundle, language);
  throw std::runtime_error("unknown template '" + tmpl_name + "'");
}

// --- obfuscation ------------------------------------------------------------

struct RenameMapping {
  std::map<std::string, std::string> pairs;  // original -> replacement
  std::uint64_t seed = 0;

  RenameMapping inverse() const {
    RenameMapping inv;
    inv.seed = seed;
    for (const auto& [k, v] : pairs) inv.pairs[v] = k;
    return inv;
  }

  std::string serialize() const {
    std::string out = "# seed: " + std::to_string(seed) + "\n";
    for (const auto& [k, v] : pairs) out += k + "\t" + v + "\n";
    return out;
  }

  static RenameMapping deserialize(const std::string& text) {
    RenameMapping m;
    std::size_t pos = 0;
    while (pos < text.size()) {
      std::size_t eol = text.find('\n', pos);
      if (eol == std::string::npos) eol = text.size();
      std::string line = text.substr(pos, eol - pos);
      pos = eol + 1;
      if (line.empty()) continue;
      if (line.rfind("# seed: ", 0) == 0) {
        m.seed = std::stoull(line.substr(8));
        continue;
      }
      std::size_t tab = line.find('\t');
      if (tab == std::string::npos) continue;
      m.pairs[line.substr(0, tab)] = line.substr(tab + 1);
    }
    return m;
  }
};

namespace detail {

/// Rename symbol tokens in `text` within [begin,end); string literals are
/// skipped; `<<name>>` inclusion references rename their inner name.
inline void rename_region(std::string& text, std::size_t begin, std::size_t end,
                          const std::map<std::string, std::string>& pairs) {
  std::string out;
  std::size_t i = begin;
  out.reserve(end - begin);
  while (i < end) {
    char c = text[i];
    if (c == '"') {
      std::size_t j = i + 1;
      while (j < end && text[j] != '"') {
        if (text[j] == '\\' && j + 1 < end) ++j;
        ++j;
      }
      if (j < end) ++j;
      out += text.substr(i, j - i);
      i = j;
      continue;
    }
    if (is_link_char(c)) {
      std::size_t j = i;
      while (j < end && is_link_char(text[j])) ++j;
      std::string tok = text.substr(i, j - i);
      // <<name>> reference tokens lex as one run including the angle brackets.
      if (tok.size() > 4 && tok.rfind("<<", 0) == 0 &&
          tok.compare(tok.size() - 2, 2, ">>") == 0) {
        std::string inner = tok.substr(2, tok.size() - 4);
        auto it = pairs.find(inner);
        out += it != pairs.end() ? "<<" + it->second + ">>" : tok;
      } else {
        auto it = pairs.find(tok);
        out += it != pairs.end() ? it->second : tok;
      }
      i = j;
      continue;
    }
    out += c;
    ++i;
  }
  text.replace(begin, end - begin, out);
}

/// Apply a mapping to one document's text, returning the rewritten text.
inline std::string apply_mapping(const Document& doc,
                                 const std::map<std::string, std::string>& pairs) {
  struct Region {
    std::size_t begin, end;
  };
  std::vector<Region> regions;
  for (const auto& b : doc.blocks) {
    if (const auto* cb = std::get_if<ChunkBlock>(&b)) {
      const Chunk& c = cb->chunk;
      if (c.body_byte_end > c.body_byte_start)
        regions.push_back({c.body_byte_start, c.body_byte_end});
      if (c.info_name_value_end > c.info_name_value_start)
        regions.push_back({c.info_name_value_start, c.info_name_value_end});
      continue;
    }
    const Narrative& n = std::get<Narrative>(b);
    for (const auto& link : n.links)
      regions.push_back({link.span.byte_start + 2, link.span.byte_end - 2});
    for (const auto& cs : n.code_spans)
      regions.push_back({cs.span.byte_start + 1, cs.span.byte_end - 1});
    // `## name` headings whose title is exactly a mapped name.
    for (const auto& h : n.headings) {
      auto it = pairs.find(h.title);
      if (it == pairs.end()) continue;
      std::size_t title_start = h.byte_start + static_cast<std::size_t>(h.level) + 1;
      regions.push_back({title_start, title_start + h.title.size()});
    }
  }
  std::sort(regions.begin(), regions.end(),
            [](const Region& a, const Region& b) { return a.begin > b.begin; });
  std::string text = doc.raw_text;
  for (const auto& r : regions) rename_region(text, r.begin, r.end, pairs);
  return text;
}

inline bool token_occurs(const std::string& text, const std::string& name) {
  std::size_t pos = 0;
  while ((pos = text.find(name, pos)) != std::string::npos) {
    bool left_ok = pos == 0 || !is_link_char(text[pos - 1]);
    std::size_t after = pos + name.size();
    bool right_ok = after >= text.size() || !is_link_char(text[after]);
    if (left_ok && right_ok) return true;
    ++pos;
  }
  return false;
}

}  // namespace detail

struct ObfuscateResult {
  DocumentSet documents;
  RenameMapping mapping;
};

/// Apply an explicit mapping (used both forward and for the inverse).
inline DocumentSet apply_rename(const DocumentSet& set, const RenameMapping& mapping) {
  DocumentSet out;
  for (const auto& doc : set.docs)
    out.docs.push_back(parse_document(doc.path, detail::apply_mapping(doc, mapping.pairs)));
  return out;
}

/// Generate a fresh pseudo-name per listed name (deterministic from seed) and
/// rename every symbol-token occurrence. Applying the inverse mapping restores
/// the original documents byte-exactly.
inline ObfuscateResult obfuscate(const DocumentSet& set,
                                 const std::vector<std::string>& names,
                                 std::uint64_t seed) {
  // "Defined in the project" covers parameters and locals too, so accept any
  // name that occurs as a symbol token somewhere in the document set.
  auto known = set.known_names();
  for (const auto& n : names) {
    bool defined = known.count(n) > 0;
    for (const auto& doc : set.docs)
      if (!defined && detail::token_occurs(doc.raw_text, n)) defined = true;
    if (!defined)
      throw std::invalid_argument("cannot rename '" + n + "': not defined in project");
  }

  std::mt19937_64 rng(seed);
  RenameMapping mapping;
  mapping.seed = seed;
  std::set<std::string> images;
  for (const auto& name : names) {
    std::string candidate;
    bool ok = false;
    for (int attempt = 0; attempt < 1000 && !ok; ++attempt) {
      std::size_t len = 6 + rng() % 5;
      candidate.clear();
      for (std::size_t i = 0; i < len; ++i) {
        // occasional hyphen, never at the edges, mimicking scheme-ish names
        if (i > 0 && i + 1 < len && candidate.back() != '-' && rng() % 8 == 0)
          candidate += '-';
        else
          candidate += static_cast<char>('a' + rng() % 26);
      }
      ok = !known.count(candidate) && !images.count(candidate);
      for (const auto& doc : set.docs)
        if (ok && detail::token_occurs(doc.raw_text, candidate)) ok = false;
    }
    if (!ok) throw std::runtime_error("could not generate a collision-free name");
    images.insert(candidate);
    mapping.pairs[name] = candidate;
  }
  return {apply_rename(set, mapping), mapping};
}

/// Token-level rename of arbitrary text (e.g. tangled output), same token rules.
inline std::string rename_text(const std::string& text, const RenameMapping& mapping) {
  std::string out = text;
  detail::rename_region(out, 0, out.size(), mapping.pairs);
  return out;
}

}  // namespace ilp
