#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "ilp/project.hpp"

namespace ilp {

enum class EdgeKind { Inclusion, Declared, Textual };

inline const char* to_string(EdgeKind k) {
  switch (k) {
    case EdgeKind::Inclusion: return "inclusion";
    case EdgeKind::Declared: return "declared";
    case EdgeKind::Textual: return "textual";
  }
  return "?";
}

struct Edge {
  std::string from;
  std::string to;
  EdgeKind kind;
  SourceSpan span;

  auto key() const { return std::tie(from, to, kind); }
};

struct DependencyGraph {
  std::vector<std::string> nodes;   // insertion order = document order
  std::vector<Edge> edges;          // deduplicated, deterministic order
  std::map<std::string, std::size_t> node_rank;

  bool has_node(const std::string& n) const { return node_rank.count(n) > 0; }

  void add_node(const std::string& n) {
    if (node_rank.emplace(n, nodes.size()).second) nodes.push_back(n);
  }

  void add_edge(Edge e) {
    add_node(e.from);
    add_node(e.to);
    for (const auto& x : edges)
      if (x.key() == e.key()) return;
    edges.push_back(std::move(e));
  }

  std::map<std::string, std::vector<std::string>> adjacency(
      const std::set<EdgeKind>& kinds) const {
    std::map<std::string, std::vector<std::string>> adj;
    for (const auto& e : edges)
      if (kinds.count(e.kind)) adj[e.from].push_back(e.to);
    for (auto& [_, xs] : adj) {
      std::sort(xs.begin(), xs.end());
      xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    }
    return adj;
  }
};

inline const std::set<EdgeKind> kAllEdgeKinds = {
    EdgeKind::Inclusion, EdgeKind::Declared, EdgeKind::Textual};
inline const std::set<EdgeKind> kHardEdgeKinds = {EdgeKind::Inclusion,
                                                 EdgeKind::Declared};

namespace detail {

// Word-boundary occurrences of known names; boundaries are non-symbol chars.
inline std::vector<std::string> token_occurrences(const std::string& text,
                                                  const std::set<std::string>& names) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] == '"') {  // skip string literals
      ++i;
      while (i < text.size() && text[i] != '"') {
        if (text[i] == '\\') ++i;
        ++i;
      }
      ++i;
      continue;
    }
    if (is_link_char(text[i])) {
      std::size_t j = i;
      while (j < text.size() && is_link_char(text[j])) ++j;
      std::string tok = text.substr(i, j - i);
      if (names.count(tok)) out.push_back(tok);
      i = j;
      continue;
    }
    ++i;
  }
  return out;
}

}  // namespace detail

inline DependencyGraph build_graph(const DocumentSet& set) {
  DependencyGraph g;
  auto chunks = set.chunks();
  auto names = set.known_names();

  // Nodes in document order: named chunks, annotations, then file targets.
  for (const auto& doc : set.docs) {
    for (const auto& b : doc.blocks)
      if (const auto* cb = std::get_if<ChunkBlock>(&b))
        if (cb->chunk.name) g.add_node(*cb->chunk.name);
    for (const auto& ann : doc.annotations) g.add_node(ann.name);
  }
  for (const auto& doc : set.docs)
    for (const auto& b : doc.blocks)
      if (const auto* cb = std::get_if<ChunkBlock>(&b))
        if (cb->chunk.file_target) g.add_node(*cb->chunk.file_target);

  for (const auto& doc : set.docs) {
    for (const auto& b : doc.blocks) {
      const auto* cb = std::get_if<ChunkBlock>(&b);
      if (!cb) continue;
      const Chunk& c = cb->chunk;
      // A file target includes every chunk written into it.
      if (c.file_target && c.name)
        g.add_edge({*c.file_target, *c.name, EdgeKind::Inclusion, c.span});
      std::string body_text;
      for (const auto& line : c.body) {
        std::string ref;
        if (detail::parse_include_ref(line, nullptr, &ref)) {
          if (c.name) g.add_edge({*c.name, ref, EdgeKind::Inclusion, c.span});
          else if (c.file_target)
            g.add_edge({*c.file_target, ref, EdgeKind::Inclusion, c.span});
          continue;  // the reference itself is not a textual mention
        }
        body_text += line;
        body_text += '\n';
      }
      if (c.name) {
        for (const auto& tok : detail::token_occurrences(body_text, names))
          if (tok != *c.name) g.add_edge({*c.name, tok, EdgeKind::Textual, c.span});
      }
    }

    for (const auto& ann : doc.annotations) {
      for (const auto& dep : ann.depends)
        g.add_edge({ann.name, dep, EdgeKind::Declared, ann.span});
      if (ann.body) {
        auto mentions =
            detail::token_occurrences(print_datum(ann.body), names);
        for (const auto& tok : mentions)
          if (tok != ann.name) g.add_edge({ann.name, tok, EdgeKind::Textual, ann.span});
      }
    }

    for (const auto& spec : doc.step_specs) {
      g.add_node(spec.api_name);
      for (const auto& helper : spec.helper_refs)
        g.add_edge({spec.api_name, helper, EdgeKind::Declared, spec.span});
    }

    // Narrative code spans mention names; attribute them to the enclosing
    // step-spec section when there is one.
    for (const auto& b : doc.blocks) {
      const auto* n = std::get_if<Narrative>(&b);
      if (!n) continue;
      for (const auto& cs : n->code_spans) {
        const StepSpec* owner = nullptr;
        for (const auto& spec : doc.step_specs)
          if (cs.span.byte_start >= spec.span.byte_start &&
              cs.span.byte_end <= spec.span.byte_end)
            owner = &spec;
        if (!owner) continue;
        for (const auto& tok : detail::token_occurrences(cs.text, names))
          if (tok != owner->api_name)
            g.add_edge({owner->api_name, tok, EdgeKind::Textual, cs.span});
      }
    }
  }

  (void)chunks;
  return g;
}

/// Dependencies-first order over the restricted edge set; edge u->v places v
/// before u. Ties broken by document order then name.
inline std::vector<std::string> topological_order(const DependencyGraph& g,
                                                  const std::set<EdgeKind>& kinds) {
  auto adj = g.adjacency(kinds);
  std::map<std::string, int> state;  // 0 unvisited, 1 in progress, 2 done
  std::vector<std::string> order;
  std::vector<std::string> path;

  // Deterministic root order: document order, then lexicographic.
  std::vector<std::string> roots = g.nodes;
  std::stable_sort(roots.begin(), roots.end(),
                   [&](const std::string& a, const std::string& b) {
                     auto ra = g.node_rank.at(a), rb = g.node_rank.at(b);
                     if (ra != rb) return ra < rb;
                     return a < b;
                   });

  std::function<void(const std::string&)> visit = [&](const std::string& n) {
    int& s = state[n];
    if (s == 2) return;
    if (s == 1) {
      auto it = std::find(path.begin(), path.end(), n);
      std::vector<std::string> cycle(it, path.end());
      cycle.push_back(n);
      throw CycleError(cycle);
    }
    s = 1;
    path.push_back(n);
    auto it = adj.find(n);
    if (it != adj.end()) {
      std::vector<std::string> deps = it->second;
      std::stable_sort(deps.begin(), deps.end(),
                       [&](const std::string& a, const std::string& b) {
                         auto ra = g.node_rank.at(a), rb = g.node_rank.at(b);
                         if (ra != rb) return ra < rb;
                         return a < b;
                       });
      for (const auto& d : deps) visit(d);
    }
    path.pop_back();
    state[n] = 2;
    order.push_back(n);
  };

  for (const auto& n : roots) visit(n);
  return order;
}

/// Nodes reachable from target over the restricted edges, in breadth-first
/// layers; target excluded. Layers are ordered by document order then name.
inline std::vector<std::string> reachable(const DependencyGraph& g,
                                          const std::string& target,
                                          const std::set<EdgeKind>& kinds) {
  if (!g.has_node(target))
    throw std::invalid_argument("unknown graph node '" + target + "'");
  auto adj = g.adjacency(kinds);
  std::set<std::string> visited{target};
  std::vector<std::string> frontier{target};
  std::vector<std::string> out;
  while (!frontier.empty()) {
    std::vector<std::string> next;
    for (const auto& n : frontier) {
      auto it = adj.find(n);
      if (it == adj.end()) continue;
      for (const auto& m : it->second)
        if (visited.insert(m).second) next.push_back(m);
    }
    std::stable_sort(next.begin(), next.end(),
                     [&](const std::string& a, const std::string& b) {
                       auto ra = g.node_rank.at(a), rb = g.node_rank.at(b);
                       if (ra != rb) return ra < rb;
                       return a < b;
                     });
    for (const auto& n : next) out.push_back(n);
    frontier = std::move(next);
  }
  return out;
}

/// Graphviz DOT text: one digraph, quoted node ids, edge kind as attribute.
inline std::string to_dot(const DependencyGraph& g) {
  std::string out = "digraph ilp {\n";
  for (const auto& n : g.nodes) out += "  \"" + n + "\";\n";
  for (const auto& e : g.edges)
    out += "  \"" + e.from + "\" -> \"" + e.to + "\" [kind=" +
           to_string(e.kind) + "];\n";
  out += "}\n";
  return out;
}

}  // namespace ilp
