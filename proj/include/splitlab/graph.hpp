#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "splitlab/table.hpp"

namespace splitlab {

/// Unordered vertex pair, stored with first < second.
struct Edge {
  std::string first;
  std::string second;

  Edge() = default;
  Edge(std::string a, std::string b);

  bool touches(std::string_view v) const { return first == v || second == v; }
  /// "BD" for single-character names, "B-D" otherwise.
  std::string to_string() const;
  /// Accepts "BD", "B-D" or "B,D".
  static Edge parse(std::string_view text);

  auto operator<=>(const Edge&) const = default;
};

using EdgeSet = std::set<Edge>;

/// Undirected simple graph over named vertices. Immutable value; edits
/// return new graphs.
class Graph {
 public:
  Graph() = default;
  Graph(VarSet vertices, EdgeSet edges);

  static Graph complete(const VarSet& vertices);
  static Graph empty(const VarSet& vertices) { return Graph(vertices, {}); }
  /// Graph on the union of `sets` (plus `extra`) making each set complete.
  static Graph generated_by(const std::vector<VarSet>& sets, const VarSet& extra = {});

  const VarSet& vertices() const { return vertices_; }
  const EdgeSet& edges() const { return edges_; }
  bool has_vertex(std::string_view v) const { return vertices_.count(std::string(v)) > 0; }
  bool has_edge(const Edge& e) const { return edges_.count(e) > 0; }
  bool adjacent(const std::string& a, const std::string& b) const;
  VarSet neighbours(const std::string& v) const;

  Graph without_edge(const Edge& e) const;
  Graph with_edge(const Edge& e) const;
  Graph without_vertices(const VarSet& drop) const;

  bool operator==(const Graph&) const = default;

 private:
  VarSet vertices_;
  EdgeSet edges_;
};

/// Maximal complete subsets, each sorted, listed in lexicographic order.
std::vector<VarSet> cliques(const Graph& g);

/// True iff every path from `a` to `b` meets `s`. Sets must be pairwise
/// disjoint vertex subsets with `a`, `b` nonempty (ArgumentError otherwise).
bool separates(const Graph& g, const VarSet& s, const VarSet& a, const VarSet& b);

/// Maximum cardinality search visiting order (ties broken by name).
std::vector<std::string> maximum_cardinality_order(const Graph& g);

/// Chordality via maximum cardinality search and a perfect elimination check.
bool is_decomposable(const Graph& g);

/// Cliques of a decomposable graph in an order with the running
/// intersection property, with separators (separators[0] is empty).
struct CliqueChain {
  std::vector<VarSet> cliques;
  std::vector<VarSet> separators;
};
/// Throws ArgumentError when `g` is not decomposable.
CliqueChain clique_chain(const Graph& g);

/// Throws ArgumentError when `u` is not a subset of the vertices.
Graph induced_subgraph(const Graph& g, const VarSet& u);

/// Whether removing `e` leaves a decomposable graph; ArgumentError when
/// `e` is not an edge.
bool drop_edge_decomposable(const Graph& g, const Edge& e);

/// "[ABD][ACD]"; names longer than one character are space separated
/// inside the brackets.
std::string format_sets(const std::vector<VarSet>& sets);
std::string format_graph(const Graph& g);
std::string format_varset(const VarSet& s);

/// Parses "[ABD][ACD]" (or "[A B D][...]") into the generated graph. An
/// optional outer pair of brackets "[[..][..]]" is accepted.
Graph parse_graph(std::string_view text);
/// Parses a bracket list into vertex sets without building a graph.
std::vector<VarSet> parse_sets(std::string_view text);
/// Splits a variable-list token ("ABD" or "A B D") into names.
VarSet parse_varset(std::string_view text);

/// Graphviz DOT document; `label` goes in the graph label if nonempty.
std::string to_dot(const Graph& g, const std::string& name, const std::string& label = "");

}  // namespace splitlab
