#pragma once

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "splitlab/csi.hpp"
#include "splitlab/fit.hpp"
#include "splitlab/graph.hpp"
#include "splitlab/table.hpp"

namespace splitlab {

struct SplitTree;

/// Recursive (context, graph, trees) triple. With no trees it is a context
/// graph; with an empty context as well it is a plain graph.
struct SplitGraph {
  Context context;
  Graph graph;
  std::vector<SplitTree> trees;

  /// Cliques of `graph` replaced by some tree.
  std::vector<VarSet> consumed_cliques() const;
  /// Cliques of `graph` that still generate the model directly.
  std::vector<VarSet> free_cliques() const;

  static SplitGraph plain(Graph g) { return SplitGraph{Context(), std::move(g), {}}; }
};

/// One child split graph per level of the split variable.
struct SplitTree {
  std::string split_variable;
  std::vector<VarSet> collection;  ///< cliques of the parent graph, sorted
  std::vector<SplitGraph> children;

  VarSet variables() const;  ///< union of the collection
};

bool operator==(const SplitGraph& a, const SplitGraph& b);
bool operator==(const SplitTree& a, const SplitTree& b);

/// Address of a nested split graph: (tree index, level) steps from the root.
using SplitPath = std::vector<std::pair<std::size_t, int>>;

const SplitGraph& node_at(const SplitGraph& root, const SplitPath& path);
SplitGraph& node_at(SplitGraph& root, const SplitPath& path);
/// "(C=2, B=1)"; the empty path prints as "()".
std::string format_path(const SplitGraph& root, const SplitPath& path, const TableSchema& schema);

/// Splits `collection` (cliques of the addressed graph) by `s`. Every
/// child graph is the subgraph induced by the collection's variables minus
/// `s`, so the model is unchanged.
/// Throws IllegalSplit when `s` is missing from some clique, SplitConflict
/// when a clique is already consumed, ArgumentError for anything else.
SplitGraph make_split(const TableSchema& schema, const SplitGraph& root, const SplitPath& path,
                      std::vector<VarSet> collection, const std::string& s);
inline SplitGraph make_split(const TableSchema& schema, const SplitGraph& sg,
                             std::vector<VarSet> collection, const std::string& s) {
  return make_split(schema, sg, {}, std::move(collection), s);
}

/// Generators of the structure outside the subtree at `path`.
std::vector<Generator> generators_outside(const SplitGraph& root, const SplitPath& path);

/// Whether removing `e` from the graph at `path` entails a context specific
/// independence: no generator elsewhere covers both endpoints under a
/// context compatible with the addressed one.
bool removal_meaningful(const SplitGraph& root, const SplitPath& path, const Edge& e);

/// Removes context edge `e` from the split graph at a nonempty `path`.
/// Throws MeaninglessSplit or ArgumentError.
SplitGraph remove_context_edge(const TableSchema& schema, const SplitGraph& root, const SplitPath& path,
                               const Edge& e);

/// Generating class of the split model (reduced unless `reduced` is false).
GeneratingClass generating_class(const TableSchema& schema, const SplitGraph& sg, bool reduced = true);

/// Checks every structural invariant; throws ArgumentError.
void validate(const TableSchema& schema, const SplitGraph& sg);

/// Table governing the split graph at `path`: the marginal over its
/// vertices and context variables, sliced at its context.
ContingencyTable node_table(const ContingencyTable& table, const SplitGraph& node);

/// Per-context tests of `after` against `before`, where `after` differs
/// only by context-edge removals inside one tree. Empty when equal.
std::vector<TestResult> decompose_test(const ContingencyTable& table, const SplitGraph& before,
                                       const SplitGraph& after);

/// Leaf context graphs in depth-first order, mirroring a "return model"
/// listing: (context, cliques).
struct ContextModel {
  Context context;
  std::string split_variable;
  std::vector<VarSet> cliques;
};
std::vector<ContextModel> context_models(const SplitGraph& sg);

/// Multi-line text: one "C=1: [ABE][DE]" line per context graph, followed
/// by "residual: [..]" when the root graph keeps free cliques.
std::string format_split_graph(const TableSchema& schema, const SplitGraph& sg);

/// JSON split-model document carrying the schema and the recursive structure.
std::string serialize_split_model(const TableSchema& schema, const SplitGraph& sg);
struct SplitModel {
  TableSchema schema;
  SplitGraph root;
};
/// Throws ParseError (syntax) or ArgumentError (structure).
SplitModel parse_split_model(std::string_view document);

}  // namespace splitlab
