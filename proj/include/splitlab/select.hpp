#pragma once

#include <functional>
#include <string>
#include <vector>

#include "splitlab/fit.hpp"
#include "splitlab/graph.hpp"
#include "splitlab/split.hpp"
#include "splitlab/table.hpp"

namespace splitlab {

struct SelectionOptions {
  double p_accepted = 0.05;
  /// Backward elimination runs to a fixed point; otherwise one sweep.
  bool recursive = true;
  /// Only edges whose removal keeps the graph decomposable are candidates.
  bool decomposable_mode = true;
  /// Edges never removed, in any context.
  EdgeSet fixed_edges;
  /// Variables never used as split variables.
  VarSet excluded_split_vars;
  /// Clique sets treated as one atom by the split search. Cliques outside
  /// every collection are atoms of their own.
  std::vector<std::vector<VarSet>> collections;
  /// Levels of splitting: 1 splits only the starting graph, 2 also splits
  /// the adopted context graphs, and so on.
  int split_depth = 1;
  FitOptions fit;
};

/// All pairs inside `vars` (what fixing "ABC" means).
EdgeSet edges_within(const VarSet& vars);

struct EdgeTest {
  Edge edge;
  TestResult test;
};

/// Test for removing `e` from `g` on `table`. In decomposable mode the
/// test runs in closed form on the marginal of the unique clique holding
/// `e`; otherwise the two graphical models are fitted on the full table.
TestResult edge_removal_test(const ContingencyTable& table, const Graph& g, const Edge& e,
                             const SelectionOptions& opts);

/// Extra removability condition (used for meaningfulness in context graphs).
using EdgeFilter = std::function<bool(const Edge&)>;

struct EliminationResult {
  Graph graph;
  std::vector<EdgeTest> removed;  ///< in removal order
};

/// Stepwise backward elimination. Ties in p-value go to the
/// lexicographically smallest edge.
EliminationResult backward_eliminate(const ContingencyTable& table, const Graph& g,
                                     const SelectionOptions& opts, const EdgeFilter& filter = {});

/// Throws ArgumentError when decomposable mode starts from a
/// non-decomposable graph or a fixed edge is missing.
void check_start(const Graph& g, const SelectionOptions& opts);

/// Backward elimination from `g` after check_start.
Graph drop_least(const ContingencyTable& table, const Graph& g, const SelectionOptions& opts);

struct PartitionReport {
  std::string variable;  ///< partitioning variable(s), e.g. "C" or "C,E"
  std::vector<TestResult> rows;
  TestResult total;
};

enum class PartitionMode { Single, Joint };

/// Partitions the test for removing `e` over the levels of the other
/// variables of the cliques that contain it.
std::vector<PartitionReport> split_test_edge(const ContingencyTable& table, const Graph& g, const Edge& e,
                                             PartitionMode mode, const FitOptions& fit = {});

/// Split-model search: per atom, try each legal split variable, run
/// backward elimination of context edges in every child on its slice, and
/// adopt the split with the smallest total AIC provided it removed at least
/// one context edge.
SplitGraph split_drop_least(const ContingencyTable& table, const Graph& g, const SelectionOptions& opts);

struct TreeSummary {
  SplitPath path;     ///< address of the split graph that owns the tree
  std::size_t tree = 0;
  std::string label;  ///< e.g. "ST() C [ABCDE]"
  std::vector<TestResult> rows;
  TestResult total;
};

struct SplitSummary {
  std::vector<TreeSummary> trees;  ///< depth-first
  TestResult root;                 ///< root graph against the saturated model
  TestResult grand_total;
};

/// Hierarchical deviance decomposition of a split model.
SplitSummary summary(const ContingencyTable& table, const SplitGraph& sg, const FitOptions& fit = {});

}  // namespace splitlab
