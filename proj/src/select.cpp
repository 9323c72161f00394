#include "splitlab/select.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>

#include "splitlab/error.hpp"

namespace splitlab {

EdgeSet edges_within(const VarSet& vars) { return Graph::complete(vars).edges(); }

namespace {

std::size_t graph_dimension(const TableSchema& schema, const Graph& g) {
  if (is_decomposable(g)) return decomposable_dimension(schema, g);
  return dimension(GeneratingClass::from_sets(schema, cliques(g)));
}

// Test of `small` within `big`, both graphs over the table's variables.
TestResult graph_test(const ContingencyTable& table, const Graph& big, const Graph& small, const FitOptions& fit,
                      std::string label = {}) {
  const auto& schema = table.schema();
  const int df = static_cast<int>(graph_dimension(schema, big) - graph_dimension(schema, small));
  if (table.total() == 0) return make_test(0.0, df, 0, std::move(label));
  const double dev = fit_graph(table, small, fit).deviance - fit_graph(table, big, fit).deviance;
  return make_test(std::max(0.0, dev), df, table.total(), std::move(label));
}

std::vector<VarSet> cliques_containing(const Graph& g, const Edge& e) {
  std::vector<VarSet> out;
  for (auto& c : cliques(g))
    if (c.count(e.first) && c.count(e.second)) out.push_back(std::move(c));
  return out;
}

bool is_fixed(const SelectionOptions& opts, const Edge& e) { return opts.fixed_edges.count(e) > 0; }

}  // namespace

TestResult edge_removal_test(const ContingencyTable& table, const Graph& g, const Edge& e,
                             const SelectionOptions& opts) {
  if (!g.has_edge(e)) throw ArgumentError("graph has no edge " + e.to_string());
  if (opts.decomposable_mode) {
    const auto holders = cliques_containing(g, e);
    if (holders.size() != 1)
      throw ArgumentError("removing " + e.to_string() + " would leave the graph non-decomposable");
    VarSet rest = holders.front();
    rest.erase(e.first);
    rest.erase(e.second);
    if (table.total() == 0) return make_test(0.0, 0, 0);
    return conditional_independence_test(table, e.first, e.second, rest);
  }
  return graph_test(table, g, g.without_edge(e), opts.fit);
}

EliminationResult backward_eliminate(const ContingencyTable& table, const Graph& g,
                                     const SelectionOptions& opts, const EdgeFilter& filter) {
  if (g.vertices() != table.schema().names())
    throw ArgumentError("graph vertices must match the table variables");
  EliminationResult out{g, {}};

  auto candidates = [&](const Graph& current) {
    std::vector<EdgeTest> tests;
    for (const auto& e : current.edges()) {
      if (is_fixed(opts, e)) continue;
      if (opts.decomposable_mode && cliques_containing(current, e).size() != 1) continue;
      if (filter && !filter(e)) continue;
      tests.push_back({e, edge_removal_test(table, current, e, opts)});
    }
    return tests;
  };

  if (opts.recursive) {
    while (true) {
      const auto tests = candidates(out.graph);
      const EdgeTest* best = nullptr;
      for (const auto& t : tests)
        if (!best || t.test.p_value > best->test.p_value) best = &t;
      if (!best || !(best->test.p_value > opts.p_accepted)) break;
      out.graph = out.graph.without_edge(best->edge);
      out.removed.push_back(*best);
    }
    return out;
  }

  auto tests = candidates(out.graph);
  std::stable_sort(tests.begin(), tests.end(),
                   [](const EdgeTest& a, const EdgeTest& b) { return a.test.p_value > b.test.p_value; });
  for (const auto& t : tests) {
    if (!(t.test.p_value > opts.p_accepted)) break;
    if (opts.decomposable_mode && cliques_containing(out.graph, t.edge).size() != 1) continue;
    out.graph = out.graph.without_edge(t.edge);
    out.removed.push_back(t);
  }
  return out;
}

void check_start(const Graph& g, const SelectionOptions& opts) {
  if (opts.decomposable_mode && !is_decomposable(g))
    throw ArgumentError("decomposable mode needs a decomposable starting graph");
  for (const auto& e : opts.fixed_edges)
    if (g.has_vertex(e.first) && g.has_vertex(e.second) && !g.has_edge(e))
      throw ArgumentError("fixed edge " + e.to_string() + " is missing from the starting graph");
}

Graph drop_least(const ContingencyTable& table, const Graph& g, const SelectionOptions& opts) {
  check_start(g, opts);
  return backward_eliminate(table, g, opts).graph;
}

std::vector<PartitionReport> split_test_edge(const ContingencyTable& table, const Graph& g, const Edge& e,
                                             PartitionMode mode, const FitOptions& fit) {
  const auto holders = cliques_containing(g, e);
  if (holders.empty()) throw ArgumentError("edge " + e.to_string() + " is not inside any clique of the graph");
  VarSet vars;
  for (const auto& c : holders) vars.insert(c.begin(), c.end());
  const Graph local = induced_subgraph(g, vars);
  const auto margin = marginalize(table, vars);
  const auto& schema = table.schema();
  VarSet others = vars;
  others.erase(e.first);
  others.erase(e.second);

  auto finish = [&](PartitionReport& r) {
    double dev = 0.0;
    int df = 0;
    for (const auto& row : r.rows) {
      dev += row.deviance;
      df += row.df;
    }
    r.total = make_test(dev, df, table.total(), "Total");
  };

  std::vector<PartitionReport> out;
  if (others.empty()) {
    PartitionReport r;
    r.rows.push_back(graph_test(margin, local, local.without_edge(e), fit, "()"));
    finish(r);
    out.push_back(std::move(r));
    return out;
  }
  if (mode == PartitionMode::Single) {
    for (const auto& v : others) {
      PartitionReport r;
      r.variable = v;
      const Graph sub = local.without_vertices({v});
      for (int l = 0; l < schema.levels(v); ++l) {
        const auto part = slice(margin, Context({{v, l}}));
        r.rows.push_back(graph_test(part, sub, sub.without_edge(e), fit, "(" + schema.label(v, l) + ")"));
      }
      finish(r);
      out.push_back(std::move(r));
    }
    return out;
  }

  PartitionReport r;
  for (const auto& v : others) r.variable += (r.variable.empty() ? "" : ",") + v;
  const Graph sub = local.without_vertices(others);
  const auto others_schema = schema.restrict_to(others);
  for (std::size_t k = 0; k < others_schema.cell_count(); ++k) {
    const auto cell = cell_at(others_schema, k);
    std::map<std::string, int> assignment;
    std::string label;
    for (std::size_t j = 0; j < cell.size(); ++j) {
      const auto& name = others_schema.variables()[j].name;
      assignment[name] = cell[j];
    }
    const Context ctx(assignment);
    for (const auto& [name, level] : assignment)
      label += (label.empty() ? "" : ",") + schema.label(name, level);
    r.rows.push_back(graph_test(slice(margin, ctx), sub, sub.without_edge(e), fit, "(" + label + ")"));
  }
  finish(r);
  out.push_back(std::move(r));
  return out;
}

namespace {

struct Candidate {
  SplitGraph root;
  double aic = 0.0;
};

class SplitSearch {
 public:
  SplitSearch(const ContingencyTable& table, const SelectionOptions& opts) : table_(table), opts_(opts) {}

  void run(SplitGraph& root, const SplitPath& path, std::vector<std::vector<VarSet>> atoms, int depth) {
    const auto& schema = table_.schema();
    for (const auto& atom : atoms) {
      std::optional<Candidate> best;
      for (const auto& s : split_variables(atom, node_at(root, path))) {
        auto trial = make_split(schema, root, path, atom, s);
        const std::size_t t = node_at(trial, path).trees.size() - 1;
        double total_aic = 0.0;
        bool removed_any = false;
        const int levels = schema.levels(s);
        for (int l = 0; l < levels; ++l) {
          SplitPath child_path = path;
          child_path.emplace_back(t, l);
          const auto child_table = node_table(table_, node_at(trial, child_path));
          const Graph start = node_at(trial, child_path).graph;
          auto filter = [&](const Edge& e) { return removal_meaningful(trial, child_path, e); };
          auto result = backward_eliminate(child_table, start, opts_, filter);
          if (!result.removed.empty()) {
            removed_any = true;
            total_aic += graph_test(child_table, start, result.graph, opts_.fit).aic;
            node_at(trial, child_path).graph = result.graph;
          }
        }
        if (removed_any && (!best || total_aic < best->aic)) best = Candidate{std::move(trial), total_aic};
      }
      if (!best) continue;
      root = std::move(best->root);
      if (depth <= 1) continue;
      const auto& node = node_at(root, path);
      const std::size_t t = node.trees.size() - 1;
      const auto levels = node.trees[t].children.size();
      for (std::size_t l = 0; l < levels; ++l) {
        SplitPath child_path = path;
        child_path.emplace_back(t, static_cast<int>(l));
        std::vector<std::vector<VarSet>> nested;
        for (auto& c : cliques(node_at(root, child_path).graph)) nested.push_back({std::move(c)});
        run(root, child_path, std::move(nested), depth - 1);
      }
    }
  }

 private:
  std::vector<std::string> split_variables(const std::vector<VarSet>& atom, const SplitGraph& node) const {
    std::vector<std::string> out;
    for (const auto& v : atom.front()) {
      if (opts_.excluded_split_vars.count(v) || node.context.assigns(v)) continue;
      if (std::all_of(atom.begin(), atom.end(), [&](const VarSet& c) { return c.count(v) > 0; }))
        out.push_back(v);
    }
    return out;
  }

  const ContingencyTable& table_;
  const SelectionOptions& opts_;
};

}  // namespace

SplitGraph split_drop_least(const ContingencyTable& table, const Graph& g, const SelectionOptions& opts) {
  if (g.vertices() != table.schema().names()) throw ArgumentError("graph vertices must match the table variables");
  const auto all = cliques(g);
  std::vector<std::vector<VarSet>> atoms;
  std::vector<VarSet> used;
  for (auto collection : opts.collections) {
    std::sort(collection.begin(), collection.end());
    collection.erase(std::unique(collection.begin(), collection.end()), collection.end());
    for (const auto& c : collection) {
      if (!std::binary_search(all.begin(), all.end(), c))
        throw ArgumentError("collection member " + format_sets({c}) + " is not a clique of the graph");
      if (std::find(used.begin(), used.end(), c) != used.end())
        throw ArgumentError("clique " + format_sets({c}) + " appears in two collections");
      used.push_back(c);
    }
    if (!collection.empty()) atoms.push_back(std::move(collection));
  }
  for (const auto& c : all)
    if (std::find(used.begin(), used.end(), c) == used.end()) atoms.push_back({c});
  std::sort(atoms.begin(), atoms.end());

  SplitGraph root = SplitGraph::plain(g);
  SplitSearch(table, opts).run(root, {}, std::move(atoms), std::max(1, opts.split_depth));
  return root;
}

namespace {

void summarize(const ContingencyTable& table, const TableSchema& schema, const SplitGraph& root,
               const SplitPath& path, const FitOptions& fit, std::vector<TreeSummary>& out) {
  const auto& node = node_at(root, path);
  for (std::size_t t = 0; t < node.trees.size(); ++t) {
    const auto& tree = node.trees[t];
    VarSet child_vars = tree.variables();
    child_vars.erase(tree.split_variable);
    const Graph original = induced_subgraph(node.graph, child_vars);
    TreeSummary ts;
    ts.path = path;
    ts.tree = t;
    ts.label = "ST" + format_path(root, path, schema) + " " + tree.split_variable + " [" +
               format_varset(tree.variables()) + "]";
    double dev = 0.0;
    int df = 0;
    for (const auto& child : tree.children) {
      const auto child_table = node_table(table, child);
      auto row = graph_test(child_table, original, child.graph, fit,
                            "G(" + child.context.to_string(schema) + "): " + format_graph(child.graph));
      dev += row.deviance;
      df += row.df;
      ts.rows.push_back(std::move(row));
    }
    ts.total = make_test(dev, df, node_table(table, node).total(), ts.label);
    out.push_back(std::move(ts));
    for (std::size_t l = 0; l < tree.children.size(); ++l) {
      SplitPath child_path = path;
      child_path.emplace_back(t, static_cast<int>(l));
      summarize(table, schema, root, child_path, fit, out);
    }
  }
}

}  // namespace

SplitSummary summary(const ContingencyTable& table, const SplitGraph& sg, const FitOptions& fit) {
  const auto& schema = table.schema();
  validate(schema, sg);
  SplitSummary out;
  const auto root_table = node_table(table, sg);
  out.root = graph_test(root_table, Graph::complete(sg.graph.vertices()), sg.graph, fit, format_graph(sg.graph));
  summarize(table, schema, sg, {}, fit, out.trees);
  double dev = out.root.deviance;
  int df = out.root.df;
  for (const auto& t : out.trees) {
    dev += t.total.deviance;
    df += t.total.df;
  }
  VarSet all = sg.graph.vertices();
  for (const auto& name : sg.context.domain()) all.insert(name);
  out.grand_total = make_test(dev, df, root_table.total(), "SG" + std::string("() [") + format_varset(all) + "]");
  return out;
}

}  // namespace splitlab
