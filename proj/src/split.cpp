#include "splitlab/split.hpp"

#include <algorithm>
#include <map>

#include "json.hpp"
#include "splitlab/error.hpp"

namespace splitlab {

using nlohmann::json;

std::vector<VarSet> SplitGraph::consumed_cliques() const {
  std::vector<VarSet> out;
  for (const auto& t : trees) out.insert(out.end(), t.collection.begin(), t.collection.end());
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<VarSet> SplitGraph::free_cliques() const {
  const auto used = consumed_cliques();
  std::vector<VarSet> out;
  for (auto& c : cliques(graph))
    if (!std::binary_search(used.begin(), used.end(), c)) out.push_back(std::move(c));
  return out;
}

VarSet SplitTree::variables() const {
  VarSet out;
  for (const auto& c : collection) out.insert(c.begin(), c.end());
  return out;
}

bool operator==(const SplitTree& a, const SplitTree& b) {
  return a.split_variable == b.split_variable && a.collection == b.collection && a.children == b.children;
}

bool operator==(const SplitGraph& a, const SplitGraph& b) {
  return a.context == b.context && a.graph == b.graph && a.trees == b.trees;
}

namespace {

SplitGraph& node_mut(SplitGraph& root, const SplitPath& path) {
  SplitGraph* node = &root;
  for (const auto& [tree, level] : path) {
    if (tree >= node->trees.size()) throw ArgumentError("split path names a missing tree");
    auto& children = node->trees[tree].children;
    if (level < 0 || static_cast<std::size_t>(level) >= children.size())
      throw ArgumentError("split path names a missing level");
    node = &children[static_cast<std::size_t>(level)];
  }
  return *node;
}

void collect(const SplitGraph& sg, std::vector<Generator>& out, const SplitGraph* skip) {
  if (&sg == skip) return;
  for (const auto& c : sg.free_cliques()) out.push_back({c, sg.context});
  for (const auto& t : sg.trees)
    for (const auto& child : t.children) collect(child, out, skip);
}

std::size_t graph_dimension(const TableSchema& schema, const Graph& g) {
  if (is_decomposable(g)) return decomposable_dimension(schema, g);
  return dimension(GeneratingClass::from_sets(schema, cliques(g)));
}

}  // namespace

SplitGraph& node_at(SplitGraph& root, const SplitPath& path) { return node_mut(root, path); }

const SplitGraph& node_at(const SplitGraph& root, const SplitPath& path) {
  const SplitGraph* node = &root;
  for (const auto& [tree, level] : path) {
    if (tree >= node->trees.size()) throw ArgumentError("split path names a missing tree");
    const auto& children = node->trees[tree].children;
    if (level < 0 || static_cast<std::size_t>(level) >= children.size())
      throw ArgumentError("split path names a missing level");
    node = &children[static_cast<std::size_t>(level)];
  }
  return *node;
}

std::string format_path(const SplitGraph& root, const SplitPath& path, const TableSchema& schema) {
  std::string out = "(";
  const SplitGraph* node = &root;
  for (std::size_t k = 0; k < path.size(); ++k) {
    const auto& tree = node->trees.at(path[k].first);
    if (k) out += ", ";
    out += tree.split_variable + "=" + schema.label(tree.split_variable, path[k].second);
    node = &tree.children.at(static_cast<std::size_t>(path[k].second));
  }
  return out + ")";
}

SplitGraph make_split(const TableSchema& schema, const SplitGraph& root, const SplitPath& path,
                      std::vector<VarSet> collection, const std::string& s) {
  SplitGraph out = root;
  SplitGraph& node = node_mut(out, path);
  if (collection.empty()) throw ArgumentError("split collection is empty");
  std::sort(collection.begin(), collection.end());
  collection.erase(std::unique(collection.begin(), collection.end()), collection.end());
  for (const auto& c : collection)
    for (const auto& v : c)
      if (!node.graph.has_vertex(v) || induced_subgraph(node.graph, c) != Graph::complete(c))
        throw ArgumentError(format_sets({c}) + " is not complete in the graph being split");
  if (node.context.assigns(s)) throw ArgumentError("split variable '" + s + "' is fixed by the context");
  for (const auto& c : collection)
    if (!c.count(s))
      throw IllegalSplit("split variable '" + s + "' is not in " + format_sets({c}) +
                         "; the split would change the model");
  const auto all = cliques(node.graph);
  for (const auto& c : collection)
    if (!std::binary_search(all.begin(), all.end(), c))
      throw ArgumentError(format_sets({c}) + " is not a clique of the graph being split");
  const auto used = node.consumed_cliques();
  for (const auto& c : collection)
    if (std::binary_search(used.begin(), used.end(), c))
      throw SplitConflict("clique " + format_sets({c}) + " is already split");

  SplitTree tree;
  tree.split_variable = s;
  tree.collection = collection;
  VarSet child_vars = tree.variables();
  child_vars.erase(s);
  const Graph child_graph = induced_subgraph(node.graph, child_vars);
  const int levels = schema.levels(s);
  for (int l = 0; l < levels; ++l) tree.children.push_back({node.context.extended(s, l), child_graph, {}});
  node.trees.push_back(std::move(tree));
  return out;
}

std::vector<Generator> generators_outside(const SplitGraph& root, const SplitPath& path) {
  std::vector<Generator> out;
  collect(root, out, &node_at(root, path));
  return out;
}

bool removal_meaningful(const SplitGraph& root, const SplitPath& path, const Edge& e) {
  const auto& node = node_at(root, path);
  for (const auto& g : generators_outside(root, path)) {
    const auto vars = g.variables();
    if (vars.count(e.first) && vars.count(e.second) && g.context.compatible(node.context)) return false;
  }
  return true;
}

SplitGraph remove_context_edge(const TableSchema& schema, const SplitGraph& root, const SplitPath& path,
                               const Edge& e) {
  if (path.empty()) throw ArgumentError("context edges live below a split; path is empty");
  SplitGraph out = root;
  SplitGraph& node = node_mut(out, path);
  if (!node.graph.has_edge(e))
    throw ArgumentError("edge " + e.to_string() + " is not in the context graph " + format_path(root, path, schema));
  if (!node.trees.empty()) throw ArgumentError("cannot remove edges from a graph that has been split further");
  if (!removal_meaningful(root, path, e))
    throw MeaninglessSplit("removing " + e.to_string() + " in context " + node.context.to_string(schema) +
                           " entails no context specific independence: the interaction is still present");
  node.graph = node.graph.without_edge(e);
  return out;
}

GeneratingClass generating_class(const TableSchema& schema, const SplitGraph& sg, bool reduced) {
  std::vector<Generator> gens;
  collect(sg, gens, nullptr);
  GeneratingClass gc(schema, std::move(gens));
  return reduced ? reduce(gc) : gc;
}

void validate(const TableSchema& schema, const SplitGraph& sg) {
  sg.context.validate(schema);
  for (const auto& v : sg.graph.vertices()) {
    schema.position(v);
    if (sg.context.assigns(v)) throw ArgumentError("context variable '" + v + "' is also a graph vertex");
  }
  const auto all = cliques(sg.graph);
  std::vector<VarSet> used;
  for (const auto& t : sg.trees) {
    if (t.collection.empty()) throw ArgumentError("split tree with an empty collection");
    for (const auto& c : t.collection) {
      if (!std::binary_search(all.begin(), all.end(), c))
        throw ArgumentError(format_sets({c}) + " is not a clique of the parent graph");
      if (!c.count(t.split_variable)) throw IllegalSplit("split variable missing from " + format_sets({c}));
      if (std::find(used.begin(), used.end(), c) != used.end())
        throw SplitConflict("clique " + format_sets({c}) + " used by two trees");
      used.push_back(c);
    }
    if (static_cast<int>(t.children.size()) != schema.levels(t.split_variable))
      throw ArgumentError("split tree needs one child per level of '" + t.split_variable + "'");
    VarSet child_vars = t.variables();
    child_vars.erase(t.split_variable);
    for (std::size_t l = 0; l < t.children.size(); ++l) {
      const auto& child = t.children[l];
      if (!(child.context == sg.context.extended(t.split_variable, static_cast<int>(l))))
        throw ArgumentError("child context does not extend the parent context");
      if (child.graph.vertices() != child_vars)
        throw ArgumentError("child graph vertices differ from the collection minus the split variable");
      validate(schema, child);
    }
  }
}

ContingencyTable node_table(const ContingencyTable& table, const SplitGraph& node) {
  VarSet vars = node.graph.vertices();
  for (const auto& name : node.context.domain()) vars.insert(name);
  return slice(marginalize(table, vars), node.context);
}

namespace {

struct Difference {
  SplitPath path;
  const SplitGraph* before;
  const SplitGraph* after;
};

void diff(const SplitGraph& a, const SplitGraph& b, SplitPath& path, std::vector<Difference>& out) {
  if (!(a.context == b.context) || a.graph.vertices() != b.graph.vertices() || a.trees.size() != b.trees.size())
    throw ArgumentError("split graphs differ in structure, not only in context edges");
  if (!(a.graph == b.graph)) {
    if (!a.trees.empty() || !b.trees.empty())
      throw ArgumentError("a graph that carries split trees changed");
    for (const auto& e : b.graph.edges())
      if (!a.graph.has_edge(e)) throw ArgumentError("edge " + e.to_string() + " was added, not removed");
    out.push_back({path, &a, &b});
  }
  for (std::size_t t = 0; t < a.trees.size(); ++t) {
    const auto& ta = a.trees[t];
    const auto& tb = b.trees[t];
    if (ta.split_variable != tb.split_variable || ta.collection != tb.collection ||
        ta.children.size() != tb.children.size())
      throw ArgumentError("split trees differ in structure");
    for (std::size_t l = 0; l < ta.children.size(); ++l) {
      path.emplace_back(t, static_cast<int>(l));
      diff(ta.children[l], tb.children[l], path, out);
      path.pop_back();
    }
  }
}

}  // namespace

std::vector<TestResult> decompose_test(const ContingencyTable& table, const SplitGraph& before,
                                       const SplitGraph& after) {
  std::vector<Difference> diffs;
  SplitPath path;
  diff(before, after, path, diffs);
  if (diffs.empty()) return {};
  for (const auto& d : diffs) {
    if (d.path.empty()) throw ArgumentError("the root graph changed; not a context-edge removal");
    SplitPath parent(d.path.begin(), d.path.end() - 1), first(diffs[0].path.begin(), diffs[0].path.end() - 1);
    if (parent != first || d.path.back().first != diffs[0].path.back().first)
      throw ArgumentError("context-edge removals span more than one split tree");
  }
  std::vector<TestResult> out;
  for (const auto& d : diffs) {
    const auto t = node_table(table, *d.after);
    const auto& schema = t.schema();
    const auto fit_before = fit_graph(t, d.before->graph);
    const auto fit_after = fit_graph(t, d.after->graph);
    const int df = static_cast<int>(graph_dimension(schema, d.before->graph) -
                                    graph_dimension(schema, d.after->graph));
    const double dev = std::max(0.0, fit_after.deviance - fit_before.deviance);
    out.push_back(make_test(dev, df, t.total(), d.after->context.to_string(table.schema())));
  }
  return out;
}

namespace {

void collect_models(const SplitGraph& sg, const std::string& split_variable, bool is_child,
                    std::vector<ContextModel>& out) {
  if (is_child) {
    auto free = sg.free_cliques();
    if (!free.empty() || sg.trees.empty()) out.push_back({sg.context, split_variable, std::move(free)});
  }
  for (const auto& t : sg.trees)
    for (const auto& child : t.children) collect_models(child, t.split_variable, true, out);
}

}  // namespace

std::vector<ContextModel> context_models(const SplitGraph& sg) {
  std::vector<ContextModel> out;
  collect_models(sg, "", false, out);
  return out;
}

std::string format_split_graph(const TableSchema& schema, const SplitGraph& sg) {
  std::string out;
  for (const auto& m : context_models(sg)) out += m.context.to_string(schema) + ": " + format_sets(m.cliques) + "\n";
  const auto free = sg.free_cliques();
  if (!free.empty()) {
    std::string prefix = sg.context.empty() ? "" : " (" + sg.context.to_string(schema) + ")";
    out += "residual" + prefix + ": " + format_sets(free) + "\n";
  }
  return out;
}

namespace {

json node_to_json(const TableSchema& schema, const SplitGraph& sg) {
  json ctx = json::object();
  for (const auto& [name, level] : sg.context.assignment()) ctx[name] = schema.label(name, level);
  json edges = json::array();
  for (const auto& e : sg.graph.edges()) edges.push_back({e.first, e.second});
  json trees = json::array();
  for (const auto& t : sg.trees) {
    json collection = json::array();
    for (const auto& c : t.collection) collection.push_back(std::vector<std::string>(c.begin(), c.end()));
    json children = json::array();
    for (const auto& child : t.children) children.push_back(node_to_json(schema, child));
    trees.push_back({{"split_variable", t.split_variable}, {"collection", collection}, {"children", children}});
  }
  return {{"context", ctx},
          {"vertices", std::vector<std::string>(sg.graph.vertices().begin(), sg.graph.vertices().end())},
          {"edges", edges},
          {"trees", trees}};
}

SplitGraph node_from_json(const TableSchema& schema, const json& j, const std::string& where) {
  auto need = [&](const char* key, bool (json::*check)() const noexcept) -> const json& {
    if (!j.contains(key) || !(j[key].*check)())
      throw ParseError(std::string("missing or mistyped '") + key + "'", where + "/" + key);
    return j[key];
  };
  SplitGraph sg;
  std::map<std::string, int> ctx;
  for (const auto& [name, label] : need("context", &json::is_object).items()) {
    if (!label.is_string()) throw ParseError("context labels must be strings", where + "/context/" + name);
    ctx[name] = schema.level_of(name, label.get<std::string>());
  }
  sg.context = Context(std::move(ctx));
  VarSet vertices;
  for (const auto& v : need("vertices", &json::is_array)) vertices.insert(v.get<std::string>());
  EdgeSet edges;
  const auto& e = need("edges", &json::is_array);
  for (std::size_t k = 0; k < e.size(); ++k) {
    if (!e[k].is_array() || e[k].size() != 2)
      throw ParseError("edges are pairs of names", where + "/edges/" + std::to_string(k));
    edges.emplace(e[k][0].get<std::string>(), e[k][1].get<std::string>());
  }
  sg.graph = Graph(std::move(vertices), std::move(edges));
  const auto& trees = need("trees", &json::is_array);
  for (std::size_t k = 0; k < trees.size(); ++k) {
    const auto& t = trees[k];
    const std::string tw = where + "/trees/" + std::to_string(k);
    if (!t.is_object() || !t.contains("split_variable") || !t.contains("collection") || !t.contains("children"))
      throw ParseError("split tree needs split_variable, collection and children", tw);
    SplitTree tree;
    tree.split_variable = t["split_variable"].get<std::string>();
    for (const auto& c : t["collection"]) {
      VarSet set;
      for (const auto& v : c) set.insert(v.get<std::string>());
      tree.collection.push_back(std::move(set));
    }
    std::sort(tree.collection.begin(), tree.collection.end());
    for (std::size_t l = 0; l < t["children"].size(); ++l)
      tree.children.push_back(node_from_json(schema, t["children"][l], tw + "/children/" + std::to_string(l)));
    sg.trees.push_back(std::move(tree));
  }
  return sg;
}

}  // namespace

std::string serialize_split_model(const TableSchema& schema, const SplitGraph& sg) {
  json doc;
  doc["variables"] = json::array();
  for (const auto& v : schema.variables()) {
    json item{{"name", v.name}, {"levels", v.levels}};
    if (!v.labels.empty()) item["labels"] = v.labels;
    doc["variables"].push_back(std::move(item));
  }
  doc["index_convention"] = std::string(to_string(schema.convention()));
  doc["split_graph"] = node_to_json(schema, sg);
  return doc.dump(2) + "\n";
}

SplitModel parse_split_model(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what(), "byte " + std::to_string(e.byte));
  }
  if (!doc.is_object() || !doc.contains("variables") || !doc.contains("split_graph"))
    throw ParseError("split model needs 'variables' and 'split_graph'", "/");
  try {
    std::vector<VariableSpec> vars;
    for (const auto& v : doc["variables"]) {
      VariableSpec spec;
      spec.name = v.at("name").get<std::string>();
      spec.levels = v.at("levels").get<int>();
      if (v.contains("labels")) spec.labels = v["labels"].get<std::vector<std::string>>();
      vars.push_back(std::move(spec));
    }
    auto conv = IndexConvention::LastFastest;
    if (doc.contains("index_convention")) conv = parse_index_convention(doc["index_convention"].get<std::string>());
    SplitModel model{TableSchema(std::move(vars), conv), {}};
    model.root = node_from_json(model.schema, doc["split_graph"], "/split_graph");
    validate(model.schema, model.root);
    return model;
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed split model: ") + e.what(), "");
  }
}

}  // namespace splitlab
