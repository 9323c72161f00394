#include "cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ios>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "splitlab/error.hpp"
#include "splitlab/select.hpp"

namespace splitlab::cli {

namespace {

using nlohmann::json;

struct Config {
  std::string table_path;
  std::string format = "text";
  std::vector<std::string> fixed;
  double p_accepted = 0.05;
  bool decomposable = true;
  bool recursive = true;
  std::vector<std::string> collections;
  std::string exclude_split;
  int split_depth = 1;
  double tol = 1e-8;
  int max_iter = 10000;

  std::string model;
  std::string graph;
  std::string model_file;
  std::string save;
  std::string edge;
  std::string partition = "single";
  std::vector<std::string> contexts;
  std::vector<std::string> instantiate_all;
  bool eliminate = false;
  std::string out_dir = ".";
  std::string stem = "model";
  std::string out;
};

struct NotConverged {
  int iterations;
  double residual;
};

std::string decimal(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  std::string s = buf;
  // "-0.00" reads badly in a report.
  if (s.find_first_not_of("-0.") == std::string::npos && s.front() == '-') s.erase(0, 1);
  return s;
}

std::string row(const TestResult& t, const std::string& model) {
  return std::to_string(t.count) + "\t" + decimal(t.deviance, 3) + "\t" + std::to_string(t.df) + "\t" +
         decimal(t.p_value, 5) + "\t" + decimal(t.aic, 2) + "\t" + model + "\n";
}

std::string header(const std::string& last) { return "Counts\tDeviance\tdf\tp-value\tAIC\t" + last + "\n"; }

json to_json(const TestResult& t) {
  return {{"count", t.count}, {"deviance", t.deviance}, {"df", t.df},
          {"p_value", t.p_value}, {"aic", t.aic}, {"label", t.label}};
}

FitOptions fit_options(const Config& c) {
  FitOptions f;
  f.tol = c.tol;
  f.max_iter = c.max_iter;
  return f;
}

SelectionOptions selection_options(const Config& c, const TableSchema& schema) {
  SelectionOptions o;
  o.p_accepted = c.p_accepted;
  o.decomposable_mode = c.decomposable;
  o.recursive = c.recursive;
  o.split_depth = c.split_depth;
  o.fit = fit_options(c);
  for (const auto& f : c.fixed) {
    const auto vars = parse_varset(f);
    for (const auto& v : vars) schema.position(v);
    const auto edges = edges_within(vars);
    o.fixed_edges.insert(edges.begin(), edges.end());
  }
  std::string excluded = c.exclude_split;
  for (auto& ch : excluded)
    if (ch == ',') ch = ' ';
  if (!excluded.empty()) o.excluded_split_vars = parse_varset(excluded + " ");
  for (const auto& v : o.excluded_split_vars) schema.position(v);
  for (auto text : c.collections) {
    for (auto& ch : text)
      if (ch == '+') ch = ' ';
    o.collections.push_back(parse_sets(text));
  }
  return o;
}

ContingencyTable table_of(const Config& c) {
  if (c.table_path.empty()) throw ArgumentError("--table is required");
  return load_table(c.table_path);
}

Graph graph_over(const std::string& text, const TableSchema& schema) {
  Graph g = parse_graph(text);
  for (const auto& v : g.vertices()) schema.position(v);
  // Variables the text leaves out are isolated vertices.
  return Graph(schema.names(), g.edges());
}

// The graph named by --graph, or the one backward selection picks.
Graph working_graph(const Config& c, const ContingencyTable& table) {
  if (!c.graph.empty()) return graph_over(c.graph, table.schema());
  return drop_least(table, Graph::complete(table.schema().names()), selection_options(c, table.schema()));
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::ios_base::failure("cannot write '" + path + "'");
  out << text;
  if (!out) throw std::ios_base::failure("cannot write '" + path + "'");
}

void save_model(const Config& c, const TableSchema& schema, const SplitGraph& sg) {
  if (!c.save.empty()) write_file(c.save, serialize_split_model(schema, sg));
}

void cmd_fit(const Config& c, std::ostream& out) {
  const auto table = table_of(c);
  const auto gc = parse_class(c.model, table.schema());
  const auto r = ips_fit(table, gc, fit_options(c));
  const auto t = make_test(r.deviance, r.df, table.total());
  if (c.format == "json") {
    json doc = to_json(t);
    doc["model"] = format_class(gc);
    doc["iterations"] = r.iterations;
    doc["converged"] = r.converged;
    doc["max_residual"] = r.max_residual;
    out << doc.dump(2) << "\n";
  } else {
    out << header("Model") << row(t, format_class(gc));
  }
  if (!r.converged) throw NotConverged{r.iterations, r.max_residual};
}

void cmd_select(const Config& c, std::ostream& out) {
  const auto table = table_of(c);
  const auto& schema = table.schema();
  const Graph start = c.graph.empty() ? Graph::complete(schema.names()) : graph_over(c.graph, schema);
  const auto opts = selection_options(c, schema);
  check_start(start, opts);
  const auto result = backward_eliminate(table, start, opts);
  const auto fit = fit_graph(table, result.graph, opts.fit);
  const auto t = make_test(fit.deviance, fit.df, table.total());
  save_model(c, schema, SplitGraph::plain(result.graph));
  if (c.format == "json") {
    json removed = json::array();
    for (const auto& r : result.removed) {
      auto item = to_json(r.test);
      item["edge"] = r.edge.to_string();
      removed.push_back(item);
    }
    json doc{{"graph", format_graph(result.graph)}, {"removed", removed}, {"fit", to_json(t)}};
    out << doc.dump(2) << "\n";
    return;
  }
  out << format_graph(result.graph) << "\n" << header("Model") << row(t, format_graph(result.graph));
}

void cmd_split_select(const Config& c, std::ostream& out) {
  const auto table = table_of(c);
  const auto& schema = table.schema();
  const Graph g = working_graph(c, table);
  const auto sg = split_drop_least(table, g, selection_options(c, schema));
  save_model(c, schema, sg);
  if (c.format == "json") {
    out << serialize_split_model(schema, sg);
    return;
  }
  out << format_split_graph(schema, sg);
}

void cmd_test_edge(const Config& c, std::ostream& out) {
  const auto table = table_of(c);
  if (c.edge.empty()) throw ArgumentError("--edge is required");
  const Edge e = Edge::parse(c.edge);
  table.schema().position(e.first);
  table.schema().position(e.second);
  PartitionMode mode;
  if (c.partition == "single")
    mode = PartitionMode::Single;
  else if (c.partition == "joint")
    mode = PartitionMode::Joint;
  else
    throw ArgumentError("--partition must be single or joint");
  const auto reports = split_test_edge(table, working_graph(c, table), e, mode, fit_options(c));
  if (c.format == "json") {
    json doc = json::array();
    for (const auto& r : reports) {
      json rows = json::array();
      for (const auto& t : r.rows) rows.push_back(to_json(t));
      doc.push_back({{"variable", r.variable}, {"rows", rows}, {"total", to_json(r.total)}});
    }
    out << doc.dump(2) << "\n";
    return;
  }
  for (std::size_t k = 0; k < reports.size(); ++k) {
    const auto& r = reports[k];
    if (k) out << "\n";
    out << header(r.variable);
    for (const auto& t : r.rows) out << row(t, t.label);
    out << "\n" << row(r.total, r.total.label);
  }
}

SplitModel model_of(const Config& c) {
  if (c.model_file.empty()) throw ArgumentError("--model-file is required");
  return parse_split_model(read_file(c.model_file));
}

void cmd_summary(const Config& c, std::ostream& out) {
  const auto table = table_of(c);
  SplitGraph sg;
  if (!c.model_file.empty()) {
    auto model = model_of(c);
    if (!(model.schema == table.schema())) throw ArgumentError("split model and table schemas differ");
    sg = std::move(model.root);
  } else {
    sg = SplitGraph::plain(working_graph(c, table));
  }
  const auto s = summary(table, sg, fit_options(c));
  if (c.format == "json") {
    json trees = json::array();
    for (const auto& t : s.trees) {
      json rows = json::array();
      for (const auto& r : t.rows) rows.push_back(to_json(r));
      trees.push_back({{"label", t.label}, {"rows", rows}, {"total", to_json(t.total)}});
    }
    json doc{{"trees", trees}, {"root", to_json(s.root)}, {"total", to_json(s.grand_total)}};
    out << doc.dump(2) << "\n";
    return;
  }
  for (const auto& t : s.trees) {
    out << header("Model");
    for (const auto& r : t.rows) out << row(r, r.label);
    out << "\n" << row(t.total, t.label);
  }
  out << header("Model") << row(s.root, s.root.label);
  for (const auto& t : s.trees) out << row(t.total, t.label);
  out << "\n" << row(s.grand_total, s.grand_total.label);
}

std::string context_stem(const Context& ctx, const TableSchema& schema) {
  return ctx.empty() ? "all" : ctx.to_string(schema);
}

void cmd_instantiate(const Config& c, std::ostream& out) {
  const auto model = model_of(c);
  const auto& schema = model.schema;
  const auto gc = generating_class(schema, model.root);
  std::vector<Context> contexts;
  for (const auto& text : c.contexts) contexts.push_back(Context::parse(text, schema));
  for (const auto& names : c.instantiate_all) {
    std::string spaced = names;
    for (auto& ch : spaced)
      if (ch == ',') ch = ' ';
    for (const auto& v : parse_varset(spaced + " "))
      for (int l = 0; l < schema.levels(v); ++l) contexts.push_back(Context({{v, l}}));
  }
  if (contexts.empty()) contexts.emplace_back();
  std::filesystem::create_directories(c.out_dir);
  for (const auto& ctx : contexts) {
    const auto label = context_stem(ctx, schema);
    const auto g = instantiate(gc, ctx, c.eliminate);
    const auto path = (std::filesystem::path(c.out_dir) / (c.stem + "." + label + ".dot")).string();
    write_file(path, to_dot(g, c.stem, ctx.empty() ? "" : label));
    out << path << "\t" << format_graph(g) << "\n";
  }
}

void cmd_export_dot(const Config& c, std::ostream& out) {
  Graph g;
  if (!c.graph.empty()) {
    g = parse_graph(c.graph);
  } else {
    const auto model = model_of(c);
    g = instantiate(generating_class(model.schema, model.root), Context(), false);
  }
  const auto dot = to_dot(g, c.stem);
  if (c.out.empty())
    out << dot;
  else
    write_file(c.out, dot);
}

void add_table(CLI::App* sub, Config& c) {
  sub->add_option("--table", c.table_path, "Table JSON file")->required();
  sub->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"text", "json"}));
  sub->add_option("--tol", c.tol, "IPS tolerance on the count scale")->check(CLI::PositiveNumber);
  sub->add_option("--max-iter", c.max_iter, "IPS cycle limit")->check(CLI::PositiveNumber);
}

void add_selection(CLI::App* sub, Config& c) {
  sub->add_option("--fix", c.fixed, "Variables whose mutual edges are never removed, e.g. ABC");
  sub->add_option("--p-accepted", c.p_accepted, "Edges with p above this are removed")
      ->check(CLI::Range(0.0, 1.0));
  sub->add_flag("--decomposable,!--no-decomposable", c.decomposable, "Stay inside decomposable graphs");
  sub->add_flag("--recursive,!--no-recursive", c.recursive, "Eliminate until no edge qualifies");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Config c;
  CLI::App app{"Context specific interaction models for contingency tables", "splitlab"};
  app.require_subcommand(1);

  auto* fit = app.add_subcommand("fit", "Fit a generating class");
  add_table(fit, c);
  fit->add_option("--model", c.model, "Generating class, e.g. [ABCE][BCDE] or [BD,A=1]")->required();

  auto* select = app.add_subcommand("select", "Backward elimination of edges");
  add_table(select, c);
  add_selection(select, c);
  select->add_option("--graph", c.graph, "Starting graph (default saturated)");
  select->add_option("--save", c.save, "Write the selected graph as a split-model file");

  auto* split = app.add_subcommand("split-select", "Select a split model");
  add_table(split, c);
  add_selection(split, c);
  split->add_option("--graph", c.graph, "Graph to split (default: the selected graph)");
  split->add_option("--collection", c.collections, "Cliques split together, e.g. [BCDE]+[ABCE]")
      ->allow_extra_args(false);
  split->add_option("--exclude-split", c.exclude_split, "Variables never split on, e.g. D,F");
  split->add_option("--split-depth", c.split_depth, "Levels of nested splitting")->check(CLI::PositiveNumber);
  split->add_option("--save", c.save, "Write the split model file");

  auto* test = app.add_subcommand("test-edge", "Partition the test for removing an edge");
  add_table(test, c);
  add_selection(test, c);
  test->add_option("--graph", c.graph, "Graph holding the edge (default: the selected graph)");
  test->add_option("--edge", c.edge, "Edge, e.g. BD")->required();
  test->add_option("--partition", c.partition, "single or joint")->check(CLI::IsMember({"single", "joint"}));

  auto* sum = app.add_subcommand("summary", "Deviance decomposition of a split model");
  add_table(sum, c);
  add_selection(sum, c);
  sum->add_option("--model-file", c.model_file, "Split-model file");
  sum->add_option("--graph", c.graph, "Plain graph instead of a split model");

  auto* inst = app.add_subcommand("instantiate", "Write instantiated graphs as DOT files");
  inst->add_option("--model-file", c.model_file, "Split-model file")->required();
  inst->add_option("--context", c.contexts, "Context such as C=1 or C=1,D=2");
  inst->add_option("--instantiate-all", c.instantiate_all, "One graph per level of each variable");
  inst->add_flag("--eliminate", c.eliminate, "Drop the context variables from the graphs");
  inst->add_option("--out-dir", c.out_dir, "Output directory");
  inst->add_option("--stem", c.stem, "File name stem");

  auto* dot = app.add_subcommand("export-dot", "Write an interaction graph as DOT");
  dot->add_option("--graph", c.graph, "Graph text");
  dot->add_option("--model-file", c.model_file, "Split-model file");
  dot->add_option("--out", c.out, "Output file (default stdout)");
  dot->add_option("--stem", c.stem, "Graph name");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }

  try {
    if (fit->parsed()) cmd_fit(c, out);
    if (select->parsed()) cmd_select(c, out);
    if (split->parsed()) cmd_split_select(c, out);
    if (test->parsed()) cmd_test_edge(c, out);
    if (sum->parsed()) cmd_summary(c, out);
    if (inst->parsed()) cmd_instantiate(c, out);
    if (dot->parsed()) {
      if (c.graph.empty() == c.model_file.empty()) throw ArgumentError("give exactly one of --graph, --model-file");
      cmd_export_dot(c, out);
    }
  } catch (const NotConverged& n) {
    err << "warning: fit did not converge after " << n.iterations << " cycles (max residual " << n.residual
        << ")\n";
    return kNotConverged;
  } catch (const std::ios_base::failure& e) {
    err << "error: " << e.what() << "\n";
    return kIo;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kIo;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kOk;
}

}  // namespace splitlab::cli
