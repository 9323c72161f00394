#include <gtest/gtest.h>

#include <random>

#include "properties.hpp"
#include "splitlab/error.hpp"
#include "splitlab/split.hpp"
#include "support.hpp"

using namespace splitlab;
namespace t = splitlab::testing;

namespace {

TableSchema example_schema() {
  std::vector<VariableSpec> vars{{"A", 2, {"+", "-"}}};
  for (char c : std::string("BCDEFG")) vars.push_back({std::string(1, c), 2, {}});
  return TableSchema(vars);
}

TableSchema abcd_schema() { return TableSchema({{"A", 2, {"+", "-"}}, {"B", 2, {}}, {"C", 2, {}}, {"D", 2, {}}}); }

const SplitPath kPlus{{0, 0}};
const SplitPath kMinus{{0, 1}};

// ST_U with {B,D} removed at a+ and {C,D} removed at a-.
SplitGraph reduced_tree(const TableSchema& s, const SplitGraph& root) {
  auto sg = make_split(s, root, {{"A", "B", "D"}, {"A", "C", "D"}}, "A");
  sg = remove_context_edge(s, sg, kPlus, {"B", "D"});
  return remove_context_edge(s, sg, kMinus, {"C", "D"});
}

}  // namespace

TEST(Split, SplitOfTwoCliqueGraph) {
  const auto s = abcd_schema();
  const auto sg = make_split(s, SplitGraph::plain(parse_graph("[ABD][ACD]")), {{"A", "B", "D"}, {"A", "C", "D"}}, "A");
  ASSERT_EQ(sg.trees.size(), 1u);
  const auto& tree = sg.trees.front();
  EXPECT_EQ(tree.split_variable, "A");
  ASSERT_EQ(tree.children.size(), 2u);
  for (int l = 0; l < 2; ++l) {
    EXPECT_EQ(tree.children[static_cast<std::size_t>(l)].graph, parse_graph("[BD][CD]"));
    EXPECT_EQ(tree.children[static_cast<std::size_t>(l)].context, Context({{"A", l}}));
  }
  EXPECT_TRUE(sg.free_cliques().empty());
  EXPECT_EQ(dimension(generating_class(s, sg)), dimension(parse_class("[ABD][ACD]", s)));
  validate(s, sg);
}

TEST(Split, IllegalSplitOfFourCycle) {
  const auto s = example_schema();
  const auto g = SplitGraph::plain(parse_graph("[AC][AF][CG][FG]"));
  EXPECT_THROW(make_split(s, g, {{"A", "C"}, {"A", "F"}, {"C", "G"}, {"F", "G"}}, "C"), IllegalSplit);
  // The same cycle induced inside the full example graph.
  const auto full = SplitGraph::plain(parse_graph("[ABD][ACD][ABE][AF][CG][FG]"));
  EXPECT_THROW(make_split(s, full, {{"A", "C"}, {"A", "F"}, {"C", "G"}, {"F", "G"}}, "C"), IllegalSplit);
  EXPECT_THROW(make_split(s, full, {{"A", "C"}}, "C"), ArgumentError);
  EXPECT_THROW(make_split(s, full, {{"B", "C"}}, "C"), ArgumentError);
}

TEST(Split, SplitArgumentErrors) {
  const auto s = abcd_schema();
  const auto g = SplitGraph::plain(parse_graph("[ABD][ACD]"));
  EXPECT_THROW(make_split(s, g, {{"A", "B"}}, "A"), ArgumentError);  // not a clique
  EXPECT_THROW(make_split(s, g, {}, "A"), ArgumentError);
  const auto once = make_split(s, g, {{"A", "B", "D"}}, "A");
  EXPECT_THROW(make_split(s, once, {{"A", "B", "D"}}, "B"), SplitConflict);
  // The children carry A in their context.
  EXPECT_THROW(make_split(s, once, kPlus, {{"B", "D"}}, "A"), ArgumentError);
  const auto nested = make_split(s, once, kPlus, {{"B", "D"}}, "B");
  EXPECT_EQ(node_at(nested, {{0, 0}, {0, 1}}).context, Context({{"A", 0}, {"B", 1}}));
  EXPECT_EQ(format_path(nested, {{0, 0}, {0, 1}}, s), "(A=+, B=2)");
  EXPECT_EQ(format_path(nested, {}, s), "()");
}

TEST(Split, ContextEdgeRemovalGivesReducedTree) {
  const auto s = abcd_schema();
  const auto sg = reduced_tree(s, SplitGraph::plain(parse_graph("[ABD][ACD]")));
  EXPECT_EQ(generating_class(s, sg, false), parse_class("[[B][CD]]^{A=+}[[BD][C]]^{A=-}", s));
  EXPECT_TRUE(csi_query(generating_class(s, sg), {"B"}, {"C", "D"}, {}, Context::parse("A=+", s)));
  EXPECT_THROW(remove_context_edge(s, sg, kPlus, {"B", "D"}), ArgumentError);
  EXPECT_THROW(remove_context_edge(s, sg, {}, {"A", "B"}), ArgumentError);
}

TEST(Split, GeneratingClassOfSplitGraphExample) {
  const auto s = example_schema();
  const auto sg = reduced_tree(s, SplitGraph::plain(parse_graph("[ABD][ACD][ABE][AF][CG][FG]")));
  EXPECT_EQ(generating_class(s, sg), parse_class("[CD,A=+][BD,A=-][ABE][AF][CG][FG]", s));
  EXPECT_EQ(reduce(generating_class(s, sg)), generating_class(s, sg));
}

TEST(Split, MeaninglessRemovalIsRejected) {
  const auto s = example_schema();
  auto sg = reduced_tree(s, SplitGraph::plain(parse_graph("[ABD][ACD][ABE][AF][CG][FG]")));
  sg = make_split(s, sg, {{"A", "B", "E"}}, "E");
  const SplitPath e_plus{{1, 0}};
  EXPECT_EQ(node_at(sg, e_plus).graph, parse_graph("[AB]"));
  EXPECT_FALSE(removal_meaningful(sg, e_plus, {"A", "B"}));
  EXPECT_THROW(remove_context_edge(s, sg, e_plus, {"A", "B"}), MeaninglessSplit);
}

TEST(Split, PlainGraphClass) {
  const auto& s = t::wam().schema();
  const auto g = parse_graph("[ABCE][BCDE][CDEF]");
  EXPECT_EQ(generating_class(s, SplitGraph::plain(g)), GeneratingClass::from_sets(s, cliques(g)));
}

TEST(Split, SelectedSplitModelClass) {
  const auto& s = t::wam().schema();
  auto sg = SplitGraph::plain(parse_graph("[ABCE][BCDE][CDEF]"));
  sg = make_split(s, sg, {{"A", "B", "C", "E"}, {"B", "C", "D", "E"}}, "C");
  sg = make_split(s, sg, {{"C", "D", "E", "F"}}, "D");
  sg = remove_context_edge(s, sg, {{0, 0}}, {"B", "D"});
  sg = remove_context_edge(s, sg, {{0, 1}}, {"A", "E"});
  sg = remove_context_edge(s, sg, {{1, 1}}, {"E", "F"});
  EXPECT_EQ(generating_class(s, sg, false),
            parse_class("[ABE,C=1][DE,C=1][AB,C=2][BDE,C=2][CEF,D=1][CE,D=2][CF,D=2]", s));
  EXPECT_EQ(format_split_graph(s, sg), "C=1: [ABE][DE]\nC=2: [AB][BDE]\nD=1: [CEF]\nD=2: [CE][CF]\n");
  const auto models = context_models(sg);
  ASSERT_EQ(models.size(), 4u);
  EXPECT_EQ(models[2].split_variable, "D");
  EXPECT_EQ(dimension(generating_class(s, sg)), 26u);
  validate(s, sg);

  const auto parsed = parse_split_model(serialize_split_model(s, sg));
  EXPECT_EQ(parsed.schema, s);
  EXPECT_EQ(parsed.root, sg);
}

TEST(Split, DecomposedTestForReducedTree) {
  const auto s = abcd_schema();
  const auto before = make_split(s, SplitGraph::plain(parse_graph("[ABD][ACD]")), {{"A", "B", "D"}, {"A", "C", "D"}}, "A");
  const auto after = reduced_tree(s, SplitGraph::plain(parse_graph("[ABD][ACD]")));
  std::mt19937 rng(211);
  const auto table = t::random_table(s, rng, 1, 40);
  const auto parts = decompose_test(table, before, after);
  ASSERT_EQ(parts.size(), 2u);
  EXPECT_EQ(parts[0].label, "A=+");
  EXPECT_EQ(parts[1].label, "A=-");
  // Each part is B ⊥ D | C (resp. C ⊥ D | B) on its slice.
  for (int l = 0; l < 2; ++l) {
    const auto sl = slice(table, Context({{"A", l}}));
    const auto small = parse_class(l == 0 ? "[B][CD]" : "[BD][C]", sl.schema());
    const auto ref = test_nested(sl, small, parse_class("[BD][CD]", sl.schema()));
    EXPECT_NEAR(parts[static_cast<std::size_t>(l)].deviance, ref.deviance, 1e-9);
    EXPECT_EQ(parts[static_cast<std::size_t>(l)].df, ref.df);
    EXPECT_EQ(parts[static_cast<std::size_t>(l)].count, sl.total());
  }
  EXPECT_TRUE(decompose_test(table, before, before).empty());
  EXPECT_THROW(decompose_test(table, after, before), ArgumentError);
  EXPECT_THROW(decompose_test(table, before, SplitGraph::plain(parse_graph("[ABD][ACD]"))), ArgumentError);
}

TEST(Split, DecomposedTestOnWamTree) {
  const auto& s = t::wam().schema();
  const auto before = make_split(s, SplitGraph::plain(parse_graph("[ABCE][BCDE][CDEF]")), {{"C", "D", "E", "F"}}, "D");
  const auto after = remove_context_edge(s, before, {{0, 1}}, {"E", "F"});
  const auto parts = decompose_test(t::wam(), before, after);
  ASSERT_EQ(parts.size(), 1u);
  EXPECT_EQ(parts[0].label, "D=2");
  EXPECT_EQ(parts[0].count, 455);
  EXPECT_NEAR(parts[0].deviance, 1.671, 0.0005);
  EXPECT_EQ(parts[0].df, 2);
  EXPECT_NEAR(parts[0].p_value, 0.43372, 0.000005);
  // The untouched D=1 child is saturated on its slice.
  const auto d1 = node_table(t::wam(), node_at(after, {{0, 0}}));
  EXPECT_EQ(d1.total(), 735);
  const auto fit = fit_graph(d1, node_at(after, {{0, 0}}).graph);
  EXPECT_NEAR(fit.deviance, 0.0, 1e-9);
  EXPECT_EQ(fit.df, 0);
}

TEST(Split, ChildrenPartitionTheLevels) {
  const TableSchema s({{"A", 3, {}}, {"B", 2, {}}, {"C", 2, {}}});
  const auto sg = make_split(s, SplitGraph::plain(parse_graph("[ABC]")), {{"A", "B", "C"}}, "A");
  ASSERT_EQ(sg.trees[0].children.size(), 3u);
  std::set<int> levels;
  for (const auto& c : sg.trees[0].children) levels.insert(c.context.at("A"));
  EXPECT_EQ(levels, (std::set<int>{0, 1, 2}));
}

TEST(Split, ParseRejectsBrokenModels) {
  const auto s = abcd_schema();
  const auto sg = make_split(s, SplitGraph::plain(parse_graph("[ABD][ACD]")), {{"A", "B", "D"}}, "A");
  auto doc = serialize_split_model(s, sg);
  EXPECT_EQ(parse_split_model(doc).root, sg);
  EXPECT_THROW(parse_split_model("{"), ParseError);
  EXPECT_THROW(parse_split_model("{\"variables\": []}"), ParseError);
  const auto pos = doc.find("\"split_variable\": \"A\"");
  ASSERT_NE(pos, std::string::npos);
  auto bad = doc;
  bad.replace(pos, 21, "\"split_variable\": \"C\"");
  EXPECT_THROW(parse_split_model(bad), Error);
}

TEST(Split, RandomSplitsPreserveTheModel) {
  const auto out = t::split_preserves_fit_property(307, 20);
  EXPECT_TRUE(out.ok) << out.detail << " worst " << out.worst;
}

TEST(Split, DecomposedTestsAddUp) {
  const auto out = t::decompose_property(311, 20);
  EXPECT_TRUE(out.ok) << out.detail << " worst " << out.worst;
}
