#include "splitlab/graph.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cstdint>
#include <deque>
#include <sstream>

#include "splitlab/error.hpp"

namespace splitlab {

Edge::Edge(std::string a, std::string b) {
  if (a == b) throw ArgumentError("edge endpoints must differ ('" + a + "')");
  if (b < a) std::swap(a, b);
  first = std::move(a);
  second = std::move(b);
}

std::string Edge::to_string() const {
  if (first.size() == 1 && second.size() == 1) return first + second;
  return first + "-" + second;
}

Edge Edge::parse(std::string_view text) {
  for (char sep : {'-', ','}) {
    auto pos = text.find(sep);
    if (pos != std::string_view::npos)
      return Edge(std::string(text.substr(0, pos)), std::string(text.substr(pos + 1)));
  }
  if (text.size() != 2) throw ParseError("cannot read edge '" + std::string(text) + "'", "");
  return Edge(std::string(1, text[0]), std::string(1, text[1]));
}

Graph::Graph(VarSet vertices, EdgeSet edges) : vertices_(std::move(vertices)), edges_(std::move(edges)) {
  for (const auto& e : edges_) {
    if (!vertices_.count(e.first) || !vertices_.count(e.second))
      throw ArgumentError("edge " + e.to_string() + " has an endpoint outside the vertex set");
  }
}

Graph Graph::complete(const VarSet& vertices) {
  EdgeSet edges;
  for (auto a = vertices.begin(); a != vertices.end(); ++a)
    for (auto b = std::next(a); b != vertices.end(); ++b) edges.emplace(*a, *b);
  return Graph(vertices, std::move(edges));
}

Graph Graph::generated_by(const std::vector<VarSet>& sets, const VarSet& extra) {
  VarSet vertices = extra;
  EdgeSet edges;
  for (const auto& s : sets) {
    vertices.insert(s.begin(), s.end());
    for (auto a = s.begin(); a != s.end(); ++a)
      for (auto b = std::next(a); b != s.end(); ++b) edges.emplace(*a, *b);
  }
  return Graph(std::move(vertices), std::move(edges));
}

bool Graph::adjacent(const std::string& a, const std::string& b) const {
  return a != b && edges_.count(Edge(a, b)) > 0;
}

VarSet Graph::neighbours(const std::string& v) const {
  VarSet out;
  for (const auto& e : edges_) {
    if (e.first == v) out.insert(e.second);
    if (e.second == v) out.insert(e.first);
  }
  return out;
}

Graph Graph::without_edge(const Edge& e) const {
  if (!has_edge(e)) throw ArgumentError("graph has no edge " + e.to_string());
  auto edges = edges_;
  edges.erase(e);
  return Graph(vertices_, std::move(edges));
}

Graph Graph::with_edge(const Edge& e) const {
  auto edges = edges_;
  edges.insert(e);
  return Graph(vertices_, std::move(edges));
}

Graph Graph::without_vertices(const VarSet& drop) const {
  VarSet keep;
  for (const auto& v : vertices_)
    if (!drop.count(v)) keep.insert(v);
  EdgeSet edges;
  for (const auto& e : edges_)
    if (keep.count(e.first) && keep.count(e.second)) edges.insert(e);
  return Graph(std::move(keep), std::move(edges));
}

namespace {

using Mask = std::uint64_t;

// Bitmask view of a graph; vertex k is the k-th name in sorted order.
struct Indexed {
  std::vector<std::string> names;
  std::vector<Mask> adj;

  explicit Indexed(const Graph& g) : names(g.vertices().begin(), g.vertices().end()) {
    if (names.size() > 64) throw ArgumentError("graphs are limited to 64 vertices");
    adj.assign(names.size(), 0);
    for (const auto& e : g.edges()) {
      auto a = index(e.first), b = index(e.second);
      adj[a] |= Mask{1} << b;
      adj[b] |= Mask{1} << a;
    }
  }

  std::size_t index(const std::string& v) const {
    auto it = std::lower_bound(names.begin(), names.end(), v);
    if (it == names.end() || *it != v) throw ArgumentError("unknown vertex '" + v + "'");
    return static_cast<std::size_t>(it - names.begin());
  }

  Mask mask(const VarSet& s) const {
    Mask m = 0;
    for (const auto& v : s) m |= Mask{1} << index(v);
    return m;
  }

  VarSet set(Mask m) const {
    VarSet out;
    while (m) {
      out.insert(names[std::countr_zero(m)]);
      m &= m - 1;
    }
    return out;
  }
};

void bron_kerbosch(const Indexed& g, Mask r, Mask p, Mask x, std::vector<Mask>& out) {
  if (p == 0 && x == 0) {
    out.push_back(r);
    return;
  }
  // Pivot maximizing |P ∩ N(u)|.
  Mask px = p | x;
  int best = -1;
  std::size_t pivot = 0;
  for (Mask m = px; m; m &= m - 1) {
    auto u = static_cast<std::size_t>(std::countr_zero(m));
    int c = std::popcount(p & g.adj[u]);
    if (c > best) {
      best = c;
      pivot = u;
    }
  }
  for (Mask m = p & ~g.adj[pivot]; m; m &= m - 1) {
    auto v = static_cast<std::size_t>(std::countr_zero(m));
    Mask bit = Mask{1} << v;
    bron_kerbosch(g, r | bit, p & g.adj[v], x & g.adj[v], out);
    p &= ~bit;
    x |= bit;
  }
}

std::vector<std::size_t> mcs_order(const Indexed& g) {
  const std::size_t n = g.names.size();
  std::vector<int> weight(n, 0);
  std::vector<bool> done(n, false);
  std::vector<std::size_t> order;
  order.reserve(n);
  for (std::size_t step = 0; step < n; ++step) {
    std::size_t pick = n;
    for (std::size_t v = 0; v < n; ++v)
      if (!done[v] && (pick == n || weight[v] > weight[pick])) pick = v;
    done[pick] = true;
    order.push_back(pick);
    for (Mask m = g.adj[pick]; m; m &= m - 1) ++weight[std::countr_zero(m)];
  }
  return order;
}

// Earlier-visited neighbours of each vertex, in visiting order.
std::vector<Mask> earlier_neighbours(const Indexed& g, const std::vector<std::size_t>& order) {
  std::vector<Mask> out;
  Mask visited = 0;
  for (auto v : order) {
    out.push_back(g.adj[v] & visited);
    visited |= Mask{1} << v;
  }
  return out;
}

bool perfect_elimination(const Indexed& g, const std::vector<std::size_t>& order) {
  const auto earlier = earlier_neighbours(g, order);
  std::vector<std::size_t> position(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) position[order[k]] = k;
  for (std::size_t k = 0; k < order.size(); ++k) {
    Mask p = earlier[k];
    if (!p) continue;
    // Latest-visited member of p.
    std::size_t latest_pos = 0;
    for (Mask m = p; m; m &= m - 1)
      latest_pos = std::max(latest_pos, position[std::countr_zero(m)]);
    Mask rest = p & ~(Mask{1} << order[latest_pos]);
    if ((rest & ~earlier[latest_pos]) != 0) return false;
  }
  return true;
}

bool less_sorted(const VarSet& a, const VarSet& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

}  // namespace

std::vector<VarSet> cliques(const Graph& g) {
  Indexed ig(g);
  if (ig.names.empty()) return {};
  std::vector<Mask> found;
  const Mask all = ig.names.size() == 64 ? ~Mask{0} : (Mask{1} << ig.names.size()) - 1;
  bron_kerbosch(ig, 0, all, 0, found);
  std::vector<VarSet> out;
  for (auto m : found) out.push_back(ig.set(m));
  std::sort(out.begin(), out.end(), less_sorted);
  return out;
}

bool separates(const Graph& g, const VarSet& s, const VarSet& a, const VarSet& b) {
  if (a.empty() || b.empty()) throw ArgumentError("separation needs nonempty A and B");
  Indexed ig(g);
  Mask ms = ig.mask(s), ma = ig.mask(a), mb = ig.mask(b);
  if ((ms & ma) || (ms & mb) || (ma & mb))
    throw ArgumentError("separation sets must be pairwise disjoint");
  Mask reached = ma, frontier = ma;
  while (frontier) {
    Mask next = 0;
    for (Mask m = frontier; m; m &= m - 1) next |= ig.adj[std::countr_zero(m)];
    next &= ~reached & ~ms;
    if (next & mb) return false;
    reached |= next;
    frontier = next;
  }
  return true;
}

std::vector<std::string> maximum_cardinality_order(const Graph& g) {
  Indexed ig(g);
  std::vector<std::string> out;
  for (auto v : mcs_order(ig)) out.push_back(ig.names[v]);
  return out;
}

bool is_decomposable(const Graph& g) {
  Indexed ig(g);
  return perfect_elimination(ig, mcs_order(ig));
}

CliqueChain clique_chain(const Graph& g) {
  Indexed ig(g);
  const auto order = mcs_order(ig);
  if (!perfect_elimination(ig, order)) throw ArgumentError("graph is not decomposable");
  const auto earlier = earlier_neighbours(ig, order);
  std::vector<Mask> candidates;
  for (std::size_t k = 0; k < order.size(); ++k)
    candidates.push_back(earlier[k] | (Mask{1} << order[k]));
  CliqueChain chain;
  Mask covered = 0;
  for (std::size_t k = 0; k < candidates.size(); ++k) {
    bool maximal = true;
    for (std::size_t j = 0; j < candidates.size(); ++j) {
      if (j == k) continue;
      Mask c = candidates[k], d = candidates[j];
      if ((c & ~d) == 0 && (c != d || j < k)) {
        maximal = false;
        break;
      }
    }
    if (!maximal) continue;
    chain.cliques.push_back(ig.set(candidates[k]));
    chain.separators.push_back(ig.set(candidates[k] & covered));
    covered |= candidates[k];
  }
  return chain;
}

Graph induced_subgraph(const Graph& g, const VarSet& u) {
  for (const auto& v : u)
    if (!g.has_vertex(v)) throw ArgumentError("vertex '" + v + "' not in graph");
  EdgeSet edges;
  for (const auto& e : g.edges())
    if (u.count(e.first) && u.count(e.second)) edges.insert(e);
  return Graph(u, std::move(edges));
}

bool drop_edge_decomposable(const Graph& g, const Edge& e) {
  return is_decomposable(g.without_edge(e));
}

std::string format_varset(const VarSet& s) {
  bool simple = std::all_of(s.begin(), s.end(), [](const std::string& v) { return v.size() == 1; });
  std::string out;
  for (const auto& v : s) {
    if (!simple && !out.empty()) out += ' ';
    out += v;
  }
  return out;
}

std::string format_sets(const std::vector<VarSet>& sets) {
  std::string out;
  for (const auto& s : sets) out += "[" + format_varset(s) + "]";
  return out;
}

std::string format_graph(const Graph& g) { return format_sets(cliques(g)); }

VarSet parse_varset(std::string_view text) {
  VarSet out;
  bool separated = text.find_first_of(" \t,") != std::string_view::npos;
  if (separated) {
    std::string token;
    for (char c : text) {
      if (c == ' ' || c == '\t' || c == ',') {
        if (!token.empty()) out.insert(token);
        token.clear();
      } else {
        token += c;
      }
    }
    if (!token.empty()) out.insert(token);
  } else {
    for (char c : text) out.insert(std::string(1, c));
  }
  return out;
}

std::vector<VarSet> parse_sets(std::string_view text) {
  std::vector<VarSet> out;
  std::size_t i = 0;
  auto skip = [&] {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
  };
  skip();
  bool outer = text.size() - i >= 2 && text[i] == '[' && text[i + 1] == '[';
  if (outer) ++i;
  while (true) {
    skip();
    if (i >= text.size()) break;
    if (outer && text[i] == ']') {
      ++i;
      outer = false;
      skip();
      if (i != text.size()) throw ParseError("trailing text after ']'", std::to_string(i));
      break;
    }
    if (text[i] != '[') throw ParseError("expected '['", std::to_string(i));
    auto close = text.find(']', i);
    if (close == std::string_view::npos) throw ParseError("unterminated '['", std::to_string(i));
    auto body = text.substr(i + 1, close - i - 1);
    if (body.find('[') != std::string_view::npos) throw ParseError("nested '['", std::to_string(i));
    auto set = parse_varset(body);
    if (set.empty()) throw ParseError("empty variable set", std::to_string(i));
    out.push_back(std::move(set));
    i = close + 1;
  }
  if (outer) throw ParseError("missing closing ']'", std::to_string(text.size()));
  if (out.empty()) throw ParseError("no variable sets found", "0");
  return out;
}

Graph parse_graph(std::string_view text) { return Graph::generated_by(parse_sets(text)); }

std::string to_dot(const Graph& g, const std::string& name, const std::string& label) {
  std::ostringstream out;
  out << "graph \"" << name << "\" {\n";
  if (!label.empty()) out << "  label=\"" << label << "\";\n";
  for (const auto& v : g.vertices()) out << "  \"" << v << "\";\n";
  for (const auto& e : g.edges()) out << "  \"" << e.first << "\" -- \"" << e.second << "\";\n";
  out << "}\n";
  return out.str();
}

}  // namespace splitlab
