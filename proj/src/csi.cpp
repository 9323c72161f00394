#include "splitlab/csi.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>

#include "splitlab/error.hpp"

namespace splitlab {

VarSet Generator::variables() const {
  VarSet out = head;
  for (const auto& [name, level] : context.assignment()) out.insert(name);
  return out;
}

GeneratingClass::GeneratingClass(TableSchema schema, std::vector<Generator> generators)
    : schema_(std::move(schema)), generators_(std::move(generators)) {
  for (const auto& g : generators_) {
    if (g.head.empty() && g.context.empty()) throw ArgumentError("generator with no variables");
    for (const auto& v : g.head) {
      schema_.position(v);
      if (g.context.assigns(v))
        throw ArgumentError("variable '" + v + "' is both head and context of a generator");
    }
    g.context.validate(schema_);
  }
  std::sort(generators_.begin(), generators_.end());
  generators_.erase(std::unique(generators_.begin(), generators_.end()), generators_.end());
}

GeneratingClass GeneratingClass::from_sets(TableSchema schema, const std::vector<VarSet>& sets) {
  std::vector<Generator> gens;
  for (const auto& s : sets) gens.push_back({s, Context()});
  return GeneratingClass(std::move(schema), std::move(gens));
}

GeneratingClass GeneratingClass::merged(const GeneratingClass& other) const {
  if (!(schema_ == other.schema_)) throw ArgumentError("generating classes over different schemas");
  auto gens = generators_;
  gens.insert(gens.end(), other.generators_.begin(), other.generators_.end());
  return GeneratingClass(schema_, std::move(gens));
}

bool absorbs(const Generator& big, const Generator& small) {
  if (!small.context.refines(big.context)) return false;
  for (const auto& v : small.head)
    if (!big.head.count(v)) return false;
  for (const auto& [name, level] : small.context.assignment())
    if (!big.context.assigns(name) && !big.head.count(name)) return false;
  return true;
}

namespace {

void append_columns(const TableSchema& schema, const Generator& g, DesignMatrix& m) {
  const auto map = projection_map(schema, g.head);
  const std::size_t width = schema.configurations(g.head);
  std::vector<bool> active(schema.cell_count(), true);
  for (const auto& [name, level] : g.context.assignment()) {
    const auto k = schema.position(name);
    const auto levels = static_cast<std::size_t>(schema.variables()[k].levels);
    for (std::size_t i = 0; i < active.size(); ++i)
      if ((i / schema.stride(k)) % levels != static_cast<std::size_t>(level)) active[i] = false;
  }
  const std::size_t first = m.cols;
  const std::size_t new_cols = m.cols + width;
  std::vector<double> values(m.rows * new_cols, 0.0);
  for (std::size_t r = 0; r < m.rows; ++r)
    for (std::size_t c = 0; c < m.cols; ++c) values[r * new_cols + c] = m.values[r * m.cols + c];
  for (std::size_t r = 0; r < m.rows; ++r)
    if (active[r]) values[r * new_cols + first + map[r]] = 1.0;
  m.values = std::move(values);
  m.cols = new_cols;
}

DesignMatrix design_for(const TableSchema& schema, const std::vector<Generator>& gens) {
  DesignMatrix m;
  m.rows = schema.cell_count();
  m.cols = 1;
  m.values.assign(m.rows, 1.0);
  for (const auto& g : gens) append_columns(schema, g, m);
  return m;
}

}  // namespace

DesignMatrix design_matrix(const GeneratingClass& gc) { return design_for(gc.schema(), gc.generators()); }

std::size_t matrix_rank(DesignMatrix m, double tolerance) {
  std::size_t rank = 0;
  auto at = [&](std::size_t r, std::size_t c) -> double& { return m.values[r * m.cols + c]; };
  for (std::size_t c = 0; c < m.cols && rank < m.rows; ++c) {
    std::size_t pivot = rank;
    for (std::size_t r = rank + 1; r < m.rows; ++r)
      if (std::abs(at(r, c)) > std::abs(at(pivot, c))) pivot = r;
    if (std::abs(at(pivot, c)) <= tolerance) continue;
    if (pivot != rank)
      for (std::size_t k = c; k < m.cols; ++k) std::swap(at(pivot, k), at(rank, k));
    for (std::size_t r = rank + 1; r < m.rows; ++r) {
      const double f = at(r, c) / at(rank, c);
      if (f == 0.0) continue;
      for (std::size_t k = c; k < m.cols; ++k) at(r, k) -= f * at(rank, k);
    }
    ++rank;
  }
  return rank;
}

std::size_t dimension(const GeneratingClass& gc) { return matrix_rank(design_matrix(gc)); }

GeneratingClass reduce(const GeneratingClass& gc) {
  std::vector<Generator> order = gc.generators();
  std::stable_sort(order.begin(), order.end(), [](const Generator& a, const Generator& b) {
    auto va = a.variables().size(), vb = b.variables().size();
    if (va != vb) return va < vb;
    return a.head.size() < b.head.size();
  });
  std::vector<bool> kept(order.size(), true);
  const auto& schema = gc.schema();
  for (std::size_t k = 0; k < order.size(); ++k) {
    std::vector<Generator> others;
    bool absorbed = false;
    for (std::size_t j = 0; j < order.size(); ++j) {
      if (j == k || !kept[j]) continue;
      if (absorbs(order[j], order[k])) absorbed = true;
      others.push_back(order[j]);
    }
    if (absorbed) {
      kept[k] = false;
      continue;
    }
    const auto base = matrix_rank(design_for(schema, others));
    others.push_back(order[k]);
    if (matrix_rank(design_for(schema, others)) == base) kept[k] = false;
  }
  std::vector<Generator> out;
  for (std::size_t k = 0; k < order.size(); ++k)
    if (kept[k]) out.push_back(order[k]);
  return GeneratingClass(schema, std::move(out));
}

Graph instantiate(const GeneratingClass& gc, const Context& ctx, bool eliminate) {
  ctx.validate(gc.schema());
  std::vector<VarSet> sets;
  for (const auto& g : gc.generators())
    if (g.context.compatible(ctx)) sets.push_back(g.variables());
  Graph out = Graph::generated_by(sets, gc.schema().names());
  return eliminate ? out.without_vertices(ctx.domain()) : out;
}

bool csi_query(const GeneratingClass& gc, const VarSet& a, const VarSet& b, const VarSet& s,
               const Context& ctx) {
  const VarSet e = ctx.domain();
  auto disjoint = [](const VarSet& x, const VarSet& y) {
    return std::none_of(x.begin(), x.end(), [&](const std::string& v) { return y.count(v) > 0; });
  };
  if (!disjoint(a, b) || !disjoint(a, s) || !disjoint(b, s) || !disjoint(a, e) ||
      !disjoint(b, e) || !disjoint(s, e))
    throw ArgumentError("A, B, S and the context variables must be pairwise disjoint");
  VarSet sep = s;
  sep.insert(e.begin(), e.end());
  return separates(instantiate(gc, ctx, false), sep, a, b);
}

std::string format_generator(const Generator& g, const TableSchema& schema) {
  std::string out = "[" + format_varset(g.head);
  if (!g.context.empty()) out += "," + g.context.to_string(schema);
  return out + "]";
}

std::string format_class(const GeneratingClass& gc) {
  std::string out;
  for (const auto& g : gc.generators()) out += format_generator(g, gc.schema());
  return out;
}

namespace {

class ClassParser {
 public:
  ClassParser(std::string_view text, const TableSchema& schema) : text_(text), schema_(schema) {}

  std::vector<Generator> parse() {
    std::vector<Generator> out;
    skip();
    while (pos_ < text_.size()) {
      if (peek(1) == '[') {
        parse_group(out);
      } else if (text_[pos_] == '[') {
        out.push_back(parse_item(Context()));
      } else {
        fail("expected '['");
      }
      skip();
    }
    if (out.empty()) fail("empty generating class");
    return out;
  }

 private:
  char peek(std::size_t ahead) const {
    return pos_ + ahead < text_.size() && text_[pos_] == '[' ? text_[pos_ + ahead] : '\0';
  }

  void skip() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, std::to_string(pos_)); }
  [[noreturn]] void unknown(const std::string& what) const {
    throw SchemaError(what + " (at " + std::to_string(pos_) + ")");
  }

  // "[[BD][CD]]^{A=1}"
  void parse_group(std::vector<Generator>& out) {
    ++pos_;
    std::vector<std::size_t> starts;
    std::vector<std::string_view> bodies;
    skip();
    while (pos_ < text_.size() && text_[pos_] == '[') {
      auto close = text_.find(']', pos_);
      if (close == std::string_view::npos) fail("unterminated '['");
      starts.push_back(pos_);
      bodies.push_back(text_.substr(pos_ + 1, close - pos_ - 1));
      pos_ = close + 1;
      skip();
    }
    if (pos_ >= text_.size() || text_[pos_] != ']') fail("expected ']' closing the group");
    ++pos_;
    Context group;
    if (pos_ < text_.size() && text_[pos_] == '^') {
      ++pos_;
      if (pos_ >= text_.size() || text_[pos_] != '{') fail("expected '{' after '^'");
      auto close = text_.find('}', pos_);
      if (close == std::string_view::npos) fail("unterminated '{'");
      group = parse_context(text_.substr(pos_ + 1, close - pos_ - 1));
      pos_ = close + 1;
    }
    const auto end = pos_;
    for (std::size_t k = 0; k < bodies.size(); ++k) {
      pos_ = starts[k];
      out.push_back(parse_body(bodies[k], group));
    }
    pos_ = end;
  }

  Generator parse_item(const Context& outer) {
    auto close = text_.find(']', pos_);
    if (close == std::string_view::npos) fail("unterminated '['");
    auto body = text_.substr(pos_ + 1, close - pos_ - 1);
    if (body.find('[') != std::string_view::npos) fail("unexpected '['");
    auto g = parse_body(body, outer);
    pos_ = close + 1;
    return g;
  }

  Generator parse_body(std::string_view body, const Context& outer) {
    auto comma = body.find(',');
    auto head_text = body.substr(0, comma);
    Generator g;
    g.head = parse_varset(head_text);
    for (const auto& v : g.head)
      if (!schema_.contains(v)) unknown("unknown variable '" + v + "'");
    Context ctx = outer;
    if (comma != std::string_view::npos) {
      const auto extra = parse_context(body.substr(comma + 1));
      for (const auto& [name, level] : extra.assignment()) {
        if (ctx.assigns(name) && ctx.at(name) != level) fail("conflicting context for '" + name + "'");
        if (!ctx.assigns(name)) ctx = ctx.extended(name, level);
      }
    }
    g.context = ctx;
    if (g.head.empty() && g.context.empty()) fail("generator with no variables");
    for (const auto& v : g.head)
      if (g.context.assigns(v)) fail("variable '" + v + "' is both head and context");
    return g;
  }

  Context parse_context(std::string_view text) {
    try {
      return Context::parse(text, schema_);
    } catch (const SchemaError& e) {
      unknown(e.what());
    }
  }

  std::string_view text_;
  const TableSchema& schema_;
  std::size_t pos_ = 0;
};

}  // namespace

GeneratingClass parse_class(std::string_view text, const TableSchema& schema) {
  return GeneratingClass(schema, ClassParser(text, schema).parse());
}

}  // namespace splitlab
