#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "splitlab/graph.hpp"
#include "splitlab/table.hpp"

namespace splitlab {

/// A head variable set with a fixed context: the potential is an arbitrary
/// function of the head variables, active only where the context holds.
struct Generator {
  VarSet head;
  Context context;

  /// head ∪ dom(context)
  VarSet variables() const;

  auto operator<=>(const Generator&) const = default;
};

/// Set of generators over a schema, kept sorted and free of duplicates.
class GeneratingClass {
 public:
  GeneratingClass() = default;
  /// Validates disjointness, nonemptiness and level ranges.
  GeneratingClass(TableSchema schema, std::vector<Generator> generators);

  /// Plain hierarchical class, one context-free generator per set.
  static GeneratingClass from_sets(TableSchema schema, const std::vector<VarSet>& sets);

  const TableSchema& schema() const { return schema_; }
  const std::vector<Generator>& generators() const { return generators_; }
  std::size_t size() const { return generators_.size(); }
  bool empty() const { return generators_.empty(); }

  /// Union of the two generator lists (schemas must match).
  GeneratingClass merged(const GeneratingClass& other) const;

  bool operator==(const GeneratingClass& other) const {
    return schema_ == other.schema_ && generators_ == other.generators_;
  }

 private:
  TableSchema schema_;
  std::vector<Generator> generators_;
};

/// Drops every generator whose indicator span lies in the span of the
/// remaining generators plus the constant. Smaller generators are examined
/// first; the result spans the same space as the input.
GeneratingClass reduce(const GeneratingClass& gc);

/// True when (A1, j1) is absorbed by (A2, j2): j2 ⊆ j1 and
/// A1 ∪ (dom j1 ∖ dom j2) ⊆ A2.
bool absorbs(const Generator& big, const Generator& small);

/// Graph instantiated by a context: each matching generator contributes
/// its head plus context variables as a complete set. With `eliminate`,
/// the context variables are removed from the result.
Graph instantiate(const GeneratingClass& gc, const Context& ctx, bool eliminate);

/// Global CSI Markov property: true when S ∪ dom(ctx) separates A and B
/// in the instantiated graph. False means "not derivable".
bool csi_query(const GeneratingClass& gc, const VarSet& a, const VarSet& b, const VarSet& s,
               const Context& ctx);

/// Dimension of the span of all generator indicators plus the constant.
std::size_t dimension(const GeneratingClass& gc);

/// Indicator design matrix, row-major with schema.cell_count() rows; the
/// first column is the constant.
struct DesignMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;
};
DesignMatrix design_matrix(const GeneratingClass& gc);

/// Numeric rank by Gaussian elimination with partial pivoting.
std::size_t matrix_rank(DesignMatrix m, double tolerance = 1e-9);

/// Emits "[BD,A=1][CD,A=1][ABE]".
std::string format_class(const GeneratingClass& gc);
std::string format_generator(const Generator& g, const TableSchema& schema);

/// Accepts "[BD,A=1][CD,A=1]" and "[[BD][CD]]^{A=1}" forms, mixed freely.
GeneratingClass parse_class(std::string_view text, const TableSchema& schema);

}  // namespace splitlab
