#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace splitlab {

/// Variable names are compared and ordered as plain strings everywhere.
using VarSet = std::set<std::string>;

struct VariableSpec {
  std::string name;
  int levels = 2;
  /// External level names; empty means the 1-based numbers "1", "2", ...
  std::vector<std::string> labels;

  bool operator==(const VariableSpec&) const = default;
};

enum class IndexConvention { LastFastest, FirstFastest };

std::string_view to_string(IndexConvention c);
IndexConvention parse_index_convention(std::string_view text);

/// Ordered variables of a table plus the cell enumeration order.
class TableSchema {
 public:
  TableSchema() = default;
  explicit TableSchema(std::vector<VariableSpec> variables,
                       IndexConvention convention = IndexConvention::LastFastest);

  const std::vector<VariableSpec>& variables() const { return variables_; }
  IndexConvention convention() const { return convention_; }
  std::size_t size() const { return variables_.size(); }
  std::size_t cell_count() const { return cell_count_; }

  /// Position of `name` in the variable order; throws SchemaError.
  std::size_t position(std::string_view name) const;
  std::optional<std::size_t> find(std::string_view name) const;
  bool contains(std::string_view name) const { return find(name).has_value(); }
  const VariableSpec& variable(std::string_view name) const { return variables_[position(name)]; }
  int levels(std::string_view name) const { return variable(name).levels; }

  /// Distance in the flat count vector between consecutive levels of the
  /// variable at `position`.
  std::size_t stride(std::size_t position) const { return strides_[position]; }

  VarSet names() const;

  /// External label of a 0-based level.
  std::string label(std::string_view name, int level) const;
  /// 0-based level of an external label; throws SchemaError.
  int level_of(std::string_view name, std::string_view label) const;

  /// Schema restricted to `keep`, preserving the original relative order.
  TableSchema restrict_to(const VarSet& keep) const;

  /// Number of configurations of the variables in `vars`.
  std::size_t configurations(const VarSet& vars) const;

  bool operator==(const TableSchema& other) const {
    return variables_ == other.variables_ && convention_ == other.convention_;
  }

 private:
  std::vector<VariableSpec> variables_;
  IndexConvention convention_ = IndexConvention::LastFastest;
  std::vector<std::size_t> strides_;
  std::size_t cell_count_ = 1;
};

/// Full assignment of 0-based levels, in schema variable order.
using Cell = std::vector<int>;

std::size_t cell_index(const TableSchema& schema, const Cell& cell);
Cell cell_at(const TableSchema& schema, std::size_t index);

/// Partial assignment variable -> 0-based level.
class Context {
 public:
  Context() = default;
  explicit Context(std::map<std::string, int> assignment) : assignment_(std::move(assignment)) {}

  const std::map<std::string, int>& assignment() const { return assignment_; }
  bool empty() const { return assignment_.empty(); }
  std::size_t size() const { return assignment_.size(); }
  VarSet domain() const;
  bool assigns(std::string_view name) const { return assignment_.count(std::string(name)) > 0; }
  /// Level of `name`; throws SchemaError when unassigned.
  int at(std::string_view name) const;

  /// Copy with one more variable fixed; throws ArgumentError if `name` is
  /// already assigned.
  Context extended(const std::string& name, int level) const;
  Context restricted(const VarSet& vars) const;

  /// True when both contexts agree on every shared variable.
  bool compatible(const Context& other) const;
  /// True when every assignment of `other` also appears here.
  bool refines(const Context& other) const;

  /// Validate variables and level ranges against a schema.
  void validate(const TableSchema& schema) const;

  /// "C=1,B=2" with external labels (variables in name order).
  std::string to_string(const TableSchema& schema) const;
  /// Parses "C=1,B=2" (labels resolved through the schema). Empty text
  /// gives the empty context.
  static Context parse(std::string_view text, const TableSchema& schema);

  auto operator<=>(const Context&) const = default;

 private:
  std::map<std::string, int> assignment_;
};

/// Dense count array over the product state space of a schema.
class ContingencyTable {
 public:
  ContingencyTable() = default;
  ContingencyTable(TableSchema schema, std::vector<std::int64_t> counts);

  const TableSchema& schema() const { return schema_; }
  std::span<const std::int64_t> counts() const { return counts_; }
  std::int64_t total() const { return total_; }
  std::int64_t count(const Cell& cell) const { return counts_[cell_index(schema_, cell)]; }

  bool operator==(const ContingencyTable& other) const {
    return schema_ == other.schema_ && counts_ == other.counts_;
  }

 private:
  TableSchema schema_;
  std::vector<std::int64_t> counts_;
  std::int64_t total_ = 0;
};

/// Marginal table over `vars`; throws SchemaError for unknown variables.
ContingencyTable marginalize(const ContingencyTable& table, const VarSet& vars);

/// Slice at a context; the result drops the context variables.
ContingencyTable slice(const ContingencyTable& table, const Context& ctx);

/// Parses the JSON table document; throws ParseError.
ContingencyTable parse_table(std::string_view document);
/// Canonical JSON table document (inverse of parse_table).
std::string serialize_table(const ContingencyTable& table);

/// Reads and parses a table document from disk; throws std::ios_base::failure
/// on I/O problems and ParseError on content problems.
ContingencyTable load_table(const std::string& path);

/// Sums `values` (laid out as `schema`) down to the variables in `vars`,
/// giving a vector laid out as schema.restrict_to(vars).
std::vector<double> marginal_sums(const TableSchema& schema, std::span<const double> values,
                                  const VarSet& vars);

/// For each cell of `schema`, the index of its restriction in
/// schema.restrict_to(vars).
std::vector<std::size_t> projection_map(const TableSchema& schema, const VarSet& vars);

}  // namespace splitlab
