#include "splitlab/table.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "splitlab/error.hpp"

namespace splitlab {

using nlohmann::json;

std::string_view to_string(IndexConvention c) {
  return c == IndexConvention::LastFastest ? "last-fastest" : "first-fastest";
}

IndexConvention parse_index_convention(std::string_view text) {
  if (text == "last-fastest") return IndexConvention::LastFastest;
  if (text == "first-fastest") return IndexConvention::FirstFastest;
  throw ParseError("unknown index convention '" + std::string(text) + "'", "/index_convention");
}

TableSchema::TableSchema(std::vector<VariableSpec> variables, IndexConvention convention)
    : variables_(std::move(variables)), convention_(convention) {
  std::set<std::string> seen;
  for (const auto& v : variables_) {
    if (v.name.empty()) throw SchemaError("variable with empty name");
    if (!seen.insert(v.name).second) throw SchemaError("duplicate variable name '" + v.name + "'");
    if (v.levels < 2) throw SchemaError("variable '" + v.name + "' needs at least 2 levels");
    if (!v.labels.empty()) {
      if (static_cast<int>(v.labels.size()) != v.levels)
        throw SchemaError("variable '" + v.name + "' has " + std::to_string(v.labels.size()) +
                          " labels for " + std::to_string(v.levels) + " levels");
      std::set<std::string> lab(v.labels.begin(), v.labels.end());
      if (lab.size() != v.labels.size())
        throw SchemaError("variable '" + v.name + "' has duplicate labels");
    }
  }
  const std::size_t n = variables_.size();
  strides_.assign(n, 1);
  cell_count_ = 1;
  if (convention_ == IndexConvention::LastFastest) {
    for (std::size_t k = n; k-- > 0;) {
      strides_[k] = cell_count_;
      cell_count_ *= static_cast<std::size_t>(variables_[k].levels);
    }
  } else {
    for (std::size_t k = 0; k < n; ++k) {
      strides_[k] = cell_count_;
      cell_count_ *= static_cast<std::size_t>(variables_[k].levels);
    }
  }
}

std::optional<std::size_t> TableSchema::find(std::string_view name) const {
  for (std::size_t k = 0; k < variables_.size(); ++k)
    if (variables_[k].name == name) return k;
  return std::nullopt;
}

std::size_t TableSchema::position(std::string_view name) const {
  if (auto k = find(name)) return *k;
  throw SchemaError("unknown variable '" + std::string(name) + "'");
}

VarSet TableSchema::names() const {
  VarSet out;
  for (const auto& v : variables_) out.insert(v.name);
  return out;
}

std::string TableSchema::label(std::string_view name, int level) const {
  const auto& v = variable(name);
  if (level < 0 || level >= v.levels)
    throw SchemaError("level " + std::to_string(level) + " out of range for '" + v.name + "'");
  return v.labels.empty() ? std::to_string(level + 1) : v.labels[level];
}

int TableSchema::level_of(std::string_view name, std::string_view label) const {
  const auto& v = variable(name);
  for (int l = 0; l < v.levels; ++l)
    if (this->label(name, l) == label) return l;
  throw SchemaError("unknown level '" + std::string(label) + "' for variable '" + v.name + "'");
}

TableSchema TableSchema::restrict_to(const VarSet& keep) const {
  std::vector<VariableSpec> vars;
  for (const auto& name : keep) position(name);
  for (const auto& v : variables_)
    if (keep.count(v.name)) vars.push_back(v);
  return TableSchema(std::move(vars), convention_);
}

std::size_t TableSchema::configurations(const VarSet& vars) const {
  std::size_t n = 1;
  for (const auto& name : vars) n *= static_cast<std::size_t>(levels(name));
  return n;
}

std::size_t cell_index(const TableSchema& schema, const Cell& cell) {
  if (cell.size() != schema.size())
    throw InvalidCell("cell has " + std::to_string(cell.size()) + " levels, schema has " +
                      std::to_string(schema.size()) + " variables");
  std::size_t index = 0;
  for (std::size_t k = 0; k < cell.size(); ++k) {
    const auto& v = schema.variables()[k];
    if (cell[k] < 0 || cell[k] >= v.levels)
      throw InvalidCell("level " + std::to_string(cell[k]) + " out of range for '" + v.name + "'");
    index += static_cast<std::size_t>(cell[k]) * schema.stride(k);
  }
  return index;
}

Cell cell_at(const TableSchema& schema, std::size_t index) {
  if (index >= schema.cell_count()) throw InvalidCell("cell index out of range");
  Cell cell(schema.size());
  for (std::size_t k = 0; k < schema.size(); ++k)
    cell[k] = static_cast<int>((index / schema.stride(k)) %
                               static_cast<std::size_t>(schema.variables()[k].levels));
  return cell;
}

// ---------------------------------------------------------------------------
// Context

VarSet Context::domain() const {
  VarSet out;
  for (const auto& [name, level] : assignment_) out.insert(name);
  return out;
}

int Context::at(std::string_view name) const {
  auto it = assignment_.find(std::string(name));
  if (it == assignment_.end()) throw SchemaError("variable '" + std::string(name) + "' not in context");
  return it->second;
}

Context Context::extended(const std::string& name, int level) const {
  if (assigns(name)) throw ArgumentError("variable '" + name + "' already fixed by the context");
  auto copy = assignment_;
  copy.emplace(name, level);
  return Context(std::move(copy));
}

Context Context::restricted(const VarSet& vars) const {
  std::map<std::string, int> out;
  for (const auto& [name, level] : assignment_)
    if (vars.count(name)) out.emplace(name, level);
  return Context(std::move(out));
}

bool Context::compatible(const Context& other) const {
  for (const auto& [name, level] : assignment_) {
    auto it = other.assignment_.find(name);
    if (it != other.assignment_.end() && it->second != level) return false;
  }
  return true;
}

bool Context::refines(const Context& other) const {
  for (const auto& [name, level] : other.assignment_) {
    auto it = assignment_.find(name);
    if (it == assignment_.end() || it->second != level) return false;
  }
  return true;
}

void Context::validate(const TableSchema& schema) const {
  for (const auto& [name, level] : assignment_) {
    const auto& v = schema.variable(name);
    if (level < 0 || level >= v.levels)
      throw SchemaError("level " + std::to_string(level) + " out of range for '" + name + "'");
  }
}

std::string Context::to_string(const TableSchema& schema) const {
  std::string out;
  for (const auto& [name, level] : assignment_) {
    if (!out.empty()) out += ',';
    out += name + "=" + schema.label(name, level);
  }
  return out;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

Context Context::parse(std::string_view text, const TableSchema& schema) {
  std::map<std::string, int> out;
  text = trim(text);
  if (text.empty()) return Context();
  std::size_t start = 0;
  while (start <= text.size()) {
    auto comma = text.find(',', start);
    auto item = trim(text.substr(start, comma == std::string_view::npos ? text.npos : comma - start));
    auto eq = item.find('=');
    if (eq == std::string_view::npos)
      throw ParseError("context assignment '" + std::string(item) + "' lacks '='",
                       std::to_string(start));
    std::string name(trim(item.substr(0, eq)));
    auto label = trim(item.substr(eq + 1));
    int level = schema.level_of(name, label);
    if (!out.emplace(name, level).second)
      throw ParseError("variable '" + name + "' assigned twice", std::to_string(start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return Context(std::move(out));
}

// ---------------------------------------------------------------------------
// Tables

ContingencyTable::ContingencyTable(TableSchema schema, std::vector<std::int64_t> counts)
    : schema_(std::move(schema)), counts_(std::move(counts)) {
  if (counts_.size() != schema_.cell_count())
    throw SchemaError("expected " + std::to_string(schema_.cell_count()) + " counts, got " +
                      std::to_string(counts_.size()));
  for (auto c : counts_)
    if (c < 0) throw SchemaError("negative count");
  total_ = std::accumulate(counts_.begin(), counts_.end(), std::int64_t{0});
}

std::vector<std::size_t> projection_map(const TableSchema& schema, const VarSet& vars) {
  const TableSchema sub = schema.restrict_to(vars);
  std::vector<std::size_t> sub_stride(schema.size(), 0);
  for (std::size_t k = 0; k < schema.size(); ++k) {
    const auto& name = schema.variables()[k].name;
    if (vars.count(name)) sub_stride[k] = sub.stride(sub.position(name));
  }
  std::vector<std::size_t> map(schema.cell_count());
  for (std::size_t i = 0; i < map.size(); ++i) {
    std::size_t j = 0;
    for (std::size_t k = 0; k < schema.size(); ++k) {
      if (sub_stride[k] == 0) continue;
      const auto level = (i / schema.stride(k)) % static_cast<std::size_t>(schema.variables()[k].levels);
      j += level * sub_stride[k];
    }
    map[i] = j;
  }
  return map;
}

std::vector<double> marginal_sums(const TableSchema& schema, std::span<const double> values,
                                  const VarSet& vars) {
  const auto map = projection_map(schema, vars);
  std::vector<double> out(schema.configurations(vars), 0.0);
  for (std::size_t i = 0; i < map.size(); ++i) out[map[i]] += values[i];
  return out;
}

ContingencyTable marginalize(const ContingencyTable& table, const VarSet& vars) {
  const auto& schema = table.schema();
  const auto map = projection_map(schema, vars);
  std::vector<std::int64_t> out(schema.configurations(vars), 0);
  for (std::size_t i = 0; i < map.size(); ++i) out[map[i]] += table.counts()[i];
  return ContingencyTable(schema.restrict_to(vars), std::move(out));
}

ContingencyTable slice(const ContingencyTable& table, const Context& ctx) {
  const auto& schema = table.schema();
  ctx.validate(schema);
  VarSet rest = schema.names();
  for (const auto& name : ctx.domain()) rest.erase(name);
  const TableSchema sub = schema.restrict_to(rest);
  const auto map = projection_map(schema, rest);
  std::vector<std::int64_t> out(sub.cell_count(), 0);
  for (std::size_t i = 0; i < map.size(); ++i) {
    bool match = true;
    for (const auto& [name, level] : ctx.assignment()) {
      const auto k = schema.position(name);
      const auto l = (i / schema.stride(k)) % static_cast<std::size_t>(schema.variables()[k].levels);
      if (static_cast<int>(l) != level) {
        match = false;
        break;
      }
    }
    if (match) out[map[i]] = table.counts()[i];
  }
  return ContingencyTable(sub, std::move(out));
}

ContingencyTable parse_table(std::string_view document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what(), "byte " + std::to_string(e.byte));
  }
  if (!doc.is_object()) throw ParseError("table document must be an object", "/");
  if (!doc.contains("variables") || !doc["variables"].is_array())
    throw ParseError("missing 'variables' array", "/variables");
  if (!doc.contains("counts") || !doc["counts"].is_array())
    throw ParseError("missing 'counts' array", "/counts");

  std::vector<VariableSpec> vars;
  std::set<std::string> names;
  for (std::size_t k = 0; k < doc["variables"].size(); ++k) {
    const auto& v = doc["variables"][k];
    const std::string where = "/variables/" + std::to_string(k);
    if (!v.is_object() || !v.contains("name") || !v["name"].is_string())
      throw ParseError("variable needs a string 'name'", where);
    VariableSpec spec;
    spec.name = v["name"].get<std::string>();
    if (!names.insert(spec.name).second)
      throw ParseError("duplicate variable name '" + spec.name + "'", where + "/name");
    if (!v.contains("levels") || !v["levels"].is_number_integer())
      throw ParseError("variable needs an integer 'levels'", where + "/levels");
    spec.levels = v["levels"].get<int>();
    if (spec.levels < 2) throw ParseError("levels must be at least 2", where + "/levels");
    if (v.contains("labels")) {
      if (!v["labels"].is_array()) throw ParseError("'labels' must be an array", where + "/labels");
      for (const auto& l : v["labels"]) {
        if (!l.is_string()) throw ParseError("labels must be strings", where + "/labels");
        spec.labels.push_back(l.get<std::string>());
      }
      if (static_cast<int>(spec.labels.size()) != spec.levels)
        throw ParseError("label count does not match levels", where + "/labels");
      std::set<std::string> uniq(spec.labels.begin(), spec.labels.end());
      if (uniq.size() != spec.labels.size())
        throw ParseError("duplicate labels", where + "/labels");
    }
    vars.push_back(std::move(spec));
  }

  IndexConvention conv = IndexConvention::LastFastest;
  if (doc.contains("index_convention")) {
    if (!doc["index_convention"].is_string())
      throw ParseError("'index_convention' must be a string", "/index_convention");
    conv = parse_index_convention(doc["index_convention"].get<std::string>());
  }
  TableSchema schema(std::move(vars), conv);

  const auto& counts = doc["counts"];
  if (counts.size() != schema.cell_count())
    throw ParseError("expected " + std::to_string(schema.cell_count()) + " counts, got " +
                         std::to_string(counts.size()),
                     "/counts");
  std::vector<std::int64_t> values;
  values.reserve(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const auto& c = counts[i];
    if (!c.is_number_integer())
      throw ParseError("counts must be integers", "/counts/" + std::to_string(i));
    const auto value = c.get<std::int64_t>();
    if (value < 0) throw ParseError("negative count", "/counts/" + std::to_string(i));
    values.push_back(value);
  }
  return ContingencyTable(std::move(schema), std::move(values));
}

std::string serialize_table(const ContingencyTable& table) {
  json doc;
  doc["variables"] = json::array();
  for (const auto& v : table.schema().variables()) {
    json item{{"name", v.name}, {"levels", v.levels}};
    if (!v.labels.empty()) item["labels"] = v.labels;
    doc["variables"].push_back(std::move(item));
  }
  doc["index_convention"] = std::string(to_string(table.schema().convention()));
  doc["counts"] = std::vector<std::int64_t>(table.counts().begin(), table.counts().end());
  return doc.dump(2) + "\n";
}

ContingencyTable load_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open table file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_table(buffer.str());
}

}  // namespace splitlab
