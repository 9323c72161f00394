#pragma once

// Shared fixtures and independent reference computations for the tests.
// Nothing here calls the library routine it is used to check.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "splitlab/csi.hpp"
#include "splitlab/fit.hpp"
#include "splitlab/graph.hpp"
#include "splitlab/table.hpp"

namespace splitlab::testing {

inline std::string data_path(const std::string& name) { return std::string(SPLITLAB_DATA_DIR) + "/" + name; }

inline const ContingencyTable& wam() {
  static const ContingencyTable table = load_table(data_path("wam.json"));
  return table;
}

inline TableSchema binary_schema(const std::string& names,
                                 IndexConvention conv = IndexConvention::LastFastest) {
  std::vector<VariableSpec> vars;
  for (char c : names) vars.push_back({std::string(1, c), 2, {}});
  return TableSchema(vars, conv);
}

inline ContingencyTable random_table(const TableSchema& schema, std::mt19937& rng, int lo, int hi) {
  std::uniform_int_distribution<int> count(lo, hi);
  std::vector<std::int64_t> counts(schema.cell_count());
  for (auto& c : counts) c = count(rng);
  return ContingencyTable(schema, counts);
}

// Level of every variable in cell k, found by repeated division in the
// table's own enumeration order (independent of the library's strides).
inline std::map<std::string, int> decode(const TableSchema& schema, std::size_t k) {
  std::map<std::string, int> out;
  const auto& vars = schema.variables();
  const std::size_t n = vars.size();
  for (std::size_t step = 0; step < n; ++step) {
    const std::size_t j = schema.convention() == IndexConvention::FirstFastest ? step : n - 1 - step;
    out[vars[j].name] = static_cast<int>(k % static_cast<std::size_t>(vars[j].levels));
    k /= static_cast<std::size_t>(vars[j].levels);
  }
  return out;
}

inline std::string key_of(const std::map<std::string, int>& cell, const VarSet& vars) {
  std::string key;
  for (const auto& v : vars) key += v + "=" + std::to_string(cell.at(v)) + ";";
  return key;
}

inline std::map<std::string, double> brute_margin(const ContingencyTable& t, const VarSet& vars) {
  std::map<std::string, double> out;
  for (std::size_t k = 0; k < t.schema().cell_count(); ++k)
    out[key_of(decode(t.schema(), k), vars)] += static_cast<double>(t.counts()[k]);
  return out;
}

// Random generating class over binary variables: 1 to 4 generators with
// random heads and random (possibly empty) contexts on the other variables.
inline GeneratingClass random_class(const TableSchema& schema, std::mt19937& rng) {
  const auto& vars = schema.variables();
  std::uniform_int_distribution<int> how_many(1, 4), coin(0, 1), pick(0, 2);
  std::vector<Generator> gens;
  const int n = how_many(rng);
  for (int g = 0; g < n; ++g) {
    Generator gen;
    std::map<std::string, int> ctx;
    for (const auto& v : vars) {
      const int role = pick(rng);  // 0 head, 1 context, 2 absent
      if (role == 0) gen.head.insert(v.name);
      if (role == 1) ctx[v.name] = coin(rng);
    }
    if (gen.head.empty()) gen.head.insert(vars[static_cast<std::size_t>(g) % vars.size()].name);
    for (const auto& h : gen.head) ctx.erase(h);
    gen.context = Context(ctx);
    gens.push_back(gen);
  }
  return GeneratingClass(schema, gens);
}

// Indicator columns of every generator, built cell by cell from decode().
inline Eigen::MatrixXd indicator_matrix(const GeneratingClass& gc, bool with_constant) {
  const auto& schema = gc.schema();
  const auto cells = schema.cell_count();
  std::vector<Eigen::VectorXd> cols;
  if (with_constant) cols.push_back(Eigen::VectorXd::Ones(static_cast<Eigen::Index>(cells)));
  for (const auto& g : gc.generators()) {
    std::map<std::string, Eigen::VectorXd> by_config;
    for (std::size_t k = 0; k < cells; ++k) {
      const auto cell = decode(schema, k);
      bool inside = true;
      for (const auto& [v, l] : g.context.assignment()) inside = inside && cell.at(v) == l;
      if (!inside) continue;
      auto& col = by_config[key_of(cell, g.head)];
      if (col.size() == 0) col = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(cells));
      col(static_cast<Eigen::Index>(k)) = 1.0;
    }
    for (auto& [key, col] : by_config) cols.push_back(col);
  }
  Eigen::MatrixXd m(static_cast<Eigen::Index>(cells), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j) m.col(static_cast<Eigen::Index>(j)) = cols[j];
  return m;
}

inline std::size_t rank_oracle(const GeneratingClass& gc) {
  Eigen::FullPivLU<Eigen::MatrixXd> lu(indicator_matrix(gc, true));
  lu.setThreshold(1e-9);
  return static_cast<std::size_t>(lu.rank());
}

// Maximum likelihood in the log-affine parametrisation p ∝ exp(X b), with X
// a column basis of the model span, by damped Newton ascent.
inline std::vector<double> mle_oracle(const ContingencyTable& t, const GeneratingClass& gc) {
  const Eigen::MatrixXd full = indicator_matrix(gc, false);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(full);
  qr.setThreshold(1e-9);
  const auto r = qr.rank();
  Eigen::MatrixXd x(full.rows(), r);
  for (Eigen::Index j = 0; j < r; ++j) x.col(j) = full.col(qr.colsPermutation().indices()(j));
  // Remove the constant direction so the Hessian is nonsingular.
  for (Eigen::Index j = 0; j < r; ++j) x.col(j).array() -= x.col(j).mean();
  Eigen::FullPivLU<Eigen::MatrixXd> keep(x);
  keep.setThreshold(1e-9);
  const Eigen::MatrixXd basis = x * keep.permutationQ();
  const Eigen::MatrixXd xb = basis.leftCols(keep.rank());

  Eigen::VectorXd n(t.schema().cell_count());
  for (Eigen::Index k = 0; k < n.size(); ++k) n(k) = static_cast<double>(t.counts()[static_cast<std::size_t>(k)]);
  const double total = n.sum();
  auto probs = [&](const Eigen::VectorXd& b) {
    Eigen::VectorXd eta = xb * b;
    eta.array() -= eta.maxCoeff();
    Eigen::VectorXd p = eta.array().exp();
    return Eigen::VectorXd(p / p.sum());
  };
  auto loglik = [&](const Eigen::VectorXd& b) { return n.dot(probs(b).array().log().matrix()); };

  Eigen::VectorXd b = Eigen::VectorXd::Zero(xb.cols());
  for (int it = 0; it < 200; ++it) {
    const Eigen::VectorXd p = probs(b);
    const Eigen::VectorXd grad = xb.transpose() * (n - total * p);
    if (grad.cwiseAbs().maxCoeff() < 1e-11) break;
    const Eigen::MatrixXd w = Eigen::MatrixXd(p.asDiagonal()) - p * p.transpose();
    const Eigen::MatrixXd hess = total * xb.transpose() * w * xb;
    const Eigen::VectorXd step = hess.ldlt().solve(grad);
    double scale = 1.0;
    const double base = loglik(b);
    while (scale > 1e-8 && loglik(b + scale * step) < base - 1e-12) scale *= 0.5;
    b += scale * step;
  }
  const Eigen::VectorXd p = probs(b);
  return std::vector<double>(p.data(), p.data() + p.size());
}

// Clique marginals over separator marginals, evaluated cell by cell.
inline std::vector<double> decomposable_oracle(const ContingencyTable& t, const std::vector<VarSet>& cliques,
                                               const std::vector<VarSet>& separators) {
  const double total = static_cast<double>(t.total());
  std::vector<std::map<std::string, double>> cm, sm;
  for (const auto& c : cliques) cm.push_back(brute_margin(t, c));
  for (const auto& s : separators) sm.push_back(brute_margin(t, s));
  std::vector<double> p(t.schema().cell_count());
  for (std::size_t k = 0; k < p.size(); ++k) {
    const auto cell = decode(t.schema(), k);
    double v = 1.0;
    for (std::size_t j = 0; j < cliques.size(); ++j) v *= cm[j][key_of(cell, cliques[j])] / total;
    for (std::size_t j = 0; j < separators.size(); ++j) {
      const double m = sm[j][key_of(cell, separators[j])] / total;
      v = m > 0 ? v / m : 0.0;
    }
    p[k] = v;
  }
  return p;
}

inline Graph random_graph(const std::string& names, double density, std::mt19937& rng) {
  std::bernoulli_distribution keep(density);
  VarSet vs;
  for (char c : names) vs.insert(std::string(1, c));
  const auto complete = Graph::complete(vs);
  EdgeSet edges;
  for (const auto& e : complete.edges())
    if (keep(rng)) edges.insert(e);
  return Graph(vs, edges);
}

inline bool complete_in(const Graph& g, const VarSet& s) {
  for (const auto& a : s)
    for (const auto& b : s)
      if (a < b && !g.adjacent(a, b)) return false;
  return true;
}

inline std::vector<VarSet> subsets(const VarSet& vs) {
  const std::vector<std::string> v(vs.begin(), vs.end());
  std::vector<VarSet> out;
  for (unsigned mask = 1; mask < (1u << v.size()); ++mask) {
    VarSet s;
    for (std::size_t j = 0; j < v.size(); ++j)
      if (mask & (1u << j)) s.insert(v[j]);
    out.push_back(s);
  }
  return out;
}

inline std::vector<VarSet> brute_cliques(const Graph& g) {
  std::vector<VarSet> complete;
  for (const auto& s : subsets(g.vertices()))
    if (complete_in(g, s)) complete.push_back(s);
  std::vector<VarSet> out;
  for (const auto& s : complete) {
    bool maximal = true;
    for (const auto& t : complete)
      if (t.size() > s.size() && std::includes(t.begin(), t.end(), s.begin(), s.end())) maximal = false;
    if (maximal) out.push_back(s);
  }
  std::sort(out.begin(), out.end());
  return out;
}

// Chordal iff no vertex subset of size >= 4 induces a chordless cycle.
inline bool brute_chordal(const Graph& g) {
  for (const auto& s : subsets(g.vertices())) {
    if (s.size() < 4) continue;
    bool cycle = true;
    for (const auto& v : s) {
      int deg = 0;
      for (const auto& w : s)
        if (w != v && g.adjacent(v, w)) ++deg;
      if (deg != 2) cycle = false;
    }
    if (!cycle) continue;
    // All degrees 2: a single cycle iff connected.
    VarSet seen{*s.begin()};
    bool grew = true;
    while (grew) {
      grew = false;
      for (const auto& v : s)
        if (!seen.count(v))
          for (const auto& w : seen)
            if (g.adjacent(v, w)) {
              seen.insert(v);
              grew = true;
              break;
            }
    }
    if (seen.size() == s.size()) return false;
  }
  return true;
}

// Reachability closure after deleting s (Floyd–Warshall on booleans).
inline bool brute_separates(const Graph& g, const VarSet& s, const VarSet& a, const VarSet& b) {
  std::vector<std::string> v;
  for (const auto& x : g.vertices())
    if (!s.count(x)) v.push_back(x);
  const std::size_t n = v.size();
  std::vector<std::vector<bool>> r(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) r[i][j] = i == j || g.adjacent(v[i], v[j]);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (r[i][k] && r[k][j]) r[i][j] = true;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (a.count(v[i]) && b.count(v[j]) && r[i][j]) return false;
  return true;
}

}  // namespace splitlab::testing
