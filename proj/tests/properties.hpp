#pragma once

// Randomised property checks shared by the unit tests and the acceptance
// runner. Each returns the worst discrepancy seen and a description of the
// first failure, if any.

#include <cmath>
#include <random>
#include <sstream>
#include <string>

#include "splitlab/csi.hpp"
#include "splitlab/fit.hpp"
#include "splitlab/select.hpp"
#include "splitlab/split.hpp"
#include "support.hpp"

namespace splitlab::testing {

struct Outcome {
  bool ok = true;
  double worst = 0.0;
  int cases = 0;
  std::string detail;

  void record(double err, double tol, const std::string& what) {
    worst = std::max(worst, err);
    if (!(err <= tol) && ok) {
      ok = false;
      detail = what;
    }
  }
  void fail(const std::string& what) {
    if (ok) detail = what;
    ok = false;
  }
};

inline TableSchema small_schema(std::mt19937& rng) {
  return binary_schema(std::uniform_int_distribution<int>(0, 1)(rng) ? "ABCD" : "ABC");
}

// Largest |N p(i_A, j_b) - n(i_A, j_b)| over all generators, from decode().
inline double eq3_residual(const ContingencyTable& t, const GeneratingClass& gc, const std::vector<double>& p) {
  const auto& schema = t.schema();
  double worst = 0.0;
  for (const auto& g : gc.generators()) {
    std::map<std::string, double> fitted, observed;
    for (std::size_t k = 0; k < schema.cell_count(); ++k) {
      const auto cell = decode(schema, k);
      bool inside = true;
      for (const auto& [v, l] : g.context.assignment()) inside = inside && cell.at(v) == l;
      if (!inside) continue;
      const auto key = key_of(cell, g.head);
      fitted[key] += static_cast<double>(t.total()) * p[k];
      observed[key] += static_cast<double>(t.counts()[k]);
    }
    for (const auto& [key, n] : observed) worst = std::max(worst, std::abs(fitted[key] - n));
  }
  return worst;
}

// (a) IPS satisfies the likelihood equations and sums to one. Counts are
// positive so that the equations have a solution inside the model; with
// zeros the estimate can sit on the boundary where IPS is sublinear.
inline Outcome ips_residual_property(unsigned seed, int pairs = 50) {
  std::mt19937 rng(seed);
  Outcome out;
  for (int k = 0; k < pairs; ++k) {
    const auto s = small_schema(rng);
    const auto gc = random_class(s, rng);
    const auto table = random_table(s, rng, 1, 30);
    const auto fit = ips_fit(table, gc);
    ++out.cases;
    const std::string what = format_class(gc);
    if (!fit.converged) out.fail("no convergence: " + what);
    out.record(eq3_residual(table, gc, fit.probabilities), 1e-8, "residual: " + what);
    double sum = 0.0;
    for (double p : fit.probabilities) sum += p;
    if (std::abs(sum - 1.0) > 1e-10) out.fail("mass: " + what);
  }
  return out;
}

// (b) IPS against the Newton maximum likelihood oracle.
inline Outcome ips_oracle_property(unsigned seed, int pairs = 20) {
  std::mt19937 rng(seed);
  Outcome out;
  FitOptions tight;
  tight.tol = 1e-10;
  for (int k = 0; k < pairs; ++k) {
    const auto s = small_schema(rng);
    const auto gc = random_class(s, rng);
    const auto table = random_table(s, rng, 1, 40);
    const auto fit = ips_fit(table, gc, tight);
    const auto ref = mle_oracle(table, gc);
    ++out.cases;
    for (std::size_t i = 0; i < ref.size(); ++i)
      out.record(std::abs(fit.probabilities[i] - ref[i]), 1e-6, "cell mismatch: " + format_class(gc));
  }
  return out;
}

// Random decomposable graph over `names` with at least one edge.
inline Graph random_decomposable(const std::string& names, std::mt19937& rng) {
  while (true) {
    const auto g = random_graph(names, 0.6, rng);
    if (!g.edges().empty() && is_decomposable(g)) return g;
  }
}

// A random split of a random clique with at least two variables.
inline SplitGraph random_split(const TableSchema& schema, const Graph& g, std::mt19937& rng) {
  std::vector<VarSet> candidates;
  for (const auto& c : cliques(g))
    if (c.size() >= 2) candidates.push_back(c);
  const auto& clique = candidates[std::uniform_int_distribution<std::size_t>(0, candidates.size() - 1)(rng)];
  auto it = clique.begin();
  std::advance(it, std::uniform_int_distribution<std::size_t>(0, clique.size() - 1)(rng));
  return make_split(schema, SplitGraph::plain(g), {clique}, *it);
}

// (c) A split leaves the fitted distribution unchanged.
inline Outcome split_preserves_fit_property(unsigned seed, int pairs = 30) {
  std::mt19937 rng(seed);
  Outcome out;
  FitOptions tight;
  tight.tol = 1e-12;
  for (int k = 0; k < pairs; ++k) {
    const auto s = binary_schema("ABCD");
    const auto g = random_decomposable("ABCD", rng);
    const auto table = random_table(s, rng, 0, 25);
    const auto sg = random_split(s, g, rng);
    const auto before = fit_graph(table, g);
    const auto after = ips_fit(table, generating_class(s, sg), tight);
    ++out.cases;
    if (dimension(generating_class(s, sg)) != dimension(GeneratingClass::from_sets(s, cliques(g))))
      out.fail("dimension changed: " + format_graph(g));
    for (std::size_t i = 0; i < before.probabilities.size(); ++i)
      out.record(std::abs(before.probabilities[i] - after.probabilities[i]), 1e-9, "fit changed: " + format_graph(g));
  }
  return out;
}

// (d) Per-context tests add up to the direct nested test.
inline Outcome decompose_property(unsigned seed, int pairs = 30) {
  std::mt19937 rng(seed);
  Outcome out;
  FitOptions tight;
  tight.tol = 1e-12;
  int attempts = 0;
  while (out.cases < pairs && attempts++ < 20 * pairs) {
    const auto s = binary_schema("ABCD");
    const auto g = random_decomposable("ABCD", rng);
    const auto table = random_table(s, rng, 1, 30);
    const auto before = random_split(s, g, rng);
    auto after = before;
    // Remove one or two meaningful context edges from the children.
    const auto& tree = before.trees.front();
    for (std::size_t level = 0; level < tree.children.size(); ++level) {
      const SplitPath path{{0, static_cast<int>(level)}};
      for (const auto& e : node_at(after, path).graph.edges()) {
        if (!removal_meaningful(after, path, e) || std::uniform_int_distribution<int>(0, 1)(rng)) continue;
        after = remove_context_edge(s, after, path, e);
        break;
      }
    }
    if (after == before) continue;
    if (!is_decomposable(node_at(after, {{0, 0}}).graph) || !is_decomposable(node_at(after, {{0, 1}}).graph))
      continue;
    const auto parts = decompose_test(table, before, after);
    double dev = 0.0;
    int df = 0;
    for (const auto& r : parts) {
      dev += r.deviance;
      df += r.df;
    }
    const auto direct = test_nested(table, generating_class(s, after), generating_class(s, before), tight);
    ++out.cases;
    std::ostringstream what;
    what << format_graph(g) << " -> " << format_class(generating_class(s, after));
    if (df != direct.df) out.fail("df " + std::to_string(df) + " vs " + std::to_string(direct.df) + ": " + what.str());
    out.record(std::abs(dev - direct.deviance), 1e-9, "deviance: " + what.str());
  }
  if (out.cases < pairs) out.fail("too few usable cases");
  return out;
}

// (e) A positive csi_query answer holds in the fitted distribution:
// p(a,b,s) p(s) = p(a,s) p(b,s) within the context slice.
inline Outcome csi_soundness_property(unsigned seed, int pairs = 200) {
  std::mt19937 rng(seed);
  Outcome out;
  FitOptions tight;
  tight.tol = 1e-11;
  std::uniform_int_distribution<int> role(0, 3), coin(0, 1);
  int tries = 0;
  while (out.cases < pairs && tries++ < 50 * pairs) {
    const auto s = binary_schema("ABCD");
    const auto gc = random_class(s, rng);
    VarSet a, b, cond;
    std::map<std::string, int> ctx;
    for (const auto& v : s.names()) {
      const int r = role(rng);
      if (r == 0) a.insert(v);
      if (r == 1) b.insert(v);
      if (r == 2) cond.insert(v);
      if (r == 3 && coin(rng)) ctx[v] = coin(rng);
    }
    if (a.empty() || b.empty()) continue;
    if (!csi_query(gc, a, b, cond, Context(ctx))) continue;
    const auto table = random_table(s, rng, 1, 30);
    const auto fit = ips_fit(table, gc, tight);
    ++out.cases;
    VarSet ab = a, as = a, bs = b;
    ab.insert(b.begin(), b.end());
    ab.insert(cond.begin(), cond.end());
    as.insert(cond.begin(), cond.end());
    bs.insert(cond.begin(), cond.end());
    std::map<std::string, double> pab, pas, pbs, ps;
    std::vector<std::map<std::string, int>> cells;
    for (std::size_t k = 0; k < s.cell_count(); ++k) {
      const auto cell = decode(s, k);
      bool inside = true;
      for (const auto& [v, l] : ctx) inside = inside && cell.at(v) == l;
      if (!inside) continue;
      cells.push_back(cell);
      pab[key_of(cell, ab)] += fit.probabilities[k];
      pas[key_of(cell, as)] += fit.probabilities[k];
      pbs[key_of(cell, bs)] += fit.probabilities[k];
      ps[key_of(cell, cond)] += fit.probabilities[k];
    }
    for (const auto& cell : cells) {
      const double lhs = pab[key_of(cell, ab)] * ps[key_of(cell, cond)];
      const double rhs = pas[key_of(cell, as)] * pbs[key_of(cell, bs)];
      out.record(std::abs(lhs - rhs), 1e-6, "factorization: " + format_class(gc));
    }
  }
  if (out.cases < pairs) out.fail("too few positive queries");
  return out;
}

// (f) For df = 2 the tail is exp(-x/2).
inline Outcome chi2_df2_property() {
  Outcome out;
  for (int k = 1; k <= 500; ++k) {
    const double x = 0.1 * k;
    ++out.cases;
    out.record(std::abs(chi_sq_pvalue(x, 2) - std::exp(-x / 2.0)), 1e-12, "x = " + std::to_string(x));
  }
  return out;
}

}  // namespace splitlab::testing
