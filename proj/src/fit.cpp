#include "splitlab/fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "splitlab/error.hpp"

namespace splitlab {

namespace {

constexpr std::size_t kOutside = static_cast<std::size_t>(-1);

// Cells grouped by a generator: slot = configuration of the head inside the
// context slice, kOutside elsewhere.
struct SlotMap {
  std::vector<std::size_t> slot;
  std::vector<double> target;  // n(i_A, j_b)
  double outside_target = 0.0;
  bool has_outside = false;
};

SlotMap make_slots(const ContingencyTable& table, const Generator& g) {
  const auto& schema = table.schema();
  SlotMap m;
  m.slot = projection_map(schema, g.head);
  m.target.assign(schema.configurations(g.head), 0.0);
  for (const auto& [name, level] : g.context.assignment()) {
    const auto k = schema.position(name);
    const auto levels = static_cast<std::size_t>(schema.variables()[k].levels);
    for (std::size_t i = 0; i < m.slot.size(); ++i)
      if ((i / schema.stride(k)) % levels != static_cast<std::size_t>(level)) m.slot[i] = kOutside;
  }
  for (std::size_t i = 0; i < m.slot.size(); ++i) {
    const auto n = static_cast<double>(table.counts()[i]);
    if (m.slot[i] == kOutside) {
      m.has_outside = true;
      m.outside_target += n;
    } else {
      m.target[m.slot[i]] += n;
    }
  }
  return m;
}

// Largest |N p(slot) - n(slot)| over the slots of one generator.
double residual(const SlotMap& m, const std::vector<double>& p, double total) {
  std::vector<double> fitted(m.target.size(), 0.0);
  for (std::size_t i = 0; i < p.size(); ++i)
    if (m.slot[i] != kOutside) fitted[m.slot[i]] += p[i];
  double worst = 0.0;
  for (std::size_t s = 0; s < fitted.size(); ++s)
    worst = std::max(worst, std::abs(total * fitted[s] - m.target[s]));
  return worst;
}

void scale(const SlotMap& m, std::vector<double>& p, double total) {
  std::vector<double> fitted(m.target.size(), 0.0);
  double outside = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (m.slot[i] == kOutside)
      outside += p[i];
    else
      fitted[m.slot[i]] += p[i];
  }
  std::vector<double> factor(fitted.size(), 0.0);
  for (std::size_t s = 0; s < fitted.size(); ++s)
    factor[s] = fitted[s] > 0.0 ? m.target[s] / (total * fitted[s]) : 0.0;
  // The complement of the context slice is one more block of the partition;
  // rescaling it keeps the total mass at one.
  const double outside_factor = outside > 0.0 ? m.outside_target / (total * outside) : 0.0;
  for (std::size_t i = 0; i < p.size(); ++i)
    p[i] *= m.slot[i] == kOutside ? outside_factor : factor[m.slot[i]];
}

void finish(const ContingencyTable& table, FitResult& r, std::size_t dim) {
  r.log_likelihood = log_likelihood(table, r.probabilities);
  r.deviance = deviance(table, r.probabilities);
  r.df = static_cast<int>(table.schema().cell_count() - dim);
  r.p_value = chi_sq_pvalue(r.deviance, r.df);
  r.aic = aic(r.deviance, r.df);
}

}  // namespace

double log_likelihood(const ContingencyTable& table, const std::vector<double>& probabilities) {
  double ll = 0.0;
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    const auto n = table.counts()[i];
    if (n == 0) continue;
    if (probabilities[i] <= 0.0) return -std::numeric_limits<double>::infinity();
    ll += static_cast<double>(n) * std::log(probabilities[i]);
  }
  return ll;
}

double deviance(const ContingencyTable& table, const std::vector<double>& probabilities) {
  if (probabilities.size() != table.schema().cell_count())
    throw ArgumentError("fitted probabilities do not match the table");
  const double total = static_cast<double>(table.total());
  double dev = 0.0;
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    const auto n = static_cast<double>(table.counts()[i]);
    if (n == 0.0) continue;
    if (probabilities[i] <= 0.0) return std::numeric_limits<double>::infinity();
    dev += n * std::log(n / (total * probabilities[i]));
  }
  return std::max(0.0, 2.0 * dev);
}

double deviance(const ContingencyTable& table, const FitResult& fit) {
  return deviance(table, fit.probabilities);
}

FitResult ips_fit(const ContingencyTable& table, const GeneratingClass& gc, const FitOptions& opts) {
  if (gc.empty()) throw ArgumentError("cannot fit an empty generating class");
  if (!(gc.schema() == table.schema())) throw ArgumentError("generating class and table schemas differ");
  if (opts.tol <= 0.0) throw ArgumentError("tolerance must be positive");
  if (table.total() == 0) throw ArgumentError("cannot fit an empty table");

  const double total = static_cast<double>(table.total());
  std::vector<SlotMap> slots;
  for (const auto& g : gc.generators()) slots.push_back(make_slots(table, g));

  FitResult r;
  const auto cells = table.schema().cell_count();
  r.probabilities.assign(cells, 1.0 / static_cast<double>(cells));
  while (r.iterations < opts.max_iter) {
    for (const auto& m : slots) scale(m, r.probabilities, total);
    ++r.iterations;
    const double sum = std::accumulate(r.probabilities.begin(), r.probabilities.end(), 0.0);
    for (auto& p : r.probabilities) p /= sum;
    if (opts.trace) r.trace.push_back(log_likelihood(table, r.probabilities));
    r.max_residual = 0.0;
    for (const auto& m : slots) r.max_residual = std::max(r.max_residual, residual(m, r.probabilities, total));
    if (r.max_residual <= opts.tol) {
      r.converged = true;
      break;
    }
  }
  finish(table, r, dimension(gc));
  return r;
}

std::size_t decomposable_dimension(const TableSchema& schema, const Graph& g) {
  const auto chain = clique_chain(g);
  std::size_t dim = 0;
  for (const auto& c : chain.cliques) dim += schema.configurations(c);
  for (std::size_t k = 1; k < chain.separators.size(); ++k) dim -= schema.configurations(chain.separators[k]);
  return dim;
}

FitResult fit_graph(const ContingencyTable& table, const Graph& g, const FitOptions& opts) {
  const auto& schema = table.schema();
  if (g.vertices() != schema.names()) throw ArgumentError("graph vertices must match the table variables");
  if (!is_decomposable(g)) return ips_fit(table, GeneratingClass::from_sets(schema, cliques(g)), opts);
  if (table.total() == 0) throw ArgumentError("cannot fit an empty table");

  const auto chain = clique_chain(g);
  const double total = static_cast<double>(table.total());
  std::vector<double> counts(table.counts().begin(), table.counts().end());
  FitResult r;
  r.probabilities.assign(schema.cell_count(), 1.0 / total);
  auto apply = [&](const VarSet& vars, bool numerator) {
    const auto map = projection_map(schema, vars);
    const auto margin = marginal_sums(schema, counts, vars);
    for (std::size_t i = 0; i < map.size(); ++i) {
      const double m = margin[map[i]];
      if (numerator)
        r.probabilities[i] *= m;
      else
        r.probabilities[i] = m > 0.0 ? r.probabilities[i] / m : 0.0;
    }
  };
  for (const auto& c : chain.cliques) apply(c, true);
  for (std::size_t k = 1; k < chain.separators.size(); ++k) {
    if (chain.separators[k].empty()) {
      for (auto& p : r.probabilities) p /= total;
    } else {
      apply(chain.separators[k], false);
    }
  }
  r.converged = true;
  finish(table, r, decomposable_dimension(schema, g));
  return r;
}

double gamma_q(double a, double x) {
  if (a <= 0.0 || x < 0.0) throw ArgumentError("gamma_q needs a > 0 and x >= 0");
  if (x == 0.0) return 1.0;
  if (std::isinf(x)) return 0.0;
  constexpr double eps = 1e-16;
  constexpr int max_terms = 100000;
  const double log_prefactor = -x + a * std::log(x) - std::lgamma(a);
  if (x < a + 1.0) {
    // Series for P(a, x).
    double ap = a, del = 1.0 / a, sum = del;
    for (int n = 0; n < max_terms; ++n) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::abs(del) < std::abs(sum) * eps) break;
    }
    return std::clamp(1.0 - sum * std::exp(log_prefactor), 0.0, 1.0);
  }
  // Continued fraction for Q(a, x) (modified Lentz).
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
  for (int i = 1; i < max_terms; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < eps) break;
  }
  return std::clamp(std::exp(log_prefactor) * h, 0.0, 1.0);
}

double chi_sq_pvalue(double dev, int df) {
  if (df < 0 || dev < 0.0 || std::isnan(dev)) throw ArgumentError("chi-square needs dev >= 0 and df >= 0");
  if (df == 0) return dev == 0.0 ? 1.0 : 0.0;
  return gamma_q(0.5 * df, 0.5 * dev);
}

double aic(double dev, int df) { return dev - 2.0 * df; }

TestResult make_test(double dev, int df, std::int64_t count, std::string label) {
  TestResult t;
  t.deviance = dev;
  t.df = df;
  t.p_value = chi_sq_pvalue(dev, df);
  t.aic = aic(dev, df);
  t.count = count;
  t.label = std::move(label);
  return t;
}

TestResult test_nested(const ContingencyTable& table, const GeneratingClass& small,
                       const GeneratingClass& big, const FitOptions& opts) {
  const auto dim_big = dimension(big);
  const auto dim_small = dimension(small);
  if (dimension(big.merged(small)) != dim_big)
    throw ArgumentError("model is not nested in the alternative");
  const auto fit_small = ips_fit(table, small, opts);
  const auto fit_big = ips_fit(table, big, opts);
  const double dev = std::max(0.0, fit_small.deviance - fit_big.deviance);
  return make_test(dev, static_cast<int>(dim_big - dim_small), table.total());
}

TestResult conditional_independence_test(const ContingencyTable& table, const std::string& u,
                                         const std::string& v, const VarSet& s) {
  if (u == v || s.count(u) || s.count(v)) throw ArgumentError("u, v and s must be disjoint");
  VarSet all = s;
  all.insert(u);
  all.insert(v);
  const auto m = marginalize(table, all);
  const auto& schema = m.schema();
  std::vector<double> counts(m.counts().begin(), m.counts().end());
  VarSet us = s, vs = s;
  us.insert(u);
  vs.insert(v);
  const auto map_us = projection_map(schema, us);
  const auto map_vs = projection_map(schema, vs);
  const auto map_s = projection_map(schema, s);
  const auto n_us = marginal_sums(schema, counts, us);
  const auto n_vs = marginal_sums(schema, counts, vs);
  const auto n_s = marginal_sums(schema, counts, s);
  double dev = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] == 0.0) continue;
    dev += counts[i] * std::log(counts[i] * n_s[map_s[i]] / (n_us[map_us[i]] * n_vs[map_vs[i]]));
  }
  int df = (schema.levels(u) - 1) * (schema.levels(v) - 1);
  for (const auto& w : s) df *= schema.levels(w);
  return make_test(std::max(0.0, 2.0 * dev), df, table.total());
}

}  // namespace splitlab
