#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "splitlab/csi.hpp"
#include "splitlab/graph.hpp"
#include "splitlab/table.hpp"

namespace splitlab {

struct FitOptions {
  /// Largest accepted |N p(i_A, j_b) - n(i_A, j_b)| on the count scale.
  double tol = 1e-8;
  int max_iter = 10000;
  /// Record the log-likelihood after every full cycle.
  bool trace = false;
};

struct FitResult {
  std::vector<double> probabilities;  ///< laid out as the table's schema
  double log_likelihood = 0.0;        ///< Σ n(i) log p(i)
  double deviance = 0.0;              ///< +inf when a positive count gets p = 0
  int df = 0;
  double p_value = 1.0;
  double aic = 0.0;
  int iterations = 0;
  bool converged = false;
  double max_residual = 0.0;
  std::vector<double> trace;  ///< log-likelihood per cycle when requested
};

struct TestResult {
  double deviance = 0.0;
  int df = 0;
  double p_value = 1.0;
  double aic = 0.0;
  std::string label;
  std::int64_t count = 0;
};

/// Maximum likelihood fit of a CSI model by cyclic iterative proportional
/// scaling from the uniform distribution. Non-convergence is reported via
/// `converged`, not thrown. Throws ArgumentError for an empty class or a
/// schema mismatch.
FitResult ips_fit(const ContingencyTable& table, const GeneratingClass& gc, const FitOptions& opts = {});

/// Closed-form fit of a decomposable graphical model (clique marginals over
/// separator marginals); falls back to IPS when the graph is not
/// decomposable. The graph's vertices must be the table's variables.
FitResult fit_graph(const ContingencyTable& table, const Graph& g, const FitOptions& opts = {});

/// Free parameters (including the constant) of a decomposable graphical
/// model over `schema`.
std::size_t decomposable_dimension(const TableSchema& schema, const Graph& g);

/// 2 Σ n log(n / (N p)); +inf when some p is 0 against a positive count.
double deviance(const ContingencyTable& table, const std::vector<double>& probabilities);
double deviance(const ContingencyTable& table, const FitResult& fit);

/// Log-likelihood Σ n log p with 0 log 0 = 0.
double log_likelihood(const ContingencyTable& table, const std::vector<double>& probabilities);

/// Upper tail of the chi-square distribution. For df = 0 the distribution
/// is a point mass at zero. Throws ArgumentError on negative input.
double chi_sq_pvalue(double dev, int df);

/// Regularized upper incomplete gamma Q(a, x).
double gamma_q(double a, double x);

/// The package's AIC convention: deviance minus twice the degrees of freedom.
double aic(double dev, int df);

/// Fills p_value and aic from deviance and df.
TestResult make_test(double dev, int df, std::int64_t count, std::string label = {});

/// Likelihood ratio test of `small` within `big`; throws ArgumentError when
/// span(small) is not contained in span(big).
TestResult test_nested(const ContingencyTable& table, const GeneratingClass& small,
                       const GeneratingClass& big, const FitOptions& opts = {});

/// Test of u ⊥ v | s on the marginal table over {u, v} ∪ s, in closed form.
TestResult conditional_independence_test(const ContingencyTable& table, const std::string& u,
                                         const std::string& v, const VarSet& s);

}  // namespace splitlab
