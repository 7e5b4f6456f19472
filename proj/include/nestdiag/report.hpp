#pragma once

#include <string>
#include <vector>

#include "nestdiag/diagnostics.hpp"

namespace nestdiag {

/// Error budgets for a run set plus any pairwise test results.
struct DiagnosticReport {
  std::vector<ErrorBudget> budgets;
  std::vector<PairTestResult> pair_tests;
  std::vector<bool> pair_rejected;  // Holm-Bonferroni verdicts, parallel to the thread tests
  double alpha = 0.05;
};

/// "0.326(3)": value rounded to the uncertainty's last significant digit
/// (two digits when it starts with 1).
/// A zero or rounding-noise uncertainty prints the value alone ("%.4g").
std::string format_with_uncertainty(double value, double uncertainty);

/// Column-aligned table: one column per estimator, one row per quantity.
std::string budget_table(const std::vector<ErrorBudget>& budgets);

/// Header: estimator,n_runs,mean,sigma_values,sigma_bs,sigma_imp,imp_fraction,
/// rmse,sigma_imp_rmse, then the same quantities suffixed _unc.
std::string budget_csv(const std::vector<ErrorBudget>& budgets);

/// Header: run1,run2,estimator,test,statistic,p_value,n1,n2,reject
std::string pair_tests_csv(const DiagnosticReport& report);
std::string pair_tests_table(const DiagnosticReport& report);

/// Shortest decimal string that parses back to the same double.
std::string format_double(double v);

}  // namespace nestdiag
