#include "nestdiag/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace nestdiag {

std::string format_double(double v) {
  if (std::isinf(v)) return v < 0 ? "-inf" : "inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string format_with_uncertainty(double value, double uncertainty) {
  char buf[64];
  // Uncertainties at rounding-noise level (identical runs) print as exact.
  const bool noise = uncertainty <= 1e-10 * std::abs(value);
  if (!(uncertainty > 0.0) || !std::isfinite(uncertainty) || noise) {
    std::snprintf(buf, sizeof buf, "%.4g", value);
    return buf;
  }
  int exponent = static_cast<int>(std::floor(std::log10(uncertainty)));
  const double lead = uncertainty / std::pow(10.0, exponent);
  int digits = std::round(lead) < 2.0 ? 2 : 1;
  int decimals = std::max(0, digits - 1 - exponent);
  long long unc = std::llround(uncertainty * std::pow(10.0, decimals));
  if (unc >= (digits == 1 ? 10 : 100) && decimals > 0) {
    --decimals;
    unc = std::llround(uncertainty * std::pow(10.0, decimals));
  }
  std::snprintf(buf, sizeof buf, "%.*f(%lld)", decimals, value, unc);
  return buf;
}

namespace {

std::string cell(const std::optional<double>& v, const std::optional<double>& u) {
  if (!v) return "-";
  return format_with_uncertainty(*v, u.value_or(0.0));
}

std::string opt_csv(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

}  // namespace

std::string budget_table(const std::vector<ErrorBudget>& budgets) {
  std::vector<std::string> header{""};
  for (const auto& b : budgets) header.push_back(b.estimator.str());

  std::vector<std::vector<std::string>> rows;
  auto add = [&](std::string label, auto getter) {
    std::vector<std::string> row{std::move(label)};
    for (const auto& b : budgets) row.push_back(getter(b));
    rows.push_back(std::move(row));
  };
  const bool any_truth = std::any_of(budgets.begin(), budgets.end(), [](auto& b) { return b.true_value.has_value(); });
  if (any_truth)
    add("True value", [](const ErrorBudget& b) { return b.true_value ? format_double(*b.true_value) : "-"; });
  add("Mean result", [](const ErrorBudget& b) { return format_with_uncertainty(b.mean, b.uncertainty.mean); });
  add("sigma_values", [](const ErrorBudget& b) {
    return format_with_uncertainty(b.sigma_values, b.uncertainty.sigma_values);
  });
  add("sigma_bs", [](const ErrorBudget& b) { return format_with_uncertainty(b.sigma_bs, b.uncertainty.sigma_bs); });
  add("sigma_imp", [](const ErrorBudget& b) { return format_with_uncertainty(b.sigma_imp, b.uncertainty.sigma_imp); });
  add("sigma_imp/sigma_values", [](const ErrorBudget& b) {
    return format_with_uncertainty(b.imp_fraction, b.uncertainty.imp_fraction);
  });
  if (any_truth) {
    add("Values RMSE", [](const ErrorBudget& b) { return cell(b.rmse, b.uncertainty.rmse); });
    add("sigma_imp,RMSE", [](const ErrorBudget& b) { return cell(b.sigma_imp_rmse, b.uncertainty.sigma_imp_rmse); });
  }
  add("runs", [](const ErrorBudget& b) { return std::to_string(b.n_runs); });

  std::vector<std::size_t> width(header.size(), 0);
  for (std::size_t c = 0; c < header.size(); ++c) {
    width[c] = header[c].size();
    for (const auto& r : rows) width[c] = std::max(width[c], r[c].size());
  }
  std::ostringstream out;
  auto emit = [&](const std::vector<std::string>& r) {
    for (std::size_t c = 0; c < r.size(); ++c) {
      if (c) out << "  ";
      out << r[c] << std::string(width[c] - r[c].size(), ' ');
    }
    out << '\n';
  };
  emit(header);
  for (const auto& r : rows) emit(r);
  return out.str();
}

std::string budget_csv(const std::vector<ErrorBudget>& budgets) {
  std::ostringstream out;
  out << "estimator,n_runs,mean,sigma_values,sigma_bs,sigma_imp,imp_fraction,rmse,sigma_imp_rmse,"
         "mean_unc,sigma_values_unc,sigma_bs_unc,sigma_imp_unc,imp_fraction_unc,rmse_unc,sigma_imp_rmse_unc\n";
  for (const auto& b : budgets) {
    const auto& u = b.uncertainty;
    out << b.estimator.str() << ',' << b.n_runs << ',' << format_double(b.mean) << ','
        << format_double(b.sigma_values) << ',' << format_double(b.sigma_bs) << ',' << format_double(b.sigma_imp)
        << ',' << format_double(b.imp_fraction) << ',' << opt_csv(b.rmse) << ',' << opt_csv(b.sigma_imp_rmse) << ','
        << format_double(u.mean) << ',' << format_double(u.sigma_values) << ',' << format_double(u.sigma_bs) << ','
        << format_double(u.sigma_imp) << ',' << format_double(u.imp_fraction) << ',' << opt_csv(u.rmse) << ','
        << opt_csv(u.sigma_imp_rmse) << '\n';
  }
  return out.str();
}

namespace {

std::string verdict(const DiagnosticReport& report, std::size_t thread_index) {
  if (thread_index >= report.pair_rejected.size()) return "";
  return report.pair_rejected[thread_index] ? "reject" : "accept";
}

}  // namespace

std::string pair_tests_csv(const DiagnosticReport& report) {
  std::ostringstream out;
  out << "run1,run2,estimator,test,statistic,p_value,n1,n2,reject\n";
  std::size_t thread_index = 0;
  for (const auto& t : report.pair_tests) {
    const bool thread = t.kind == PairTestKind::thread;
    out << t.run1 << ',' << t.run2 << ',' << t.estimator.str() << ',' << (thread ? "thread_ks" : "bootstrap_ks")
        << ',' << format_double(t.ks_statistic) << ',' << (t.p_value ? format_double(*t.p_value) : "") << ','
        << t.n1 << ',' << t.n2 << ',';
    if (thread) out << (verdict(report, thread_index++) == "reject" ? "1" : "0");
    out << '\n';
  }
  return out.str();
}

std::string pair_tests_table(const DiagnosticReport& report) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-16s %-16s %-14s %-12s %10s %12s  %s\n", "run1", "run2", "estimator", "test",
                "statistic", "p-value", "holm-bonferroni");
  out << line;
  std::size_t thread_index = 0;
  for (const auto& t : report.pair_tests) {
    const bool thread = t.kind == PairTestKind::thread;
    char p[32] = "-";
    if (t.p_value) std::snprintf(p, sizeof p, "%.3g", *t.p_value);
    const std::string v = thread ? verdict(report, thread_index++) : "";
    std::snprintf(line, sizeof line, "%-16s %-16s %-14s %-12s %10.4f %12s  %s\n", t.run1.c_str(), t.run2.c_str(),
                  t.estimator.str().c_str(), thread ? "thread_ks" : "bootstrap_ks", t.ks_statistic, p, v.c_str());
    out << line;
  }
  std::snprintf(line, sizeof line, "alpha = %g (Holm-Bonferroni over all thread tests)\n", report.alpha);
  out << line;
  return out.str();
}

}  // namespace nestdiag
