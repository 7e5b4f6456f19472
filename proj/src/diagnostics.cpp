#include "nestdiag/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "nestdiag/error.hpp"
#include "nestdiag/resampling.hpp"
#include "nestdiag/rng.hpp"

namespace nestdiag {

namespace {

void require_nonnegative(double v, const char* what) {
  if (!(v >= 0.0)) throw Error(std::string(what) + " must be nonnegative");
}

std::string run_id(const NSRun& run, const char* fallback) {
  auto it = run.meta.find("id");
  return it != run.meta.end() ? it->second : fallback;
}

double mean_of(std::span<const double> v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Spread of a set of values; 0 for a single value.
double spread(std::span<const double> v) { return v.size() < 2 ? 0.0 : sample_std(v); }

double root_mean_square_error(std::span<const double> v, double truth) {
  double ss = 0.0;
  for (double x : v) ss += (x - truth) * (x - truth);
  return std::sqrt(ss / static_cast<double>(v.size()));
}

}  // namespace

double sigma_imp(double sigma_values, double sigma_bs) {
  require_nonnegative(sigma_values, "sigma_values");
  require_nonnegative(sigma_bs, "sigma_bs");
  if (sigma_values <= sigma_bs) return 0.0;
  return std::sqrt((sigma_values - sigma_bs) * (sigma_values + sigma_bs));
}

double imp_fraction(double sigma_values, double sigma_bs) {
  if (!(sigma_values > 0.0)) throw Error("imp_fraction: sigma_values must be positive");
  return std::clamp(sigma_imp(sigma_values, sigma_bs) / sigma_values, 0.0, 1.0);
}

double sigma_imp_rmse(double rmse, double sigma_bs) {
  require_nonnegative(rmse, "rmse");
  require_nonnegative(sigma_bs, "sigma_bs");
  if (rmse <= sigma_bs) return 0.0;
  return std::sqrt((rmse - sigma_bs) * (rmse + sigma_bs));
}

double sigma_combined(double sigma_values, std::size_t n_runs) {
  if (n_runs < 1) throw Error("sigma_combined: need at least one run");
  return sigma_values / std::sqrt(static_cast<double>(n_runs));
}

double ks_statistic(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw Error("ks_statistic: empty sample");
  std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  const auto n = static_cast<long long>(x.size());
  const auto m = static_cast<long long>(y.size());
  long long i = 0, j = 0, best = 0;
  while (i < n || j < m) {
    double v;
    if (j >= m || (i < n && x[i] <= y[j])) {
      v = x[i];
    } else {
      v = y[j];
    }
    while (i < n && x[i] == v) ++i;
    while (j < m && y[j] == v) ++j;
    best = std::max(best, std::llabs(i * m - j * n));
  }
  return static_cast<double>(best) / static_cast<double>(n * m);
}

double ks_pvalue(double d, std::size_t n1, std::size_t n2) {
  if (!(d >= 0.0 && d <= 1.0)) throw Error("ks_pvalue: statistic must lie in [0, 1]");
  if (n1 < 1 || n2 < 1) throw Error("ks_pvalue: sample sizes must be positive");
  const double a = static_cast<double>(n1), b = static_cast<double>(n2);
  return std::min(1.0, 2.0 * std::exp(-2.0 * a * b / (a + b) * d * d));
}

std::vector<double> thread_values(const NSRun& run, const EstimatorSpec& spec) {
  spec.check_dimension(run.dim());
  const auto threads = decompose_threads(run);
  if (threads.size() < 2)
    throw Error("thread test needs at least 2 threads, run has " + std::to_string(threads.size()));
  std::vector<double> out(threads.size());
  for (std::size_t t = 0; t < threads.size(); ++t) {
    const auto& tr = threads[t].run;
    const double v = estimate(tr, logx_expected(tr), spec);
    if (!std::isfinite(v)) throw Error("estimator " + spec.str() + " undefined on thread " + std::to_string(t));
    out[t] = v;
  }
  return out;
}

PairTestResult thread_ks_test(const NSRun& run1, const NSRun& run2, const EstimatorSpec& spec) {
  const auto a = thread_values(run1, spec);
  const auto b = thread_values(run2, spec);
  PairTestResult r;
  r.kind = PairTestKind::thread;
  r.ks_statistic = ks_statistic(a, b);
  r.p_value = ks_pvalue(r.ks_statistic, a.size(), b.size());
  r.estimator = spec;
  r.run1 = run_id(run1, "run1");
  r.run2 = run_id(run2, "run2");
  r.n1 = a.size();
  r.n2 = b.size();
  return r;
}

PairTestResult bootstrap_distance(const NSRun& run1, const NSRun& run2, const EstimatorSpec& spec,
                                  std::size_t replications, std::uint64_t seed) {
  if (replications < 2) throw Error("bootstrap_distance: need at least 2 replications");
  const auto a = bootstrap_values(run1, spec, replications, seed);
  const auto b = bootstrap_values(run2, spec, replications, seed);
  PairTestResult r;
  r.kind = PairTestKind::bootstrap;
  r.ks_statistic = ks_statistic(a.values, b.values);
  r.estimator = spec;
  r.run1 = run_id(run1, "run1");
  r.run2 = run_id(run2, "run2");
  r.n1 = r.n2 = replications;
  return r;
}

std::vector<bool> holm_bonferroni(std::span<const double> p_values, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw Error("holm_bonferroni: alpha must lie in (0, 1)");
  for (double p : p_values) {
    if (!(p >= 0.0 && p <= 1.0)) throw Error("holm_bonferroni: p-values must lie in [0, 1]");
  }
  const auto m = p_values.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return p_values[a] < p_values[b]; });
  std::vector<bool> reject(m, false);
  for (std::size_t k = 0; k < m; ++k) {
    if (p_values[order[k]] > alpha / static_cast<double>(m - k)) break;
    reject[order[k]] = true;
  }
  return reject;
}

namespace {

struct BudgetPoint {
  double mean, sigma_values, sigma_bs, sigma_imp, imp_fraction, rmse, sigma_imp_rmse;
};

BudgetPoint budget_point(std::span<const double> values, std::span<const double> bs_std,
                         std::optional<double> truth) {
  BudgetPoint p{};
  p.mean = mean_of(values);
  p.sigma_values = spread(values);
  p.sigma_bs = mean_of(bs_std);
  p.sigma_imp = sigma_imp(p.sigma_values, p.sigma_bs);
  // No variation between runs means no detectable implementation effect.
  p.imp_fraction = p.sigma_values > 0.0 ? imp_fraction(p.sigma_values, p.sigma_bs) : 0.0;
  if (truth) {
    p.rmse = root_mean_square_error(values, *truth);
    p.sigma_imp_rmse = sigma_imp_rmse(p.rmse, p.sigma_bs);
  }
  return p;
}

}  // namespace

ErrorBudget assemble_budget(const EstimatorSpec& spec, std::span<const double> run_values,
                            std::span<const double> run_bs_std, std::optional<double> true_value,
                            std::uint64_t seed, std::size_t uncertainty_reps) {
  const auto n = run_values.size();
  if (n < 2) throw Error("error budget needs at least 2 runs, got " + std::to_string(n));
  if (run_bs_std.size() != n) throw Error("error budget: one bootstrap std per run required");

  const auto central = budget_point(run_values, run_bs_std, true_value);
  ErrorBudget b;
  b.estimator = spec;
  b.n_runs = n;
  b.mean = central.mean;
  b.sigma_values = central.sigma_values;
  b.sigma_bs = central.sigma_bs;
  b.sigma_imp = central.sigma_imp;
  b.imp_fraction = central.imp_fraction;
  b.true_value = true_value;
  if (true_value) {
    b.rmse = central.rmse;
    b.sigma_imp_rmse = central.sigma_imp_rmse;
  }
  b.run_values.assign(run_values.begin(), run_values.end());
  b.run_bs_std.assign(run_bs_std.begin(), run_bs_std.end());

  if (uncertainty_reps >= 2) {
    Rng rng(seed);
    std::vector<BudgetPoint> reps(uncertainty_reps);
    std::vector<double> v(n), s(n);
    for (auto& rep : reps) {
      for (std::size_t k = 0; k < n; ++k) {
        const auto pick = rng.index(n);
        v[k] = run_values[pick];
        s[k] = run_bs_std[pick];
      }
      rep = budget_point(v, s, true_value);
    }
    auto sd = [&](double BudgetPoint::*field) {
      std::vector<double> xs(reps.size());
      for (std::size_t r = 0; r < reps.size(); ++r) xs[r] = reps[r].*field;
      return sample_std(xs);
    };
    b.uncertainty.mean = sd(&BudgetPoint::mean);
    b.uncertainty.sigma_values = sd(&BudgetPoint::sigma_values);
    b.uncertainty.sigma_bs = sd(&BudgetPoint::sigma_bs);
    b.uncertainty.sigma_imp = sd(&BudgetPoint::sigma_imp);
    b.uncertainty.imp_fraction = sd(&BudgetPoint::imp_fraction);
    if (true_value) {
      b.uncertainty.rmse = sd(&BudgetPoint::rmse);
      b.uncertainty.sigma_imp_rmse = sd(&BudgetPoint::sigma_imp_rmse);
    }
  }
  return b;
}

std::vector<ErrorBudget> error_budgets(std::span<const NSRun> runs, std::span<const EstimatorSpec> specs,
                                       std::size_t replications, std::uint64_t seed,
                                       std::span<const std::optional<double>> true_values) {
  if (runs.size() < 2) throw Error("error budget needs at least 2 runs, got " + std::to_string(runs.size()));
  if (replications < 2) throw Error("error budget needs at least 2 bootstrap replications");
  if (!true_values.empty() && true_values.size() != specs.size())
    throw Error("error budget: one true value per estimator required");

  const auto n = runs.size();
  std::vector<std::vector<double>> values(specs.size(), std::vector<double>(n));
  std::vector<std::vector<double>> bs_std(specs.size(), std::vector<double>(n));
  for (std::size_t k = 0; k < n; ++k) {
    const auto logx = logx_expected(runs[k]);
    for (std::size_t s = 0; s < specs.size(); ++s) values[s][k] = estimate(runs[k], logx, specs[s]);
    const auto samples = bootstrap_values(runs[k], specs, replications, derive_seed(seed, k));
    for (std::size_t s = 0; s < specs.size(); ++s) bs_std[s][k] = bootstrap_std(samples[s]);
  }

  std::vector<ErrorBudget> out;
  const auto uncertainty_seed = derive_seed(splitmix64(seed), 0);
  for (std::size_t s = 0; s < specs.size(); ++s) {
    const auto truth = true_values.empty() ? std::nullopt : true_values[s];
    out.push_back(assemble_budget(specs[s], values[s], bs_std[s], truth, uncertainty_seed));
  }
  return out;
}

ErrorBudget error_budget(std::span<const NSRun> runs, const EstimatorSpec& spec, std::size_t replications,
                         std::uint64_t seed, std::optional<double> true_value) {
  const std::optional<double> truths[1] = {true_value};
  return std::move(error_budgets(runs, std::span(&spec, 1), replications, seed, truths).front());
}

}  // namespace nestdiag
