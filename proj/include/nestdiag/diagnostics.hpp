#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nestdiag/estimators.hpp"
#include "nestdiag/run.hpp"

namespace nestdiag {

inline constexpr std::size_t kBudgetUncertaintyReplications = 1000;

/// sqrt(sigma_values^2 - sigma_bs^2) when sigma_values > sigma_bs, else 0.
double sigma_imp(double sigma_values, double sigma_bs);

/// sigma_imp / sigma_values, clamped to [0, 1]. sigma_values must be > 0.
double imp_fraction(double sigma_values, double sigma_bs);

/// sqrt(rmse^2 - sigma_bs^2) when rmse > sigma_bs, else 0.
double sigma_imp_rmse(double rmse, double sigma_bs);

/// Error on the combination of n_runs runs: sigma_values / sqrt(n_runs).
double sigma_combined(double sigma_values, std::size_t n_runs);

/// Two-sample Kolmogorov-Smirnov statistic sup_x |F_a(x) - F_b(x)| with
/// right-continuous empirical CDFs. Evaluated exactly as |i*m - j*n| / (n*m).
double ks_statistic(std::span<const double> a, std::span<const double> b);

/// Asymptotic two-sample p-value 2 exp(-2 n1 n2 D^2 / (n1 + n2)), clamped to 1.
double ks_pvalue(double d, std::size_t n1, std::size_t n2);

enum class PairTestKind { thread, bootstrap };

struct PairTestResult {
  PairTestKind kind = PairTestKind::thread;
  double ks_statistic = 0.0;
  std::optional<double> p_value;  // thread tests only
  EstimatorSpec estimator;
  std::string run1;
  std::string run2;
  std::size_t n1 = 0;
  std::size_t n2 = 0;
};

/// The estimator evaluated on each thread of the run, each thread treated as
/// a single-live-point run (log X = -1, -2, ...).
std::vector<double> thread_values(const NSRun& run, const EstimatorSpec& spec);

/// KS test between the per-thread estimates of two runs.
PairTestResult thread_ks_test(const NSRun& run1, const NSRun& run2, const EstimatorSpec& spec);

/// KS distance between the bootstrap distributions of two runs. Both runs use
/// the same seed, so a run compared with itself gives 0. No p-value.
PairTestResult bootstrap_distance(const NSRun& run1, const NSRun& run2, const EstimatorSpec& spec,
                                  std::size_t replications, std::uint64_t seed);

/// Holm-Bonferroni step-down procedure; true = reject, in input order.
std::vector<bool> holm_bonferroni(std::span<const double> p_values, double alpha);

/// Standard errors of the budget entries, from bootstrapping over runs.
struct BudgetUncertainty {
  double mean = 0.0;
  double sigma_values = 0.0;
  double sigma_bs = 0.0;
  double sigma_imp = 0.0;
  double imp_fraction = 0.0;
  std::optional<double> rmse;
  std::optional<double> sigma_imp_rmse;
};

/// Implementation-effect summary for one estimator over a set of runs.
struct ErrorBudget {
  EstimatorSpec estimator;
  std::size_t n_runs = 0;
  double mean = 0.0;
  double sigma_values = 0.0;
  double sigma_bs = 0.0;
  double sigma_imp = 0.0;
  double imp_fraction = 0.0;
  std::optional<double> true_value;
  std::optional<double> rmse;
  std::optional<double> sigma_imp_rmse;
  BudgetUncertainty uncertainty;
  std::vector<double> run_values;    // estimate from each run
  std::vector<double> run_bs_std;    // bootstrap_std of each run
};

/// Assembles a budget from per-run estimates and per-run bootstrap standard
/// deviations. sigma_bs is their mean; uncertainties come from `uncertainty_reps`
/// resamples of the runs drawn with Rng(seed).
ErrorBudget assemble_budget(const EstimatorSpec& spec, std::span<const double> run_values,
                            std::span<const double> run_bs_std, std::optional<double> true_value,
                            std::uint64_t seed,
                            std::size_t uncertainty_reps = kBudgetUncertaintyReplications);

/// Error budget over a set of runs. Run k is bootstrapped with
/// derive_seed(seed, k); needs at least 2 runs.
ErrorBudget error_budget(std::span<const NSRun> runs, const EstimatorSpec& spec, std::size_t replications,
                         std::uint64_t seed, std::optional<double> true_value = std::nullopt);

/// Budgets for several estimators sharing the bootstrap replications.
/// true_values is empty or one entry per spec.
std::vector<ErrorBudget> error_budgets(std::span<const NSRun> runs, std::span<const EstimatorSpec> specs,
                                       std::size_t replications, std::uint64_t seed,
                                       std::span<const std::optional<double>> true_values = {});

}  // namespace nestdiag
