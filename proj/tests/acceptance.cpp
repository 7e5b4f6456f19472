// Acceptance checks 1-10. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>

#include "nestdiag/diagnostics.hpp"
#include "nestdiag/io.hpp"
#include "nestdiag/likelihoods.hpp"
#include "nestdiag/plotdata.hpp"
#include "nestdiag/resampling.hpp"
#include "nestdiag/sampler.hpp"
#include "oracles.hpp"

using namespace nestdiag;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " [failed: " << what << "]";
    }
  }
};

SamplerSettings settings(int nlive, std::uint64_t seed, int repeats = 20) {
  SamplerSettings s;
  s.nlive = nlive;
  s.seed = seed;
  s.num_repeats = repeats;
  return s;
}

std::vector<NSRun> perfect_runs(std::size_t count, std::size_t d, int nlive, std::uint64_t seed) {
  std::vector<NSRun> runs(count);
  parallel_for(count, [&](std::size_t k) {
    runs[k] = perfect_ns_gaussian(d, settings(nlive, derive_seed(seed, k)));
    runs[k].meta["id"] = "run" + std::to_string(k);
  });
  return runs;
}

std::vector<NSRun> loggamma_runs(std::size_t count, int repeats, std::uint64_t seed) {
  const LikelihoodSpec lg(LikelihoodSpec::Kind::loggamma_mix, 2);
  std::vector<NSRun> runs(count);
  parallel_for(count, [&](std::size_t k) {
    runs[k] = slice_ns(lg, settings(100, derive_seed(seed, k), repeats));
    runs[k].meta["id"] = "run" + std::to_string(k);
  });
  return runs;
}

double radius(std::span<const double> theta) {
  double s = 0.0;
  for (double x : theta) s += x * x;
  return std::sqrt(s);
}

std::vector<double> pairwise_thread_pvalues(const std::vector<NSRun>& runs, const EstimatorSpec& spec) {
  std::vector<double> p;
  for (std::size_t i = 0; i < runs.size(); ++i)
    for (std::size_t j = i + 1; j < runs.size(); ++j) p.push_back(*thread_ks_test(runs[i], runs[j], spec).p_value);
  return p;
}

double median_of(std::vector<double> v) { return quantile(std::move(v), 0.5); }

bool nested(const ContourBand& band) {
  for (std::size_t g = 0; g < band.grid.size(); ++g) {
    const double chain[] = {band.lower[2][g], band.lower[1][g], band.lower[0][g], band.median[g],
                            band.upper[0][g], band.upper[1][g], band.upper[2][g]};
    if (!std::is_sorted(std::begin(chain), std::end(chain))) return false;
  }
  return true;
}

// Shared state: criterion 1 and 2 use the same runs, 6 and 7 share the
// num_repeats = 50 runs, 10 reuses both sets.
struct Shared {
  std::vector<NSRun> gaussian;
  std::vector<ErrorBudget> gaussian_budgets;
  std::vector<NSRun> loggamma50;
};

const EstimatorSpec kLogZ = EstimatorSpec::log_evidence();
const EstimatorSpec kMeanT1 = EstimatorSpec::mean(ParamFunction::coordinate(0));

void criterion1(Shared& s, Outcome& o) {
  s.gaussian = perfect_runs(100, 10, 250, 1001);
  const std::vector<EstimatorSpec> specs{kLogZ, kMeanT1};
  const std::vector<std::optional<double>> truth{true_logz(10), std::nullopt};
  s.gaussian_budgets = error_budgets(s.gaussian, specs, 200, 1002, truth);
  const auto& z = s.gaussian_budgets[0];
  const auto& t = s.gaussian_budgets[1];
  o.detail << "mean logz " << z.mean << ", sigma_bs(logz) " << z.sigma_bs << ", sigma_values(logz) " << z.sigma_values
           << ", sigma_bs(mean:t1) " << t.sigma_bs << ", imp_fraction(logz) " << z.imp_fraction;
  o.require(std::abs(z.mean - (-40.9434)) <= 0.10, "mean logz within 0.10 of -40.9434");
  o.require(z.sigma_bs >= 0.30 && z.sigma_bs <= 0.36, "sigma_bs(logz) in [0.30, 0.36]");
  o.require(z.sigma_values >= 0.28 && z.sigma_values <= 0.40, "sigma_values(logz) in [0.28, 0.40]");
  o.require(t.sigma_bs >= 0.019 && t.sigma_bs <= 0.026, "sigma_bs(mean:t1) in [0.019, 0.026]");
  o.require(z.imp_fraction <= 0.45, "imp_fraction(logz) <= 0.45");
}

void criterion2(Shared& s, Outcome& o) {
  for (const auto& b : s.gaussian_budgets) {
    const double ratio = b.sigma_values / b.sigma_bs;
    o.detail << b.estimator.str() << " sigma_values/sigma_bs " << ratio << "; ";
    o.require(std::abs(b.sigma_values - b.sigma_bs) <= 0.2 * b.sigma_bs, b.estimator.str() + " within 20%");
  }
}

void criterion3(Shared&, Outcome& o) {
  // Steps where the live set is constant and the contour ball lies inside the
  // prior box: t = X_{i+1} / X_i = (r_{i+1} / r_i)^d.
  const std::size_t d = 4;
  const int n = 50;
  std::vector<double> scaled;
  for (std::uint64_t seed = 0; scaled.size() < 10000; ++seed) {
    const auto run = perfect_ns_gaussian(d, settings(n, derive_seed(3003, seed)));
    for (std::size_t i = 0; i + 1 < run.size(); ++i) {
      if (run.nlive[i] != n || run.nlive[i + 1] != n) continue;
      const double r0 = radius(run.points[i].params), r1 = radius(run.points[i + 1].params);
      if (r0 > 30.0) continue;
      scaled.push_back(-n * static_cast<double>(d) * std::log(r1 / r0));
    }
  }
  const double mean = oracle::mean(scaled);
  const double se = oracle::stddev(scaled) / std::sqrt(static_cast<double>(scaled.size()));
  o.detail << scaled.size() << " steps, mean -n log t = " << mean << " (se " << se << ")";
  o.require(std::abs(mean - 1.0) <= 3 * se, "mean -n log t within 3 se of 1");

  // 10^5 simulated log X vectors, accumulated in blocks.
  const auto run = perfect_ns_gaussian(2, settings(10, 3004));
  const auto expected = logx_expected(run);
  const std::size_t blocks = 10, per_block = 10000, total = blocks * per_block;
  std::vector<double> sum(run.size(), 0.0), sum_sq(run.size(), 0.0);
  for (std::size_t b = 0; b < blocks; ++b) {
    const auto sims = simulate_logx(run, per_block, derive_seed(3005, b));
    for (std::size_t r = 0; r < per_block; ++r) {
      for (std::size_t c = 0; c < run.size(); ++c) {
        sum[c] += sims(r, c);
        sum_sq[c] += sims(r, c) * sims(r, c);
      }
    }
  }
  double worst = 0.0;
  for (std::size_t c = 0; c < run.size(); ++c) {
    const double mu = sum[c] / static_cast<double>(total);
    const double var = (sum_sq[c] - static_cast<double>(total) * mu * mu) / static_cast<double>(total - 1);
    const double z = std::abs(mu - expected[c]) / std::sqrt(var / static_cast<double>(total));
    worst = std::max(worst, z);
  }
  o.detail << "; " << run.size() << " log X columns, largest |z| " << worst;
  o.require(worst <= 3.0, "every column mean within 3 se of logx_expected");
}

void criterion4(Shared&, Outcome& o) {
  Rng rng(4004);
  const auto sample = [&] {
    std::vector<double> v(1 + rng.index(8));
    for (auto& x : v) x = static_cast<double>(rng.index(6));  // small support forces ties
    return v;
  };
  std::size_t mismatches = 0;
  for (int k = 0; k < 200; ++k) {
    const auto a = sample(), b = sample();
    if (ks_statistic(a, b) != oracle::ks(a, b)) ++mismatches;
  }
  double worst_p = 0.0;
  for (int k = 0; k < 200; ++k) {
    const double d = rng.uniform();
    const std::size_t n1 = 1 + rng.index(500), n2 = 1 + rng.index(500);
    const double direct = std::min(
        1.0, 2.0 * std::exp(-2.0 * static_cast<double>(n1) * static_cast<double>(n2) * d * d /
                            static_cast<double>(n1 + n2)));
    worst_p = std::max(worst_p, std::abs(ks_pvalue(d, n1, n2) - direct));
  }
  std::size_t axiom_failures = 0;
  for (int k = 0; k < 100; ++k) {
    const auto a = sample(), b = sample(), c = sample();
    const double ab = ks_statistic(a, b), ba = ks_statistic(b, a), bc = ks_statistic(b, c), ac = ks_statistic(a, c);
    const bool ok = ks_statistic(a, a) == 0.0 && ab == ba && ab >= 0.0 && ac <= ab + bc + 1e-15;
    if (!ok) ++axiom_failures;
  }
  o.detail << mismatches << " KS mismatches in 200 pairs, worst p-value error " << worst_p << ", " << axiom_failures
           << " metric-axiom failures in 100 triples";
  o.require(mismatches == 0, "KS statistic equals the oracle");
  o.require(worst_p <= 1e-12, "p-value within 1e-12");
  o.require(axiom_failures == 0, "metric axioms");
}

void criterion5(Shared&, Outcome& o) {
  const auto runs = perfect_runs(20, 4, 100, 5005);
  for (const auto& spec : {kLogZ, kMeanT1}) {
    const auto p = pairwise_thread_pvalues(runs, spec);
    const double uniform_p = oracle::uniform_ks_pvalue(p);
    const auto ones = std::count(p.begin(), p.end(), 1.0);
    o.detail << spec.str() << ": " << p.size() << " p-values (" << ones << " clamped to 1), uniformity p " << uniform_p
             << "; ";
    o.require(p.size() == 190, "190 pairs");
    o.require(uniform_p >= 0.01, spec.str() + " p-values not rejected as uniform at 1%");
  }
}

void criterion6(Shared& s, Outcome& o) {
  std::vector<ErrorBudget> budgets;
  std::vector<NSRun> repeats1;
  for (int repeats : {1, 5, 50}) {
    auto runs = loggamma_runs(20, repeats, 6000 + static_cast<std::uint64_t>(repeats));
    budgets.push_back(error_budget(runs, kMeanT1, 200, 6100 + static_cast<std::uint64_t>(repeats)));
    o.detail << "num_repeats " << repeats << ": sigma_imp " << budgets.back().sigma_imp << " imp_fraction "
             << budgets.back().imp_fraction << "; ";
    if (repeats == 1) repeats1 = runs;
    if (repeats == 50) s.loggamma50 = std::move(runs);
  }
  const double median_p = median_of(pairwise_thread_pvalues(repeats1, kMeanT1));
  o.detail << "median thread p at num_repeats 1: " << median_p;
  o.require(budgets[0].sigma_imp > budgets[2].sigma_imp, "sigma_imp(1) > sigma_imp(50)");
  o.require(budgets[0].imp_fraction >= 0.5, "imp_fraction(1) >= 0.5");
  o.require(median_p < 0.05, "median p < 0.05");
}

void criterion7(Shared& s, Outcome& o) {
  const double truth = true_logz(2);
  const auto b = error_budget(s.loggamma50, kLogZ, 200, 7007, truth);
  const double tol = 3 * b.sigma_values / std::sqrt(20.0);
  const double unc = *b.uncertainty.sigma_imp_rmse + b.uncertainty.sigma_imp;
  o.detail << "mean logz " << b.mean << " (tolerance " << tol << "), sigma_imp " << b.sigma_imp << " +- "
           << b.uncertainty.sigma_imp << ", sigma_imp_rmse " << *b.sigma_imp_rmse << " +- "
           << *b.uncertainty.sigma_imp_rmse;
  o.require(std::abs(b.mean - truth) <= tol, "mean logz within 3 sigma_values / sqrt(20)");
  o.require(std::abs(*b.sigma_imp_rmse - b.sigma_imp) <= unc, "sigma_imp_rmse agrees with sigma_imp");
}

void criterion8(Shared&, Outcome& o) {
  // sqrt(a^2 + b^2) carries one rounding; recovering a amplifies it by
  // (a^2 + b^2) / a^2, so the tolerance is a few ulps times that condition number.
  Rng rng(8008);
  const double eps = std::numeric_limits<double>::epsilon();
  double worst_ulps = 0.0;
  for (int k = 0; k < 100; ++k) {
    const double a = 0.01 + 10.0 * rng.uniform(), b = 0.01 + 10.0 * rng.uniform();
    const double condition = (a * a + b * b) / (a * a);
    worst_ulps = std::max(worst_ulps, std::abs(sigma_imp(std::hypot(a, b), b) - a) / (a * eps * condition));
  }
  double worst_frac = 0.0;
  bool combined_exact = true;
  for (int k = 0; k < 100; ++k) {
    const double sigma = 1e-3 + 100.0 * rng.uniform();
    worst_frac = std::max(worst_frac, std::abs(imp_fraction(std::sqrt(2.0) * sigma, sigma) - 1.0 / std::sqrt(2.0)));
    const std::size_t n = 1 + rng.index(1000);
    combined_exact &= sigma_combined(sigma, n) == sigma / std::sqrt(static_cast<double>(n));
  }
  o.detail << "worst sigma_imp error " << worst_ulps << " condition-scaled ulps, worst imp_fraction error "
           << worst_frac;
  o.require(worst_ulps <= 4.0, "sigma_imp recovers a");
  o.require(worst_frac <= 4 * eps, "imp_fraction(sqrt2 s, s) = 1/sqrt2");
  o.require(combined_exact, "sigma_combined exact");
}

void criterion9(Shared&, Outcome& o) {
  std::size_t native_failures = 0, dead_birth_failures = 0;
  const LikelihoodSpec lg(LikelihoodSpec::Kind::loggamma_mix, 2);
  for (std::uint64_t k = 0; k < 50; ++k) {
    const auto seed = derive_seed(9009, k);
    NSRun run = k % 2 == 0 ? perfect_ns_gaussian(1 + k % 5, settings(10 + static_cast<int>(k), seed))
                           : slice_ns(lg, settings(10 + static_cast<int>(k), seed, 3));
    run.meta["id"] = "run" + std::to_string(k);
    if (!(read_native(write_native(run)) == run)) ++native_failures;
    const auto back = parse_dead_birth(write_dead_birth(run));
    const bool same = back.points == run.points && back.nlive == run.nlive &&
                      oracle::partition_of(back.thread_labels) == oracle::partition_of(run.thread_labels);
    if (!same) ++dead_birth_failures;
  }
  o.detail << native_failures << " native and " << dead_birth_failures << " dead-birth round-trip failures in 50 runs";
  o.require(native_failures == 0, "native round trip");
  o.require(dead_birth_failures == 0, "dead-birth round trip");
}

void criterion10(Shared& s, Outcome& o) {
  // Band nesting over Gaussian and LogGamma-mixture runs.
  std::size_t bands = 0, broken = 0;
  const auto check_bands = [&](const std::vector<NSRun>& runs, const std::vector<ParamFunction>& fs) {
    for (std::size_t k = 0; k < 5; ++k) {
      for (std::size_t j = 0; j < fs.size(); ++j) {
        const auto grid = default_grid(runs[k], fs[j], 128);
        ++bands;
        if (!nested(posterior_uncertainty_band(runs[k], fs[j], grid, 100, derive_seed(10010, 10 * k + j)))) ++broken;
      }
    }
  };
  check_bands(s.gaussian, {ParamFunction::coordinate(0), ParamFunction::radial()});
  check_bands(s.loggamma50, {ParamFunction::coordinate(0), ParamFunction::coordinate(1)});
  o.detail << broken << " of " << bands << " bands not nested";
  o.require(broken == 0, "band nesting");

  // Both LogGamma branches of coordinate 1 in every run.
  const std::vector<ParamFunction> t1{ParamFunction::coordinate(0)};
  const auto lg = logx_diagram(s.loggamma50, t1, 0, 1, 10011);
  std::vector<int> upper(s.loggamma50.size(), 0), lower(s.loggamma50.size(), 0);
  for (const auto& p : lg.scatter) {
    upper[p.run] += std::abs(p.value - 10.0) < 3.0;
    lower[p.run] += std::abs(p.value + 10.0) < 3.0;
  }
  std::size_t missing = 0;
  for (std::size_t k = 0; k < upper.size(); ++k) missing += upper[k] == 0 || lower[k] == 0;
  o.detail << "; " << missing << " of " << upper.size() << " LogGamma runs miss a branch";
  o.require(missing == 0, "both branches in every run");

  // Radial spread: at each log X of a perfect Gaussian run (d=10, nlive=250),
  // the standard deviation of the radii of the last nlive dead points, relative
  // to their mean. Every index with a full window is checked.
  const std::vector<ParamFunction> r{ParamFunction::radial()};
  const std::vector<NSRun> gauss(s.gaussian.begin(), s.gaussian.begin() + 10);
  const auto g = logx_diagram(gauss, r, 0, 1, 10012);
  double worst = 0.0, worst_logx = 0.0, worst_steady = 0.0;
  for (std::size_t k = 0; k < gauss.size(); ++k) {
    std::vector<std::pair<double, double>> pts;  // (logx, radius), log X descending
    for (const auto& p : g.scatter)
      if (p.run == k) pts.emplace_back(p.logx, p.value);
    const auto n = static_cast<std::size_t>(gauss[k].nlive.front());
    for (std::size_t c = n - 1; c < pts.size(); ++c) {
      double sum = 0.0, sum_sq = 0.0;
      for (std::size_t i = c + 1 - n; i <= c; ++i) sum += pts[i].second;
      const double mu = sum / static_cast<double>(n);
      for (std::size_t i = c + 1 - n; i <= c; ++i) sum_sq += (pts[i].second - mu) * (pts[i].second - mu);
      const double rel = std::sqrt(sum_sq / static_cast<double>(n - 1)) / mu;
      if (rel > worst) {
        worst = rel;
        worst_logx = pts[c].first;
      }
      // Past the prior-box edge and before the final live points are removed.
      if (pts[c + 1 - n].first < -1.0 && gauss[k].nlive[c] == static_cast<int>(n))
        worst_steady = std::max(worst_steady, rel);
    }
  }
  o.detail << "; largest radial spread " << worst << " at log X " << worst_logx << " (windows inside log X < -1 with constant nlive: "
           << worst_steady << ")";
  o.require(worst < 0.05, "radial spread below 5%");
}

}  // namespace

int main() {
  Shared shared;
  const std::vector<std::function<void(Shared&, Outcome&)>> criteria{criterion1, criterion2, criterion3, criterion4,
                                                                      criterion5, criterion6, criterion7, criterion8,
                                                                      criterion9, criterion10};
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      criteria[k](shared, o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << " [exception: " << e.what() << "]";
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += !o.pass;
    std::printf("%s criterion %zu: %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", k + 1, o.detail.str().c_str(), secs);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
