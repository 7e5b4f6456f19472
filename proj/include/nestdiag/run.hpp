#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace nestdiag {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// One dead point. birth_loglike is the contour the point was sampled
/// within; -inf means it was drawn from the whole prior.
struct SamplePoint {
  std::vector<double> params;
  double loglike = 0.0;
  double birth_loglike = kNegInf;

  friend bool operator==(const SamplePoint&, const SamplePoint&) = default;
};

using RunMeta = std::map<std::string, std::string>;

/// A nested sampling run: dead points sorted by log-likelihood, the number of
/// live points present when each one died, and the thread each belongs to.
struct NSRun {
  std::vector<SamplePoint> points;
  std::vector<int> nlive;
  std::vector<int> thread_labels;
  RunMeta meta;

  std::size_t size() const { return points.size(); }
  std::size_t dim() const { return points.empty() ? 0 : points.front().params.size(); }
  /// One past the largest thread label (0 for an unlabelled run).
  std::size_t thread_count() const;

  friend bool operator==(const NSRun&, const NSRun&) = default;
};

/// Single-live-point run extracted from a parent run. The embedded run has
/// nlive == 1 everywhere and a single thread label 0.
struct Thread {
  NSRun run;
  double entry_loglike = kNegInf;
};

/// Row-major matrix of doubles.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), values(r * c) {}
  double& operator()(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  std::span<const double> row(std::size_t r) const { return {values.data() + r * cols, cols}; }
};

/// Invariant violations of a run, each naming the invariant and the index.
/// Empty iff the run is well formed.
///
/// Ties in log-likelihood are accepted only between points carrying different
/// thread labels; these arise when bootstrap resampling duplicates a thread.
std::vector<std::string> validate_run(const NSRun& run);

/// Live points present when each point died:
/// count[i] = #{ j : birth_j < loglike_i <= loglike_j }.
///
/// Points sharing a loglike die one after another in the given order. A tied
/// point whose thread continues is replaced at once (its successor is born
/// on the shared contour), so only tied thread ends reduce the count for the
/// tied points after them. Without labels, the first tied points are taken to
/// be the ones with successors, matching chain_threads.
///
/// Requires points sorted ascending by loglike and birth < loglike.
std::vector<int> live_point_counts(std::span<const SamplePoint> points);
std::vector<int> live_point_counts(std::span<const SamplePoint> points, std::span<const int> labels);

/// Same count from parallel loglike and birth arrays; labels may be empty.
std::vector<int> count_live_points(std::span<const double> loglike, std::span<const double> birth,
                                   std::span<const int> labels = {});

/// Thread labels reconstructed by following birth contours. Points born at
/// -inf open a new thread; every other point continues the thread of an
/// earlier unclaimed point whose loglike equals its birth contour, claimed
/// greedily in order.
///
/// Throws BirthContourMissing or BirthChainAmbiguous.
std::vector<int> chain_threads(std::span<const SamplePoint> points);

/// Builds a run from unordered points: sorts, rejects ties and non-finite
/// log-likelihoods, then reconstructs live counts and thread labels.
NSRun make_run(std::vector<SamplePoint> points, RunMeta meta = {});

/// Splits a run into its threads, ordered by label. Uses run.thread_labels
/// when present, otherwise chains birth contours (and may throw the chain
/// errors).
std::vector<Thread> decompose_threads(const NSRun& run);

/// Merges runs into one: points sorted by loglike, live counts recomputed
/// from the union of birth contours, thread labels offset so that they stay
/// distinct. Throws on dimension or likelihood mismatch.
NSRun combine_runs(std::span<const NSRun> runs);

/// Expected log prior volume at each dead point: -sum_{k<=i} 1/nlive[k].
std::vector<double> logx_expected(const NSRun& run);
std::vector<double> logx_expected(std::span<const int> nlive);

/// n_sim joint draws of the dead points' log X values. Row r uses the
/// generator seeded with derive_seed(seed, r) and accumulates
/// log t_k = log(u_k) / nlive[k] with u_k uniform on (0, 1).
Matrix simulate_logx(const NSRun& run, std::size_t n_sim, std::uint64_t seed);

}  // namespace nestdiag
