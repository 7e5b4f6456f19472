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

inline constexpr std::size_t kDefaultBootstraps = 200;

/// Estimator values over bootstrap replications of one run.
struct BootstrapSample {
  std::vector<double> values;
  EstimatorSpec estimator;
  std::string run_id;
  std::uint64_t seed = 0;
};

/// Density evaluated on a grid.
struct DensityCurve {
  std::vector<double> grid;
  std::vector<double> pdf;
  double bandwidth = 0.0;
};

/// Thread decomposition of a run prepared for repeated resampling.
///
/// A replication draws K thread indices uniformly with replacement (K = the
/// number of threads in the run) and merges them. Copies of the same thread
/// get distinct labels, numbered in draw order.
class ThreadResampler {
public:
  /// Parent positions, live counts and labels of one replication, in
  /// ascending loglike order.
  struct Draw {
    std::vector<std::size_t> source;
    std::vector<int> nlive;
    std::vector<int> labels;
  };

  explicit ThreadResampler(const NSRun& run);

  std::size_t thread_count() const { return members_.size(); }
  const NSRun& run() const { return *run_; }

  Draw draw(std::uint64_t seed) const;
  NSRun materialize(const Draw& draw) const;

private:
  const NSRun* run_;
  std::vector<std::size_t> thread_of_;               // parent position -> thread index
  std::vector<std::vector<std::size_t>> members_;    // thread index -> parent positions
};

/// One bootstrap replication of the run's threads, deterministic given seed.
/// Throws when the run has fewer than 2 threads.
NSRun bootstrap_run(const NSRun& run, std::uint64_t seed);

/// value[b] = estimate on the replication drawn with derive_seed(seed, b).
BootstrapSample bootstrap_values(const NSRun& run, const EstimatorSpec& spec, std::size_t replications,
                                 std::uint64_t seed);

/// Same as calling the single-spec overload for each spec with the same
/// seed, sharing the replications.
std::vector<BootstrapSample> bootstrap_values(const NSRun& run, std::span<const EstimatorSpec> specs,
                                              std::size_t replications, std::uint64_t seed);

/// Sample standard deviation (divisor n - 1); throws for fewer than 2 values.
double sample_std(std::span<const double> values);

double bootstrap_std(const BootstrapSample& sample);

/// Scott's rule with weights: sigma_w * n_eff^(-1/5), n_eff = (sum w)^2 / sum w^2.
/// Returns 0 when the weighted spread is 0.
double scott_bandwidth(std::span<const double> samples, std::span<const double> weights);

/// Gaussian-kernel density of weighted samples on a sorted grid. The kernel
/// is truncated beyond 8.5 bandwidths. Without an explicit bandwidth, Scott's
/// rule is used, falling back to 1 when the samples have zero spread.
DensityCurve weighted_kde(std::span<const double> samples, std::span<const double> weights,
                          std::span<const double> grid, std::optional<double> bandwidth = std::nullopt);

}  // namespace nestdiag
