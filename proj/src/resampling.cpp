#include "nestdiag/resampling.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>

#include "nestdiag/error.hpp"
#include "nestdiag/rng.hpp"

namespace nestdiag {

ThreadResampler::ThreadResampler(const NSRun& run) : run_(&run) {
  const auto labels = run.thread_labels.size() == run.size() ? run.thread_labels : chain_threads(run.points);
  std::map<int, std::size_t> index_of;
  for (int l : labels) index_of.emplace(l, 0);
  std::size_t k = 0;
  for (auto& [label, idx] : index_of) idx = k++;
  members_.resize(index_of.size());
  thread_of_.resize(run.size());
  for (std::size_t i = 0; i < run.size(); ++i) {
    const auto t = index_of.at(labels[i]);
    thread_of_[i] = t;
    members_[t].push_back(i);
  }
  if (members_.size() < 2)
    throw Error("bootstrap resampling needs at least 2 threads, run has " + std::to_string(members_.size()));
}

ThreadResampler::Draw ThreadResampler::draw(std::uint64_t seed) const {
  const auto k = members_.size();
  Rng rng(seed);
  std::vector<std::vector<int>> copies(k);
  std::size_t total = 0;
  for (std::size_t c = 0; c < k; ++c) {
    const auto t = rng.index(k);
    copies[t].push_back(static_cast<int>(c));
    total += members_[t].size();
  }

  // Walking the parent in loglike order keeps the merged run sorted; copies
  // of one point are emitted in draw order.
  Draw out;
  out.source.reserve(total);
  out.labels.reserve(total);
  std::vector<double> births;
  births.reserve(total);
  for (std::size_t i = 0; i < run_->size(); ++i) {
    for (int label : copies[thread_of_[i]]) {
      out.source.push_back(i);
      out.labels.push_back(label);
      births.push_back(run_->points[i].birth_loglike);
    }
  }
  std::vector<double> loglike(total);
  for (std::size_t j = 0; j < total; ++j) loglike[j] = run_->points[out.source[j]].loglike;
  out.nlive = count_live_points(loglike, births, out.labels);
  return out;
}

NSRun ThreadResampler::materialize(const Draw& draw) const {
  NSRun out;
  out.points.reserve(draw.source.size());
  for (auto i : draw.source) out.points.push_back(run_->points[i]);
  out.nlive = draw.nlive;
  out.thread_labels = draw.labels;
  out.meta = run_->meta;
  return out;
}

NSRun bootstrap_run(const NSRun& run, std::uint64_t seed) {
  ThreadResampler resampler(run);
  return resampler.materialize(resampler.draw(seed));
}

std::vector<BootstrapSample> bootstrap_values(const NSRun& run, std::span<const EstimatorSpec> specs,
                                              std::size_t replications, std::uint64_t seed) {
  if (replications < 1) throw Error("bootstrap_values: need at least one replication");
  for (const auto& s : specs) s.check_dimension(run.dim());
  ThreadResampler resampler(run);

  std::vector<std::vector<double>> fvalues(specs.size());
  for (std::size_t s = 0; s < specs.size(); ++s) {
    if (specs[s].quantity == Quantity::log_evidence) continue;
    fvalues[s].resize(run.size());
    for (std::size_t i = 0; i < run.size(); ++i) fvalues[s][i] = specs[s].f(run.points[i].params);
  }

  std::vector<BootstrapSample> out(specs.size());
  for (std::size_t s = 0; s < specs.size(); ++s) {
    out[s].estimator = specs[s];
    out[s].values.resize(replications);
    out[s].seed = seed;
    if (auto it = run.meta.find("id"); it != run.meta.end()) out[s].run_id = it->second;
  }

  parallel_for(replications, [&](std::size_t b) {
    const auto draw = resampler.draw(derive_seed(seed, b));
    const auto n = draw.source.size();
    std::vector<double> loglike(n);
    for (std::size_t j = 0; j < n; ++j) loglike[j] = run.points[draw.source[j]].loglike;
    auto lw = log_weights(loglike, logx_expected(draw.nlive));
    const double logz = log_sum_exp(lw);
    for (double& w : lw) w = std::exp(w - logz);
    std::vector<double> f(n);
    for (std::size_t s = 0; s < specs.size(); ++s) {
      if (specs[s].quantity == Quantity::log_evidence) {
        out[s].values[b] = logz;
        continue;
      }
      for (std::size_t j = 0; j < n; ++j) f[j] = fvalues[s][draw.source[j]];
      out[s].values[b] = weighted_functional(specs[s], lw, f);
    }
  });
  return out;
}

BootstrapSample bootstrap_values(const NSRun& run, const EstimatorSpec& spec, std::size_t replications,
                                 std::uint64_t seed) {
  return std::move(bootstrap_values(run, std::span(&spec, 1), replications, seed).front());
}

double sample_std(std::span<const double> values) {
  if (values.size() < 2) throw Error("standard deviation needs at least 2 values");
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

double bootstrap_std(const BootstrapSample& sample) { return sample_std(sample.values); }

double scott_bandwidth(std::span<const double> samples, std::span<const double> weights) {
  double sw = 0.0, sw2 = 0.0, mean = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    sw += weights[i];
    sw2 += weights[i] * weights[i];
    mean += weights[i] * samples[i];
  }
  mean /= sw;
  double var = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) var += weights[i] * (samples[i] - mean) * (samples[i] - mean);
  var /= sw;
  const double n_eff = sw * sw / sw2;
  return std::sqrt(var) * std::pow(n_eff, -0.2);
}

DensityCurve weighted_kde(std::span<const double> samples, std::span<const double> weights,
                          std::span<const double> grid, std::optional<double> bandwidth) {
  if (samples.empty()) throw Error("weighted_kde: no samples");
  if (samples.size() != weights.size()) throw Error("weighted_kde: samples and weights differ in length");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw Error("weighted_kde: weights must be finite and nonnegative");
    total += w;
  }
  if (!(total > 0.0)) throw Error("weighted_kde: weights sum to zero");
  if (!std::is_sorted(grid.begin(), grid.end())) throw Error("weighted_kde: grid not sorted");

  double h = bandwidth ? *bandwidth : scott_bandwidth(samples, weights);
  if (!bandwidth && !(h > 0.0)) h = 1.0;
  if (!(h > 0.0)) throw Error("weighted_kde: bandwidth must be positive");

  DensityCurve out;
  out.grid.assign(grid.begin(), grid.end());
  out.pdf.assign(grid.size(), 0.0);
  out.bandwidth = h;
  const double norm = 1.0 / (total * h * std::sqrt(2.0 * std::numbers::pi));
  const double cutoff = 8.5 * h;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (weights[i] == 0.0) continue;
    const double s = samples[i];
    auto lo = std::lower_bound(grid.begin(), grid.end(), s - cutoff);
    auto hi = std::upper_bound(lo, grid.end(), s + cutoff);
    const double scale = weights[i] * norm;
    for (auto it = lo; it != hi; ++it) {
      const double z = (*it - s) / h;
      out.pdf[static_cast<std::size_t>(it - grid.begin())] += scale * std::exp(-0.5 * z * z);
    }
  }
  return out;
}

}  // namespace nestdiag
