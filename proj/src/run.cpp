#include "nestdiag/run.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "nestdiag/error.hpp"
#include "nestdiag/rng.hpp"

namespace nestdiag {

std::size_t NSRun::thread_count() const {
  if (thread_labels.empty()) return 0;
  return static_cast<std::size_t>(*std::max_element(thread_labels.begin(), thread_labels.end())) + 1;
}

std::vector<std::string> validate_run(const NSRun& run) {
  std::vector<std::string> out;
  const auto n = run.points.size();
  if (n == 0) {
    out.emplace_back("empty run");
    return out;
  }
  if (run.nlive.size() != n) out.emplace_back("nlive length " + std::to_string(run.nlive.size()) +
                                              " differs from point count " + std::to_string(n));
  if (run.thread_labels.size() != n)
    out.emplace_back("thread label length " + std::to_string(run.thread_labels.size()) +
                     " differs from point count " + std::to_string(n));
  const bool labelled = run.thread_labels.size() == n;
  const auto d = run.points.front().params.size();

  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = run.points[i];
    if (p.params.size() != d) out.push_back("dimension mismatch at index " + std::to_string(i));
    if (std::isnan(p.loglike)) out.push_back("NaN loglike at index " + std::to_string(i));
    if (!(p.birth_loglike < p.loglike)) out.push_back("birth ≥ loglike at index " + std::to_string(i));
    if (i > 0) {
      const double prev = run.points[i - 1].loglike;
      if (p.loglike < prev) {
        out.push_back("unsorted at index " + std::to_string(i));
      } else if (p.loglike == prev &&
                 (!labelled || run.thread_labels[i] == run.thread_labels[i - 1])) {
        out.push_back("tied loglike at index " + std::to_string(i));
      }
    }
    if (i < run.nlive.size() && run.nlive[i] < 1) out.push_back("nlive < 1 at index " + std::to_string(i));
    if (labelled && run.thread_labels[i] < 0)
      out.push_back("negative thread label at index " + std::to_string(i));
  }

  if (labelled) {
    // Each label, restricted to its points in order, must form a birth chain.
    std::map<int, double> last_loglike;
    for (std::size_t i = 0; i < n; ++i) {
      const int label = run.thread_labels[i];
      auto it = last_loglike.find(label);
      if (it != last_loglike.end() && run.points[i].birth_loglike != it->second)
        out.push_back("thread chain broken at index " + std::to_string(i));
      last_loglike[label] = run.points[i].loglike;
    }
  }
  return out;
}

std::vector<int> count_live_points(std::span<const double> loglike, std::span<const double> birth,
                                   std::span<const int> labels) {
  const auto n = loglike.size();
  if (birth.size() != n || (!labels.empty() && labels.size() != n))
    throw Error("live_point_counts: array lengths differ");
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0 && loglike[i] < loglike[i - 1])
      throw Error("live_point_counts: points not sorted at index " + std::to_string(i));
    if (!(birth[i] < loglike[i]))
      throw Error("live_point_counts: birth contour not below loglike at index " + std::to_string(i));
  }
  std::vector<double> births(birth.begin(), birth.end());
  std::sort(births.begin(), births.end());

  std::vector<bool> thread_end;
  if (!labels.empty()) {
    std::map<int, std::size_t> last;
    for (std::size_t i = 0; i < n; ++i) last[labels[i]] = i;
    thread_end.assign(n, false);
    for (const auto& [label, i] : last) thread_end[i] = true;
  }

  std::vector<int> counts(n);
  for (std::size_t start = 0; start < n;) {
    std::size_t stop = start + 1;
    while (stop < n && loglike[stop] == loglike[start]) ++stop;
    const double l = loglike[start];
    const auto lo = std::lower_bound(births.begin(), births.end(), l);
    const auto born_on_or_above = static_cast<std::size_t>(births.end() - lo);
    // Points alive just before the first tied death.
    const auto base = static_cast<long>(n - start - born_on_or_above);
    const auto successors = static_cast<long>(std::upper_bound(lo, births.end(), l) - lo);
    long ends_so_far = 0;
    for (std::size_t i = start; i < stop; ++i) {
      const auto k = static_cast<long>(i - start);
      const long ends = labels.empty() ? std::max(0L, k - successors) : ends_so_far;
      counts[i] = static_cast<int>(base - ends);
      if (!labels.empty() && thread_end[i]) ++ends_so_far;
    }
    start = stop;
  }
  return counts;
}

std::vector<int> live_point_counts(std::span<const SamplePoint> points) {
  std::vector<double> loglike(points.size()), birth(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    loglike[i] = points[i].loglike;
    birth[i] = points[i].birth_loglike;
  }
  return count_live_points(loglike, birth);
}

std::vector<int> live_point_counts(std::span<const SamplePoint> points, std::span<const int> labels) {
  std::vector<double> loglike(points.size()), birth(points.size());
  for (std::size_t i = 0; i < points.size(); ++i) {
    loglike[i] = points[i].loglike;
    birth[i] = points[i].birth_loglike;
  }
  return count_live_points(loglike, birth, labels);
}

std::vector<int> chain_threads(std::span<const SamplePoint> points) {
  const auto n = points.size();
  std::vector<double> loglikes(n);
  for (std::size_t i = 0; i < n; ++i) loglikes[i] = points[i].loglike;
  std::vector<int> labels(n, -1);
  std::vector<bool> claimed(n, false);
  int next_label = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double birth = points[i].birth_loglike;
    if (birth == kNegInf) {
      labels[i] = next_label++;
      continue;
    }
    auto [lo, hi] = std::equal_range(loglikes.begin(), loglikes.end(), birth);
    if (lo == hi) throw BirthContourMissing(i, birth);
    std::size_t pred = n;
    for (auto it = lo; it != hi; ++it) {
      const auto j = static_cast<std::size_t>(it - loglikes.begin());
      if (j < i && !claimed[j]) {
        pred = j;
        break;
      }
    }
    if (pred == n) throw BirthChainAmbiguous(i, birth);
    claimed[pred] = true;
    labels[i] = labels[pred];
  }
  return labels;
}

NSRun make_run(std::vector<SamplePoint> points, RunMeta meta) {
  if (points.empty()) throw Error("cannot build a run from zero points");
  const auto d = points.front().params.size();
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    if (p.params.size() != d)
      throw Error("point " + std::to_string(i) + " has dimension " + std::to_string(p.params.size()) +
                  ", expected " + std::to_string(d));
    if (!std::isfinite(p.loglike)) throw Error("non-finite loglike at point " + std::to_string(i));
    if (std::isnan(p.birth_loglike) || !(p.birth_loglike < p.loglike))
      throw Error("birth contour not below loglike at point " + std::to_string(i));
  }
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return points[a].loglike < points[b].loglike; });
  for (std::size_t k = 1; k < order.size(); ++k) {
    if (points[order[k]].loglike == points[order[k - 1]].loglike)
      throw Error("tied loglike between points " + std::to_string(order[k - 1]) + " and " +
                  std::to_string(order[k]));
  }
  NSRun run;
  run.points.reserve(points.size());
  for (auto i : order) run.points.push_back(std::move(points[i]));
  run.nlive = live_point_counts(run.points);
  run.thread_labels = chain_threads(run.points);
  run.meta = std::move(meta);
  return run;
}

std::vector<Thread> decompose_threads(const NSRun& run) {
  const std::vector<int> labels = run.thread_labels.size() == run.points.size()
                                      ? run.thread_labels
                                      : chain_threads(run.points);
  std::size_t count = 0;
  for (int l : labels) {
    if (l < 0) throw Error("negative thread label");
    count = std::max(count, static_cast<std::size_t>(l) + 1);
  }
  std::vector<Thread> threads(count);
  for (auto& t : threads) t.run.meta = run.meta;
  for (std::size_t i = 0; i < run.points.size(); ++i) {
    auto& t = threads[static_cast<std::size_t>(labels[i])];
    if (t.run.points.empty()) t.entry_loglike = run.points[i].birth_loglike;
    t.run.points.push_back(run.points[i]);
    t.run.nlive.push_back(1);
    t.run.thread_labels.push_back(0);
  }
  // Labels can be sparse after filtering; keep only populated threads.
  std::erase_if(threads, [](const Thread& t) { return t.run.points.empty(); });
  return threads;
}

NSRun combine_runs(std::span<const NSRun> runs) {
  if (runs.empty()) throw Error("combine_runs: no runs given");
  const auto d = runs.front().dim();
  const auto likelihood = runs.front().meta.find("likelihood");
  std::size_t total = 0;
  for (const auto& r : runs) {
    if (r.dim() != d)
      throw Error("combine_runs: dimension mismatch (" + std::to_string(r.dim()) + " vs " +
                  std::to_string(d) + ")");
    const auto it = r.meta.find("likelihood");
    if (likelihood != runs.front().meta.end() && it != r.meta.end() && it->second != likelihood->second)
      throw Error("combine_runs: likelihood mismatch (" + it->second + " vs " + likelihood->second + ")");
    total += r.size();
  }

  struct Ref {
    std::size_t run;
    std::size_t index;
    int label;
  };
  std::vector<Ref> refs;
  refs.reserve(total);
  int offset = 0;
  for (std::size_t k = 0; k < runs.size(); ++k) {
    const auto& r = runs[k];
    const bool labelled = r.thread_labels.size() == r.size();
    const auto labels = labelled ? r.thread_labels : chain_threads(r.points);
    for (std::size_t i = 0; i < r.size(); ++i) refs.push_back({k, i, labels[i] + offset});
    offset += static_cast<int>(labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1);
  }
  std::stable_sort(refs.begin(), refs.end(), [&](const Ref& a, const Ref& b) {
    return runs[a.run].points[a.index].loglike < runs[b.run].points[b.index].loglike;
  });

  NSRun out;
  out.points.reserve(total);
  out.thread_labels.reserve(total);
  for (const auto& ref : refs) {
    out.points.push_back(runs[ref.run].points[ref.index]);
    out.thread_labels.push_back(ref.label);
  }
  out.nlive = live_point_counts(out.points, out.thread_labels);
  out.meta = runs.front().meta;
  if (runs.size() > 1) out.meta["combined_runs"] = std::to_string(runs.size());
  return out;
}

std::vector<double> logx_expected(std::span<const int> nlive) {
  std::vector<double> out(nlive.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < nlive.size(); ++i) {
    if (nlive[i] < 1) throw Error("logx_expected: nlive < 1 at index " + std::to_string(i));
    acc -= 1.0 / nlive[i];
    out[i] = acc;
  }
  return out;
}

std::vector<double> logx_expected(const NSRun& run) { return logx_expected(run.nlive); }

Matrix simulate_logx(const NSRun& run, std::size_t n_sim, std::uint64_t seed) {
  if (n_sim < 1) throw Error("simulate_logx: n_sim must be at least 1");
  const auto n = run.nlive.size();
  Matrix out(n_sim, n);
  parallel_for(n_sim, [&](std::size_t r) {
    Rng rng(derive_seed(seed, r));
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      acc += std::log(rng.uniform()) / run.nlive[k];
      out(r, k) = acc;
    }
  });
  return out;
}

}  // namespace nestdiag
