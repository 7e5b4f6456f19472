#include "nestdiag/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <numeric>

#include "nestdiag/report.hpp"
#include "nestdiag/rng.hpp"

namespace nestdiag {

void SamplerSettings::validate() const {
  if (nlive < 2) throw Error("nlive must be at least 2");
  if (num_repeats < 1) throw Error("num_repeats must be at least 1");
  if (!(termination_frac > 0.0 && termination_frac < 1.0)) throw Error("termination_frac must lie in (0, 1)");
  if (!(prior.lower < prior.upper)) throw Error("prior bounds must satisfy lower < upper");
}

namespace {

struct LivePoint {
  std::vector<double> params;
  double loglike;
  double birth;
};

using Loglike = std::function<double(std::span<const double>)>;
// Replaces live point `worst` with a new draw above its loglike.
using Replace = std::function<LivePoint(const std::vector<LivePoint>& live, std::size_t worst, Rng& rng)>;

double log_add(double a, double b) {
  const double m = std::max(a, b);
  if (m == -INFINITY) return m;
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

std::vector<double> uniform_in_box(std::size_t d, const PriorSpec& prior, Rng& rng) {
  std::vector<double> x(d);
  for (auto& v : x) v = prior.lower + prior.width() * rng.uniform();
  return x;
}

NSRun run_nested(std::size_t d, const Loglike& loglike, const Replace& replace, const SamplerSettings& settings,
                 RunMeta meta) {
  settings.validate();
  Rng rng(settings.seed);
  const auto n = static_cast<std::size_t>(settings.nlive);
  std::vector<LivePoint> live(n);
  for (auto& p : live) {
    p.params = uniform_in_box(d, settings.prior, rng);
    p.loglike = loglike(p.params);
    p.birth = kNegInf;
  }

  std::vector<SamplePoint> dead;
  const double log_frac = std::log(settings.termination_frac);
  double logz = kNegInf;
  double logx_prev = 0.0;
  for (std::size_t iter = 0;; ++iter) {
    std::size_t worst = 0;
    double best = kNegInf;
    for (std::size_t i = 0; i < n; ++i) {
      if (live[i].loglike < live[worst].loglike) worst = i;
      best = std::max(best, live[i].loglike);
    }
    if (iter > 0 && best + logx_prev < logz + log_frac) break;

    const double logx = -static_cast<double>(iter + 1) / static_cast<double>(n);
    logz = log_add(logz, live[worst].loglike + logx_prev + std::log1p(-std::exp(logx - logx_prev)));
    logx_prev = logx;

    auto fresh = replace(live, worst, rng);
    dead.push_back({std::move(live[worst].params), live[worst].loglike, live[worst].birth});
    live[worst] = std::move(fresh);
  }
  for (auto& p : live) dead.push_back({std::move(p.params), p.loglike, p.birth});

  meta["dim"] = std::to_string(d);
  meta["nlive"] = std::to_string(settings.nlive);
  meta["seed"] = std::to_string(settings.seed);
  meta["termination_frac"] = format_double(settings.termination_frac);
  return make_run(std::move(dead), std::move(meta));
}

}  // namespace

NSRun perfect_ns_gaussian(std::size_t d, const SamplerSettings& settings) {
  if (d < 1) throw Error("perfect_ns_gaussian: dimension must be positive");
  const auto& prior = settings.prior;
  const double inner = std::min(-prior.lower, prior.upper);  // largest ball centred at 0 inside the box
  const double two_log_norm = static_cast<double>(d) * std::log(2.0 * std::numbers::pi);

  auto replace = [&](const std::vector<LivePoint>& live, std::size_t worst, Rng& rng) {
    const double threshold = live[worst].loglike;
    const double r_max = std::sqrt(std::max(0.0, -2.0 * threshold - two_log_norm));
    LivePoint p;
    p.birth = threshold;
    while (true) {
      if (r_max <= inner) {
        std::vector<double> x(d);
        double norm = 0.0;
        for (auto& v : x) {
          v = rng.normal();
          norm += v * v;
        }
        const double radius = r_max * std::pow(rng.uniform(), 1.0 / static_cast<double>(d)) / std::sqrt(norm);
        for (auto& v : x) v *= radius;
        p.params = std::move(x);
      } else {
        p.params = uniform_in_box(d, prior, rng);
      }
      p.loglike = gaussian_loglike(p.params);
      if (p.loglike > threshold) return p;
    }
  };
  return run_nested(d, gaussian_loglike, replace, settings,
                    {{"likelihood", "gaussian"}, {"sampler", "perfect"}});
}

NSRun slice_ns(const LikelihoodSpec& likelihood, const SamplerSettings& settings) {
  const auto d = likelihood.dim();
  const auto& prior = settings.prior;
  const int repeats = settings.num_repeats;

  auto replace = [&](const std::vector<LivePoint>& live, std::size_t worst, Rng& rng) {
    const double threshold = live[worst].loglike;
    const auto n = live.size();
    std::size_t start = rng.index(n - 1);
    if (start >= worst) ++start;

    std::vector<double> x = live[start].params;
    double fx = live[start].loglike;
    std::vector<double> dir(d), trial(d);
    auto at = [&](double t) {
      for (std::size_t k = 0; k < d; ++k) trial[k] = x[k] + t * dir[k];
    };
    auto inside = [&](double t) {
      at(t);
      return prior.contains(trial) && likelihood(trial) > threshold;
    };

    for (int rep = 0; rep < repeats; ++rep) {
      double norm = 0.0;
      for (auto& v : dir) {
        v = rng.normal();
        norm += v * v;
      }
      norm = std::sqrt(norm);
      for (auto& v : dir) v /= norm;

      // Bracket width: spread of the live points along the direction.
      double sum = 0.0, sum2 = 0.0;
      for (const auto& p : live) {
        double proj = 0.0;
        for (std::size_t k = 0; k < d; ++k) proj += p.params[k] * dir[k];
        sum += proj;
        sum2 += proj * proj;
      }
      const double mean = sum / static_cast<double>(n);
      double width = std::sqrt(std::max(0.0, (sum2 - n * mean * mean) / static_cast<double>(n - 1)));
      if (!(width > 0.0)) width = 1e-3 * prior.width();

      // Stepping out with Neal's split of the step budget between both ends.
      double lo = -width * rng.uniform();
      double hi = lo + width;
      int left_steps = static_cast<int>(std::floor(kSliceMaxSteps * rng.uniform()));
      int right_steps = kSliceMaxSteps - 1 - left_steps;
      while (left_steps-- > 0 && inside(lo)) lo -= width;
      while (right_steps-- > 0 && inside(hi)) hi += width;

      bool accepted = false;
      for (int c = 0; c < kSliceMaxContractions; ++c) {
        const double t = lo + (hi - lo) * rng.uniform();
        at(t);
        if (prior.contains(trial)) {
          const double ft = likelihood(trial);
          if (ft > threshold) {
            x = trial;
            fx = ft;
            accepted = true;
            break;
          }
        }
        (t < 0.0 ? lo : hi) = t;
      }
      if (!accepted)
        throw SliceBracketError("slice sampling failed to find a point above loglike " + format_double(threshold) +
                                " within " + std::to_string(kSliceMaxContractions) + " contractions");
    }
    return LivePoint{std::move(x), fx, threshold};
  };

  RunMeta meta{{"likelihood", likelihood.name()},
               {"sampler", "slice"},
               {"num_repeats", std::to_string(repeats)}};
  return run_nested(d, [&](std::span<const double> t) { return likelihood(t); }, replace, settings,
                    std::move(meta));
}

}  // namespace nestdiag
