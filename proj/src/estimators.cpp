#include "nestdiag/estimators.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

#include "nestdiag/error.hpp"

namespace nestdiag {

namespace {

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    out.push_back(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double parse_level(std::string_view text) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw Error("invalid credible level '" + std::string(text) + "'");
  return v;
}

}  // namespace

ParamFunction ParamFunction::coordinate(std::size_t index) {
  ParamFunction f;
  f.kind_ = Kind::coordinate;
  f.index_ = index;
  f.name_ = "t" + std::to_string(index + 1);
  return f;
}

ParamFunction ParamFunction::radial() { return ParamFunction{}; }

ParamFunction ParamFunction::tabulated(std::string name, Callable fn) {
  if (!fn) throw Error("tabulated function '" + name + "' is empty");
  ParamFunction f;
  f.kind_ = Kind::tabulated;
  f.name_ = std::move(name);
  f.fn_ = std::move(fn);
  return f;
}

ParamFunction ParamFunction::parse(std::string_view text) {
  if (text == "r") return radial();
  if (text.size() >= 2 && text.front() == 't') {
    std::size_t k = 0;
    auto [ptr, ec] = std::from_chars(text.data() + 1, text.data() + text.size(), k);
    if (ec == std::errc() && ptr == text.data() + text.size() && k >= 1) return coordinate(k - 1);
  }
  throw Error("unknown parameter function '" + std::string(text) + "' (expected t<k> or r)");
}

double ParamFunction::operator()(std::span<const double> theta) const {
  switch (kind_) {
    case Kind::coordinate:
      return theta[index_];
    case Kind::radial: {
      double s = 0.0;
      for (double x : theta) s += x * x;
      return std::sqrt(s);
    }
    case Kind::tabulated:
      return fn_(theta);
  }
  return 0.0;
}

void ParamFunction::check_dimension(std::size_t d) const {
  if (kind_ == Kind::coordinate && index_ >= d)
    throw Error("coordinate " + name_ + " out of range for dimension " + std::to_string(d));
}

EstimatorSpec EstimatorSpec::log_evidence() { return {}; }
EstimatorSpec EstimatorSpec::mean(ParamFunction f) { return {Quantity::mean, std::move(f), 0.5}; }
EstimatorSpec EstimatorSpec::median(ParamFunction f) { return {Quantity::median, std::move(f), 0.5}; }
EstimatorSpec EstimatorSpec::second_moment(ParamFunction f) {
  return {Quantity::second_moment, std::move(f), 0.5};
}
EstimatorSpec EstimatorSpec::credible(ParamFunction f, double level) {
  if (!(level > 0.0 && level < 1.0)) throw Error("credible level must lie in (0, 1)");
  return {Quantity::credible, std::move(f), level};
}

EstimatorSpec EstimatorSpec::parse(std::string_view text) {
  const auto parts = split(text, ':');
  const auto kind = parts[0];
  if (kind == "logz" && parts.size() == 1) return log_evidence();
  if (parts.size() == 2) {
    auto f = ParamFunction::parse(parts[1]);
    if (kind == "mean") return mean(std::move(f));
    if (kind == "median") return median(std::move(f));
    if (kind == "moment2") return second_moment(std::move(f));
  }
  if (kind == "cred" && parts.size() == 3) return credible(ParamFunction::parse(parts[1]), parse_level(parts[2]));
  throw Error("invalid estimator '" + std::string(text) + "'");
}

std::vector<EstimatorSpec> EstimatorSpec::parse_list(std::string_view text) {
  std::vector<EstimatorSpec> out;
  for (auto item : split(text, ',')) {
    if (!item.empty()) out.push_back(parse(item));
  }
  if (out.empty()) throw Error("no estimators given");
  return out;
}

std::string EstimatorSpec::str() const {
  switch (quantity) {
    case Quantity::log_evidence:
      return "logz";
    case Quantity::mean:
      return "mean:" + f.name();
    case Quantity::median:
      return "median:" + f.name();
    case Quantity::second_moment:
      return "moment2:" + f.name();
    case Quantity::credible: {
      char buf[32];
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, level);
      return "cred:" + f.name() + ":" + std::string(buf, ptr);
    }
  }
  return {};
}

void EstimatorSpec::check_dimension(std::size_t d) const {
  if (quantity != Quantity::log_evidence) f.check_dimension(d);
}

double log_sum_exp(std::span<const double> values) {
  if (values.empty()) return kNegInf;
  const double m = *std::max_element(values.begin(), values.end());
  if (m == kNegInf) return kNegInf;
  double s = 0.0;
  for (double v : values) s += std::exp(v - m);
  return m + std::log(s);
}

std::vector<double> log_weights(std::span<const double> loglike, std::span<const double> logx) {
  if (loglike.size() != logx.size())
    throw Error("log_weights: " + std::to_string(loglike.size()) + " loglikes but " +
                std::to_string(logx.size()) + " logx values");
  std::vector<double> out(loglike.size());
  double prev = 0.0;
  for (std::size_t i = 0; i < loglike.size(); ++i) {
    if (!std::isfinite(loglike[i])) throw Error("non-finite loglike at index " + std::to_string(i));
    if (!(logx[i] < prev)) throw Error("logx not strictly decreasing at index " + std::to_string(i));
    // log(X_{i-1} - X_i) = log X_{i-1} + log1p(-X_i / X_{i-1})
    out[i] = loglike[i] + prev + std::log1p(-std::exp(logx[i] - prev));
    prev = logx[i];
  }
  return out;
}

namespace {

std::vector<double> loglikes_of(const NSRun& run) {
  std::vector<double> out(run.size());
  for (std::size_t i = 0; i < run.size(); ++i) out[i] = run.points[i].loglike;
  return out;
}

}  // namespace

std::vector<double> importance_weights(const NSRun& run, std::span<const double> logx) {
  auto lw = log_weights(loglikes_of(run), logx);
  const double logz = log_sum_exp(lw);
  for (double& w : lw) w = std::exp(w - logz);
  return lw;
}

double log_evidence(const NSRun& run, std::span<const double> logx) {
  return log_sum_exp(log_weights(loglikes_of(run), logx));
}

double weighted_quantile(std::span<const double> values, std::span<const double> weights, double level) {
  if (values.empty() || values.size() != weights.size())
    throw Error("weighted_quantile: need equal, nonzero numbers of values and weights");
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  double cum = 0.0;
  for (auto i : order) {
    cum += weights[i];
    if (cum >= level * total) return values[i];
  }
  return values[order.back()];
}

double weighted_functional(const EstimatorSpec& spec, std::span<const double> weights,
                           std::span<const double> fvalues) {
  switch (spec.quantity) {
    case Quantity::mean: {
      double s = 0.0;
      for (std::size_t i = 0; i < weights.size(); ++i) s += weights[i] * fvalues[i];
      return s;
    }
    case Quantity::second_moment: {
      double s = 0.0;
      for (std::size_t i = 0; i < weights.size(); ++i) s += weights[i] * fvalues[i] * fvalues[i];
      return s;
    }
    case Quantity::median:
      return weighted_quantile(fvalues, weights, 0.5);
    case Quantity::credible:
      return weighted_quantile(fvalues, weights, spec.level);
    case Quantity::log_evidence:
      break;
  }
  throw Error("weighted_functional: log-evidence is not a weighted functional");
}

double estimate(const NSRun& run, std::span<const double> logx, const EstimatorSpec& spec) {
  spec.check_dimension(run.dim());
  if (spec.quantity == Quantity::log_evidence) return log_evidence(run, logx);
  const auto w = importance_weights(run, logx);
  std::vector<double> f(run.size());
  for (std::size_t i = 0; i < run.size(); ++i) f[i] = spec.f(run.points[i].params);
  return weighted_functional(spec, w, f);
}

}  // namespace nestdiag
