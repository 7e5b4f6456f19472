#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nestdiag/run.hpp"

namespace nestdiag {

/// Scalar function of a parameter vector.
class ParamFunction {
public:
  enum class Kind { coordinate, radial, tabulated };
  using Callable = std::function<double(std::span<const double>)>;

  /// Zero-based coordinate; named "t<i+1>".
  static ParamFunction coordinate(std::size_t index);
  /// |theta|; named "r".
  static ParamFunction radial();
  /// Any user-supplied function.
  static ParamFunction tabulated(std::string name, Callable fn);
  /// Parses "t<k>" (1-based) or "r".
  static ParamFunction parse(std::string_view text);

  double operator()(std::span<const double> theta) const;

  Kind kind() const { return kind_; }
  std::size_t index() const { return index_; }
  const std::string& name() const { return name_; }

  /// Throws if the function cannot be evaluated in dimension d.
  void check_dimension(std::size_t d) const;

private:
  Kind kind_ = Kind::radial;
  std::size_t index_ = 0;
  std::string name_ = "r";
  Callable fn_;
};

enum class Quantity { log_evidence, mean, median, credible, second_moment };

/// A scalar posterior quantity. Canonical text forms: `logz`, `mean:t1`,
/// `median:r`, `cred:t2:0.84`, `moment2:t1`.
struct EstimatorSpec {
  Quantity quantity = Quantity::log_evidence;
  ParamFunction f = ParamFunction::radial();
  double level = 0.5;  // used by credible only

  static EstimatorSpec log_evidence();
  static EstimatorSpec mean(ParamFunction f);
  static EstimatorSpec median(ParamFunction f);
  static EstimatorSpec credible(ParamFunction f, double level);
  static EstimatorSpec second_moment(ParamFunction f);

  static EstimatorSpec parse(std::string_view text);
  /// Comma separated list of specs.
  static std::vector<EstimatorSpec> parse_list(std::string_view text);
  std::string str() const;

  void check_dimension(std::size_t d) const;
};

/// log of sum_i exp(values[i]) with a max shift; -inf for empty input.
double log_sum_exp(std::span<const double> values);

/// Unnormalised log weights log(L_i) + log(X_{i-1} - X_i), X_0 = 1.
/// Throws on non-finite log-likelihoods or non-decreasing logx.
std::vector<double> log_weights(std::span<const double> loglike, std::span<const double> logx);

/// Posterior weights w_i ∝ L_i (X_{i-1} - X_i), normalised to sum to 1.
std::vector<double> importance_weights(const NSRun& run, std::span<const double> logx);

/// log Z = log sum_i L_i (X_{i-1} - X_i).
double log_evidence(const NSRun& run, std::span<const double> logx);

/// Value of spec on the run with the given log X coordinates.
double estimate(const NSRun& run, std::span<const double> logx, const EstimatorSpec& spec);

/// Posterior functional from normalised weights and per-point f-values.
/// Median and credible values are the smallest f at which the cumulative
/// weight (points sorted by f) reaches the level.
double weighted_functional(const EstimatorSpec& spec, std::span<const double> weights,
                           std::span<const double> fvalues);

/// Weighted quantile by the same convention.
double weighted_quantile(std::span<const double> values, std::span<const double> weights, double level);

}  // namespace nestdiag
