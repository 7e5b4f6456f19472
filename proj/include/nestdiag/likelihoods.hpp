#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>

namespace nestdiag {

/// Log-density of the spherical unit Gaussian centred on the origin:
/// -(d/2) log(2 pi) - |theta|^2 / 2.
double gaussian_loglike(std::span<const double> theta);

/// log LogGamma(x | alpha, beta) = beta x - e^x / alpha - beta log(alpha) - lgamma(beta).
double loggamma_logpdf(double x, double alpha, double beta);

/// Unit normal log-density at x.
double normal_logpdf(double x);

/// LogGamma-Gaussian mixture (d even, d >= 2). Coordinate 1 is an equal
/// mixture of LogGamma(1, 1) translated to +10 and -10; coordinate 2 an equal
/// mixture of a unit normal at +10 and LogGamma(1, 1) at -10; coordinates
/// 3..(d+2)/2 are LogGamma(1, 1) and the rest unit normal.
double loggamma_mix_loglike(std::span<const double> theta);

/// -d log 60: log-evidence of a unit-normalised likelihood under the uniform
/// prior on [-30, 30]^d.
double true_logz(std::size_t d);

/// Uniform box prior, identical bounds on every coordinate.
struct PriorSpec {
  double lower = -30.0;
  double upper = 30.0;

  bool contains(std::span<const double> theta) const;
  double width() const { return upper - lower; }
};

/// One of the built-in test likelihoods.
class LikelihoodSpec {
public:
  enum class Kind { gaussian, loggamma_mix };

  LikelihoodSpec(Kind kind, std::size_t dim);
  /// "gaussian" or "loggamma_mix".
  static LikelihoodSpec parse(std::string_view name, std::size_t dim);

  Kind kind() const { return kind_; }
  std::size_t dim() const { return dim_; }
  std::string name() const;

  double operator()(std::span<const double> theta) const;

private:
  Kind kind_;
  std::size_t dim_;
};

}  // namespace nestdiag
