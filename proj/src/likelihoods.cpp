#include "nestdiag/likelihoods.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "nestdiag/error.hpp"

namespace nestdiag {

namespace {

const double kLogTwoPi = std::log(2.0 * std::numbers::pi);
const double kLogHalf = -std::numbers::ln2;

double log_add(double a, double b) {
  const double m = std::max(a, b);
  if (m == -INFINITY) return m;
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

}  // namespace

double gaussian_loglike(std::span<const double> theta) {
  double r2 = 0.0;
  for (double x : theta) {
    if (!std::isfinite(x)) throw Error("gaussian_loglike: non-finite coordinate");
    r2 += x * x;
  }
  return -0.5 * static_cast<double>(theta.size()) * kLogTwoPi - 0.5 * r2;
}

double loggamma_logpdf(double x, double alpha, double beta) {
  if (!(alpha > 0.0) || !(beta > 0.0)) throw Error("loggamma_logpdf: alpha and beta must be positive");
  return beta * x - std::exp(x) / alpha - beta * std::log(alpha) - std::lgamma(beta);
}

double normal_logpdf(double x) { return -0.5 * kLogTwoPi - 0.5 * x * x; }

double loggamma_mix_loglike(std::span<const double> theta) {
  const auto d = theta.size();
  if (d < 2 || d % 2 != 0) throw Error("loggamma_mix_loglike: dimension must be even and >= 2");
  double total = kLogHalf + log_add(loggamma_logpdf(theta[0] - 10.0, 1.0, 1.0),
                                    loggamma_logpdf(theta[0] + 10.0, 1.0, 1.0));
  total += kLogHalf + log_add(normal_logpdf(theta[1] - 10.0), loggamma_logpdf(theta[1] + 10.0, 1.0, 1.0));
  const auto last_loggamma = (d + 2) / 2;  // 1-based
  for (std::size_t i = 3; i <= d; ++i) {
    const double x = theta[i - 1];
    total += i <= last_loggamma ? loggamma_logpdf(x, 1.0, 1.0) : normal_logpdf(x);
  }
  return total;
}

double true_logz(std::size_t d) { return -static_cast<double>(d) * std::log(60.0); }

bool PriorSpec::contains(std::span<const double> theta) const {
  return std::all_of(theta.begin(), theta.end(), [&](double x) { return x >= lower && x <= upper; });
}

LikelihoodSpec::LikelihoodSpec(Kind kind, std::size_t dim) : kind_(kind), dim_(dim) {
  if (dim < 1) throw Error("likelihood dimension must be positive");
  if (kind == Kind::loggamma_mix && (dim < 2 || dim % 2 != 0))
    throw Error("loggamma_mix requires an even dimension >= 2, got " + std::to_string(dim));
}

LikelihoodSpec LikelihoodSpec::parse(std::string_view name, std::size_t dim) {
  if (name == "gaussian") return {Kind::gaussian, dim};
  if (name == "loggamma_mix") return {Kind::loggamma_mix, dim};
  throw Error("unknown likelihood '" + std::string(name) + "' (expected gaussian or loggamma_mix)");
}

std::string LikelihoodSpec::name() const { return kind_ == Kind::gaussian ? "gaussian" : "loggamma_mix"; }

double LikelihoodSpec::operator()(std::span<const double> theta) const {
  return kind_ == Kind::gaussian ? gaussian_loglike(theta) : loggamma_mix_loglike(theta);
}

}  // namespace nestdiag
