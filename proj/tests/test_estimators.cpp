#include <doctest.h>

#include <cmath>
#include <numeric>

#include "nestdiag/error.hpp"
#include "nestdiag/estimators.hpp"
#include "oracles.hpp"

using namespace nestdiag;

namespace {

std::vector<double> normalised(std::vector<double> lw) {
  const double total = log_sum_exp(lw);
  for (auto& w : lw) w = std::exp(w - total);
  return lw;
}

}  // namespace

TEST_CASE("log_weights: equal loglikes weight by volume shells") {
  const std::vector<double> ll{0.0, 0.0};
  const std::vector<double> lx{std::log(0.5), std::log(0.25)};
  const auto w = normalised(log_weights(ll, lx));
  CHECK(w[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(w[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("log_weights rejects non-finite input and bad volumes") {
  const std::vector<double> ll{0.0, INFINITY};
  const std::vector<double> lx{-1.0, -2.0};
  CHECK_THROWS_AS(log_weights(ll, lx), Error);
  const std::vector<double> ok{0.0, 1.0};
  const std::vector<double> flat{-1.0, -1.0};
  CHECK_THROWS_AS(log_weights(ok, flat), Error);
  const std::vector<double> short_lx{-1.0};
  CHECK_THROWS_AS(log_weights(ok, short_lx), Error);
}

TEST_CASE("importance_weights: single point has weight one") {
  const auto run = make_run(oracle::points({-3.0}, {-INFINITY}));
  const auto w = importance_weights(run, logx_expected(run));
  REQUIRE(w.size() == 1);
  CHECK(w[0] == 1.0);
}

TEST_CASE("log_evidence examples") {
  const auto one = make_run(oracle::points({0.0}, {-INFINITY}));
  const std::vector<double> all{-INFINITY};
  CHECK(log_evidence(one, all) == 0.0);

  const auto two = make_run(oracle::points({std::log(2.0), std::log(4.0)}, {-INFINITY, -INFINITY}));
  const std::vector<double> halves{std::log(0.5), -INFINITY};
  CHECK(log_evidence(two, halves) == doctest::Approx(std::log(3.0)).epsilon(1e-15));
}

TEST_CASE("log_evidence matches direct summation on random runs") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto run = make_run(oracle::random_points(rng, 1 + rng.index(50), 1));
    const auto lx = logx_expected(run);
    double z = 0.0, prev = 1.0;
    for (std::size_t i = 0; i < run.size(); ++i) {
      z += std::exp(run.points[i].loglike) * (prev - std::exp(lx[i]));
      prev = std::exp(lx[i]);
    }
    CHECK(log_evidence(run, lx) == doctest::Approx(std::log(z)).epsilon(1e-12));
  }
}

TEST_CASE("weights sum to one and ignore a constant loglike shift; log Z shifts by it") {
  Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    auto run = make_run(oracle::random_points(rng, 2 + rng.index(60), 2));
    const auto lx = logx_expected(run);
    const auto w = importance_weights(run, lx);
    CHECK(std::accumulate(w.begin(), w.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
    const double logz = log_evidence(run, lx);
    const double c = 100.0 * (rng.uniform() - 0.5);
    for (auto& p : run.points) p.loglike += c;
    const auto w2 = importance_weights(run, lx);
    for (std::size_t i = 0; i < w.size(); ++i) CHECK(w2[i] == doctest::Approx(w[i]).epsilon(1e-10));
    CHECK(log_evidence(run, lx) - logz == doctest::Approx(c).epsilon(1e-10));
  }
}

TEST_CASE("weighted functionals: mean and median examples") {
  const std::vector<double> f{1.0, 3.0}, w{0.25, 0.75};
  CHECK(weighted_functional(EstimatorSpec::mean(ParamFunction::coordinate(0)), w, f) == 2.5);
  CHECK(weighted_functional(EstimatorSpec::median(ParamFunction::coordinate(0)), w, f) == 3.0);
  CHECK(weighted_functional(EstimatorSpec::second_moment(ParamFunction::coordinate(0)), w, f) ==
        doctest::Approx(0.25 + 0.75 * 9));
  CHECK(weighted_quantile(f, w, 0.25) == 1.0);
  CHECK(weighted_quantile(f, w, 0.2500001) == 3.0);
}

TEST_CASE("radial function") {
  const std::vector<double> theta{3.0, 4.0};
  CHECK(ParamFunction::radial()(theta) == 5.0);
  const auto run = make_run({{{3.0, 4.0}, 0.0, -INFINITY}});
  CHECK(estimate(run, logx_expected(run), EstimatorSpec::mean(ParamFunction::radial())) == 5.0);
}

TEST_CASE("weighted_quantile matches the cumulative-weight oracle") {
  Rng rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    const auto n = 1 + rng.index(15);
    std::vector<double> v(n), w(n);
    for (std::size_t i = 0; i < n; ++i) {
      v[i] = std::floor(10 * rng.normal()) / 2.0;
      w[i] = rng.uniform();
    }
    const double level = rng.uniform();
    CHECK(weighted_quantile(v, w, level) == oracle::weighted_quantile(v, w, level));
  }
}

TEST_CASE("mean is invariant under permuting points with their weights") {
  Rng rng(19);
  std::vector<double> f(30), w(30);
  for (std::size_t i = 0; i < f.size(); ++i) {
    f[i] = rng.normal();
    w[i] = rng.uniform();
  }
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  for (auto& x : w) x /= total;
  const auto spec = EstimatorSpec::mean(ParamFunction::coordinate(0));
  const double before = weighted_functional(spec, w, f);
  for (std::size_t k = f.size() - 1; k > 0; --k) {
    const auto j = rng.index(k + 1);
    std::swap(f[k], f[j]);
    std::swap(w[k], w[j]);
  }
  CHECK(weighted_functional(spec, w, f) == doctest::Approx(before).epsilon(1e-13));
  const auto med = EstimatorSpec::median(ParamFunction::coordinate(0));
  CHECK(weighted_functional(med, w, f) == oracle::weighted_quantile(f, w, 0.5));
}

TEST_CASE("a dominant point fixes every functional") {
  // The last point carries all but ~e^-60 of the mass.
  std::vector<SamplePoint> pts;
  for (int i = 0; i < 10; ++i) pts.push_back({{static_cast<double>(i), -1.0}, i * 1.0, -INFINITY});
  pts.push_back({{7.5, 2.0}, 80.0, -INFINITY});
  const auto run = make_run(pts);
  const auto lx = logx_expected(run);
  const auto w = importance_weights(run, lx);
  REQUIRE(w.back() > 1 - 1e-12);
  const auto t1 = ParamFunction::coordinate(0);
  CHECK(estimate(run, lx, EstimatorSpec::mean(t1)) == doctest::Approx(7.5).epsilon(1e-10));
  CHECK(estimate(run, lx, EstimatorSpec::median(t1)) == 7.5);
  CHECK(estimate(run, lx, EstimatorSpec::credible(t1, 0.84)) == 7.5);
  CHECK(estimate(run, lx, EstimatorSpec::second_moment(t1)) == doctest::Approx(56.25).epsilon(1e-10));
  CHECK(estimate(run, lx, EstimatorSpec::mean(ParamFunction::radial())) ==
        doctest::Approx(std::hypot(7.5, 2.0)).epsilon(1e-10));
}

TEST_CASE("estimator spec parsing round trips") {
  for (const char* text : {"logz", "mean:t1", "median:r", "cred:t2:0.84", "moment2:t1"}) {
    CHECK(EstimatorSpec::parse(text).str() == text);
  }
  const auto list = EstimatorSpec::parse_list("logz,mean:t3");
  REQUIRE(list.size() == 2);
  CHECK(list[1].f.index() == 2);
  CHECK_THROWS(EstimatorSpec::parse("mean:x1"));
  CHECK_THROWS(EstimatorSpec::parse("cred:t1:1.5"));
  CHECK_THROWS(EstimatorSpec::parse("bogus"));
  CHECK_THROWS(EstimatorSpec::parse_list(""));
  CHECK_THROWS(EstimatorSpec::parse("mean:t3").check_dimension(2));
  CHECK_NOTHROW(EstimatorSpec::parse("mean:t2").check_dimension(2));
}

TEST_CASE("log_sum_exp is stable") {
  const std::vector<double> big{1000.0, 1000.0};
  CHECK(log_sum_exp(big) == doctest::Approx(1000.0 + std::log(2.0)));
  const std::vector<double> none;
  CHECK(log_sum_exp(none) == -INFINITY);
  const std::vector<double> tiny{-1000.0, -1001.0};
  CHECK(log_sum_exp(tiny) == doctest::Approx(-1000.0 + std::log1p(std::exp(-1.0))));
}
