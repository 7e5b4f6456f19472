#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nestdiag/estimators.hpp"
#include "nestdiag/run.hpp"

namespace nestdiag {

/// Probability masses of the 1, 2 and 3 sigma bands.
inline constexpr std::array<double, 3> kBandMasses{0.6827, 0.9545, 0.9973};
inline constexpr std::size_t kDefaultGridPoints = 256;
inline constexpr std::size_t kDefaultTracesPerRun = 1;

/// Pointwise uncertainty bands on a posterior density.
struct ContourBand {
  std::string run_id;
  std::string function;
  std::vector<double> grid;
  std::vector<double> median;
  std::array<std::vector<double>, 3> lower;  // indexed like kBandMasses
  std::array<std::vector<double>, 3> upper;
};

/// Relative posterior mass L X on a uniform log X grid, maximum 1.
struct MassCurve {
  std::vector<double> logx;
  std::vector<double> mass;
  double log_norm = 0.0;  // log of the maximum of L_i X_i before normalising
};

struct ScatterPoint {
  std::size_t run = 0;
  std::string function;
  double logx = 0.0;
  double value = 0.0;
  double weight = 0.0;
};

/// Quantiles of the simulated log X of one dead point.
struct LogXInterval {
  std::size_t run = 0;
  std::size_t index = 0;
  double expected = 0.0;
  double median = 0.0;
  double lower68 = 0.0, upper68 = 0.0;
  double lower95 = 0.0, upper95 = 0.0;
};

struct ThreadTrace {
  std::size_t run = 0;
  std::size_t thread = 0;
  std::string function;
  std::vector<double> logx;
  std::vector<double> value;
};

struct LogXDiagram {
  std::vector<MassCurve> mass_curves;  // one per run
  std::vector<ScatterPoint> scatter;   // per run and function, log X descending
  std::vector<LogXInterval> logx_intervals;
  std::vector<ThreadTrace> traces;
};

/// 256-point grid spanning the values of f over points carrying non-negligible
/// weight (relative weight above 1e-10), padded by 4 Scott bandwidths.
std::vector<double> default_grid(const NSRun& run, const ParamFunction& f,
                                 std::size_t points = kDefaultGridPoints);

/// Bands of the posterior density of f across bootstrap replications: at each
/// grid point, the central quantile intervals of the replications' weighted
/// KDE values. Needs at least 10 replications.
ContourBand posterior_uncertainty_band(const NSRun& run, const ParamFunction& f, std::span<const double> grid,
                                       std::size_t replications, std::uint64_t seed);

/// log(L_i) + log(X_i) at each dead point, normalised to a maximum of 1 and
/// interpolated linearly in log mass onto n_grid uniform log X values between
/// the first and last dead point.
MassCurve posterior_mass_curve(const NSRun& run, std::size_t n_grid);

/// Points of one thread, in the parent run's expected log X coordinates.
ThreadTrace thread_trace(const NSRun& run, std::size_t thread_index, const ParamFunction& f);

/// Assembles the log X diagram for one or more runs sharing axes. Per-point
/// log X intervals come from n_sim simulated draws (skipped when n_sim is 0;
/// otherwise n_sim must be at least 100). traces_per_run threads are chosen
/// at random per run.
LogXDiagram logx_diagram(std::span<const NSRun> runs, std::span<const ParamFunction> functions,
                         std::size_t n_sim, std::size_t traces_per_run, std::uint64_t seed,
                         std::size_t mass_grid = 200);

/// Type 7 (linear interpolation) quantile of unsorted values.
double quantile(std::vector<double> values, double q);

/// CSV payloads; headers documented in the README.
std::string band_csv(const ContourBand& band);
std::string mass_curve_csv(const LogXDiagram& diagram);
std::string scatter_csv(const LogXDiagram& diagram);
std::string logx_intervals_csv(const LogXDiagram& diagram);
std::string traces_csv(const LogXDiagram& diagram);

/// Standalone SVG drawings: bands as filled polygons, diagrams as a mass
/// curve panel above one scatter panel per function.
std::string band_svg(std::span<const ContourBand> bands);
std::string logx_diagram_svg(const LogXDiagram& diagram);

}  // namespace nestdiag
