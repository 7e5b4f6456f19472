#pragma once

#include <cstddef>
#include <cstdint>

#include "nestdiag/error.hpp"
#include "nestdiag/likelihoods.hpp"
#include "nestdiag/run.hpp"

namespace nestdiag {

struct SamplerSettings {
  int nlive = 250;
  int num_repeats = 20;            // slice sampler only
  double termination_frac = 1e-3;  // stop once the live points can add less than this fraction of Z
  std::uint64_t seed = 0;
  PriorSpec prior{};

  void validate() const;
};

/// Slice sampling could not find an acceptable point within the
/// contraction cap.
class SliceBracketError : public Error {
public:
  using Error::Error;
};

inline constexpr int kSliceMaxSteps = 20;
inline constexpr int kSliceMaxContractions = 100;

/// Exact nested sampling of the spherical unit Gaussian in dimension d.
///
/// Replacements are drawn uniformly within the current likelihood contour:
/// directly in the ball r < r* once the ball lies inside the prior box, by
/// rejection from the box before that. Final live points are appended, so the
/// run has nlive threads, all born from the prior.
NSRun perfect_ns_gaussian(std::size_t d, const SamplerSettings& settings);

/// Constant-nlive nested sampling with an isotropic slice sampler.
///
/// Each replacement starts at a uniformly chosen live point (never the one
/// being replaced) and takes num_repeats univariate slice steps along random
/// directions: the initial bracket width is the live points' standard
/// deviation along the direction, stepped out at most kSliceMaxSteps times and
/// shrunk at most kSliceMaxContractions times (SliceBracketError otherwise).
NSRun slice_ns(const LikelihoodSpec& likelihood, const SamplerSettings& settings);

}  // namespace nestdiag
