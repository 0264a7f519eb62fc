#pragma once

// Lebesgue partitions (level-n grid-crossing times) and pathwise quadratic
// variation along them.
//
// Two crossing semantics are supported and the distinction matters:
//
//  * InterpolatedCrossing places each crossing at the linearly interpolated
//    time where the path meets the grid line, with the exact grid value.
//    Consecutive crossing values differ by exactly 2^-n, which makes this the
//    right notion for structural uses: the crossing skeleton itself, the
//    bounded-variation approximants, and time-change equivariance checks.
//
//  * SampleDetection charges a crossing at the first *sample* at or after the
//    crossing event, at the observed sample value. Detection times are stopping
//    times of the sampling filtration, so for Brownian input the sum of squared
//    increments is unbiased for elapsed time at every level. Interpolated
//    crossings are not stopping times of that filtration: the snapped variant
//    under-counts quadratic variation by a level-independent bias (about 37%
//    missing at the terminal for fine levels on 2^22-step Brownian paths), so
//    SampleDetection is the default for estimation.
//
// Evaluation between crossings includes the partial increment
// (omega(t) - omega(sigma_last))^2, so V^n(0) = 0 and V^n is right-continuous
// in level along the sample grid.

#include <cstddef>
#include <utility>
#include <vector>

#include "pathwise/path.hpp"

namespace pathwise {

enum class CrossingSemantics {
  InterpolatedCrossing,
  SampleDetection,
};

// Crossing skeleton of a path at one level. crossing_times[0] = 0 and
// crossing_values[0] = omega(0); subsequent entries are the interpolated
// crossing times with exact grid values. When omega(0) lies on the level-n
// grid, |crossing_values[k] - crossing_values[k-1]| == 2^-n exactly for k >= 1.
// A grid line equal to the previous crossing value is not counted again.
struct LebesguePartition {
  int level = 0;
  std::vector<double> crossing_times;
  std::vector<double> crossing_values;
  std::size_t source_len = 0;  // number of samples in the source path
};

LebesguePartition lebesgue_stopping_times(const SampledPath& path, int level);

// Discrete quadratic variation along the level-n Lebesgue partition, evaluated
// at eval_times (sorted, eval_times[0] == 0, within the path's duration).
struct QVResult {
  int level = 0;
  SampledPath qv_path;  // V^n sampled at the evaluation times
  double terminal = 0.0;
};

QVResult discrete_qv(const SampledPath& path, int level,
                     const std::vector<double>& eval_times,
                     CrossingSemantics semantics = CrossingSemantics::SampleDetection);

// V^n evaluated at sorted (possibly repeating) times; the core routine behind
// discrete_qv, exposed for checks whose query grids may stall.
std::vector<double> qv_values_at(const SampledPath& path, int level,
                                 const std::vector<double>& sorted_times,
                                 CrossingSemantics semantics);

// Multi-level estimate: V^{level_lo} .. V^{level_hi} in a single pass over the
// samples. cauchy_gaps[k] = sup over the sample grid of
// |V^{lo+k+1}(t) - V^{lo+k}(t)|, one entry per consecutive level pair; the
// returned QVResult is the finest level. faithful_level_cap reports the finest
// level the sampling resolution can support (see below); levels beyond it are
// still computed but flagged by the caller-facing tools.
struct QvEstimate {
  QVResult qv;
  std::vector<double> cauchy_gaps;
  int faithful_level_cap = 0;
};

QvEstimate estimate_qv(const SampledPath& path, int level_lo, int level_hi,
                       const std::vector<double>& eval_times,
                       CrossingSemantics semantics = CrossingSemantics::SampleDetection);

// Finest level n with 2^-n >= 4 * (max adjacent-sample oscillation): beyond it
// a single sample step can jump whole grid cells and crossings lose meaning.
// Returns a large value (62) for paths with zero oscillation.
int faithful_level_cap(const SampledPath& path);

// Running maximum of a sampled path on its own grid. V^n includes the partial
// increment (omega(t) - omega(sigma_last))^2, which dips when the path doubles
// back, so an estimated clock must pass through this before it can drive a
// scheme that requires a nondecreasing clock.
SampledPath monotone_envelope(const SampledPath& path);

// First-order interpolation slack at level n:
// 4 * 2^-n * (max adjacent-sample oscillation). Discrepancies of grid-respecting
// time-change checks are held to this bound.
double interpolation_slack(const SampledPath& path, int level);

// Equivariance of V^n under a time change: compares V^n(omega o phi, phi^-1
// evaluation times) against V^n(omega, .) at the mapped times. The composed
// path is built on an enriched grid (evaluation times, table knots, and the
// phi-preimages of every source sample time) so that no crossing excursion is
// skipped. Returns the sup discrepancy over eval_times: exactly 0.0 when phi
// maps the enriched grid onto source sample times, and <= interpolation_slack
// otherwise (for on-grid tables).
double qv_time_change_check(const SampledPath& path, const TimeChange& phi,
                            int level, const std::vector<double>& eval_times);

namespace detail {
// Enriched evaluation grid in u-coordinates for omega o phi: eval times, table
// knots, and preimages of all source sample times reachable under phi. Sorted,
// deduplicated, starting at 0.
std::vector<double> enriched_composed_grid(const SampledPath& source,
                                           const TimeChange& phi,
                                           const std::vector<double>& eval_times);
}  // namespace detail

}  // namespace pathwise
