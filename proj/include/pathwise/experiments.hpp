#pragma once

// Batch experiment drivers: multi-level quadratic-variation statistics across
// a Brownian batch, scheme-convergence studies against a finer reference, and
// the flow-transform convergence study along bounded-variation driver
// approximants. All drivers generate each path independently from
// (seed, path_index), process paths in parallel slots, and reduce in path
// order, so results are bit-identical for any thread count.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "pathwise/coefficients.hpp"
#include "pathwise/partition.hpp"
#include "pathwise/path.hpp"

namespace pathwise {

struct BatchSpec {
  std::size_t num_paths = 128;
  std::size_t steps = (std::size_t)1 << 20;
  double horizon = 1.0;
  std::uint64_t seed = 12345;
};

// Per-path terminal values at the finest level and sup gaps between adjacent
// levels, from one streaming pass per path.
struct QvBatchStats {
  int level_lo = 0, level_hi = 0;
  std::vector<double> terminal;           // per path, level_hi
  std::vector<std::vector<double>> gaps;  // per path: one entry per adjacent pair
};

QvBatchStats qv_batch_gap_stats(const BatchSpec& spec, int level_lo, int level_hi,
                                int threads,
                                CrossingSemantics semantics = CrossingSemantics::SampleDetection);

struct ConvergenceRow {
  int level = 0;
  double n_effective = 0.0;  // mean anchor count across paths
  std::size_t num_paths = 0;
  double mean_sup_error = 0.0;
  double std_err = 0.0;      // standard error of the mean
  double bv_sup_dist = 0.0;  // transform study: mean sup |S^n - S|
};

struct ConvergenceReport {
  std::vector<ConvergenceRow> rows;
  double fit_slope = 0.0;  // least-squares slope of ln(mean error) vs level ln 2
  int reference_level = 0;
};

// Slope of ln(mean_sup_error) against level * ln 2 (rows with zero error are
// skipped; 0 if fewer than two usable rows).
double fit_log2_slope(const std::vector<ConvergenceRow>& rows);

// Scheme error versus a strictly finer reference, per level. wiener_clock
// selects [S]_t = t; otherwise the clock is the level-qv_level discrete
// quadratic variation of each driver path. subsequence_cubed keeps only levels
// whose step count 2^level dominates the cube of their position, a sparser
// ladder matching the summability needed for almost-sure convergence
// statements.
ConvergenceReport convergence_experiment(const CoefficientPair& c, double x0,
                                         const BatchSpec& spec,
                                         const std::vector<int>& levels, int ref_level,
                                         bool wiener_clock, int qv_level,
                                         bool subsequence_cubed, int threads);

// Flow-transform study: per path, the solution assembled from the level-n
// bounded-variation driver approximant is compared with the solution assembled
// from the rough driver itself; agreement additionally checks the assembled
// rough-driver solution against a movement-stop Euler run of the matching
// limit equation (drift corrected by + 1/2 sigma sigma').
struct TransformReport {
  ConvergenceReport convergence;
  double limit_agreement_mean = 0.0;
  int agreement_level = 0;
};

TransformReport doss_sussmann_experiment(const CoefficientPair& c, double x0,
                                         const BatchSpec& spec,
                                         const std::vector<int>& bv_levels,
                                         double flow_tol, int threads);

}  // namespace pathwise
