#pragma once

// Euler scheme for dX = b(X) d[S] + sigma(X) dS along the level-n movement
// times of the driver: the state is re-anchored whenever the driver has moved
// by 2^-n or the quadratic-variation clock has advanced by 2^-n, and between
// anchors the solution is the exact linear extension
//   X_t = x_k + b(x_k) ([S]_t - [S]_{t_k}) + sigma(x_k) (S_t - S_{t_k}).
//
// Two grid semantics mirror the partition module: SampleDetection (anchors at
// the first sample once a trigger fires; default, and the right choice against
// sampled rough drivers) and InterpolatedCrossing (anchors at interpolated
// crossing events with exact grid values; exact-identity and equivariance
// uses). Passing a null quadratic-variation path selects the Wiener
// calibration [S]_t = t.

#include <cstddef>
#include <vector>

#include "pathwise/coefficients.hpp"
#include "pathwise/path.hpp"

namespace pathwise {

enum class GridSemantics {
  SampleDetection,
  InterpolatedCrossing,
};

struct EulerGrid {
  enum class Trigger { SCrossing, QVCrossing };
  // times[0] = 0; triggers[k] explains the stop at times[k + 1] (driver
  // movement wins ties).
  std::vector<double> times;
  std::vector<Trigger> triggers;
};

struct SolveDiagnostics {
  std::size_t stopping_count = 0;   // anchors after time 0
  double sup_drift_step = 0.0;      // max |b(x_k)| * (qv advance) over steps
  double sup_diff_step = 0.0;       // max |sigma(x_k)| * |driver move| over steps
  std::size_t domain_excursions = 0;  // samples with X outside the declared domain
  bool move_bound_ok = true;        // per-step move within the declared-bound budget
};

struct SolveResult {
  SampledPath solution;  // on the driver's sample grid
  EulerGrid grid;
  int level = 0;
  SolveDiagnostics diagnostics;
};

// qv == nullptr selects the Wiener calibration ([S]_t = t); otherwise qv must
// share the driver's sample grid and be nondecreasing from 0.
SolveResult euler_solve(const CoefficientPair& c, double x0, const SampledPath& S,
                        const SampledPath* qv, int level,
                        GridSemantics semantics = GridSemantics::SampleDetection);

// euler_solve at ref_level, guarding against comparisons with levels that are
// not strictly coarser: throws validation_error if ref_level <=
// finest_compared_level.
SolveResult reference_solution(const CoefficientPair& c, double x0, const SampledPath& S,
                               const SampledPath* qv, int ref_level,
                               int finest_compared_level,
                               GridSemantics semantics = GridSemantics::SampleDetection);

}  // namespace pathwise
