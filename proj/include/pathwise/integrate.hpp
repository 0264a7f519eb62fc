#pragma once

// Model-free integration against a path with quadratic variation: exact
// integrals of step functions, the level-n left-point integral along movement
// stopping times, Stieltjes integrals against bounded-variation integrators,
// and the pathwise change-of-variable residual.

#include <cstddef>
#include <functional>
#include <vector>

#include "pathwise/partition.hpp"
#include "pathwise/path.hpp"

namespace pathwise {

// Left-continuous step integrand: value levels[k] on [jump_times[k], jump_times[k+1]),
// levels.back() from jump_times.back() onward. jump_times[0] == 0.
struct StepFunction {
  std::vector<double> jump_times;
  std::vector<double> levels;

  double value(double t) const;
  void validate() const;
};

struct IntegralResult {
  SampledPath value_path;       // integral evaluated at the requested times
  int approximation_level = -1; // -1: exact (no movement-stop approximation)
  double est_error = 0.0;       // sup gap to the level-1-coarser integral (0 if exact)
};

// Exact integral of a step function against a sampled integrator:
// sum of levels[k] * (S(t_{k+1} ^ t) - S(t_k ^ t)).
IntegralResult step_integral(const StepFunction& f, const SampledPath& S,
                             const std::vector<double>& eval_times);

// Movement stopping times of the level-n integral: indices i into the shared
// sample grid where |X_i - X_ref| >= 2^-level or |S_i - S_ref| >= 2^-level
// since the previous stop (references re-armed at each stop). Index 0 is
// always included.
std::vector<std::size_t> ito_stopping_indices(const SampledPath& X,
                                              const SampledPath& S, int level);

// Level-n left-point integral of X against S along the movement stops:
// sum X(rho_k) (S(rho_{k+1}) - S(rho_k)) plus the running partial term
// X(rho_last) (S(t) - S(rho_last)). X and S must share one sample grid.
// est_error is the sup over the sample grid of the gap to the level-(n-1)
// integral (0 when level == 0).
IntegralResult ito_integral(const SampledPath& X, const SampledPath& S, int level,
                            const std::vector<double>& eval_times);

// Integral values at sorted (possibly repeating) times; core routine behind
// ito_integral. Under SampleDetection (the default) stops are charged at the
// first sample where a move of 2^-level is observed, which keeps the stops in
// the sampling filtration for estimation. Under InterpolatedCrossing the stop
// is placed at the exact segment fraction where the move first reaches
// 2^-level, with the triggering coordinate landing exactly on its reference
// +/- 2^-level; that rule depends only on the traced (X, S) curve, not on how
// samples parametrize it, which is what the time-change check needs.
std::vector<double> ito_values_at(
    const SampledPath& X, const SampledPath& S, int level,
    const std::vector<double>& sorted_times,
    CrossingSemantics semantics = CrossingSemantics::SampleDetection);

// Same integral with an externally fixed stop set (indices into the shared
// grid, starting with 0). The integral with frozen stops is exactly linear in
// the integrand, which the movement-stop version is not.
std::vector<double> ito_values_with_stops(const SampledPath& X, const SampledPath& S,
                                          const std::vector<std::size_t>& stops,
                                          const std::vector<double>& sorted_times);

// Left-point Stieltjes integral of f against a bounded-variation integrator A,
// summed over the union of both sample grids. Exact for step integrands and
// first-order accurate for sampled ones.
IntegralResult stieltjes_integral(const SampledPath& f, const SampledPath& A,
                                  const std::vector<double>& eval_times);

// Change-of-variable residual for Y = int A dS + int B du:
//   r(t) = f(Y_t) - f(Y_0) - int f'(Y) B du - int f'(Y) A dS
//          - 1/2 int f''(Y) A^2 d[qv]
// with the dS term the level-n movement-stop integral and the du / d[qv] terms
// left-point sums on the sample grid. A, B, S, qv must share one sample grid.
SampledPath ito_formula_residual(const std::function<double(double)>& f,
                                 const std::function<double(double)>& f_prime,
                                 const std::function<double(double)>& f_second,
                                 const SampledPath& A, const SampledPath& B,
                                 const SampledPath& S, const SampledPath& qv,
                                 int level, const std::vector<double>& eval_times);

// Equivariance of the level-n integral under a time change phi: compares the
// integral of (X o phi) against (S o phi) with the integral of X against S at
// the mapped times, both built on the enriched composed grid with interpolated
// stops. Exactly 0.0 when phi maps that grid onto source sample times; bounded
// by the interpolation slack of S for other on-grid tables.
double integral_time_change_check(const SampledPath& X, const SampledPath& S,
                                  const TimeChange& phi, int level,
                                  const std::vector<double>& eval_times);

}  // namespace pathwise
