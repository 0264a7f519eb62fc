#pragma once

// Uniqueness diagnostics for square-root-type diffusions: the weighted test
// function pair (psi, Phi) with closed-form values, the pathwise uniqueness
// gap, and a replay of the stability estimate that bounds the distance
// between the scheme and a finer reference along one driver path.
//
// With a = epsilon / delta, b = epsilon, L = log(delta):
//   psi(x)   = 1 / (x L)                     on [a, b], 0 elsewhere
//   Phi'(y)  = sign(y) min(1, log(|y|/a)/L)  (0 below a)
//   Phi(y)   = (|y| log(|y|/a) - |y| + a)/L  on [a, b],
//              Phi(b) + (|y| - b) beyond, 0 below a.
// Then: integral of psi = 1, |Phi'| <= 1, Phi'' = psi(|y|) <= delta/(eps L),
// and |y| <= epsilon + Phi(y) for all y.

#include <cstddef>

#include "pathwise/coefficients.hpp"
#include "pathwise/path.hpp"

namespace pathwise {

struct TestFunctionParams {
  double epsilon = 1.0;
  double delta = 2.718281828459045;

  double support_lo() const { return epsilon / delta; }
  double support_hi() const { return epsilon; }
  double log_delta() const;
  void validate() const;  // epsilon > 0, delta > 1
};

double psi(double x, const TestFunctionParams& p);
double phi(double x, const TestFunctionParams& p);
double phi_prime(double x, const TestFunctionParams& p);
double phi_second(double x, const TestFunctionParams& p);

// sup |X1 - X2| over the shared sample grid (a pseudometric: 0 does not imply
// the paths agree between samples).
double uniqueness_gap(const SampledPath& X1, const SampledPath& X2);

// Replay of the stability bound along one driver path. Y is the gap between
// the level-(level+4) reference scheme and the level-n scheme. Two facts are
// checked on the full sample grid:
//
//  (1) the change-of-variable identity for Phi(Y) with the anchor-frozen
//      coefficient increments and the movement-stop martingale term M
//      (eq_residual_sup; a corrupted M breaks this identity), and
//  (2) the assembled inequality
//        |Y_t| <= epsilon + C_b int |Y| d[S] + 4 K qv_t + M_t
//      with K = C_b C_bs 2^-n + 2 C_sigma^2 / log(delta)
//              + 2 C_sigma^2 C_bs delta / (epsilon log(delta)) * 2^-n,
//      C_bs = max(1, bound_b + bound_sigma) (declared bounds required); the
//      factor 4 on K absorbs constant mismatch between the anchor-frozen
//      replay and the idealized estimate.
//
// violated = inequality fails beyond ineq_slack, or the identity residual
// exceeds eq_slack. Negative slack arguments select defaults derived from the
// driver's interpolation slack.
struct GronwallReplay {
  SampledPath lhs_path;  // |Y_t|
  SampledPath rhs_path;  // assembled right-hand side
  bool violated = false;
  double eq_residual_sup = 0.0;
  double min_margin = 0.0;  // min over the grid of rhs - lhs
  double ineq_slack = 0.0;
  double eq_slack = 0.0;
};

GronwallReplay gronwall_bound_replay(const CoefficientPair& c, int level,
                                     const SampledPath& S, const SampledPath& qv,
                                     double x0, const TestFunctionParams& p,
                                     double corrupt_martingale = 0.0,
                                     double ineq_slack = -1.0,
                                     double eq_slack = -1.0);

}  // namespace pathwise
