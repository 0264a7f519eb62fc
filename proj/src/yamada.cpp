#include "pathwise/yamada.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "pathwise/euler.hpp"
#include "pathwise/integrate.hpp"
#include "pathwise/partition.hpp"

namespace pathwise {

double TestFunctionParams::log_delta() const { return std::log(delta); }

void TestFunctionParams::validate() const {
  if (!(epsilon > 0.0)) throw validation_error("test function needs epsilon > 0");
  if (!(delta > 1.0)) throw validation_error("test function needs delta > 1");
}

double psi(double x, const TestFunctionParams& p) {
  p.validate();
  const double a = p.support_lo(), b = p.support_hi();
  if (x < a || x > b) return 0.0;
  return 1.0 / (x * p.log_delta());
}

double phi_prime(double x, const TestFunctionParams& p) {
  p.validate();
  const double a = p.support_lo(), b = p.support_hi();
  const double ax = std::fabs(x);
  if (ax <= a) return 0.0;
  const double m = (ax >= b) ? 1.0 : std::log(ax / a) / p.log_delta();
  return x > 0.0 ? m : -m;
}

double phi_second(double x, const TestFunctionParams& p) {
  return psi(std::fabs(x), p);
}

double phi(double x, const TestFunctionParams& p) {
  p.validate();
  const double a = p.support_lo(), b = p.support_hi();
  const double L = p.log_delta();
  const double ax = std::fabs(x);
  if (ax <= a) return 0.0;
  if (ax <= b) return (ax * std::log(ax / a) - ax + a) / L;
  const double phi_b = (b * std::log(b / a) - b + a) / L;
  return phi_b + (ax - b);
}

double uniqueness_gap(const SampledPath& X1, const SampledPath& X2) {
  if (X1.size() != X2.size())
    throw validation_error("uniqueness gap needs paths on one sample grid");
  double sup = 0.0;
  for (std::size_t i = 0; i < X1.size(); ++i)
    sup = std::max(sup, std::fabs(X1.value_at(i) - X2.value_at(i)));
  return sup;
}

namespace {

// Anchor values of a detection-semantics scheme at every sample: the solution
// value at the last stopping time at or before each sample time.
std::vector<double> anchors_at_samples(const SolveResult& r, const SampledPath& S) {
  const std::size_t n = S.size();
  std::vector<double> out(n, 0.0);
  std::size_t k = 0;  // index into grid.times
  std::size_t anchor_idx = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = S.time_at(i);
    while (k + 1 < r.grid.times.size() && r.grid.times[k + 1] <= t) {
      ++k;
      anchor_idx = S.index_at_or_before(r.grid.times[k]);
    }
    out[i] = r.solution.value_at(anchor_idx);
  }
  return out;
}

}  // namespace

GronwallReplay gronwall_bound_replay(const CoefficientPair& c, int level,
                                     const SampledPath& S, const SampledPath& qv,
                                     double x0, const TestFunctionParams& p,
                                     double corrupt_martingale, double ineq_slack,
                                     double eq_slack) {
  p.validate();
  const double C_bs = c.combined_bound();  // throws without declared bounds
  const int ref_level = level + 4;
  const double h = std::ldexp(1.0, -level);
  const double L = p.log_delta();

  const SolveResult coarse = euler_solve(c, x0, S, &qv, level);
  const SolveResult fine = euler_solve(c, x0, S, &qv, ref_level);
  const std::size_t n = S.size();

  std::vector<double> aN = anchors_at_samples(coarse, S);
  std::vector<double> aR = anchors_at_samples(fine, S);

  std::vector<double> Y(n), absY(n), H(n);
  for (std::size_t i = 0; i < n; ++i) {
    Y[i] = fine.solution.value_at(i) - coarse.solution.value_at(i);
    absY[i] = std::fabs(Y[i]);
    H[i] = phi_prime(Y[i], p) * (c.sigma(aR[i]) - c.sigma(aN[i]));
  }

  // Martingale part: movement-stop integral of H against S at the reference level.
  std::vector<double> sample_times(n);
  for (std::size_t i = 0; i < n; ++i) sample_times[i] = S.time_at(i);
  SampledPath H_path = S.uniform_grid()
                           ? SampledPath::uniform(S.duration(), std::move(H))
                           : SampledPath::with_times(S.shared_times(), std::move(H));
  std::vector<double> M = ito_values_at(H_path, S, ref_level, sample_times);

  const double K = c.C_b * C_bs * h + c.C_sigma * c.C_sigma * (2.0 / L) +
                   c.C_sigma * c.C_sigma * C_bs * (2.0 * p.delta / (p.epsilon * L)) * h;

  GronwallReplay rep;
  rep.ineq_slack = ineq_slack >= 0.0
                       ? ineq_slack
                       : 10.0 * interpolation_slack(S, level) + 1e-12;
  // Heuristic default: the identity residual is first order in the scheme gap
  // and scales with the band width of Phi'; overridable for stress setups.
  rep.eq_slack = eq_slack >= 0.0 ? eq_slack : std::max(1e-9, 0.02 * p.epsilon);

  std::vector<double> lhs(n), rhs(n);
  double int_absY = 0.0;   // int |Y| d[S], left point
  double int_drift = 0.0;  // int Phi'(Y) (b(aR) - b(aN)) d[S]
  double int_quad = 0.0;   // 1/2 int Phi''(Y) (sigma(aR) - sigma(aN))^2 d[S]
  double worst_eq = 0.0, min_margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const double Mi = M[i] + (i > 0 ? corrupt_martingale : 0.0);
    lhs[i] = absY[i];
    rhs[i] = p.epsilon + c.C_b * int_absY + 4.0 * K * qv.value_at(i) + Mi;
    min_margin = std::min(min_margin, rhs[i] - lhs[i]);

    const double eq_res = phi(Y[i], p) - phi(Y[0], p) - Mi - int_drift - int_quad;
    worst_eq = std::max(worst_eq, std::fabs(eq_res));

    if (i + 1 < n) {
      const double dqv = qv.value_at(i + 1) - qv.value_at(i);
      const double ds_sig = c.sigma(aR[i]) - c.sigma(aN[i]);
      int_absY += absY[i] * dqv;
      int_drift += phi_prime(Y[i], p) * (c.b(aR[i]) - c.b(aN[i])) * dqv;
      int_quad += 0.5 * phi_second(Y[i], p) * ds_sig * ds_sig * dqv;
    }
  }

  rep.eq_residual_sup = worst_eq;
  rep.min_margin = min_margin;
  rep.violated = (min_margin < -rep.ineq_slack) || (worst_eq > rep.eq_slack);
  rep.lhs_path = S.uniform_grid()
                     ? SampledPath::uniform(S.duration(), std::move(lhs))
                     : SampledPath::with_times(S.shared_times(), std::move(lhs));
  rep.rhs_path = S.uniform_grid()
                     ? SampledPath::uniform(S.duration(), std::move(rhs))
                     : SampledPath::with_times(S.shared_times(), std::move(rhs));
  return rep;
}

}  // namespace pathwise
