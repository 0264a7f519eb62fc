#pragma once

// Flow-based solution transforms: the diffusion flow g solving
// dg/dx = sigma(g), g(0, y) = y, cached on a lattice; the reduced ODE for the
// transformed state Y; assembly X_t = g(driver_t, Y_t); and the drift-shift
// variant X_t = g(Z_t + S_t, x0).
//
// The assembled path solves dX = b(X) d[S] + sigma(X) o dS (geometric/
// Stratonovich coupling); against a movement-stop Euler scheme the matching
// limit equation carries the corrected drift b + 1/2 sigma sigma'.

#include <cstddef>
#include <memory>
#include <vector>

#include "pathwise/coefficients.hpp"
#include "pathwise/path.hpp"

namespace pathwise {

// Lattice cache of the flow g and its initial-condition derivative
// g_y = exp(int sigma'(g)). Rows are integrated by classical RK4 from x = 0 in
// both directions; queries use cubic Hermite interpolation with the exact
// derivative identities g_x = sigma(g) and (g_y)_x = sigma'(g) g_y.
//
// Concurrency: a built table is immutable; ensure_covers extends the lattice
// and must be called by a single writer before concurrent readers start.
class FlowTable {
 public:
  double g(double x, double y) const;
  double g_y(double x, double y) const;

  double x_lo() const { return x0_ - dx_ * (double)neg_cols_; }
  double x_hi() const { return x0_ + dx_ * (double)(cols_ - neg_cols_ - 1); }
  double y_lo() const { return y0_; }
  double y_hi() const { return y0_ + dy_ * (double)(rows_ - 1); }
  double tolerance() const { return tol_; }

  // Single-writer lattice extension (no-op if already covered).
  void ensure_covers(double x_min, double x_max, double y_min, double y_max);

 private:
  friend FlowTable build_flow(const CoefficientPair& c, double x_min, double x_max,
                              double y_min, double y_max, double tolerance);

  void integrate_row(std::size_t row);
  void locate(double x, double y, std::size_t& ci, std::size_t& rj, double& tx,
              double& ty) const;

  std::function<double(double)> sigma_, sigma_prime_;
  double x0_ = 0.0;  // x of the column holding the identity g(0, y) = y
  double y0_ = 0.0;
  double dx_ = 0.0, dy_ = 0.0;
  std::size_t cols_ = 0, rows_ = 0, neg_cols_ = 0;
  double tol_ = 0.0;
  // Row-major: value(row j, col i) at g_[j * cols_ + i]; col 0 is x_lo.
  std::vector<double> g_vals_, gy_vals_;
};

// Builds the lattice and verifies it: g(0, y) = y exactly on nodes, g_y > 0,
// and the flow identity dg/dx = sigma(g) sampled by finite differences at
// off-lattice points within `tolerance` (relative to max(1, |sigma(g)|)).
// Throws validation_error if the check fails after refinement.
FlowTable build_flow(const CoefficientPair& c, double x_min, double x_max,
                     double y_min, double y_max, double tolerance = 1e-6);

enum class YMode {
  AgainstQV,              // driver is the rough path itself (limit system)
  AgainstQVWithBVDriver,  // driver is a bounded-variation approximant
};

// Transformed state: dY = [ b(g(driver_t, Y)) / g_y(driver_t, Y) ] d[qv],
// integrated by explicit midpoint steps with one step-halving refinement per
// sample cell (accepted when the halved estimate moves less than tol).
// driver and qv share one sample grid; returns Y on that grid, Y_0 = x0.
// The two modes run the same integrator; the enum records which system the
// caller is approximating.
SampledPath solve_Y(const CoefficientPair& c, const FlowTable& flow, double x0,
                    const SampledPath& driver, const SampledPath& qv,
                    YMode mode = YMode::AgainstQV, double tol = 1e-9);

// X_i = g(driver_i, Y_i).
SampledPath assemble_solution(const FlowTable& flow, const SampledPath& driver,
                              const SampledPath& Y);

// Drift-shift variant: X_t = g(Z_t + S_t, x0) with
// dZ = [ b / sigma ](g(Z + S, x0)) d[qv]; requires sigma nonzero along the
// solution (throws domain_error otherwise). For sigma == 1 this coincides with
// solve_Y + assemble_solution.
SampledPath lamperti_solve(const CoefficientPair& c, const FlowTable& flow, double x0,
                           const SampledPath& S, const SampledPath& qv,
                           double tol = 1e-9);

}  // namespace pathwise
