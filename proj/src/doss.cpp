#include "pathwise/doss.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pathwise {

namespace {

void check_shared_grid(const SampledPath& A, const SampledPath& B, const char* what) {
  if (A.size() != B.size() || A.duration() != B.duration())
    throw validation_error(std::string(what) + " must share one sample grid");
  if (!A.uniform_grid() || !B.uniform_grid())
    for (std::size_t i = 0; i < A.size(); ++i)
      if (A.time_at(i) != B.time_at(i))
        throw validation_error(std::string(what) + " must share one sample grid");
}

void check_qv_path(const SampledPath& qv) {
  if (qv.value_at(0) != 0.0)
    throw validation_error("quadratic-variation path must start at 0");
  for (std::size_t i = 1; i < qv.size(); ++i)
    if (qv.value_at(i) < qv.value_at(i - 1))
      throw validation_error("quadratic-variation path must be nondecreasing");
}

// Cubic Hermite basis on t in [0, 1] with node distance d.
struct Hermite {
  double h00, h10, h01, h11;           // value weights
  double d00, d10, d01, d11;           // derivative-of-interpolant weights (per 1/d)
  explicit Hermite(double t) {
    const double t2 = t * t, t3 = t2 * t;
    h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    h10 = t3 - 2.0 * t2 + t;
    h01 = -2.0 * t3 + 3.0 * t2;
    h11 = t3 - t2;
    d00 = 6.0 * t2 - 6.0 * t;
    d10 = 3.0 * t2 - 4.0 * t + 1.0;
    d01 = -6.0 * t2 + 6.0 * t;
    d11 = 3.0 * t2 - 2.0 * t;
  }
  double value(double v0, double m0, double v1, double m1, double d) const {
    return h00 * v0 + h10 * d * m0 + h01 * v1 + h11 * d * m1;
  }
  double deriv(double v0, double m0, double v1, double m1, double d) const {
    return (d00 * v0 + d01 * v1) / d + d10 * m0 + d11 * m1;
  }
};

}  // namespace

void FlowTable::integrate_row(std::size_t row) {
  const double y = y0_ + dy_ * (double)row;
  double* g = &g_vals_[row * cols_];
  double* gy = &gy_vals_[row * cols_];
  g[neg_cols_] = y;
  gy[neg_cols_] = 1.0;

  auto rk4 = [&](double gv, double gyv, double hstep, double& go, double& gyo) {
    const auto f = [&](double a, double b, double& da, double& db) {
      da = sigma_(a);
      db = sigma_prime_(a) * b;
    };
    double k1g, k1y, k2g, k2y, k3g, k3y, k4g, k4y;
    f(gv, gyv, k1g, k1y);
    f(gv + 0.5 * hstep * k1g, gyv + 0.5 * hstep * k1y, k2g, k2y);
    f(gv + 0.5 * hstep * k2g, gyv + 0.5 * hstep * k2y, k3g, k3y);
    f(gv + hstep * k3g, gyv + hstep * k3y, k4g, k4y);
    go = gv + hstep / 6.0 * (k1g + 2.0 * k2g + 2.0 * k3g + k4g);
    gyo = gyv + hstep / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
  };

  for (std::size_t i = neg_cols_ + 1; i < cols_; ++i)
    rk4(g[i - 1], gy[i - 1], dx_, g[i], gy[i]);
  for (std::size_t i = neg_cols_; i > 0; --i)
    rk4(g[i], gy[i], -dx_, g[i - 1], gy[i - 1]);
}

void FlowTable::locate(double x, double y, std::size_t& ci, std::size_t& rj,
                       double& tx, double& ty) const {
  if (x < x_lo() - 1e-12 || x > x_hi() + 1e-12 || y < y_lo() - 1e-12 ||
      y > y_hi() + 1e-12)
    throw domain_error("flow table queried outside its lattice (use ensure_covers)");
  const double fx = (x - x_lo()) / dx_;
  const double fy = (y - y_lo()) / dy_;
  ci = std::min((std::size_t)std::max(0.0, std::floor(fx)), cols_ - 2);
  rj = std::min((std::size_t)std::max(0.0, std::floor(fy)), rows_ - 2);
  tx = fx - (double)ci;
  ty = fy - (double)rj;
}

double FlowTable::g(double x, double y) const {
  std::size_t ci, rj;
  double tx, ty;
  locate(x, y, ci, rj, tx, ty);
  const Hermite hx(tx), hy(ty);

  double gv[2], gyv[2];
  for (int r = 0; r < 2; ++r) {
    const double* grow = &g_vals_[(rj + (std::size_t)r) * cols_];
    const double* gyrow = &gy_vals_[(rj + (std::size_t)r) * cols_];
    const double g0 = grow[ci], g1 = grow[ci + 1];
    const double y0v = gyrow[ci], y1v = gyrow[ci + 1];
    gv[r] = hx.value(g0, sigma_(g0), g1, sigma_(g1), dx_);
    gyv[r] = hx.value(y0v, sigma_prime_(g0) * y0v, y1v, sigma_prime_(g1) * y1v, dx_);
  }
  return hy.value(gv[0], gyv[0], gv[1], gyv[1], dy_);
}

double FlowTable::g_y(double x, double y) const {
  std::size_t ci, rj;
  double tx, ty;
  locate(x, y, ci, rj, tx, ty);
  const Hermite hx(tx), hy(ty);

  double gv[2], gyv[2];
  for (int r = 0; r < 2; ++r) {
    const double* grow = &g_vals_[(rj + (std::size_t)r) * cols_];
    const double* gyrow = &gy_vals_[(rj + (std::size_t)r) * cols_];
    const double g0 = grow[ci], g1 = grow[ci + 1];
    const double y0v = gyrow[ci], y1v = gyrow[ci + 1];
    gv[r] = hx.value(g0, sigma_(g0), g1, sigma_(g1), dx_);
    gyv[r] = hx.value(y0v, sigma_prime_(g0) * y0v, y1v, sigma_prime_(g1) * y1v, dx_);
  }
  return hy.deriv(gv[0], gyv[0], gv[1], gyv[1], dy_);
}

void FlowTable::ensure_covers(double x_min, double x_max, double y_min, double y_max) {
  const double pad_x = 2.0 * dx_, pad_y = 2.0 * dy_;
  if (x_min >= x_lo() && x_max <= x_hi() && y_min >= y_lo() && y_max <= y_hi())
    return;

  const double nx_lo = std::min(x_min - pad_x, x_lo());
  const double nx_hi = std::max(x_max + pad_x, x_hi());
  const double ny_lo = std::min(y_min - pad_y, y_lo());
  const double ny_hi = std::max(y_max + pad_y, y_hi());

  neg_cols_ = (std::size_t)std::ceil(std::max(0.0, -nx_lo) / dx_);
  const std::size_t pos_cols = (std::size_t)std::ceil(std::max(0.0, nx_hi) / dx_);
  cols_ = neg_cols_ + pos_cols + 1;
  y0_ = ny_lo;
  rows_ = (std::size_t)std::ceil((ny_hi - ny_lo) / dy_) + 2;
  g_vals_.assign(rows_ * cols_, 0.0);
  gy_vals_.assign(rows_ * cols_, 0.0);
  for (std::size_t j = 0; j < rows_; ++j) integrate_row(j);
}

FlowTable build_flow(const CoefficientPair& c, double x_min, double x_max,
                     double y_min, double y_max, double tolerance) {
  if (!c.sigma || !c.sigma_prime)
    throw validation_error("flow construction needs sigma and sigma_prime");
  if (!(x_min <= x_max) || !(y_min <= y_max))
    throw validation_error("flow ranges must be ordered");
  if (!(tolerance > 0.0)) throw validation_error("flow tolerance must be positive");

  for (double step = 1.0 / 128.0; step >= 1.0 / 2048.0; step *= 0.5) {
    FlowTable t;
    t.sigma_ = c.sigma;
    t.sigma_prime_ = c.sigma_prime;
    t.x0_ = 0.0;
    t.dx_ = step;
    t.dy_ = step;
    t.tol_ = tolerance;
    t.cols_ = 1;
    t.rows_ = 1;
    t.neg_cols_ = 0;
    t.y0_ = y_min;
    t.g_vals_.assign(1, y_min);
    t.gy_vals_.assign(1, 1.0);
    t.ensure_covers(std::min(x_min, 0.0), std::max(x_max, 0.0), y_min,
                    std::max(y_max, y_min + step));

    // Positivity of g_y on all nodes.
    bool ok = true;
    for (double v : t.gy_vals_)
      if (!(v > 0.0)) {
        ok = false;
        break;
      }
    if (!ok) continue;

    // Flow identity at off-lattice probes, via finite differences of the
    // interpolant itself.
    const double e = t.dx_ / 8.0;
    for (int pi = 0; pi < 17 && ok; ++pi) {
      for (int pj = 0; pj < 17 && ok; ++pj) {
        const double x = t.x_lo() + (0.37 + (double)pi) / 17.0 * (t.x_hi() - t.x_lo());
        const double y = t.y_lo() + (0.61 + (double)pj) / 17.0 * (t.y_hi() - t.y_lo());
        if (x - e < t.x_lo() || x + e > t.x_hi()) continue;
        const double fd = (t.g(x + e, y) - t.g(x - e, y)) / (2.0 * e);
        const double want = c.sigma(t.g(x, y));
        if (std::fabs(fd - want) > tolerance * std::max(1.0, std::fabs(want)))
          ok = false;
      }
    }
    if (ok) return t;
  }
  throw validation_error(
      "flow lattice failed its residual check at the finest resolution; "
      "loosen the tolerance or shrink the ranges");
}

namespace {

// One explicit midpoint step of y' = f(s(t), y) over a cell, with the driver
// linear from s_a to s_b and the clock advancing by dq.
template <class F>
double midpoint_step(const F& f, double y, double s_a, double s_m, double dq) {
  const double k1 = f(s_a, y);
  const double ym = y + 0.5 * dq * k1;
  return y + dq * f(s_m, ym);
}

template <class F>
double integrate_cell(const F& f, double y, double s_a, double s_b, double dq,
                      double tol, int depth) {
  if (dq == 0.0) return y;
  const double s_m = 0.5 * (s_a + s_b);
  const double full = midpoint_step(f, y, s_a, s_m, dq);
  const double s_q1 = 0.5 * (s_a + s_m), s_q3 = 0.5 * (s_m + s_b);
  double half = midpoint_step(f, y, s_a, s_q1, 0.5 * dq);
  half = midpoint_step(f, half, s_m, s_q3, 0.5 * dq);
  if (std::fabs(full - half) <= tol * std::max(1.0, std::fabs(half)) || depth >= 20)
    return half;
  const double y_mid = integrate_cell(f, y, s_a, s_m, 0.5 * dq, tol, depth + 1);
  return integrate_cell(f, y_mid, s_m, s_b, 0.5 * dq, tol, depth + 1);
}

}  // namespace

SampledPath solve_Y(const CoefficientPair& c, const FlowTable& flow, double x0,
                    const SampledPath& driver, const SampledPath& qv, YMode mode,
                    double tol) {
  (void)mode;  // both modes integrate the same reduced equation
  check_shared_grid(driver, qv, "driver and clock");
  check_qv_path(qv);
  if (!c.b) throw validation_error("coefficient pair is incomplete");

  const auto f = [&](double s, double y) { return c.b(flow.g(s, y)) / flow.g_y(s, y); };
  std::vector<double> Y(driver.size(), 0.0);
  Y[0] = x0;
  for (std::size_t i = 0; i + 1 < driver.size(); ++i) {
    const double dq = qv.value_at(i + 1) - qv.value_at(i);
    Y[i + 1] = integrate_cell(f, Y[i], driver.value_at(i), driver.value_at(i + 1), dq,
                              tol, 0);
  }
  return driver.uniform_grid()
             ? SampledPath::uniform(driver.duration(), std::move(Y))
             : SampledPath::with_times(driver.shared_times(), std::move(Y));
}

SampledPath assemble_solution(const FlowTable& flow, const SampledPath& driver,
                              const SampledPath& Y) {
  check_shared_grid(driver, Y, "driver and transformed state");
  std::vector<double> X(driver.size(), 0.0);
  for (std::size_t i = 0; i < driver.size(); ++i)
    X[i] = flow.g(driver.value_at(i), Y.value_at(i));
  return driver.uniform_grid()
             ? SampledPath::uniform(driver.duration(), std::move(X))
             : SampledPath::with_times(driver.shared_times(), std::move(X));
}

SampledPath lamperti_solve(const CoefficientPair& c, const FlowTable& flow, double x0,
                           const SampledPath& S, const SampledPath& qv, double tol) {
  check_shared_grid(S, qv, "driver and clock");
  check_qv_path(qv);
  if (!c.b || !c.sigma) throw validation_error("coefficient pair is incomplete");

  // State Z with X = g(Z + S, x0): the drift transfers as b/sigma along the flow.
  const auto f = [&](double s, double z) {
    const double x = flow.g(z + s, x0);
    const double sig = c.sigma(x);
    if (std::fabs(sig) < 1e-12)
      throw domain_error("drift-shift transform hit sigma = 0");
    return c.b(x) / sig;
  };
  // The inner argument is z + s, so the "driver" fed to the cell integrator
  // must be S itself while z accumulates; wrap by shifting inside f instead.
  std::vector<double> Z(S.size(), 0.0);
  for (std::size_t i = 0; i + 1 < S.size(); ++i) {
    const double dq = qv.value_at(i + 1) - qv.value_at(i);
    Z[i + 1] = integrate_cell(f, Z[i], S.value_at(i), S.value_at(i + 1), dq, tol, 0);
  }
  std::vector<double> X(S.size(), 0.0);
  for (std::size_t i = 0; i < S.size(); ++i)
    X[i] = flow.g(Z[i] + S.value_at(i), x0);
  return S.uniform_grid() ? SampledPath::uniform(S.duration(), std::move(X))
                          : SampledPath::with_times(S.shared_times(), std::move(X));
}

}  // namespace pathwise
