#pragma once

// Streaming per-segment kernels shared by the partition, integration and scheme
// code. Each kernel is a small state machine fed consecutive samples; experiments
// drive several of them in a single pass over a path, so these stay allocation-free.

#include <cmath>
#include <cstdint>

namespace pathwise::detail {

// Tracks the last grid line touched (in units of 2^-level) and whether one has
// been touched at all; a new crossing must land on a line different from the
// previous crossing's line.
struct GridLineTracker {
  long long line = 0;
  bool armed = false;

  void reset_at(double y) {
    double r = std::nearbyint(y);
    if (r == y) {
      line = (long long)r;
      armed = true;
    } else {
      armed = false;
    }
  }
};

// Quadratic-variation kernel, sample-detection semantics: a crossing event
// (segment touching a new grid line) is charged at the segment's right sample,
// at the observed sample value. Squared increments between detection values are
// unbiased for the elapsed time of Brownian samples at every level.
struct QvDetectKernel {
  double scale = 1.0;
  GridLineTracker ref;
  double detection_value = 0.0;
  double acc = 0.0;

  void reset(int level, double v0) {
    scale = std::ldexp(1.0, level);
    ref.reset_at(v0 * scale);
    detection_value = v0;
    acc = 0.0;
  }

  // Advance over the segment (va -> vb); returns true if a detection fired at vb.
  bool step(double va, double vb) {
    const double ya = va * scale, yb = vb * scale;
    bool crossed = false;
    long long last = ref.line;
    if (yb > ya) {
      long long m0 = (long long)std::ceil(ya);
      if (ref.armed && m0 == ref.line) ++m0;
      if (yb >= (double)m0) {
        crossed = true;
        last = (long long)std::floor(yb);
      }
    } else if (yb < ya) {
      long long m0 = (long long)std::floor(ya);
      if (ref.armed && m0 == ref.line) --m0;
      if (yb <= (double)m0) {
        crossed = true;
        last = (long long)std::ceil(yb);
      }
    }
    if (crossed) {
      const double d = vb - detection_value;
      acc += d * d;
      detection_value = vb;
      ref.line = last;
      ref.armed = true;
    }
    return crossed;
  }

  // V at a point with path value v, given the current state.
  double value_at(double v) const {
    const double p = v - detection_value;
    return acc + p * p;
  }
};

// Quadratic-variation kernel, interpolated-crossing semantics: every grid line
// passed inside a segment contributes a crossing with the exact grid value
// (times interpolated by the caller when needed). Consecutive crossing values
// differ by exactly 2^-level once the start lies on the grid.
struct QvSnapKernel {
  double scale = 1.0;
  int level = 0;
  GridLineTracker ref;
  double last_value = 0.0;  // value at the last crossing (exact grid value)
  double acc = 0.0;

  void reset(int lvl, double v0) {
    level = lvl;
    scale = std::ldexp(1.0, lvl);
    ref.reset_at(v0 * scale);
    last_value = v0;
    acc = 0.0;
  }

  // Advance over (va -> vb), invoking emit(grid_value, fraction) per crossing,
  // fraction in (0, 1] locating the crossing inside the segment.
  template <class Emit>
  void step(double va, double vb, Emit&& emit) {
    const double ya = va * scale, yb = vb * scale;
    if (yb == ya) return;
    const bool up = yb > ya;
    long long m;
    if (up) {
      m = (long long)std::ceil(ya);
      if (ref.armed && m == ref.line) ++m;
    } else {
      m = (long long)std::floor(ya);
      if (ref.armed && m == ref.line) --m;
    }
    while (up ? ((double)m <= yb) : ((double)m >= yb)) {
      const double gv = std::ldexp((double)m, -level);
      const double frac = (gv - va) / (vb - va);
      const double d = gv - last_value;
      acc += d * d;
      last_value = gv;
      ref.line = m;
      ref.armed = true;
      emit(gv, frac);
      up ? ++m : --m;
    }
  }

  void step(double va, double vb) {
    step(va, vb, [](double, double) {});
  }

  double value_at(double v) const {
    const double p = v - last_value;
    return acc + p * p;
  }
};

// Stopping rule for the model-free integral: stop at the first sample where the
// integrand or the integrator has moved by at least 2^-level since the last stop
// (observed values; sample-detection semantics).
struct MoveStopKernel {
  double h = 1.0;
  double ref_x = 0.0, ref_s = 0.0;

  void reset(int level, double x0, double s0) {
    h = std::ldexp(1.0, -level);
    ref_x = x0;
    ref_s = s0;
  }

  bool triggered(double x, double s) const {
    return std::fabs(x - ref_x) >= h || std::fabs(s - ref_s) >= h;
  }

  void rearm(double x, double s) {
    ref_x = x;
    ref_s = s;
  }
};

}  // namespace pathwise::detail
