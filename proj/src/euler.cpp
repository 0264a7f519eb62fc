#include "pathwise/euler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pathwise/detail/crossing_kernels.hpp"

namespace pathwise {

namespace {

void check_level(int level) {
  if (level < 0 || level > 62) throw validation_error("level out of range [0, 62]");
}

void check_qv(const SampledPath& S, const SampledPath* qv) {
  if (!qv) return;
  if (qv->size() != S.size() || qv->duration() != S.duration())
    throw validation_error("quadratic-variation path must share the driver's grid");
  if (qv->value_at(0) != 0.0)
    throw validation_error("quadratic-variation path must start at 0");
  for (std::size_t i = 1; i < qv->size(); ++i)
    if (qv->value_at(i) < qv->value_at(i - 1))
      throw validation_error("quadratic-variation path must be nondecreasing");
}

struct Anchor {
  double x, s, q;       // state, driver, clock at the last anchor
  double bk, sk;        // frozen coefficients
  SolveDiagnostics* diag;
  const CoefficientPair* c;
  double move_budget;   // per-step budget when bounds are declared, else inf

  void arm(double xv, double sv, double qval) {
    x = xv;
    s = sv;
    q = qval;
    bk = c->b(xv);
    sk = c->sigma(xv);
    if (xv < c->domain.first || xv > c->domain.second) ++diag->domain_excursions;
  }

  double extend(double sv, double qval) const {
    return x + bk * (qval - q) + sk * (sv - s);
  }

  void account_step(double sv, double qval) {
    const double drift = std::fabs(bk * (qval - q));
    const double diff = std::fabs(sk * (sv - s));
    diag->sup_drift_step = std::max(diag->sup_drift_step, drift);
    diag->sup_diff_step = std::max(diag->sup_diff_step, diff);
    if (drift + diff > move_budget) diag->move_bound_ok = false;
    ++diag->stopping_count;
  }
};

}  // namespace

SolveResult euler_solve(const CoefficientPair& c, double x0, const SampledPath& S,
                        const SampledPath* qv, int level, GridSemantics semantics) {
  check_level(level);
  check_qv(S, qv);
  if (!c.b || !c.sigma) throw validation_error("coefficient pair is incomplete");

  const double h = std::ldexp(1.0, -level);
  const std::size_t n = S.size();

  SolveResult res;
  res.level = level;
  res.grid.times.push_back(S.time_at(0));
  std::vector<double> X(n, 0.0);
  X[0] = x0;

  Anchor a;
  a.diag = &res.diagnostics;
  a.c = &c;
  // Budget per step: bound * (trigger threshold + worst overshoot). Detection
  // overshoots by up to one sample oscillation in each trigger variable.
  const double osc = S.max_step_oscillation();
  double qosc = 0.0;
  if (semantics == GridSemantics::SampleDetection) {
    if (qv) {
      for (std::size_t i = 1; i < qv->size(); ++i)
        qosc = std::max(qosc, qv->value_at(i) - qv->value_at(i - 1));
    } else {
      for (std::size_t i = 1; i < n; ++i)
        qosc = std::max(qosc, S.time_at(i) - S.time_at(i - 1));
    }
  }
  if (c.bounds_declared()) {
    if (semantics == GridSemantics::SampleDetection) {
      a.move_budget =
          (*c.bound_b * (h + qosc) + *c.bound_sigma * (h + osc)) * (1.0 + 1e-9);
    } else {
      // Interpolated driver crossings are anchored at the previous driver
      // emission, so after a clock event re-arms the anchor mid-cell the next
      // driver value can sit up to 2h away.  Clock lines are absolute
      // multiples of h, so the clock increment never exceeds h.
      a.move_budget = (*c.bound_b * h + *c.bound_sigma * 2.0 * h) * (1.0 + 1e-9);
    }
  } else {
    a.move_budget = std::numeric_limits<double>::infinity();
  }
  a.arm(x0, S.value_at(0), qv ? qv->value_at(0) : S.time_at(0));
  res.diagnostics.domain_excursions = 0;  // do not count the initial state twice
  if (x0 < c.domain.first || x0 > c.domain.second) res.diagnostics.domain_excursions = 1;

  if (semantics == GridSemantics::SampleDetection) {
    for (std::size_t i = 1; i < n; ++i) {
      const double s = S.value_at(i);
      const double q = qv ? qv->value_at(i) : S.time_at(i);
      X[i] = a.extend(s, q);
      const bool s_trig = std::fabs(s - a.s) >= h;
      const bool q_trig = (q - a.q) >= h;
      if (s_trig || q_trig) {
        a.account_step(s, q);
        res.grid.times.push_back(S.time_at(i));
        res.grid.triggers.push_back(s_trig ? EulerGrid::Trigger::SCrossing
                                           : EulerGrid::Trigger::QVCrossing);
        a.arm(X[i], s, q);
      } else if (X[i] < c.domain.first || X[i] > c.domain.second) {
        ++res.diagnostics.domain_excursions;
      }
    }
  } else {
    // Interpolated events: driver grid crossings (exact grid values, via the
    // same emitter as the partition module) merged in time order with clock
    // crossings of multiples of 2^-level.
    detail::QvSnapKernel sk;
    sk.reset(level, S.value_at(0));
    double q0 = qv ? qv->value_at(0) : S.time_at(0);
    long long q_line = (long long)std::floor(q0 / h);

    struct Event {
      double t, s, q;
      EulerGrid::Trigger trig;
    };
    std::vector<Event> events;  // within one segment
    for (std::size_t i = 1; i < n; ++i) {
      const double ta = S.time_at(i - 1), tb = S.time_at(i);
      const double sa = S.value_at(i - 1), sb = S.value_at(i);
      const double qa = qv ? qv->value_at(i - 1) : ta;
      const double qb = qv ? qv->value_at(i) : tb;

      events.clear();
      sk.step(sa, sb, [&](double gv, double frac) {
        const double t = ta + frac * (tb - ta);
        const double q = qa + frac * (qb - qa);
        events.push_back({t, gv, q, EulerGrid::Trigger::SCrossing});
      });
      if (qb > qa) {
        for (long long m = q_line + 1; (double)m * h <= qb; ++m) {
          const double qc = (double)m * h;
          const double frac = (qc - qa) / (qb - qa);
          const double t = ta + frac * (tb - ta);
          const double s = sa + frac * (sb - sa);
          events.push_back({t, s, qc, EulerGrid::Trigger::QVCrossing});
          q_line = m;
        }
      }
      // Both streams are time-sorted inside a linear segment; merge them.
      std::stable_sort(events.begin(), events.end(),
                       [](const Event& l, const Event& r) { return l.t < r.t; });
      for (const Event& e : events) {
        // A clock crossing coincident with a driver crossing is one joint
        // stopping time, not two; the driver event (sorted first) carries it.
        if (e.trig == EulerGrid::Trigger::QVCrossing && !res.grid.triggers.empty() &&
            e.t == res.grid.times.back())
          continue;
        const double xe = a.extend(e.s, e.q);
        a.account_step(e.s, e.q);
        res.grid.times.push_back(e.t);
        res.grid.triggers.push_back(e.trig);
        a.arm(xe, e.s, e.q);
      }
      X[i] = a.extend(sb, qb);
      if (X[i] < c.domain.first || X[i] > c.domain.second)
        ++res.diagnostics.domain_excursions;
    }
  }

  res.solution = S.uniform_grid()
                     ? SampledPath::uniform(S.duration(), std::move(X))
                     : SampledPath::with_times(S.shared_times(), std::move(X));
  return res;
}

SolveResult reference_solution(const CoefficientPair& c, double x0, const SampledPath& S,
                               const SampledPath* qv, int ref_level,
                               int finest_compared_level, GridSemantics semantics) {
  if (ref_level <= finest_compared_level)
    throw validation_error("reference level must exceed every compared level");
  return euler_solve(c, x0, S, qv, ref_level, semantics);
}

}  // namespace pathwise
