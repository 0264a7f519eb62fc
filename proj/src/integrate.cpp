#include "pathwise/integrate.hpp"

#include <algorithm>
#include <cmath>

#include "pathwise/detail/crossing_kernels.hpp"

namespace pathwise {

namespace {

void check_shared_grid(const SampledPath& X, const SampledPath& S) {
  if (X.size() != S.size() || X.uniform_grid() != S.uniform_grid())
    throw validation_error("integrand and integrator must share one sample grid");
  if (X.uniform_grid()) {
    if (X.duration() != S.duration())
      throw validation_error("integrand and integrator must share one sample grid");
    return;
  }
  if (X.shared_times() == S.shared_times()) return;
  for (std::size_t i = 0; i < X.size(); ++i)
    if (X.time_at(i) != S.time_at(i))
      throw validation_error("integrand and integrator must share one sample grid");
}

void check_query_times(const SampledPath& S, const std::vector<double>& ts,
                       bool allow_repeats) {
  if (ts.empty()) throw validation_error("evaluation times must be non-empty");
  if (ts.front() != 0.0) throw validation_error("evaluation times must start at 0");
  for (std::size_t i = 1; i < ts.size(); ++i)
    if (ts[i] < ts[i - 1] || (!allow_repeats && ts[i] == ts[i - 1]))
      throw validation_error("evaluation times must be sorted");
  if (ts.back() > S.duration() * (1.0 + 1e-12))
    throw validation_error("evaluation time beyond path duration");
}

void check_level(int level) {
  if (level < 0 || level > 62) throw validation_error("level out of range [0, 62]");
}

double lerp_at(double t, double ta, double va, double tb, double vb) {
  if (t == ta) return va;
  if (t == tb) return vb;
  return va + (t - ta) / (tb - ta) * (vb - va);
}

// Running state of one left-point integral along movement stops.
struct ItoState {
  detail::MoveStopKernel stop;
  double acc = 0.0;
  double f = 0.0;  // integrand frozen at the last stop

  void reset(int level, double x0, double s0) {
    stop.reset(level, x0, s0);
    acc = 0.0;
    f = x0;
  }

  void step(double x, double s) {
    if (stop.triggered(x, s)) {
      acc += f * (s - stop.ref_s);
      f = x;
      stop.rearm(x, s);
    }
  }

  double value_at(double s) const { return acc + f * (s - stop.ref_s); }
};

}  // namespace

std::vector<std::size_t> ito_stopping_indices(const SampledPath& X,
                                              const SampledPath& S, int level) {
  check_shared_grid(X, S);
  check_level(level);
  std::vector<std::size_t> stops{0};
  detail::MoveStopKernel k;
  k.reset(level, X.value_at(0), S.value_at(0));
  for (std::size_t i = 1; i < X.size(); ++i) {
    if (k.triggered(X.value_at(i), S.value_at(i))) {
      stops.push_back(i);
      k.rearm(X.value_at(i), S.value_at(i));
    }
  }
  return stops;
}

namespace {

std::vector<double> ito_values_detect(const SampledPath& X, const SampledPath& S,
                                      int level,
                                      const std::vector<double>& sorted_times) {
  ItoState st;
  st.reset(level, X.value_at(0), S.value_at(0));
  std::vector<double> out(sorted_times.size(), 0.0);
  std::size_t q = 0;
  for (std::size_t i = 0; i + 1 < X.size(); ++i) {
    const double ta = S.time_at(i), tb = S.time_at(i + 1);
    const double sa = S.value_at(i), sb = S.value_at(i + 1);
    // Stops are charged at sample times: queries in [ta, tb) use the state as
    // of sample i, with S linearly interpolated in the partial term.
    while (q < sorted_times.size() && sorted_times[q] < tb) {
      out[q] = st.value_at(lerp_at(sorted_times[q], ta, sa, tb, sb));
      ++q;
    }
    st.step(X.value_at(i + 1), sb);
  }
  const double sT = S.value_at(S.size() - 1);
  while (q < sorted_times.size()) out[q++] = st.value_at(sT);
  return out;
}

std::vector<double> ito_values_interp(const SampledPath& X, const SampledPath& S,
                                      int level,
                                      const std::vector<double>& sorted_times) {
  const double h = std::ldexp(1.0, -level);
  const std::size_t n = X.size();
  double acc = 0.0;
  double f = X.value_at(0);
  double ref_x = X.value_at(0), ref_s = S.value_at(0);
  std::vector<double> out(sorted_times.size(), 0.0);
  std::size_t q = 0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double ta = S.time_at(i), tb = S.time_at(i + 1);
    const double xa = X.value_at(i), xb = X.value_at(i + 1);
    const double sa = S.value_at(i), sb = S.value_at(i + 1);
    // Both coordinates move affinely in the segment fraction w; each event is
    // the smallest w where one of them reaches its reference +/- h, and both
    // references re-arm there. Multiple events per segment are possible.
    double wc = 0.0;
    for (;;) {
      double wx = 2.0, ws = 2.0, tgt_x = 0.0, tgt_s = 0.0;
      if (xb != xa) {
        tgt_x = (xb > xa) ? ref_x + h : ref_x - h;
        const double w = (tgt_x - xa) / (xb - xa);
        if (w > wc && w <= 1.0) wx = w;
      }
      if (sb != sa) {
        tgt_s = (sb > sa) ? ref_s + h : ref_s - h;
        const double w = (tgt_s - sa) / (sb - sa);
        if (w > wc && w <= 1.0) ws = w;
      }
      const double we = std::min(wx, ws);
      if (we > 1.0) break;
      const double te = ta + we * (tb - ta);
      while (q < sorted_times.size() && sorted_times[q] < te) {
        out[q] = acc + f * (lerp_at(sorted_times[q], ta, sa, tb, sb) - ref_s);
        ++q;
      }
      const double xe = (wx <= ws) ? tgt_x : xa + we * (xb - xa);
      const double se = (ws <= wx) ? tgt_s : sa + we * (sb - sa);
      acc += f * (se - ref_s);
      f = xe;
      ref_x = xe;
      ref_s = se;
      wc = we;
    }
    while (q < sorted_times.size() && sorted_times[q] < tb) {
      out[q] = acc + f * (lerp_at(sorted_times[q], ta, sa, tb, sb) - ref_s);
      ++q;
    }
  }
  const double sT = S.value_at(n - 1);
  while (q < sorted_times.size()) out[q++] = acc + f * (sT - ref_s);
  return out;
}

}  // namespace

std::vector<double> ito_values_at(const SampledPath& X, const SampledPath& S,
                                  int level, const std::vector<double>& sorted_times,
                                  CrossingSemantics semantics) {
  check_shared_grid(X, S);
  check_level(level);
  check_query_times(S, sorted_times, /*allow_repeats=*/true);
  return semantics == CrossingSemantics::SampleDetection
             ? ito_values_detect(X, S, level, sorted_times)
             : ito_values_interp(X, S, level, sorted_times);
}

std::vector<double> ito_values_with_stops(const SampledPath& X, const SampledPath& S,
                                          const std::vector<std::size_t>& stops,
                                          const std::vector<double>& sorted_times) {
  check_shared_grid(X, S);
  check_query_times(S, sorted_times, /*allow_repeats=*/true);
  if (stops.empty() || stops.front() != 0)
    throw validation_error("stop set must start with index 0");

  double acc = 0.0;
  double f = X.value_at(0);
  double ref_s = S.value_at(0);
  std::size_t next = 1;  // next stop position in `stops`
  std::vector<double> out(sorted_times.size(), 0.0);
  std::size_t q = 0;
  for (std::size_t i = 0; i + 1 < X.size(); ++i) {
    const double ta = S.time_at(i), tb = S.time_at(i + 1);
    const double sa = S.value_at(i), sb = S.value_at(i + 1);
    while (q < sorted_times.size() && sorted_times[q] < tb) {
      out[q] = acc + f * (lerp_at(sorted_times[q], ta, sa, tb, sb) - ref_s);
      ++q;
    }
    if (next < stops.size() && stops[next] == i + 1) {
      acc += f * (sb - ref_s);
      f = X.value_at(i + 1);
      ref_s = sb;
      ++next;
    }
  }
  const double sT = S.value_at(S.size() - 1);
  while (q < sorted_times.size()) out[q++] = acc + f * (sT - ref_s);
  return out;
}

IntegralResult ito_integral(const SampledPath& X, const SampledPath& S, int level,
                            const std::vector<double>& eval_times) {
  check_shared_grid(X, S);
  check_level(level);
  check_query_times(S, eval_times, /*allow_repeats=*/false);

  ItoState fine, coarse;
  fine.reset(level, X.value_at(0), S.value_at(0));
  const bool have_coarse = level >= 1;
  if (have_coarse) coarse.reset(level - 1, X.value_at(0), S.value_at(0));

  std::vector<double> out(eval_times.size(), 0.0);
  std::size_t q = 0;
  double gap = 0.0;
  for (std::size_t i = 0; i + 1 < X.size(); ++i) {
    const double ta = S.time_at(i), tb = S.time_at(i + 1);
    const double sa = S.value_at(i), sb = S.value_at(i + 1);
    while (q < eval_times.size() && eval_times[q] < tb) {
      out[q] = fine.value_at(lerp_at(eval_times[q], ta, sa, tb, sb));
      ++q;
    }
    const double x = X.value_at(i + 1);
    fine.step(x, sb);
    if (have_coarse) {
      coarse.step(x, sb);
      gap = std::max(gap, std::fabs(fine.value_at(sb) - coarse.value_at(sb)));
    }
  }
  const double sT = S.value_at(S.size() - 1);
  while (q < eval_times.size()) out[q++] = fine.value_at(sT);

  IntegralResult r;
  r.value_path = SampledPath::with_times(eval_times, std::move(out));
  r.approximation_level = level;
  r.est_error = gap;
  return r;
}

IntegralResult stieltjes_integral(const SampledPath& f, const SampledPath& A,
                                  const std::vector<double>& eval_times) {
  check_query_times(A, eval_times, /*allow_repeats=*/false);
  if (f.duration() < A.duration() * (1.0 - 1e-12))
    throw validation_error("integrand must cover the integrator domain");

  // Merged grid of both sample sets, then the left-point sum
  // sum f(u_k) (A(u_{k+1}) - A(u_k)).
  std::vector<double> grid;
  grid.reserve(f.size() + A.size());
  for (std::size_t i = 0; i < f.size(); ++i) grid.push_back(f.time_at(i));
  for (std::size_t i = 0; i < A.size(); ++i) grid.push_back(A.time_at(i));
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  while (!grid.empty() && grid.back() > A.duration()) grid.pop_back();

  std::vector<double> out(eval_times.size(), 0.0);
  std::size_t q = 0;
  double acc = 0.0;
  for (std::size_t k = 0; k + 1 < grid.size(); ++k) {
    const double ua = grid[k], ub = grid[k + 1];
    const double aa = A.evaluate(ua), ab = A.evaluate(ub);
    while (q < eval_times.size() && eval_times[q] < ub) {
      const double t = eval_times[q];
      out[q] = acc + f.evaluate(ua) * (lerp_at(t, ua, aa, ub, ab) - aa);
      ++q;
    }
    acc += f.evaluate(ua) * (ab - aa);
  }
  while (q < eval_times.size()) out[q++] = acc;

  IntegralResult r;
  r.value_path = SampledPath::with_times(eval_times, std::move(out));
  r.approximation_level = -1;
  r.est_error = 0.0;
  return r;
}

SampledPath ito_formula_residual(const std::function<double(double)>& f,
                                 const std::function<double(double)>& f_prime,
                                 const std::function<double(double)>& f_second,
                                 const SampledPath& A, const SampledPath& B,
                                 const SampledPath& S, const SampledPath& qv,
                                 int level, const std::vector<double>& eval_times) {
  check_shared_grid(A, S);
  check_shared_grid(B, S);
  check_shared_grid(qv, S);
  check_level(level);
  check_query_times(S, eval_times, /*allow_repeats=*/false);

  const std::size_t n = S.size();

  // Y on the sample grid: movement-stop integral of A against S plus the
  // left-point time integral of B.
  std::vector<double> sample_times(n);
  for (std::size_t i = 0; i < n; ++i) sample_times[i] = S.time_at(i);
  std::vector<double> Y = ito_values_at(A, S, level, sample_times);
  {
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      Y[i] += acc;
      acc += B.value_at(i) * (sample_times[i + 1] - sample_times[i]);
    }
    Y[n - 1] += acc;
  }

  // Integrand paths for the three correction terms.
  std::vector<double> fpA(n), fpB(n), fppA2(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double fp = f_prime(Y[i]);
    fpA[i] = fp * A.value_at(i);
    fpB[i] = fp * B.value_at(i);
    fppA2[i] = f_second(Y[i]) * A.value_at(i) * A.value_at(i);
  }
  SampledPath fpA_path = S.uniform_grid()
                             ? SampledPath::uniform(S.duration(), std::move(fpA))
                             : SampledPath::with_times(S.shared_times(), std::move(fpA));

  std::vector<double> dS_term = ito_values_at(fpA_path, S, level, eval_times);

  // Left-point sums for the du and d[qv] terms, answered at the query times
  // with a linear partial increment inside the current cell.
  std::vector<double> du_term(eval_times.size(), 0.0), dqv_term(eval_times.size(), 0.0);
  {
    std::size_t q = 0;
    double acc_u = 0.0, acc_qv = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const double ta = sample_times[i], tb = sample_times[i + 1];
      const double qa = qv.value_at(i), qb = qv.value_at(i + 1);
      while (q < eval_times.size() && eval_times[q] < tb) {
        const double t = eval_times[q];
        du_term[q] = acc_u + fpB[i] * (t - ta);
        dqv_term[q] = acc_qv + fppA2[i] * (lerp_at(t, ta, qa, tb, qb) - qa);
        ++q;
      }
      acc_u += fpB[i] * (tb - ta);
      acc_qv += fppA2[i] * (qb - qa);
    }
    while (q < eval_times.size()) {
      du_term[q] = acc_u;
      dqv_term[q] = acc_qv;
      ++q;
    }
  }

  // Y at the query times (linear inside sample cells, consistent with the
  // integral partial terms).
  std::vector<double> residual(eval_times.size(), 0.0);
  {
    std::size_t q = 0;
    const double f0 = f(Y[0]);
    for (std::size_t i = 0; i + 1 < n && q < eval_times.size(); ++i) {
      const double ta = sample_times[i], tb = sample_times[i + 1];
      while (q < eval_times.size() && eval_times[q] < tb) {
        const double yt = lerp_at(eval_times[q], ta, Y[i], tb, Y[i + 1]);
        residual[q] = f(yt) - f0 - du_term[q] - dS_term[q] - 0.5 * dqv_term[q];
        ++q;
      }
    }
    while (q < eval_times.size()) {
      residual[q] = f(Y[n - 1]) - f0 - du_term[q] - dS_term[q] - 0.5 * dqv_term[q];
      ++q;
    }
  }
  return SampledPath::with_times(eval_times, std::move(residual));
}

}  // namespace pathwise
