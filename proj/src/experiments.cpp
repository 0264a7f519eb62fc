#include "pathwise/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pathwise/brownian.hpp"
#include "pathwise/detail/crossing_kernels.hpp"
#include "pathwise/doss.hpp"
#include "pathwise/euler.hpp"
#include "pathwise/parallel.hpp"

namespace pathwise {

namespace {

void check_spec(const BatchSpec& spec) {
  if (spec.num_paths == 0) throw validation_error("batch needs at least one path");
  if (spec.steps == 0) throw validation_error("batch needs at least one step");
  if (!(spec.horizon > 0.0)) throw validation_error("horizon must be positive");
}

std::vector<double> wiener_clock_values(std::size_t steps, double horizon) {
  std::vector<double> t(steps + 1);
  for (std::size_t i = 0; i <= steps; ++i)
    t[i] = horizon * (double)i / (double)steps;
  return t;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / (double)v.size();
}

double std_err_of(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / (double)(v.size() - 1)) / std::sqrt((double)v.size());
}

}  // namespace

QvBatchStats qv_batch_gap_stats(const BatchSpec& spec, int level_lo, int level_hi,
                                int threads, CrossingSemantics semantics) {
  check_spec(spec);
  if (level_lo > level_hi || level_lo < 0 || level_hi > 62)
    throw validation_error("bad level range");

  const int nlev = level_hi - level_lo + 1;
  QvBatchStats out;
  out.level_lo = level_lo;
  out.level_hi = level_hi;
  out.terminal.assign(spec.num_paths, 0.0);
  out.gaps.assign(spec.num_paths, std::vector<double>((std::size_t)(nlev - 1), 0.0));

  parallel_for_paths(spec.num_paths, threads, [&](std::size_t p) {
    const std::vector<double> w =
        brownian_values(spec.seed, p, spec.steps, spec.horizon);
    if (semantics == CrossingSemantics::SampleDetection) {
      std::vector<detail::QvDetectKernel> ks((std::size_t)nlev);
      for (int k = 0; k < nlev; ++k) ks[(std::size_t)k].reset(level_lo + k, w[0]);
      std::vector<double>& gaps = out.gaps[p];
      for (std::size_t i = 0; i + 1 < w.size(); ++i) {
        const double vb = w[i + 1];
        for (int k = 0; k < nlev; ++k) ks[(std::size_t)k].step(w[i], vb);
        for (int k = 0; k + 1 < nlev; ++k) {
          const double g = std::fabs(ks[(std::size_t)(k + 1)].value_at(vb) -
                                     ks[(std::size_t)k].value_at(vb));
          if (g > gaps[(std::size_t)k]) gaps[(std::size_t)k] = g;
        }
      }
      out.terminal[p] = ks[(std::size_t)(nlev - 1)].value_at(w.back());
    } else {
      std::vector<detail::QvSnapKernel> ks((std::size_t)nlev);
      for (int k = 0; k < nlev; ++k) ks[(std::size_t)k].reset(level_lo + k, w[0]);
      std::vector<double>& gaps = out.gaps[p];
      for (std::size_t i = 0; i + 1 < w.size(); ++i) {
        const double vb = w[i + 1];
        for (int k = 0; k < nlev; ++k) ks[(std::size_t)k].step(w[i], vb);
        for (int k = 0; k + 1 < nlev; ++k) {
          const double g = std::fabs(ks[(std::size_t)(k + 1)].value_at(vb) -
                                     ks[(std::size_t)k].value_at(vb));
          if (g > gaps[(std::size_t)k]) gaps[(std::size_t)k] = g;
        }
      }
      out.terminal[p] = ks[(std::size_t)(nlev - 1)].value_at(w.back());
    }
  });
  return out;
}

double fit_log2_slope(const std::vector<ConvergenceRow>& rows) {
  std::vector<double> xs, ys;
  for (const auto& r : rows) {
    if (r.mean_sup_error > 0.0) {
      xs.push_back((double)r.level * std::log(2.0));
      ys.push_back(std::log(r.mean_sup_error));
    }
  }
  if (xs.size() < 2) return 0.0;
  const double xm = mean_of(xs), ym = mean_of(ys);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    num += (xs[i] - xm) * (ys[i] - ym);
    den += (xs[i] - xm) * (xs[i] - xm);
  }
  return den > 0.0 ? num / den : 0.0;
}

ConvergenceReport convergence_experiment(const CoefficientPair& c, double x0,
                                         const BatchSpec& spec,
                                         const std::vector<int>& levels_in,
                                         int ref_level, bool wiener_clock,
                                         int qv_level, bool subsequence_cubed,
                                         int threads) {
  check_spec(spec);
  if (levels_in.empty()) throw validation_error("need at least one level");
  for (std::size_t i = 0; i < levels_in.size(); ++i) {
    if (levels_in[i] < 0 || levels_in[i] > 62)
      throw validation_error("level out of range [0, 62]");
    if (i > 0 && levels_in[i] <= levels_in[i - 1])
      throw validation_error("levels must be strictly increasing");
  }
  if (ref_level <= levels_in.back())
    throw validation_error("reference level must exceed every compared level");

  std::vector<int> levels;
  if (subsequence_cubed) {
    for (int lv : levels_in) {
      const double need = std::pow((double)(levels.size() + 1), 3.0);
      if (std::ldexp(1.0, lv) >= need) levels.push_back(lv);
    }
    if (levels.empty())
      throw validation_error("cube-dominated subsequence is empty for these levels");
  } else {
    levels = levels_in;
  }

  const std::size_t nlev = levels.size();
  std::vector<std::vector<double>> errs(nlev, std::vector<double>(spec.num_paths, 0.0));
  std::vector<std::vector<double>> counts(nlev, std::vector<double>(spec.num_paths, 0.0));

  parallel_for_paths(spec.num_paths, threads, [&](std::size_t p) {
    std::vector<double> w = brownian_values(spec.seed, p, spec.steps, spec.horizon);
    const SampledPath S = SampledPath::uniform(spec.horizon, std::move(w));

    SampledPath qv_path;
    const SampledPath* qv = nullptr;
    if (!wiener_clock) {
      std::vector<double> ts(S.size());
      for (std::size_t i = 0; i < S.size(); ++i) ts[i] = S.time_at(i);
      qv_path = monotone_envelope(SampledPath::uniform(
          spec.horizon, qv_values_at(S, qv_level, ts, CrossingSemantics::SampleDetection)));
      qv = &qv_path;
    }

    const SolveResult ref =
        reference_solution(c, x0, S, qv, ref_level, levels.back());
    for (std::size_t k = 0; k < nlev; ++k) {
      const SolveResult sol = euler_solve(c, x0, S, qv, levels[k]);
      double sup = 0.0;
      for (std::size_t i = 0; i < S.size(); ++i)
        sup = std::max(sup, std::fabs(sol.solution.value_at(i) -
                                      ref.solution.value_at(i)));
      errs[k][p] = sup;
      counts[k][p] = (double)sol.diagnostics.stopping_count;
    }
  });

  ConvergenceReport rep;
  rep.reference_level = ref_level;
  for (std::size_t k = 0; k < nlev; ++k) {
    ConvergenceRow row;
    row.level = levels[k];
    row.num_paths = spec.num_paths;
    row.mean_sup_error = mean_of(errs[k]);
    row.std_err = std_err_of(errs[k], row.mean_sup_error);
    row.n_effective = mean_of(counts[k]);
    rep.rows.push_back(row);
  }
  rep.fit_slope = fit_log2_slope(rep.rows);
  return rep;
}

TransformReport doss_sussmann_experiment(const CoefficientPair& c, double x0,
                                         const BatchSpec& spec,
                                         const std::vector<int>& bv_levels,
                                         double flow_tol, int threads) {
  check_spec(spec);
  if (bv_levels.empty()) throw validation_error("need at least one approximation level");
  for (std::size_t i = 0; i < bv_levels.size(); ++i) {
    if (bv_levels[i] < 0 || bv_levels[i] > 62)
      throw validation_error("level out of range [0, 62]");
    if (i > 0 && bv_levels[i] <= bv_levels[i - 1])
      throw validation_error("levels must be strictly increasing");
  }

  // Driver range across the batch (serial prepass) to size the flow lattice
  // once; the transformed state stays near x0 by the magnitude of the drift.
  double s_lo = 0.0, s_hi = 0.0;
  for (std::size_t p = 0; p < spec.num_paths; ++p) {
    const std::vector<double> w =
        brownian_values(spec.seed, p, spec.steps, spec.horizon);
    for (double v : w) {
      s_lo = std::min(s_lo, v);
      s_hi = std::max(s_hi, v);
    }
  }
  FlowTable flow = build_flow(c, s_lo - 0.5, s_hi + 0.5, x0 - 0.5, x0 + 0.5, flow_tol);
  {
    // Budget for the transformed state: |dY| <= |b(g)| / g_y d[S]; probe the
    // reachable flow values to bound the drift.
    double bmax = 0.0, gy_min = 1.0;
    for (int i = 0; i <= 32; ++i) {
      const double x = s_lo - 0.5 + (s_hi - s_lo + 1.0) * (double)i / 32.0;
      bmax = std::max(bmax, std::fabs(c.b(flow.g(x, x0))));
      gy_min = std::min(gy_min, flow.g_y(x, x0));
    }
    const double y_pad = 0.5 + 2.0 * bmax * spec.horizon / std::max(gy_min, 1e-6);
    flow.ensure_covers(s_lo - 0.5, s_hi + 0.5, x0 - y_pad, x0 + y_pad);
  }

  const int agreement_level =
      std::min(bv_levels.back() + 3, 12);
  const std::size_t nlev = bv_levels.size();
  std::vector<std::vector<double>> errs(nlev, std::vector<double>(spec.num_paths, 0.0));
  std::vector<std::vector<double>> dists(nlev, std::vector<double>(spec.num_paths, 0.0));
  std::vector<double> agreement(spec.num_paths, 0.0);

  // The movement-stop comparison run solves the matching limit equation, whose
  // drift carries the flow correction + 1/2 sigma sigma'.
  CoefficientPair limit = c;
  {
    auto b = c.b;
    auto sig = c.sigma;
    auto sigp = c.sigma_prime;
    limit.b = [b, sig, sigp](double x) { return b(x) + 0.5 * sig(x) * sigp(x); };
    limit.bound_b.reset();  // unchecked: bound of the corrected drift is model-specific
    limit.bound_sigma.reset();
  }

  parallel_for_paths(spec.num_paths, threads, [&](std::size_t p) {
    std::vector<double> w = brownian_values(spec.seed, p, spec.steps, spec.horizon);
    const SampledPath S = SampledPath::uniform(spec.horizon, std::move(w));
    const SampledPath clock =
        SampledPath::uniform(spec.horizon, wiener_clock_values(spec.steps, spec.horizon));

    const SampledPath Y_lim = solve_Y(c, flow, x0, S, clock, YMode::AgainstQV);
    const SampledPath X_lim = assemble_solution(flow, S, Y_lim);

    const SolveResult euler_lim = euler_solve(limit, x0, S, nullptr, agreement_level);
    double agree = 0.0;
    for (std::size_t i = 0; i < S.size(); ++i)
      agree = std::max(agree, std::fabs(X_lim.value_at(i) -
                                        euler_lim.solution.value_at(i)));
    agreement[p] = agree;

    for (std::size_t k = 0; k < nlev; ++k) {
      const SampledPath Sn = piecewise_linear_bv_approximation(S, bv_levels[k]);
      const SampledPath Yn =
          solve_Y(c, flow, x0, Sn, clock, YMode::AgainstQVWithBVDriver);
      const SampledPath Xn = assemble_solution(flow, Sn, Yn);
      double err = 0.0, dist = 0.0;
      for (std::size_t i = 0; i < S.size(); ++i) {
        err = std::max(err, std::fabs(Xn.value_at(i) - X_lim.value_at(i)));
        dist = std::max(dist, std::fabs(Sn.value_at(i) - S.value_at(i)));
      }
      errs[k][p] = err;
      dists[k][p] = dist;
    }
  });

  TransformReport rep;
  rep.agreement_level = agreement_level;
  rep.limit_agreement_mean = mean_of(agreement);
  rep.convergence.reference_level = agreement_level;
  for (std::size_t k = 0; k < nlev; ++k) {
    ConvergenceRow row;
    row.level = bv_levels[k];
    row.num_paths = spec.num_paths;
    row.mean_sup_error = mean_of(errs[k]);
    row.std_err = std_err_of(errs[k], row.mean_sup_error);
    row.bv_sup_dist = mean_of(dists[k]);
    rep.convergence.rows.push_back(row);
  }
  rep.convergence.fit_slope = fit_log2_slope(rep.convergence.rows);
  return rep;
}

}  // namespace pathwise
