// Acceptance harness: eight criteria, one PASS/FAIL line each, exit code =
// number of failed criteria. Tolerances are pinned inline and every line
// prints its measured values, so a failure is diagnosable from the log alone.
//
//   1  quadratic variation of a seeded Brownian batch at level 10
//   2  exact time-change equivariance of V^n and the level-n integral
//   3  change-of-variable residual for f(x) = x^2 across a batch
//   4  strong convergence rate of the movement-time Euler scheme (CIR),
//      with a closed-form linear-diffusion control
//   5  weighted test-function property suite
//   6  stability-bound replay for bounded-coefficient models
//   7  flow-transform convergence along bounded-variation driver approximants
//   8  byte-identical data files for any --threads value

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "pathwise/brownian.hpp"
#include "pathwise/cli.hpp"
#include "pathwise/coefficients.hpp"
#include "pathwise/doss.hpp"
#include "pathwise/euler.hpp"
#include "pathwise/experiments.hpp"
#include "pathwise/integrate.hpp"
#include "pathwise/parallel.hpp"
#include "pathwise/partition.hpp"
#include "pathwise/path.hpp"
#include "pathwise/report.hpp"
#include "pathwise/yamada.hpp"

using namespace pathwise;

namespace {

int failures = 0;

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
        .count();
  }
};

void verdict(int idx, bool ok, const std::string& detail) {
  std::printf("[criterion %d] %s  %s\n", idx, ok ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof(buf), f, ap);
  va_end(ap);
  return buf;
}

SampledPath wiener_clock(const SampledPath& S) {
  std::vector<double> tv(S.size());
  for (std::size_t i = 0; i < S.size(); ++i) tv[i] = S.time_at(i);
  return SampledPath::uniform(S.duration(), std::move(tv));
}

// --------------------------------------------------------------------------
// 1. Level-10 quadratic variation across 256 Brownian paths of 2^22 steps:
//    mean |V^10(1) - 1| <= 0.05, and the per-path Cauchy gaps
//    sup_t |V^{n+1} - V^n| strictly decreasing in n for n = 6..9 on >= 90%
//    of paths. Budget: 120 s.
void criterion1() {
  Timer t;
  BatchSpec spec;
  spec.num_paths = 256;
  spec.steps = (std::size_t)1 << 22;
  spec.horizon = 1.0;
  spec.seed = 12345;
  const QvBatchStats st = qv_batch_gap_stats(spec, 6, 10, effective_threads(0));

  double mean_dev = 0.0;
  for (double v : st.terminal) mean_dev += std::fabs(v - 1.0);
  mean_dev /= (double)st.terminal.size();

  std::size_t monotone = 0;
  for (const auto& g : st.gaps) {
    bool dec = true;
    for (std::size_t k = 0; k + 1 < g.size(); ++k)
      if (!(g[k + 1] < g[k])) dec = false;
    if (dec) ++monotone;
  }
  const double frac = (double)monotone / (double)st.gaps.size();
  const double wall = t.seconds();
  const bool ok = mean_dev <= 0.05 && frac >= 0.90 && wall <= 120.0;
  verdict(1, ok,
          fmt("mean |V^10(1) - 1| = %.4f (<= 0.05); gap sequence decreasing on "
              "%.3f of paths (>= 0.90 required); wall %.1f s (<= 120)",
              mean_dev, frac, wall));
}

// --------------------------------------------------------------------------
// 2. Time-change equivariance on one Brownian path of 2^16 steps. Grid-aligned
//    tables (identity, uniform dilation, stall-then-shift) must come back
//    exactly 0 for both the quadratic variation and the integral; the
//    nonlinear on-grid table phi(u) = u^2 stays within the first-order
//    interpolation slack. Budget: 1 s.
void criterion2() {
  Timer t;
  const std::size_t steps = (std::size_t)1 << 16;
  const SampledPath S =
      SampledPath::uniform(1.0, brownian_values(12345, 0, steps, 1.0));

  const TimeChange ident = TimeChange::from_table({0.0, 1.0}, {0.0, 1.0}, true);
  const TimeChange dilation = TimeChange::from_table({0.0, 2.0}, {0.0, 1.0}, true);
  const TimeChange stall =
      TimeChange::from_table({0.0, 0.25, 0.5, 1.25}, {0.0, 0.0, 0.25, 1.0}, false);

  std::vector<double> uk(steps + 1), sk(steps + 1);
  for (std::size_t i = 0; i <= steps; ++i) {
    uk[i] = S.time_at(i);
    sk[i] = uk[i] * uk[i];
  }
  const TimeChange square = TimeChange::from_table(std::move(uk), std::move(sk), true);

  const int qv_level = 5, int_level = 6;
  const std::vector<double> e1 = uniform_times(1.0, 9);
  const std::vector<double> e2 = uniform_times(2.0, 9);
  const std::vector<double> e125 = uniform_times(1.25, 6);

  double worst_exact = 0.0;
  worst_exact = std::max(worst_exact, qv_time_change_check(S, ident, qv_level, e1));
  worst_exact = std::max(worst_exact, qv_time_change_check(S, dilation, qv_level, e2));
  worst_exact = std::max(worst_exact, qv_time_change_check(S, stall, qv_level, e125));
  worst_exact =
      std::max(worst_exact, integral_time_change_check(S, S, ident, int_level, e1));
  worst_exact =
      std::max(worst_exact, integral_time_change_check(S, S, dilation, int_level, e2));
  worst_exact =
      std::max(worst_exact, integral_time_change_check(S, S, stall, int_level, e125));

  const double qv_nl = qv_time_change_check(S, square, qv_level, e1);
  const double int_nl = integral_time_change_check(S, S, square, int_level, e1);
  const double slack_qv = interpolation_slack(S, qv_level);
  const double slack_int = interpolation_slack(S, int_level);

  const double wall = t.seconds();
  const bool ok = worst_exact == 0.0 && qv_nl <= slack_qv && int_nl <= slack_int &&
                  wall < 1.0;
  verdict(2, ok,
          fmt("grid-aligned worst discrepancy = %.17g (exact 0 required); "
              "nonlinear qv %.3g <= slack %.3g, integral %.3g <= slack %.3g; "
              "wall %.2f s (< 1)",
              worst_exact, qv_nl, slack_qv, int_nl, slack_int, wall));
}

// --------------------------------------------------------------------------
// 3. Change-of-variable residual for f(x) = x^2, driver exposure A = 1 and
//    drift exposure B = 0, on 128 Brownian paths of 2^22 steps (integral
//    level 8, quadratic-variation level 10): sup |residual| <= 0.05 on at
//    least 95% of paths.
void criterion3() {
  Timer t;
  const std::size_t npaths = 128, steps = (std::size_t)1 << 22;
  std::vector<double> sup(npaths, 0.0);
  const std::vector<double> eval = uniform_times(1.0, 257);

  parallel_for_paths(npaths, effective_threads(0), [&](std::size_t p) {
    const SampledPath S =
        SampledPath::uniform(1.0, brownian_values(12345, p, steps, 1.0));
    std::vector<double> ts(S.size());
    for (std::size_t i = 0; i < S.size(); ++i) ts[i] = S.time_at(i);
    const SampledPath A =
        SampledPath::uniform(1.0, std::vector<double>(S.size(), 1.0));
    const SampledPath B =
        SampledPath::uniform(1.0, std::vector<double>(S.size(), 0.0));
    const SampledPath qv = SampledPath::uniform(
        1.0, qv_values_at(S, 10, ts, CrossingSemantics::SampleDetection));
    const SampledPath r = ito_formula_residual(
        [](double x) { return x * x; }, [](double x) { return 2.0 * x; },
        [](double) { return 2.0; }, A, B, S, qv, 8, eval);
    double s = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i)
      s = std::max(s, std::fabs(r.value_at(i)));
    sup[p] = s;
  });

  double mean = 0.0, worst = 0.0;
  std::size_t within = 0;
  for (double v : sup) {
    mean += v;
    worst = std::max(worst, v);
    if (v <= 0.05) ++within;
  }
  mean /= (double)npaths;
  const double frac = (double)within / (double)npaths;
  const bool ok = frac >= 0.95;
  verdict(3, ok,
          fmt("sup residual <= 0.05 on %.3f of 128 paths (>= 0.95 required); "
              "mean %.4f, worst %.4f; wall %.0f s",
              frac, mean, worst, t.seconds()));
}

// --------------------------------------------------------------------------
// 4. Strong rate of the movement-time Euler scheme: CIR preset, 128 paths of
//    2^22 steps, levels 4..9 against the level-12 reference, Wiener clock.
//    Mean sup-errors strictly decreasing, fitted log2 slope <= -0.4, and the
//    linear-diffusion control at level 12 within 0.02 of its closed form
//    exp(S_t - t/2). Budget: 600 s.
void criterion4() {
  Timer t;
  const ModelPreset cir = preset("cir");
  BatchSpec spec;
  spec.num_paths = 128;
  spec.steps = (std::size_t)1 << 22;
  const ConvergenceReport rep =
      convergence_experiment(cir.coef, cir.x0, spec, {4, 5, 6, 7, 8, 9}, 12,
                             /*wiener_clock=*/true, /*qv_level=*/10,
                             /*subsequence_cubed=*/false, effective_threads(0));

  bool decreasing = true;
  for (std::size_t k = 0; k + 1 < rep.rows.size(); ++k)
    if (!(rep.rows[k + 1].mean_sup_error < rep.rows[k].mean_sup_error))
      decreasing = false;

  const ModelPreset g = preset("gbm");
  double control_worst = 0.0;
  for (std::size_t p = 0; p < 8; ++p) {
    const SampledPath S =
        SampledPath::uniform(1.0, brownian_values(12345, p, spec.steps, 1.0));
    const SolveResult r = euler_solve(g.coef, g.x0, S, nullptr, 12);
    for (std::size_t i = 0; i < S.size(); ++i) {
      const double exact = std::exp(S.value_at(i) - 0.5 * S.time_at(i));
      control_worst =
          std::max(control_worst, std::fabs(r.solution.value_at(i) - exact));
    }
  }

  const double wall = t.seconds();
  const bool ok =
      decreasing && rep.fit_slope <= -0.4 && control_worst <= 0.02 && wall <= 600.0;
  verdict(4, ok,
          fmt("errors %.4g -> %.4g strictly decreasing: %s; fit slope %.3f "
              "(<= -0.4); closed-form control %.4g (<= 0.02); wall %.0f s (<= 600)",
              rep.rows.front().mean_sup_error, rep.rows.back().mean_sup_error,
              decreasing ? "yes" : "NO", rep.fit_slope, control_worst, wall));
}

// --------------------------------------------------------------------------
// 5. Weighted test-function suite on 100000-point grids for four parameter
//    pairs: unit mass within 1e-12 (composite Simpson on a geometric mesh),
//    |phi'| <= 1, phi'' <= 2 delta / (epsilon log delta), and
//    |x| <= epsilon + phi(x). Budget: 1 s.
void criterion5() {
  Timer t;
  const std::vector<std::pair<double, double>> pairs = {
      {1.0, std::exp(1.0)},
      {0.1, 4.0},
      {0.25, 4.0},  // epsilon = 1/n, delta = 2^(n/2) at n = 4
      {1.0 / 9.0, std::pow(2.0, 4.5)}};  // and at n = 9

  bool all = true;
  double worst_mass = 0.0;
  for (const auto& pr : pairs) {
    TestFunctionParams p;
    p.epsilon = pr.first;
    p.delta = pr.second;
    p.validate();

    double mass = 0.0;
    {
      const int cells = 4096;
      const double a = p.support_lo(), b = p.support_hi();
      const double ratio = std::pow(b / a, 1.0 / (double)cells);
      double left = a;
      for (int k = 0; k < cells; ++k) {
        const double right = (k + 1 == cells) ? b : left * ratio;
        const double mid = 0.5 * (left + right);
        mass += (right - left) / 6.0 *
                (psi(left, p) + 4.0 * psi(mid, p) + psi(right, p));
        left = right;
      }
    }
    worst_mass = std::max(worst_mass, std::fabs(mass - 1.0));
    if (std::fabs(mass - 1.0) > 1e-12) all = false;

    const double curv_cap = 2.0 * p.delta / (p.epsilon * p.log_delta());
    const std::size_t N = 100000;
    for (std::size_t i = 0; i < N; ++i) {
      const double x =
          -1.2 * p.epsilon + 2.4 * p.epsilon * (double)i / (double)(N - 1);
      if (std::fabs(phi_prime(x, p)) > 1.0 + 1e-12) all = false;
      if (phi_second(x, p) > curv_cap * (1.0 + 1e-12)) all = false;
      if (std::fabs(x) > p.epsilon + phi(x, p) + 1e-12) all = false;
    }
  }
  const double wall = t.seconds();
  const bool ok = all && wall < 1.0;
  verdict(5, ok,
          fmt("4 parameter pairs on 100000-point grids; worst |mass - 1| = %.3g "
              "(<= 1e-12); bounds hold: %s; wall %.2f s (< 1)",
              worst_mass, all ? "yes" : "NO", wall));
}

// --------------------------------------------------------------------------
// 6. Stability-bound replay at level 6 on 64 Brownian paths of 2^18 steps for
//    the two bounded-coefficient presets (tanh diffusion; truncated
//    square-root model). No replay may report a violation, and the
//    corrupted-martingale sanity case must be flagged.
void criterion6() {
  Timer t;
  const std::size_t npaths = 64, steps = (std::size_t)1 << 18;
  ModelPreset th = preset("tanh");
  th.x0 = 0.5;  // sigma(0) = 0 pins the solution at 0; start off the fixed point
  const ModelPreset tc = preset("trunc-cir");
  TestFunctionParams p;
  p.epsilon = 1.0 / 6.0;
  p.delta = 8.0;

  std::vector<int> bad(npaths, 0);
  parallel_for_paths(npaths, effective_threads(0), [&](std::size_t i) {
    const SampledPath S =
        SampledPath::uniform(1.0, brownian_values(12345, i, steps, 1.0));
    const SampledPath qv = wiener_clock(S);
    const GronwallReplay a = gronwall_bound_replay(th.coef, 6, S, qv, th.x0, p);
    const GronwallReplay b = gronwall_bound_replay(tc.coef, 6, S, qv, tc.x0, p);
    bad[i] = (a.violated ? 1 : 0) + (b.violated ? 1 : 0);
  });
  std::size_t violations = 0;
  for (int v : bad) violations += (std::size_t)v;

  const SampledPath S0 =
      SampledPath::uniform(1.0, brownian_values(12345, 0, steps, 1.0));
  const GronwallReplay corrupted = gronwall_bound_replay(
      th.coef, 6, S0, wiener_clock(S0), th.x0, p, /*corrupt_martingale=*/1.0);

  const bool ok = violations == 0 && corrupted.violated;
  verdict(6, ok,
          fmt("violations %zu/128 replays (0 required); corrupted-martingale "
              "case flagged: %s; wall %.0f s",
              violations, corrupted.violated ? "yes" : "NO", t.seconds()));
}

// --------------------------------------------------------------------------
// 7. Flow-transform convergence along bounded-variation driver approximants:
//    linear-diffusion and tanh models, 64 paths of 2^18 steps, levels 3..8.
//    Mean sup-errors strictly decreasing, and the solution assembled from the
//    rough driver agrees with a movement-time Euler run of the matching limit
//    equation within 0.05. The constant-diffusion degeneration must reproduce
//    the driver approximation distance exactly (up to the ODE tolerance).
void criterion7() {
  Timer t;
  BatchSpec spec;
  spec.num_paths = 64;
  spec.steps = (std::size_t)1 << 18;
  const std::vector<int> levels = {3, 4, 5, 6, 7, 8};

  const ModelPreset g = preset("gbm");
  ModelPreset th = preset("tanh");
  th.x0 = 0.5;  // off the sigma(0) = 0 fixed point, as in criterion 6

  const TransformReport rg = doss_sussmann_experiment(g.coef, g.x0, spec, levels,
                                                      1e-6, effective_threads(0));
  const TransformReport rt = doss_sussmann_experiment(th.coef, th.x0, spec, levels,
                                                      1e-6, effective_threads(0));

  auto strictly_decreasing = [](const TransformReport& r) {
    for (std::size_t k = 0; k + 1 < r.convergence.rows.size(); ++k)
      if (!(r.convergence.rows[k + 1].mean_sup_error <
            r.convergence.rows[k].mean_sup_error))
        return false;
    return true;
  };

  const ModelPreset cn = preset("const");
  BatchSpec dspec;
  dspec.num_paths = 16;
  dspec.steps = (std::size_t)1 << 16;
  const TransformReport rc = doss_sussmann_experiment(cn.coef, cn.x0, dspec, levels,
                                                      1e-6, effective_threads(0));
  double degeneration_worst = 0.0;
  for (const auto& row : rc.convergence.rows)
    degeneration_worst = std::max(
        degeneration_worst, std::fabs(row.mean_sup_error - row.bv_sup_dist));

  const bool ok = strictly_decreasing(rg) && strictly_decreasing(rt) &&
                  rg.limit_agreement_mean <= 0.05 &&
                  rt.limit_agreement_mean <= 0.05 && degeneration_worst <= 1e-6;
  verdict(7, ok,
          fmt("strictly decreasing: %s/%s; limit agreement %.4f / %.4f (<= 0.05); "
              "constant-diffusion |error - driver dist| = %.3g (<= 1e-6); wall %.0f s",
              strictly_decreasing(rg) ? "yes" : "NO",
              strictly_decreasing(rt) ? "yes" : "NO", rg.limit_agreement_mean,
              rt.limit_agreement_mean, degeneration_worst, t.seconds()));
}

// --------------------------------------------------------------------------
// 8. Determinism of the command-line harness: data CSVs are byte-identical
//    across reruns and across --threads values.
void criterion8() {
  Timer t;
  auto slurp = [](const std::string& file) {
    std::ifstream in(file, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  auto drop = [](const std::string& file) {
    std::remove(file.c_str());
    std::remove((file + ".meta.json").c_str());
  };

  bool ok = true;

  const std::vector<std::string> cv_base = {
      "converge", "--preset", "cir",      "--paths", "4",  "--steps", "65536",
      "--levels", "4:6",      "--ref-level", "8"};
  std::string cv_ref;
  for (const char* threads : {"1", "2", "4"}) {
    std::vector<std::string> a = cv_base;
    const std::string out = std::string("acc_c8_cv_") + threads + ".csv";
    a.insert(a.end(), {"--threads", threads, "--out", out});
    if (run_cli(a) != 0) ok = false;
    const std::string body = slurp(out);
    if (cv_ref.empty())
      cv_ref = body;
    else if (body != cv_ref)
      ok = false;
    drop(out);
  }

  const std::vector<std::string> qv_args = {"qv",      "--steps", "65536",
                                            "--levels", "4:6",    "--out",
                                            "acc_c8_qv.csv"};
  if (run_cli(qv_args) != 0) ok = false;
  const std::string qv1 = slurp("acc_c8_qv.csv");
  const std::string qv1s = slurp("acc_c8_qv.csv.summary.csv");
  if (run_cli(qv_args) != 0) ok = false;
  if (slurp("acc_c8_qv.csv") != qv1) ok = false;
  if (slurp("acc_c8_qv.csv.summary.csv") != qv1s) ok = false;
  drop("acc_c8_qv.csv");
  drop("acc_c8_qv.csv.summary.csv");

  const std::vector<std::string> doss_base = {
      "doss", "--preset", "gbm", "--paths", "2", "--steps", "16384",
      "--bv-levels", "3:4"};
  std::string doss_ref;
  for (const char* threads : {"1", "2"}) {
    std::vector<std::string> a = doss_base;
    const std::string out = std::string("acc_c8_doss_") + threads + ".csv";
    a.insert(a.end(), {"--threads", threads, "--out", out});
    if (run_cli(a) != 0) ok = false;
    const std::string body = slurp(out);
    if (doss_ref.empty())
      doss_ref = body;
    else if (body != doss_ref)
      ok = false;
    drop(out);
  }

  verdict(8, ok,
          fmt("converge x{1,2,4} threads, qv rerun, doss x{1,2} threads all "
              "byte-identical: %s; wall %.0f s",
              ok ? "yes" : "NO", t.seconds()));
}

void guarded(int idx, void (*fn)()) {
  const int before = failures;
  try {
    fn();
  } catch (const std::exception& e) {
    // If the criterion threw before printing its own line, print one here.
    if (failures == before)
      verdict(idx, false, std::string("exception: ") + e.what());
  }
}

}  // namespace

int main() {
  std::printf("acceptance harness (threads: %d, version %s)\n",
              effective_threads(0), version_string().c_str());
  guarded(1, criterion1);
  guarded(2, criterion2);
  guarded(3, criterion3);
  guarded(4, criterion4);
  guarded(5, criterion5);
  guarded(6, criterion6);
  guarded(7, criterion7);
  guarded(8, criterion8);
  std::printf("acceptance: %d/8 criteria passed\n", 8 - failures);
  return failures;
}
