#include "pathwise/cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "pathwise/brownian.hpp"
#include "pathwise/coefficients.hpp"
#include "pathwise/doss.hpp"
#include "pathwise/euler.hpp"
#include "pathwise/experiments.hpp"
#include "pathwise/expr.hpp"
#include "pathwise/integrate.hpp"
#include "pathwise/parallel.hpp"
#include "pathwise/partition.hpp"
#include "pathwise/path.hpp"
#include "pathwise/report.hpp"
#include "pathwise/yamada.hpp"

namespace pathwise {

namespace {

using nlohmann::json;

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
        .count();
  }
};

std::pair<int, int> parse_level_range(const std::string& s) {
  const auto colon = s.find(':');
  try {
    if (colon == std::string::npos) {
      const int v = std::stoi(s);
      return {v, v};
    }
    const int lo = std::stoi(s.substr(0, colon));
    const int hi = std::stoi(s.substr(colon + 1));
    if (lo > hi) throw validation_error("level range must satisfy lo <= hi");
    return {lo, hi};
  } catch (const validation_error&) {
    throw;
  } catch (...) {
    throw validation_error("malformed level range '" + s + "' (expected lo:hi)");
  }
}

std::vector<int> range_to_levels(const std::pair<int, int>& r) {
  std::vector<int> out;
  for (int v = r.first; v <= r.second; ++v) out.push_back(v);
  return out;
}

CrossingSemantics parse_semantics(const std::string& s) {
  if (s == "detect") return CrossingSemantics::SampleDetection;
  if (s == "snap") return CrossingSemantics::InterpolatedCrossing;
  throw validation_error("unknown semantics '" + s + "' (detect or snap)");
}

// Shared generation/loading options for one driver path or a batch.
struct SourceOpts {
  std::uint64_t seed = 12345;
  std::size_t paths = 1;
  std::size_t steps = (std::size_t)1 << 20;
  double horizon = 1.0;
  std::size_t path_index = 0;
  std::string input;  // TPTH file; replaces generation when set

  void attach(CLI::App* cmd) {
    cmd->add_option("--seed", seed, "Generator seed");
    cmd->add_option("--paths", paths, "Number of paths in the batch");
    cmd->add_option("--steps", steps, "Samples per path (grid cells)");
    cmd->add_option("--horizon", horizon, "Time horizon");
    cmd->add_option("--path-index", path_index, "Path selected for per-path output");
    cmd->add_option("--input", input, "Read the batch from a TPTH file instead");
  }

  SampledPath load_one() const {
    if (!input.empty()) {
      PathBatch b = read_tpth(input);
      if (path_index >= b.count())
        throw validation_error("--path-index beyond the file's path count");
      return b.path(path_index);
    }
    if (path_index >= paths)
      throw validation_error("--path-index beyond --paths");
    return SampledPath::uniform(horizon,
                                brownian_values(seed, path_index, steps, horizon));
  }

  void to_json(json& j) const {
    j["seed"] = seed;
    j["paths"] = paths;
    j["steps"] = steps;
    j["horizon"] = horizon;
    j["path_index"] = path_index;
    if (!input.empty()) j["input"] = input;
  }
};

struct ModelOpts {
  std::string preset_name = "cir";
  std::string drift_expr, diffusion_expr;
  double c_b = 0.0, c_sigma = 0.0;
  double bound_b_opt = -1.0, bound_sigma_opt = -1.0;  // negative: undeclared
  double x0_override = std::numeric_limits<double>::quiet_NaN();

  void attach(CLI::App* cmd) {
    cmd->add_option("--preset", preset_name,
                    "Model preset (cir, gbm, const, tanh, trunc-cir)");
    cmd->add_option("--drift", drift_expr, "Custom drift expression in x");
    cmd->add_option("--diffusion", diffusion_expr, "Custom diffusion expression in x");
    cmd->add_option("--c-b", c_b, "Declared drift Lipschitz constant (custom)");
    cmd->add_option("--c-sigma", c_sigma, "Declared diffusion Holder-1/2 constant (custom)");
    cmd->add_option("--bound-b", bound_b_opt, "Declared sup |b| (custom; negative = none)");
    cmd->add_option("--bound-sigma", bound_sigma_opt,
                    "Declared sup |sigma| (custom; negative = none)");
    cmd->add_option("--x0", x0_override, "Initial state (overrides the preset)");
  }

  ModelPreset resolve() const {
    ModelPreset m;
    if (!drift_expr.empty() || !diffusion_expr.empty()) {
      if (drift_expr.empty() || diffusion_expr.empty())
        throw validation_error("custom models need both --drift and --diffusion");
      m.coef = coefficients_from_expressions(
          drift_expr, diffusion_expr, c_b, c_sigma,
          bound_b_opt >= 0.0 ? std::optional<double>(bound_b_opt) : std::nullopt,
          bound_sigma_opt >= 0.0 ? std::optional<double>(bound_sigma_opt)
                                 : std::nullopt);
      m.x0 = 0.0;
    } else {
      m = preset(preset_name);
    }
    if (!std::isnan(x0_override)) m.x0 = x0_override;
    return m;
  }

  void to_json(json& j) const {
    if (!drift_expr.empty()) {
      j["drift"] = drift_expr;
      j["diffusion"] = diffusion_expr;
      j["c_b"] = c_b;
      j["c_sigma"] = c_sigma;
    } else {
      j["preset"] = preset_name;
    }
    if (!std::isnan(x0_override)) j["x0"] = x0_override;
  }
};

int threads_option(CLI::App* cmd, int& slot) {
  cmd->add_option("--threads", slot,
                  "Worker threads (0: TP_THREADS env, then the OpenMP default)");
  return 0;
}

// ---------------------------------------------------------------------------

int cmd_qv(const SourceOpts& src, const std::string& levels_arg,
           std::size_t eval_points, const std::string& semantics_arg,
           const std::string& out) {
  Timer timer;
  const auto range = parse_level_range(levels_arg);
  const CrossingSemantics sem = parse_semantics(semantics_arg);
  const SampledPath path = src.load_one();
  const std::vector<double> eval = uniform_times(path.duration(), eval_points);

  const int cap = faithful_level_cap(path);
  if (range.second > cap)
    std::cerr << "warning: level " << range.second
              << " exceeds the sampling-faithful cap " << cap
              << " (2^-level below 4x the max sample oscillation)\n";

  std::vector<std::vector<double>> rows;
  for (int lv = range.first; lv <= range.second; ++lv) {
    const std::vector<double> vals = qv_values_at(path, lv, eval, sem);
    for (std::size_t i = 0; i < eval.size(); ++i)
      rows.push_back({(double)lv, eval[i], vals[i]});
  }
  write_csv(out, {"level", "t", "Vn"}, rows);

  const QvEstimate est = estimate_qv(path, range.first, range.second, eval, sem);
  std::vector<std::vector<double>> summary;
  {
    // terminal per level; gap column pairs level n with |V^n - V^(n-1)|_sup
    for (int lv = range.first; lv <= range.second; ++lv) {
      const std::vector<double> vals = qv_values_at(path, lv, {eval.front(), eval.back()}, sem);
      const double gap = (lv == range.first)
                             ? 0.0
                             : est.cauchy_gaps[(std::size_t)(lv - range.first - 1)];
      summary.push_back({(double)lv, gap, vals.back()});
    }
  }
  write_csv(out + ".summary.csv", {"level", "gap_sup", "terminal"}, summary);

  json meta;
  src.to_json(meta);
  meta["command"] = "qv";
  meta["levels"] = levels_arg;
  meta["eval_points"] = eval_points;
  meta["semantics"] = semantics_arg;
  meta["faithful_level_cap"] = cap;
  meta["out"] = out;
  write_meta_sidecar(out, meta.dump(), timer.seconds());

  std::cout << "qv: levels " << range.first << ".." << range.second << ", terminal V="
            << format_double(summary.back()[2]) << ", cap " << cap << "\n";
  return 0;
}

int cmd_integrate(const SourceOpts& src, const std::string& integrand_expr, int level,
                  std::size_t eval_points, const std::string& out) {
  Timer timer;
  const SampledPath S = src.load_one();
  const auto F = compile_expression(integrand_expr);
  std::vector<double> xv(S.size());
  for (std::size_t i = 0; i < S.size(); ++i) xv[i] = F(S.value_at(i));
  const SampledPath X = S.uniform_grid()
                            ? SampledPath::uniform(S.duration(), std::move(xv))
                            : SampledPath::with_times(S.shared_times(), std::move(xv));

  const std::vector<double> eval = uniform_times(S.duration(), eval_points);
  const IntegralResult r = ito_integral(X, S, level, eval);

  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < eval.size(); ++i)
    rows.push_back({eval[i], r.value_path.value_at(i), r.est_error});
  write_csv(out, {"t", "value", "est_error"}, rows);

  json meta;
  src.to_json(meta);
  meta["command"] = "integrate";
  meta["integrand"] = integrand_expr;
  meta["level"] = level;
  meta["eval_points"] = eval_points;
  meta["out"] = out;
  write_meta_sidecar(out, meta.dump(), timer.seconds());

  std::cout << "integrate: level " << level << ", terminal "
            << format_double(r.value_path.value_at(eval.size() - 1)) << ", est_error "
            << format_double(r.est_error) << "\n";
  return 0;
}

int cmd_ito_check(const SourceOpts& src, const std::string& f_arg,
                  const std::string& a_expr, const std::string& b_expr, int level,
                  int qv_level, double tol, int threads, const std::string& out) {
  Timer timer;
  std::function<double(double)> f, fp, fpp;
  if (f_arg == "x2") {
    f = [](double x) { return x * x; };
    fp = [](double x) { return 2.0 * x; };
    fpp = [](double) { return 2.0; };
  } else {
    f = compile_expression(f_arg);
    auto base = f;
    fp = [base](double x) {
      const double h = 1e-5 * std::max(1.0, std::fabs(x));
      return (base(x + h) - base(x - h)) / (2.0 * h);
    };
    fpp = [base](double x) {
      const double h = 2e-4 * std::max(1.0, std::fabs(x));
      return (base(x + h) - 2.0 * base(x) + base(x - h)) / (h * h);
    };
  }
  const auto A_fn = compile_expression(a_expr);
  const auto B_fn = compile_expression(b_expr);

  const std::size_t npaths = src.input.empty() ? src.paths : read_tpth(src.input).count();
  std::vector<double> sup_res(npaths, 0.0);
  std::vector<std::vector<double>> chosen_rows;

  const std::size_t eval_points = 257;
  parallel_for_paths(npaths, effective_threads(threads), [&](std::size_t p) {
    SampledPath S = src.input.empty()
                        ? SampledPath::uniform(
                              src.horizon,
                              brownian_values(src.seed, p, src.steps, src.horizon))
                        : read_tpth(src.input).path(p);
    std::vector<double> ts(S.size());
    for (std::size_t i = 0; i < S.size(); ++i) ts[i] = S.time_at(i);

    std::vector<double> av(S.size()), bv(S.size());
    for (std::size_t i = 0; i < S.size(); ++i) {
      av[i] = A_fn(S.value_at(i));
      bv[i] = B_fn(S.value_at(i));
    }
    const SampledPath A = SampledPath::uniform(S.duration(), std::move(av));
    const SampledPath B = SampledPath::uniform(S.duration(), std::move(bv));
    const SampledPath qv = SampledPath::uniform(
        S.duration(), qv_values_at(S, qv_level, ts, CrossingSemantics::SampleDetection));

    const std::vector<double> eval = uniform_times(S.duration(), eval_points);
    const SampledPath r = ito_formula_residual(f, fp, fpp, A, B, S, qv, level, eval);
    double sup = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i)
      sup = std::max(sup, std::fabs(r.value_at(i)));
    sup_res[p] = sup;
    if (p == src.path_index) {
      for (std::size_t i = 0; i < r.size(); ++i)
        chosen_rows.push_back({r.time_at(i), r.value_at(i)});
    }
  });

  write_csv(out, {"t", "residual"}, chosen_rows);

  double mean = 0.0, worst = 0.0;
  std::size_t within = 0;
  for (double v : sup_res) {
    mean += v;
    worst = std::max(worst, v);
    if (v <= tol) ++within;
  }
  mean /= (double)npaths;

  json meta;
  src.to_json(meta);
  meta["command"] = "ito-check";
  meta["f"] = f_arg;
  meta["a_expr"] = a_expr;
  meta["b_expr"] = b_expr;
  meta["level"] = level;
  meta["qv_level"] = qv_level;
  meta["tol"] = tol;
  meta["out"] = out;
  write_meta_sidecar(out, meta.dump(), timer.seconds());

  std::cout << "ito-check: paths " << npaths << ", mean sup|r| " << format_double(mean)
            << ", worst " << format_double(worst) << ", within tol "
            << within << "/" << npaths << "\n";
  return 0;
}

int cmd_euler(const SourceOpts& src, const ModelOpts& model, int level,
              const std::string& semantics_arg, const std::string& clock_arg,
              int qv_level, const std::string& out) {
  Timer timer;
  const ModelPreset m = model.resolve();
  const SampledPath S = src.load_one();
  const GridSemantics sem = parse_semantics(semantics_arg) == CrossingSemantics::SampleDetection
                                ? GridSemantics::SampleDetection
                                : GridSemantics::InterpolatedCrossing;

  SampledPath qv_path;
  const SampledPath* qv = nullptr;
  if (clock_arg == "estimated") {
    std::vector<double> ts(S.size());
    for (std::size_t i = 0; i < S.size(); ++i) ts[i] = S.time_at(i);
    const int ql = qv_level > 0 ? qv_level : level + 2;
    qv_path = monotone_envelope(SampledPath::uniform(
        S.duration(), qv_values_at(S, ql, ts, CrossingSemantics::SampleDetection)));
    qv = &qv_path;
  } else if (clock_arg != "wiener") {
    throw validation_error("unknown clock '" + clock_arg + "' (wiener or estimated)");
  }

  const SolveResult r = euler_solve(m.coef, m.x0, S, qv, level, sem);
  write_path_csv(out, r.solution);

  json meta;
  src.to_json(meta);
  model.to_json(meta);
  meta["command"] = "euler";
  meta["level"] = level;
  meta["semantics"] = semantics_arg;
  meta["clock"] = clock_arg;
  meta["stopping_count"] = r.diagnostics.stopping_count;
  meta["sup_drift_step"] = r.diagnostics.sup_drift_step;
  meta["sup_diff_step"] = r.diagnostics.sup_diff_step;
  meta["domain_excursions"] = r.diagnostics.domain_excursions;
  meta["move_bound_ok"] = r.diagnostics.move_bound_ok;
  meta["out"] = out;
  write_meta_sidecar(out, meta.dump(), timer.seconds());

  if (!m.coef.bounds_declared())
    std::cerr << "warning: no declared sup bounds for '" << m.coef.name
              << "'; the per-step move budget is unchecked\n";
  std::cout << "euler: level " << level << ", stops " << r.diagnostics.stopping_count
            << ", terminal " << format_double(r.solution.value_at(S.size() - 1))
            << (r.diagnostics.move_bound_ok ? "" : ", move bound EXCEEDED") << "\n";
  return 0;
}

int cmd_converge(const SourceOpts& src, const ModelOpts& model,
                 const std::string& levels_arg, int ref_level,
                 const std::string& clock_arg, int qv_level, bool cubed, int threads,
                 const std::string& out) {
  Timer timer;
  const ModelPreset m = model.resolve();
  BatchSpec spec;
  spec.num_paths = src.paths;
  spec.steps = src.steps;
  spec.horizon = src.horizon;
  spec.seed = src.seed;

  const bool wiener = clock_arg == "wiener";
  if (!wiener && clock_arg != "estimated")
    throw validation_error("unknown clock '" + clock_arg + "' (wiener or estimated)");

  const ConvergenceReport rep = convergence_experiment(
      m.coef, m.x0, spec, range_to_levels(parse_level_range(levels_arg)), ref_level,
      wiener, qv_level, cubed, effective_threads(threads));

  std::vector<std::vector<double>> rows;
  for (const auto& r : rep.rows)
    rows.push_back({(double)r.level, r.n_effective, (double)r.num_paths,
                    r.mean_sup_error, r.std_err});
  write_csv(out, {"level", "n_effective", "num_paths", "mean_sup_error", "std_err"},
            rows, {"fit_slope," + format_double(rep.fit_slope)});

  json meta;
  src.to_json(meta);
  model.to_json(meta);
  meta["command"] = "converge";
  meta["levels"] = levels_arg;
  meta["ref_level"] = ref_level;
  meta["clock"] = clock_arg;
  meta["subsequence_cubed"] = cubed;
  meta["threads_effective"] = effective_threads(threads);
  meta["out"] = out;
  write_meta_sidecar(out, meta.dump(), timer.seconds());

  std::cout << "converge: " << rep.rows.size() << " levels, fit slope "
            << format_double(rep.fit_slope) << "\n";
  return 0;
}

int cmd_psi_check(double eps, double delta, int n_param, std::size_t grid_points,
                  const std::string& out) {
  Timer timer;
  TestFunctionParams p;
  if (n_param > 0) {
    p.epsilon = 1.0 / (double)n_param;
    p.delta = std::exp2((double)n_param / 2.0);
  } else {
    p.epsilon = eps;
    p.delta = delta;
  }
  p.validate();

  const double a = p.support_lo(), b = p.support_hi();
  const double hi = 1.2 * p.epsilon;
  std::vector<std::vector<double>> rows;
  rows.reserve(grid_points);
  for (std::size_t i = 0; i < grid_points; ++i) {
    const double x = -hi + 2.0 * hi * (double)i / (double)(grid_points - 1);
    rows.push_back({x, psi(std::fabs(x), p), phi(x, p), phi_prime(x, p),
                    phi_second(x, p)});
  }
  write_csv(out, {"x", "psi", "phi", "phi_prime", "phi_second"}, rows);

  // Composite Simpson over a geometric subdivision of [a, b]; the graded mesh
  // keeps the quadrature error far below the acceptance tolerance even for
  // steep, narrow supports.
  double integral = 0.0;
  {
    const int cells = 4096;
    const double ratio = std::pow(b / a, 1.0 / (double)cells);
    double left = a;
    for (int k = 0; k < cells; ++k) {
      const double right = (k + 1 == cells) ? b : left * ratio;
      const double mid = 0.5 * (left + right);
      integral += (right - left) / 6.0 *
                  (psi(left, p) + 4.0 * psi(mid, p) + psi(right, p));
      left = right;
    }
  }

  bool ok_integral = std::fabs(integral - 1.0) <= 1e-12;
  bool ok_dominate = true, ok_slope = true, ok_curv = true;
  const double curv_cap = 2.0 * p.delta / (p.epsilon * p.log_delta());
  for (const auto& r : rows) {
    const double x = r[0];
    if (std::fabs(x) > p.epsilon + r[2] + 1e-15) ok_dominate = false;
    if (std::fabs(r[3]) > 1.0 + 1e-15) ok_slope = false;
    if (r[4] > curv_cap * (1.0 + 1e-12)) ok_curv = false;
  }

  json meta;
  meta["command"] = "psi-check";
  meta["epsilon"] = p.epsilon;
  meta["delta"] = p.delta;
  meta["grid_points"] = grid_points;
  meta["integral"] = integral;
  meta["out"] = out;
  write_meta_sidecar(out, meta.dump(), timer.seconds());

  auto line = [](bool ok, const std::string& what) {
    std::cout << (ok ? "[PASS] " : "[FAIL] ") << what << "\n";
    return ok;
  };
  bool all = true;
  all &= line(ok_integral, "weight integrates to 1 (|err| <= 1e-12)");
  all &= line(ok_dominate, "|x| <= epsilon + phi(x) on the grid");
  all &= line(ok_slope, "|phi'| <= 1 on the grid");
  all &= line(ok_curv, "phi'' <= 2 delta / (epsilon log delta) on the grid");
  return all ? 0 : 1;
}

int cmd_doss(const SourceOpts& src, const ModelOpts& model,
             const std::string& levels_arg, double flow_tol, int threads,
             const std::string& out) {
  Timer timer;
  const ModelPreset m = model.resolve();
  BatchSpec spec;
  spec.num_paths = src.paths;
  spec.steps = src.steps;
  spec.horizon = src.horizon;
  spec.seed = src.seed;

  const TransformReport rep = doss_sussmann_experiment(
      m.coef, m.x0, spec, range_to_levels(parse_level_range(levels_arg)), flow_tol,
      effective_threads(threads));

  std::vector<std::vector<double>> rows;
  for (const auto& r : rep.convergence.rows)
    rows.push_back({(double)r.level, r.n_effective, (double)r.num_paths,
                    r.mean_sup_error, r.std_err, r.bv_sup_dist});
  write_csv(out,
            {"level", "n_effective", "num_paths", "mean_sup_error", "std_err",
             "bv_sup_dist"},
            rows,
            {"fit_slope," + format_double(rep.convergence.fit_slope),
             "limit_agreement_mean," + format_double(rep.limit_agreement_mean)});

  json meta;
  src.to_json(meta);
  model.to_json(meta);
  meta["command"] = "doss";
  meta["bv_levels"] = levels_arg;
  meta["flow_tol"] = flow_tol;
  meta["agreement_level"] = rep.agreement_level;
  meta["threads_effective"] = effective_threads(threads);
  meta["out"] = out;
  write_meta_sidecar(out, meta.dump(), timer.seconds());

  std::cout << "doss: " << rep.convergence.rows.size() << " levels, fit slope "
            << format_double(rep.convergence.fit_slope) << ", limit agreement "
            << format_double(rep.limit_agreement_mean) << "\n";
  return 0;
}

int cmd_lamperti(const SourceOpts& src, const ModelOpts& model, double flow_tol,
                 bool compare_doss, const std::string& out) {
  Timer timer;
  const ModelPreset m = model.resolve();
  const SampledPath S = src.load_one();

  double s_lo = 0.0, s_hi = 0.0;
  for (std::size_t i = 0; i < S.size(); ++i) {
    s_lo = std::min(s_lo, S.value_at(i));
    s_hi = std::max(s_hi, S.value_at(i));
  }
  FlowTable flow = build_flow(m.coef, s_lo - 1.5, s_hi + 1.5, m.x0 - 1.0, m.x0 + 1.0,
                              flow_tol);

  std::vector<double> tv(S.size());
  for (std::size_t i = 0; i < S.size(); ++i) tv[i] = S.time_at(i);
  const SampledPath clock = SampledPath::uniform(S.duration(), std::move(tv));

  const SampledPath X = lamperti_solve(m.coef, flow, m.x0, S, clock);
  write_path_csv(out, X);

  double gap = 0.0;
  if (compare_doss) {
    const SampledPath Y = solve_Y(m.coef, flow, m.x0, S, clock);
    const SampledPath Xd = assemble_solution(flow, S, Y);
    for (std::size_t i = 0; i < S.size(); ++i)
      gap = std::max(gap, std::fabs(X.value_at(i) - Xd.value_at(i)));
  }

  json meta;
  src.to_json(meta);
  model.to_json(meta);
  meta["command"] = "lamperti";
  meta["flow_tol"] = flow_tol;
  meta["out"] = out;
  if (compare_doss) meta["doss_gap"] = gap;
  write_meta_sidecar(out, meta.dump(), timer.seconds());

  std::cout << "lamperti: terminal " << format_double(X.value_at(S.size() - 1));
  if (compare_doss) std::cout << ", gap to flow-transform solution " << format_double(gap);
  std::cout << "\n";
  return 0;
}

// Flags a key=value config file implies for `sub`, skipping keys the command
// line already sets, so explicit flags always win. Keys must name options of
// the subcommand; anything else is reported rather than silently dropped.
std::vector<std::string> config_args(const CLI::App* sub, const std::string& path,
                                     const std::vector<std::string>& tail) {
  std::ifstream in(path);
  if (!in) throw validation_error("cannot read config file '" + path + "'");
  std::vector<std::string> extra;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string s = CLI::detail::trim_copy(line);
    if (s.empty() || s[0] == '#' || s[0] == ';') continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos)
      throw validation_error("config line " + std::to_string(lineno) +
                             " is not key=value: " + s);
    const std::string key = CLI::detail::trim_copy(s.substr(0, eq));
    std::string value = CLI::detail::trim_copy(s.substr(eq + 1));
    if (value.size() >= 2 && ((value.front() == '"' && value.back() == '"') ||
                              (value.front() == '\'' && value.back() == '\'')))
      value = value.substr(1, value.size() - 2);
    if (key.empty() || key == "config")
      throw validation_error("config line " + std::to_string(lineno) +
                             " has an invalid key");
    const std::string flag = "--" + key;
    if (sub->get_option_no_throw(flag) == nullptr)
      throw validation_error("config key '" + key + "' is not an option of " +
                             sub->get_name());
    bool on_cmdline = false;
    for (const std::string& a : tail)
      if (a == flag || a.rfind(flag + "=", 0) == 0) {
        on_cmdline = true;
        break;
      }
    if (!on_cmdline) extra.push_back(flag + "=" + value);
  }
  return extra;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"Pathwise stochastic calculus toolkit"};
  app.require_subcommand(1);
  std::string cfg_file;  // shared sink; only one subcommand parses per run

  // qv ----------------------------------------------------------------------
  auto* qv_cmd = app.add_subcommand("qv", "Quadratic variation along grid crossings");
  SourceOpts qv_src;
  qv_src.attach(qv_cmd);
  std::string qv_levels = "6:10", qv_sem = "detect", qv_out = "qv.csv";
  std::size_t qv_eval = 257;
  qv_cmd->add_option("--levels", qv_levels, "Level range lo:hi");
  qv_cmd->add_option("--eval-points", qv_eval, "Evaluation grid size");
  qv_cmd->add_option("--semantics", qv_sem, "Crossing semantics (detect | snap)");
  qv_cmd->add_option("--out", qv_out, "Curves CSV (summary and meta are sidecars)");
  qv_cmd->add_option("--config", cfg_file, "Optional key=value config file (flags override it)");

  // integrate ----------------------------------------------------------------
  auto* int_cmd = app.add_subcommand("integrate", "Movement-stop integral against a path");
  SourceOpts int_src;
  int_src.attach(int_cmd);
  std::string int_expr = "x", int_out = "integral.csv";
  int int_level = 8;
  std::size_t int_eval = 257;
  int_cmd->add_option("--integrand", int_expr, "Integrand expression applied to the driver value");
  int_cmd->add_option("--level", int_level, "Approximation level");
  int_cmd->add_option("--eval-points", int_eval, "Evaluation grid size");
  int_cmd->add_option("--out", int_out, "Output CSV (t,value,est_error)");
  int_cmd->add_option("--config", cfg_file, "Optional key=value config file (flags override it)");

  // ito-check ------------------------------------------------------------
  auto* ito_cmd = app.add_subcommand("ito-check", "Change-of-variable residual across a batch");
  SourceOpts ito_src;
  ito_src.paths = 128;
  ito_src.steps = (std::size_t)1 << 18;
  ito_src.attach(ito_cmd);
  std::string ito_f = "x2", ito_a = "1", ito_b = "0", ito_out = "residual.csv";
  int ito_level = 8, ito_qv_level = 10, ito_threads = 0;
  double ito_tol = 0.05;
  ito_cmd->add_option("--f", ito_f, "Test function (x2 or an expression)");
  ito_cmd->add_option("--a-expr", ito_a, "dS integrand expression (in the driver value)");
  ito_cmd->add_option("--b-expr", ito_b, "du integrand expression (in the driver value)");
  ito_cmd->add_option("--level", ito_level, "Integral approximation level");
  ito_cmd->add_option("--qv-level", ito_qv_level, "Quadratic-variation level");
  ito_cmd->add_option("--tol", ito_tol, "Per-path sup tolerance for the summary");
  threads_option(ito_cmd, ito_threads);
  ito_cmd->add_option("--out", ito_out, "Residual CSV for --path-index");
  ito_cmd->add_option("--config", cfg_file, "Optional key=value config file (flags override it)");

  // euler ---------------------------------------------------------------
  auto* eu_cmd = app.add_subcommand("euler", "Movement-time Euler scheme on one path");
  SourceOpts eu_src;
  eu_src.steps = (std::size_t)1 << 18;
  eu_src.attach(eu_cmd);
  ModelOpts eu_model;
  eu_model.attach(eu_cmd);
  std::string eu_sem = "detect", eu_clock = "wiener", eu_out = "solution.csv";
  int eu_level = 8, eu_qv_level = 0;
  eu_cmd->add_option("--level", eu_level, "Scheme level");
  eu_cmd->add_option("--semantics", eu_sem, "Grid semantics (detect | snap)");
  eu_cmd->add_option("--clock", eu_clock, "Quadratic-variation clock (wiener | estimated)");
  eu_cmd->add_option("--qv-level", eu_qv_level, "Clock estimation level (0: level + 2)");
  eu_cmd->add_option("--out", eu_out, "Solution CSV (t,value)");
  eu_cmd->add_option("--config", cfg_file, "Optional key=value config file (flags override it)");

  // converge --------------------------------------------------------------
  auto* cv_cmd = app.add_subcommand("converge", "Scheme error versus a finer reference");
  SourceOpts cv_src;
  cv_src.paths = 128;
  cv_src.attach(cv_cmd);
  ModelOpts cv_model;
  cv_model.attach(cv_cmd);
  std::string cv_levels = "4:9", cv_clock = "wiener", cv_out = "converge.csv";
  int cv_ref = 12, cv_qv_level = 10, cv_threads = 0;
  bool cv_cubed = false;
  cv_cmd->add_option("--levels", cv_levels, "Compared level range lo:hi");
  cv_cmd->add_option("--ref-level", cv_ref, "Reference level (must exceed all compared)");
  cv_cmd->add_option("--clock", cv_clock, "Quadratic-variation clock (wiener | estimated)");
  cv_cmd->add_option("--qv-level", cv_qv_level, "Clock estimation level");
  cv_cmd->add_flag("--subsequence-cubed", cv_cubed,
                   "Keep only levels whose 2^level dominates the cube of their rank");
  threads_option(cv_cmd, cv_threads);
  cv_cmd->add_option("--out", cv_out, "Report CSV with fit_slope footer");
  cv_cmd->add_option("--config", cfg_file, "Optional key=value config file (flags override it)");

  // psi-check -----------------------------------------------------------
  auto* psi_cmd = app.add_subcommand("psi-check", "Weighted test-function table and checks");
  double psi_eps = 0.1, psi_delta = 4.0;
  int psi_n = 0;
  std::size_t psi_grid = 100000;
  std::string psi_out = "psi.csv";
  psi_cmd->add_option("--epsilon", psi_eps, "Band outer edge");
  psi_cmd->add_option("--delta", psi_delta, "Band compression (> 1)");
  psi_cmd->add_option("--n", psi_n, "Shortcut: epsilon = 1/n, delta = 2^(n/2)");
  psi_cmd->add_option("--grid-points", psi_grid, "Table grid size");
  psi_cmd->add_option("--out", psi_out, "Table CSV (x,psi,phi,phi_prime,phi_second)");
  psi_cmd->add_option("--config", cfg_file, "Optional key=value config file (flags override it)");

  // doss -----------------------------------------------------------------
  auto* doss_cmd = app.add_subcommand("doss", "Flow-transform convergence study");
  SourceOpts doss_src;
  doss_src.paths = 64;
  doss_src.steps = (std::size_t)1 << 18;
  doss_src.attach(doss_cmd);
  ModelOpts doss_model;
  doss_model.preset_name = "gbm";
  doss_model.attach(doss_cmd);
  std::string doss_levels = "3:8", doss_out = "doss.csv";
  double doss_tol = 1e-6;
  int doss_threads = 0;
  doss_cmd->add_option("--bv-levels", doss_levels, "Approximant level range lo:hi");
  doss_cmd->add_option("--flow-tol", doss_tol, "Flow lattice residual tolerance");
  threads_option(doss_cmd, doss_threads);
  doss_cmd->add_option("--out", doss_out, "Report CSV with bv_sup_dist column");
  doss_cmd->add_option("--config", cfg_file, "Optional key=value config file (flags override it)");

  // lamperti -------------------------------------------------------------
  auto* lam_cmd = app.add_subcommand("lamperti", "Drift-shift transform solve on one path");
  SourceOpts lam_src;
  lam_src.steps = (std::size_t)1 << 16;
  lam_src.attach(lam_cmd);
  ModelOpts lam_model;
  lam_model.preset_name = "gbm";
  lam_model.attach(lam_cmd);
  std::string lam_out = "lamperti.csv";
  double lam_tol = 1e-6;
  bool lam_compare = false;
  lam_cmd->add_option("--flow-tol", lam_tol, "Flow lattice residual tolerance");
  lam_cmd->add_flag("--compare-doss", lam_compare,
                    "Also solve by the flow transform and print the sup gap");
  lam_cmd->add_option("--out", lam_out, "Solution CSV (t,value)");
  lam_cmd->add_option("--config", cfg_file, "Optional key=value config file (flags override it)");

  // Config files are applied before the real parse: read the file named by
  // --config, turn unset keys into flags, and splice them in after the
  // subcommand so one CLI11 pass handles precedence, types, and validation.
  std::vector<std::string> args_full = args;
  try {
    std::size_t sub_pos = 0;
    while (sub_pos < args_full.size() &&
           (args_full[sub_pos].empty() || args_full[sub_pos][0] == '-'))
      ++sub_pos;
    const CLI::App* sub = sub_pos < args_full.size()
                              ? app.get_subcommand_no_throw(args_full[sub_pos])
                              : nullptr;
    if (sub != nullptr) {
      const std::vector<std::string> tail(args_full.begin() + sub_pos + 1,
                                          args_full.end());
      std::string cfg_path;
      for (std::size_t i = 0; i < tail.size(); ++i) {
        if (tail[i] == "--config" && i + 1 < tail.size()) cfg_path = tail[i + 1];
        else if (tail[i].rfind("--config=", 0) == 0) cfg_path = tail[i].substr(9);
      }
      if (!cfg_path.empty()) {
        const std::vector<std::string> extra = config_args(sub, cfg_path, tail);
        args_full.insert(args_full.begin() + (std::ptrdiff_t)sub_pos + 1,
                         extra.begin(), extra.end());
      }
    }
  } catch (const validation_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  std::vector<std::string> argv_r(args_full.rbegin(), args_full.rend());
  try {
    app.parse(argv_r);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (qv_cmd->parsed())
      return cmd_qv(qv_src, qv_levels, qv_eval, qv_sem, qv_out);
    if (int_cmd->parsed())
      return cmd_integrate(int_src, int_expr, int_level, int_eval, int_out);
    if (ito_cmd->parsed())
      return cmd_ito_check(ito_src, ito_f, ito_a, ito_b, ito_level, ito_qv_level,
                           ito_tol, ito_threads, ito_out);
    if (eu_cmd->parsed())
      return cmd_euler(eu_src, eu_model, eu_level, eu_sem, eu_clock, eu_qv_level,
                       eu_out);
    if (cv_cmd->parsed())
      return cmd_converge(cv_src, cv_model, cv_levels, cv_ref, cv_clock, cv_qv_level,
                          cv_cubed, cv_threads, cv_out);
    if (psi_cmd->parsed())
      return cmd_psi_check(psi_eps, psi_delta, psi_n, psi_grid, psi_out);
    if (doss_cmd->parsed())
      return cmd_doss(doss_src, doss_model, doss_levels, doss_tol, doss_threads,
                      doss_out);
    if (lam_cmd->parsed())
      return cmd_lamperti(lam_src, lam_model, lam_tol, lam_compare, lam_out);
    return 2;
  } catch (const validation_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace pathwise
