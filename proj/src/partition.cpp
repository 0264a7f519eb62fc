#include "pathwise/partition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "pathwise/detail/crossing_kernels.hpp"

namespace pathwise {

namespace {

void check_eval_times(const SampledPath& path, const std::vector<double>& ts,
                      bool allow_repeats) {
  if (ts.empty()) throw validation_error("evaluation times must be non-empty");
  if (ts.front() != 0.0) throw validation_error("evaluation times must start at 0");
  for (std::size_t i = 1; i < ts.size(); ++i) {
    if (ts[i] < ts[i - 1] || (!allow_repeats && ts[i] == ts[i - 1]))
      throw validation_error("evaluation times must be sorted");
  }
  if (ts.back() > path.duration() * (1.0 + 1e-12))
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

}  // namespace

LebesguePartition lebesgue_stopping_times(const SampledPath& path, int level) {
  check_level(level);
  LebesguePartition part;
  part.level = level;
  part.source_len = path.size();
  part.crossing_times.push_back(path.time_at(0));
  part.crossing_values.push_back(path.value_at(0));

  detail::QvSnapKernel k;
  k.reset(level, path.value_at(0));
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    const double ta = path.time_at(i), tb = path.time_at(i + 1);
    const double va = path.value_at(i), vb = path.value_at(i + 1);
    k.step(va, vb, [&](double gv, double frac) {
      part.crossing_times.push_back(ta + frac * (tb - ta));
      part.crossing_values.push_back(gv);
    });
  }
  return part;
}

std::vector<double> qv_values_at(const SampledPath& path, int level,
                                 const std::vector<double>& sorted_times,
                                 CrossingSemantics semantics) {
  check_level(level);
  check_eval_times(path, sorted_times, /*allow_repeats=*/true);
  std::vector<double> out(sorted_times.size(), 0.0);
  std::size_t q = 0;  // next query index

  if (semantics == CrossingSemantics::SampleDetection) {
    detail::QvDetectKernel k;
    k.reset(level, path.value_at(0));
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
      const double ta = path.time_at(i), tb = path.time_at(i + 1);
      const double va = path.value_at(i), vb = path.value_at(i + 1);
      // Detections are charged at sample times, so every query in [ta, tb)
      // sees the state as of sample i.
      while (q < sorted_times.size() && sorted_times[q] < tb) {
        const double v = lerp_at(sorted_times[q], ta, va, tb, vb);
        out[q++] = k.value_at(v);
      }
      k.step(va, vb);
    }
    while (q < sorted_times.size()) out[q++] = k.value_at(path.value_at(path.size() - 1));
  } else {
    detail::QvSnapKernel k;
    k.reset(level, path.value_at(0));
    // Shadow of (acc, last crossing value) advanced crossing-by-crossing so
    // queries land between the right pair of interpolated crossing times.
    double cur_acc = 0.0, cur_last = path.value_at(0);
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
      const double ta = path.time_at(i), tb = path.time_at(i + 1);
      const double va = path.value_at(i), vb = path.value_at(i + 1);
      k.step(va, vb, [&](double gv, double frac) {
        const double tc = ta + frac * (tb - ta);
        while (q < sorted_times.size() && sorted_times[q] < tc) {
          const double v = lerp_at(sorted_times[q], ta, va, tb, vb);
          const double p = v - cur_last;
          out[q++] = cur_acc + p * p;
        }
        const double d = gv - cur_last;
        cur_acc += d * d;
        cur_last = gv;
      });
      while (q < sorted_times.size() && sorted_times[q] < tb) {
        const double v = lerp_at(sorted_times[q], ta, va, tb, vb);
        const double p = v - cur_last;
        out[q++] = cur_acc + p * p;
      }
    }
    const double vT = path.value_at(path.size() - 1);
    while (q < sorted_times.size()) {
      const double p = vT - cur_last;
      out[q++] = cur_acc + p * p;
    }
  }
  return out;
}

QVResult discrete_qv(const SampledPath& path, int level,
                     const std::vector<double>& eval_times,
                     CrossingSemantics semantics) {
  check_eval_times(path, eval_times, /*allow_repeats=*/false);
  std::vector<double> vals = qv_values_at(path, level, eval_times, semantics);
  QVResult r;
  r.level = level;
  r.terminal = vals.back();
  r.qv_path = SampledPath::with_times(eval_times, std::move(vals));
  return r;
}

QvEstimate estimate_qv(const SampledPath& path, int level_lo, int level_hi,
                       const std::vector<double>& eval_times,
                       CrossingSemantics semantics) {
  check_level(level_lo);
  check_level(level_hi);
  if (level_lo > level_hi) throw validation_error("level range must satisfy lo <= hi");
  check_eval_times(path, eval_times, /*allow_repeats=*/false);

  const int nlev = level_hi - level_lo + 1;
  QvEstimate est;
  est.faithful_level_cap = faithful_level_cap(path);
  est.cauchy_gaps.assign(nlev > 1 ? nlev - 1 : 0, 0.0);

  if (semantics == CrossingSemantics::SampleDetection) {
    std::vector<detail::QvDetectKernel> ks((std::size_t)nlev);
    for (int k = 0; k < nlev; ++k) ks[(std::size_t)k].reset(level_lo + k, path.value_at(0));
    std::vector<double> out(eval_times.size(), 0.0);
    std::size_t q = 0;
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
      const double ta = path.time_at(i), tb = path.time_at(i + 1);
      const double va = path.value_at(i), vb = path.value_at(i + 1);
      while (q < eval_times.size() && eval_times[q] < tb) {
        const double v = lerp_at(eval_times[q], ta, va, tb, vb);
        out[q++] = ks[(std::size_t)(nlev - 1)].value_at(v);
      }
      for (int k = 0; k < nlev; ++k) ks[(std::size_t)k].step(va, vb);
      for (int k = 0; k + 1 < nlev; ++k) {
        const double g = std::fabs(ks[(std::size_t)(k + 1)].value_at(vb) -
                                   ks[(std::size_t)k].value_at(vb));
        if (g > est.cauchy_gaps[(std::size_t)k]) est.cauchy_gaps[(std::size_t)k] = g;
      }
    }
    const double vT = path.value_at(path.size() - 1);
    while (q < eval_times.size()) out[q++] = ks[(std::size_t)(nlev - 1)].value_at(vT);
    est.qv.level = level_hi;
    est.qv.terminal = out.back();
    est.qv.qv_path = SampledPath::with_times(eval_times, std::move(out));
  } else {
    std::vector<detail::QvSnapKernel> ks((std::size_t)nlev);
    for (int k = 0; k < nlev; ++k) ks[(std::size_t)k].reset(level_lo + k, path.value_at(0));
    for (std::size_t i = 0; i + 1 < path.size(); ++i) {
      const double va = path.value_at(i), vb = path.value_at(i + 1);
      for (int k = 0; k < nlev; ++k) ks[(std::size_t)k].step(va, vb);
      for (int k = 0; k + 1 < nlev; ++k) {
        const double g = std::fabs(ks[(std::size_t)(k + 1)].value_at(vb) -
                                   ks[(std::size_t)k].value_at(vb));
        if (g > est.cauchy_gaps[(std::size_t)k]) est.cauchy_gaps[(std::size_t)k] = g;
      }
    }
    est.qv = discrete_qv(path, level_hi, eval_times, semantics);
  }
  return est;
}

int faithful_level_cap(const SampledPath& path) {
  const double osc = path.max_step_oscillation();
  if (osc <= 0.0) return 62;
  const int cap = (int)std::floor(-std::log2(4.0 * osc));
  return std::clamp(cap, 0, 62);
}

double interpolation_slack(const SampledPath& path, int level) {
  check_level(level);
  return 4.0 * std::ldexp(1.0, -level) * path.max_step_oscillation();
}

SampledPath monotone_envelope(const SampledPath& path) {
  std::vector<double> v(path.size());
  double running = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < path.size(); ++i) {
    running = std::max(running, path.value_at(i));
    v[i] = running;
  }
  return path.uniform_grid() ? SampledPath::uniform(path.duration(), std::move(v))
                             : SampledPath::with_times(path.shared_times(), std::move(v));
}

}  // namespace pathwise
