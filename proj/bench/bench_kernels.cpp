// Wall-time comparison of the per-path parallel kernels against their serial
// runs (threads = 1 forces the serial loop in parallel_for_paths). Both modes
// produce bit-identical numbers by construction; this target only reports
// timing and prints the checksums so that can be eyeballed. On a single-core
// machine expect no speedup: the point of the parallel path is the guarantee
// that enabling it never changes results.

#include <chrono>
#include <cstdio>

#include "pathwise/coefficients.hpp"
#include "pathwise/experiments.hpp"
#include "pathwise/parallel.hpp"

using namespace pathwise;

namespace {

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

template <class F>
double timed(F&& f) {
  const double t0 = now_seconds();
  f();
  return now_seconds() - t0;
}

}  // namespace

int main() {
  const int par = effective_threads(0) > 1 ? effective_threads(0) : 2;
  std::printf("kernel benchmark: openmp %s, serial = 1 thread, parallel = %d threads\n",
              openmp_enabled() ? "enabled" : "disabled", par);
  std::printf("%-34s %12s %12s %9s  %s\n", "kernel", "serial [s]", "parallel [s]",
              "speedup", "checksum");

  {
    BatchSpec spec;
    spec.num_paths = 16;
    spec.steps = (std::size_t)1 << 20;
    QvBatchStats serial, parallel;
    const double ts = timed([&] { serial = qv_batch_gap_stats(spec, 6, 9, 1); });
    const double tp = timed([&] { parallel = qv_batch_gap_stats(spec, 6, 9, par); });
    double check_s = 0.0, check_p = 0.0;
    for (double v : serial.terminal) check_s += v;
    for (double v : parallel.terminal) check_p += v;
    std::printf("%-34s %12.3f %12.3f %8.2fx  %.17g%s\n",
                "qv gaps (16 paths, 2^20 steps)", ts, tp, ts / tp, check_s,
                check_s == check_p ? "" : "  MISMATCH");
  }

  {
    const ModelPreset m = preset("tanh");
    BatchSpec spec;
    spec.num_paths = 8;
    spec.steps = (std::size_t)1 << 18;
    ConvergenceReport serial, parallel;
    const double ts = timed([&] {
      serial = convergence_experiment(m.coef, 0.5, spec, {4, 5, 6}, 9, true, 8,
                                      false, 1);
    });
    const double tp = timed([&] {
      parallel = convergence_experiment(m.coef, 0.5, spec, {4, 5, 6}, 9, true, 8,
                                        false, par);
    });
    double check_s = 0.0, check_p = 0.0;
    for (const auto& r : serial.rows) check_s += r.mean_sup_error;
    for (const auto& r : parallel.rows) check_p += r.mean_sup_error;
    std::printf("%-34s %12.3f %12.3f %8.2fx  %.17g%s\n",
                "euler converge (8 paths, 2^18)", ts, tp, ts / tp, check_s,
                check_s == check_p ? "" : "  MISMATCH");
  }

  {
    const ModelPreset m = preset("gbm");
    BatchSpec spec;
    spec.num_paths = 8;
    spec.steps = (std::size_t)1 << 16;
    TransformReport serial, parallel;
    const double ts = timed([&] {
      serial = doss_sussmann_experiment(m.coef, m.x0, spec, {3, 4, 5}, 1e-6, 1);
    });
    const double tp = timed([&] {
      parallel = doss_sussmann_experiment(m.coef, m.x0, spec, {3, 4, 5}, 1e-6, par);
    });
    const double check_s = serial.limit_agreement_mean;
    const double check_p = parallel.limit_agreement_mean;
    std::printf("%-34s %12.3f %12.3f %8.2fx  %.17g%s\n",
                "flow transform (8 paths, 2^16)", ts, tp, ts / tp, check_s,
                check_s == check_p ? "" : "  MISMATCH");
  }

  return 0;
}
