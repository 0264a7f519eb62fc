#include <algorithm>
#include <cmath>
#include <vector>

#include "pathwise/integrate.hpp"
#include "pathwise/partition.hpp"
#include "pathwise/path.hpp"

namespace pathwise {

namespace detail {

// Evaluation grid in u-coordinates for omega o phi that loses no information:
// the requested evaluation times, every table knot, and the phi-preimage of
// every source sample time reachable below the last evaluation time. With all
// preimages present, the composed path visits every source sample value, so a
// grid-respecting phi reproduces the source's crossing sequence bit for bit;
// uniform resampling instead skips samples wherever phi runs steeper than 1
// and loses whole crossing excursions.
std::vector<double> enriched_composed_grid(const SampledPath& source,
                                           const TimeChange& phi,
                                           const std::vector<double>& eval_times) {
  if (eval_times.empty() || eval_times.front() != 0.0)
    throw validation_error("evaluation times must be non-empty and start at 0");
  for (std::size_t i = 1; i < eval_times.size(); ++i)
    if (eval_times[i] <= eval_times[i - 1])
      throw validation_error("evaluation times must be strictly increasing");
  const double u_max = eval_times.back();
  if (u_max > phi.domain_end() * (1.0 + 1e-12))
    throw validation_error("evaluation time beyond the time change's domain");
  const double s_max = phi(u_max);
  if (s_max > source.duration() * (1.0 + 1e-12))
    throw validation_error("time change leaves the source path's domain");

  std::vector<double> grid(eval_times.begin(), eval_times.end());

  if (phi.table_based()) {
    const std::vector<double>& uk = phi.u_knots();
    const std::vector<double>& sk = phi.s_knots();
    for (double u : uk)
      if (u <= u_max) grid.push_back(u);
    // Preimages under each strictly rising piece; stalled pieces have none.
    for (std::size_t k = 0; k + 1 < uk.size(); ++k) {
      if (uk[k] >= u_max) break;
      const double s_lo = sk[k], s_hi = sk[k + 1];
      if (s_hi <= s_lo) continue;
      std::size_t i = source.index_at_or_before(std::min(s_lo, source.duration()));
      for (; i < source.size(); ++i) {
        const double s = source.time_at(i);
        if (s <= s_lo) continue;
        if (s >= s_hi) break;
        const double w = (s - s_lo) / (s_hi - s_lo);
        const double u = uk[k] + w * (uk[k + 1] - uk[k]);
        if (u <= u_max) grid.push_back(u);
      }
    }
  } else {
    for (std::size_t i = 0; i < source.size(); ++i) {
      const double s = source.time_at(i);
      if (s <= 0.0) continue;
      if (s > s_max) break;
      const double u = phi.inverse(s);
      if (u <= u_max) grid.push_back(u);
    }
  }

  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

}  // namespace detail

namespace {

std::vector<double> mapped_times(const TimeChange& phi, const std::vector<double>& ts) {
  std::vector<double> out;
  out.reserve(ts.size());
  for (double t : ts) out.push_back(phi(t));
  return out;
}

}  // namespace

double qv_time_change_check(const SampledPath& path, const TimeChange& phi,
                            int level, const std::vector<double>& eval_times) {
  const std::vector<double> grid = detail::enriched_composed_grid(path, phi, eval_times);
  const SampledPath composed = compose_time_change(path, phi, grid);

  const std::vector<double> lhs =
      qv_values_at(composed, level, eval_times, CrossingSemantics::InterpolatedCrossing);
  const std::vector<double> rhs =
      qv_values_at(path, level, mapped_times(phi, eval_times),
                   CrossingSemantics::InterpolatedCrossing);

  double worst = 0.0;
  for (std::size_t i = 0; i < lhs.size(); ++i)
    worst = std::max(worst, std::fabs(lhs[i] - rhs[i]));
  return worst;
}

double integral_time_change_check(const SampledPath& X, const SampledPath& S,
                                  const TimeChange& phi, int level,
                                  const std::vector<double>& eval_times) {
  const std::vector<double> grid = detail::enriched_composed_grid(S, phi, eval_times);
  const SampledPath Xc = compose_time_change(X, phi, grid);
  const SampledPath Sc = compose_time_change(S, phi, grid);

  const std::vector<double> lhs = ito_values_at(Xc, Sc, level, eval_times,
                                                CrossingSemantics::InterpolatedCrossing);
  const std::vector<double> rhs =
      ito_values_at(X, S, level, mapped_times(phi, eval_times),
                    CrossingSemantics::InterpolatedCrossing);

  double worst = 0.0;
  for (std::size_t i = 0; i < lhs.size(); ++i)
    worst = std::max(worst, std::fabs(lhs[i] - rhs[i]));
  return worst;
}

}  // namespace pathwise
