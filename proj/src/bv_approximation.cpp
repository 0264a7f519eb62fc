#include <cmath>
#include <vector>

#include "pathwise/partition.hpp"
#include "pathwise/path.hpp"

namespace pathwise {

// Piecewise-linear interpolation of the level-n crossing skeleton, extended
// constantly after the last crossing, resampled onto the source sample grid.
// At sample times the result is within 2 * 2^-n of the source path (one cell
// for the running excursion, one for the partial move past the last line).
SampledPath piecewise_linear_bv_approximation(const SampledPath& path, int level) {
  const LebesguePartition part = lebesgue_stopping_times(path, level);
  const std::vector<double>& kt = part.crossing_times;
  const std::vector<double>& kv = part.crossing_values;

  std::vector<double> out(path.size(), 0.0);
  std::size_t j = 0;  // knot index with kt[j] <= t < kt[j+1]
  for (std::size_t i = 0; i < path.size(); ++i) {
    const double t = path.time_at(i);
    while (j + 1 < kt.size() && kt[j + 1] <= t) ++j;
    if (j + 1 >= kt.size() || t <= kt[j]) {
      out[i] = kv[j];  // at a knot, or constant extension past the last one
    } else {
      const double w = (t - kt[j]) / (kt[j + 1] - kt[j]);
      out[i] = kv[j] + w * (kv[j + 1] - kv[j]);
    }
  }
  if (path.uniform_grid()) return SampledPath::uniform(path.duration(), std::move(out));
  return SampledPath::with_times(path.shared_times(), std::move(out));
}

}  // namespace pathwise
