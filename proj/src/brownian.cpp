#include "pathwise/brownian.hpp"

#include <cmath>

namespace pathwise {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t path_stream_seed(std::uint64_t seed, std::uint64_t path_index) {
  return splitmix64(seed + 0x9E3779B97F4A7C15ULL * (path_index + 1));
}

BrownianStream::BrownianStream(std::uint64_t seed, std::uint64_t path_index,
                               std::size_t steps, double horizon)
    : rng_(path_stream_seed(seed, path_index)),
      dist_(0.0, std::sqrt(horizon / (double)steps)) {
  if (steps == 0) throw validation_error("brownian: steps must be >= 1");
  if (!(horizon > 0.0)) throw validation_error("brownian: horizon must be positive");
}

std::vector<double> brownian_values(std::uint64_t seed, std::uint64_t path_index,
                                    std::size_t steps, double horizon) {
  BrownianStream bs(seed, path_index, steps, horizon);
  std::vector<double> v(steps + 1);
  v[0] = 0.0;
  for (std::size_t i = 1; i <= steps; ++i) v[i] = bs.next();
  return v;
}

PathBatch generate_brownian(std::uint64_t seed, double horizon, std::size_t steps,
                            std::size_t count) {
  if (count == 0) throw validation_error("generate_brownian: count must be >= 1");
  PathBatch b;
  b.horizon = horizon;
  b.steps = steps;
  b.seed = seed;
  b.generator_tag = "brownian";
  b.values.resize(count);
  for (std::size_t p = 0; p < count; ++p)
    b.values[p] = brownian_values(seed, p, steps, horizon);
  return b;
}

}  // namespace pathwise
