#pragma once

#include <cstdint>
#include <random>

#include "pathwise/path.hpp"

namespace pathwise {

// SplitMix64 finalizer; used to derive one independent RNG stream per path index
// so that parallel and serial generation agree bit for bit.
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t path_stream_seed(std::uint64_t seed, std::uint64_t path_index);

// Streaming generator for one Brownian path: values[0] = 0, independent Gaussian
// increments with variance horizon / steps.
class BrownianStream {
public:
  BrownianStream(std::uint64_t seed, std::uint64_t path_index, std::size_t steps,
                 double horizon);
  // Value after advancing one step; call exactly `steps` times.
  double next() { return current_ += dist_(rng_); }
  double current() const { return current_; }

private:
  std::mt19937_64 rng_;
  std::normal_distribution<double> dist_;
  double current_ = 0.0;
};

std::vector<double> brownian_values(std::uint64_t seed, std::uint64_t path_index,
                                    std::size_t steps, double horizon);

PathBatch generate_brownian(std::uint64_t seed, double horizon, std::size_t steps,
                            std::size_t count);

}  // namespace pathwise
