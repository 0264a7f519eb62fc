#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace pathwise {

struct validation_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct domain_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A continuous path on [0, T] represented by finitely many samples with linear
// interpolation between them. Two storage modes:
//   - uniform: times are i * horizon / steps (implicit, exact for power-of-two steps),
//   - explicit: an arbitrary strictly increasing time grid, shared between paths.
class SampledPath {
public:
  SampledPath() = default;

  static SampledPath uniform(double horizon, std::vector<double> values);
  static SampledPath with_times(std::shared_ptr<const std::vector<double>> times,
                                std::vector<double> values);
  static SampledPath with_times(std::vector<double> times, std::vector<double> values);

  std::size_t size() const { return values_.size(); }
  bool uniform_grid() const { return times_ == nullptr; }
  double duration() const;
  double time_at(std::size_t i) const;
  double value_at(std::size_t i) const { return values_[i]; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& mutable_values() { return values_; }
  const std::shared_ptr<const std::vector<double>>& shared_times() const { return times_; }

  // Linear interpolation; exact at sample points; throws domain_error outside [0, T].
  double evaluate(double t) const;

  // Largest i with time_at(i) <= t (clamped to the last index).
  std::size_t index_at_or_before(double t) const;

  // Largest |values[i+1] - values[i]| (the per-sample oscillation used by the
  // resolution cap and the interpolation slack).
  double max_step_oscillation() const;

  // require_zero_start: the path space carries omega(0) = 0; solution paths
  // start at x0 instead, so the check is optional.
  void validate(bool require_zero_start) const;

private:
  std::vector<double> values_;
  std::shared_ptr<const std::vector<double>> times_;  // null => uniform
  double horizon_ = 0.0;
};

// Nondecreasing reparametrization of time, phi(0) = 0. Either a callable or a
// piecewise-linear table (u_k -> s_k). Tables may stall (constant pieces).
class TimeChange {
public:
  static TimeChange identity();
  static TimeChange from_function(std::function<double(double)> fn, double domain_end,
                                  bool strictly_increasing);
  static TimeChange from_table(std::vector<double> u_knots, std::vector<double> s_knots,
                               bool strictly_increasing);

  double operator()(double u) const;
  double domain_end() const { return domain_end_; }
  bool strictly_increasing() const { return strictly_increasing_; }
  bool table_based() const { return !u_knots_.empty(); }
  const std::vector<double>& u_knots() const { return u_knots_; }
  const std::vector<double>& s_knots() const { return s_knots_; }

  // Leftmost u with phi(u) = s (tables: exact piecewise-linear inversion; callables:
  // bisection). Throws domain_error if s is outside the range of phi.
  double inverse(double s) const;

private:
  std::function<double(double)> fn_;
  std::vector<double> u_knots_, s_knots_;
  double domain_end_ = 0.0;
  bool strictly_increasing_ = false;
};

// A batch of paths sharing one uniform time grid, regenerable bit-exactly from
// (seed, parameters) regardless of how generation is parallelized.
struct PathBatch {
  double horizon = 0.0;
  std::size_t steps = 0;
  std::uint64_t seed = 0;
  std::string generator_tag;
  std::vector<std::vector<double>> values;  // count x (steps + 1)

  std::size_t count() const { return values.size(); }
  SampledPath path(std::size_t index) const;
};

// omega(phi(t)) sampled on new_times. phi must keep new_times inside the source domain.
SampledPath compose_time_change(const SampledPath& path, const TimeChange& phi,
                                const std::vector<double>& new_times);

// Continuous piecewise-linear interpolation of the level-n crossing skeleton
// (exact grid-value knots), constant after the last crossing. Bounded variation
// by construction; sup distance to the source is at most 2 * 2^-level.
SampledPath piecewise_linear_bv_approximation(const SampledPath& path, int level);

std::vector<double> uniform_times(double horizon, std::size_t points);

}  // namespace pathwise
