#include "pathwise/path.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace pathwise {

SampledPath SampledPath::uniform(double horizon, std::vector<double> values) {
  if (values.size() < 2) throw validation_error("SampledPath: need at least two samples");
  if (!(horizon > 0.0)) throw validation_error("SampledPath: nonpositive horizon");
  SampledPath p;
  p.values_ = std::move(values);
  p.horizon_ = horizon;
  return p;
}

SampledPath SampledPath::with_times(std::shared_ptr<const std::vector<double>> times,
                                    std::vector<double> values) {
  if (!times || times->size() != values.size())
    throw validation_error("SampledPath: times/values length mismatch");
  if (times->size() < 1) throw validation_error("SampledPath: empty");
  if ((*times)[0] != 0.0) throw validation_error("SampledPath: times must start at 0");
  for (std::size_t i = 1; i < times->size(); ++i)
    if (!((*times)[i] > (*times)[i - 1]))
      throw validation_error("SampledPath: times must be strictly increasing");
  SampledPath p;
  p.values_ = std::move(values);
  p.horizon_ = times->back();
  p.times_ = std::move(times);
  return p;
}

SampledPath SampledPath::with_times(std::vector<double> times, std::vector<double> values) {
  return with_times(std::make_shared<const std::vector<double>>(std::move(times)),
                    std::move(values));
}

double SampledPath::duration() const { return horizon_; }

double SampledPath::time_at(std::size_t i) const {
  if (times_) return (*times_)[i];
  return horizon_ * (double)i / (double)(values_.size() - 1);
}

double SampledPath::evaluate(double t) const {
  const double T = duration();
  if (t < 0.0 || t > T) throw domain_error("SampledPath::evaluate: t outside [0, T]");
  std::size_t i = index_at_or_before(t);
  if (i + 1 >= values_.size()) return values_.back();
  const double ta = time_at(i), tb = time_at(i + 1);
  if (t == ta) return values_[i];
  if (t == tb) return values_[i + 1];
  const double w = (t - ta) / (tb - ta);
  return values_[i] + w * (values_[i + 1] - values_[i]);
}

std::size_t SampledPath::index_at_or_before(double t) const {
  const std::size_t n = values_.size();
  if (!times_) {
    if (t >= horizon_) return n - 1;
    double pos = t / horizon_ * (double)(n - 1);
    std::size_t i = (std::size_t)pos;
    if (i >= n - 1) i = n - 2;
    // guard against rounding just past a sample
    while (i + 1 < n && time_at(i + 1) <= t) ++i;
    while (i > 0 && time_at(i) > t) --i;
    return i;
  }
  auto it = std::upper_bound(times_->begin(), times_->end(), t);
  if (it == times_->begin()) return 0;
  return (std::size_t)(it - times_->begin()) - 1;
}

double SampledPath::max_step_oscillation() const {
  double m = 0.0;
  for (std::size_t i = 1; i < values_.size(); ++i)
    m = std::max(m, std::fabs(values_[i] - values_[i - 1]));
  return m;
}

void SampledPath::validate(bool require_zero_start) const {
  if (values_.size() < 1) throw validation_error("SampledPath: empty");
  if (require_zero_start && values_[0] != 0.0)
    throw validation_error("SampledPath: omega(0) must be 0");
  for (double v : values_)
    if (!std::isfinite(v)) throw validation_error("SampledPath: non-finite value");
}

TimeChange TimeChange::identity() {
  TimeChange tc;
  tc.fn_ = [](double u) { return u; };
  tc.domain_end_ = std::numeric_limits<double>::infinity();
  tc.strictly_increasing_ = true;
  return tc;
}

TimeChange TimeChange::from_function(std::function<double(double)> fn, double domain_end,
                                     bool strictly_increasing) {
  if (!fn) throw validation_error("TimeChange: empty function");
  if (fn(0.0) != 0.0) throw validation_error("TimeChange: phi(0) must be 0");
  TimeChange tc;
  tc.fn_ = std::move(fn);
  tc.domain_end_ = domain_end;
  tc.strictly_increasing_ = strictly_increasing;
  return tc;
}

TimeChange TimeChange::from_table(std::vector<double> u_knots, std::vector<double> s_knots,
                                  bool strictly_increasing) {
  if (u_knots.size() != s_knots.size() || u_knots.size() < 2)
    throw validation_error("TimeChange: bad table");
  if (u_knots[0] != 0.0 || s_knots[0] != 0.0)
    throw validation_error("TimeChange: table must start at (0, 0)");
  for (std::size_t i = 1; i < u_knots.size(); ++i) {
    if (!(u_knots[i] > u_knots[i - 1]))
      throw validation_error("TimeChange: u knots must be strictly increasing");
    if (s_knots[i] < s_knots[i - 1])
      throw validation_error("TimeChange: phi must be nondecreasing");
    if (strictly_increasing && !(s_knots[i] > s_knots[i - 1]))
      throw validation_error("TimeChange: phi not strictly increasing");
  }
  TimeChange tc;
  tc.u_knots_ = std::move(u_knots);
  tc.s_knots_ = std::move(s_knots);
  tc.domain_end_ = tc.u_knots_.back();
  tc.strictly_increasing_ = strictly_increasing;
  return tc;
}

double TimeChange::operator()(double u) const {
  if (!table_based()) return fn_(u);
  if (u < u_knots_.front() || u > u_knots_.back())
    throw domain_error("TimeChange: u outside table domain");
  auto it = std::upper_bound(u_knots_.begin(), u_knots_.end(), u);
  if (it == u_knots_.begin()) return s_knots_.front();
  std::size_t i = (std::size_t)(it - u_knots_.begin()) - 1;
  if (i + 1 >= u_knots_.size()) return s_knots_.back();
  if (u == u_knots_[i]) return s_knots_[i];
  const double w = (u - u_knots_[i]) / (u_knots_[i + 1] - u_knots_[i]);
  return s_knots_[i] + w * (s_knots_[i + 1] - s_knots_[i]);
}

double TimeChange::inverse(double s) const {
  if (table_based()) {
    if (s < s_knots_.front() || s > s_knots_.back())
      throw domain_error("TimeChange::inverse: s outside range");
    auto it = std::lower_bound(s_knots_.begin(), s_knots_.end(), s);
    std::size_t i = (std::size_t)(it - s_knots_.begin());
    if (s_knots_[i] == s) return u_knots_[i];  // leftmost exact hit
    // s strictly between s_knots_[i-1] and s_knots_[i]
    const double w = (s - s_knots_[i - 1]) / (s_knots_[i] - s_knots_[i - 1]);
    return u_knots_[i - 1] + w * (u_knots_[i] - u_knots_[i - 1]);
  }
  // callable: bisection on [0, domain_end]
  double lo = 0.0, hi = domain_end_;
  double flo = fn_(lo), fhi = fn_(hi);
  if (s < flo || s > fhi) throw domain_error("TimeChange::inverse: s outside range");
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    double fm = fn_(mid);
    if (fm < s) lo = mid;
    else hi = mid;
  }
  return fn_(lo) == s ? lo : hi;
}

SampledPath PathBatch::path(std::size_t index) const {
  return SampledPath::uniform(horizon, values.at(index));
}

SampledPath compose_time_change(const SampledPath& path, const TimeChange& phi,
                                const std::vector<double>& new_times) {
  if (new_times.empty() || new_times[0] != 0.0)
    throw validation_error("compose_time_change: new_times must start at 0");
  const double T = path.duration();
  // phi evaluated at an exact preimage can overshoot the endpoint by rounding
  // (e.g. 0.5 * sqrt(2)^2 > 1); forgive the same relative slack the enriched
  // grid uses before declaring a genuine domain violation.
  const double slack = T * 1e-12;
  std::vector<double> vals(new_times.size());
  for (std::size_t i = 0; i < new_times.size(); ++i) {
    double s = phi(new_times[i]);
    if (s < 0.0 && s >= -slack) s = 0.0;
    if (s > T && s <= T + slack) s = T;
    if (s < 0.0 || s > T) throw domain_error("compose_time_change: phi leaves source domain");
    vals[i] = path.evaluate(s);
  }
  return SampledPath::with_times(new_times, std::move(vals));
}

std::vector<double> uniform_times(double horizon, std::size_t points) {
  std::vector<double> t(points);
  for (std::size_t i = 0; i < points; ++i)
    t[i] = horizon * (double)i / (double)(points - 1);
  return t;
}

}  // namespace pathwise
