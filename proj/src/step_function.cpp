#include <algorithm>
#include <cmath>

#include "pathwise/integrate.hpp"

namespace pathwise {

double StepFunction::value(double t) const {
  auto it = std::upper_bound(jump_times.begin(), jump_times.end(), t);
  if (it == jump_times.begin()) throw domain_error("step function queried before 0");
  return levels[(std::size_t)(it - jump_times.begin()) - 1];
}

void StepFunction::validate() const {
  if (jump_times.empty() || jump_times.size() != levels.size())
    throw validation_error("step function needs matching, non-empty jumps and levels");
  if (jump_times.front() != 0.0)
    throw validation_error("step function must start at time 0");
  for (std::size_t i = 1; i < jump_times.size(); ++i)
    if (jump_times[i] <= jump_times[i - 1])
      throw validation_error("step function jump times must be strictly increasing");
}

IntegralResult step_integral(const StepFunction& f, const SampledPath& S,
                             const std::vector<double>& eval_times) {
  f.validate();
  if (eval_times.empty() || eval_times.front() != 0.0)
    throw validation_error("evaluation times must be non-empty and start at 0");

  std::vector<double> out;
  out.reserve(eval_times.size());
  for (double t : eval_times) {
    if (t < 0.0 || t > S.duration() * (1.0 + 1e-12))
      throw validation_error("evaluation time outside the integrator domain");
    // Exact left-point sum: each piece [t_k, t_{k+1}) contributes
    // levels[k] * (S(t_{k+1} ^ t) - S(t_k ^ t)); pieces past t contribute 0.
    double acc = 0.0;
    for (std::size_t k = 0; k < f.jump_times.size(); ++k) {
      const double lo = f.jump_times[k];
      if (lo >= t) break;
      const double hi = (k + 1 < f.jump_times.size()) ? std::min(f.jump_times[k + 1], t) : t;
      acc += f.levels[k] * (S.evaluate(hi) - S.evaluate(lo));
    }
    out.push_back(acc);
  }

  IntegralResult r;
  r.value_path = SampledPath::with_times(eval_times, std::move(out));
  r.approximation_level = -1;
  r.est_error = 0.0;
  return r;
}

}  // namespace pathwise
