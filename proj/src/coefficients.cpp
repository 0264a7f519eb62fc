#include "pathwise/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

#include "pathwise/expr.hpp"
#include "pathwise/path.hpp"

namespace pathwise {

double CoefficientPair::combined_bound() const {
  if (!bounds_declared())
    throw validation_error("coefficient pair '" + name + "' has no declared sup bounds");
  return std::max(1.0, *bound_b + *bound_sigma);
}

namespace {

const double kInf = std::numeric_limits<double>::infinity();

double sqrt_pos(double x) { return x > 0.0 ? std::sqrt(x) : 0.0; }

ModelPreset make_cir() {
  ModelPreset m;
  m.coef.b = [](double x) { return 2.0 * (1.0 - x); };
  m.coef.sigma = sqrt_pos;
  m.coef.sigma_prime = [](double x) { return x > 0.0 ? 0.5 / std::sqrt(x) : 0.0; };
  m.coef.sigma_second = [](double x) {
    return x > 0.0 ? -0.25 / (x * std::sqrt(x)) : 0.0;
  };
  m.coef.C_b = 2.0;
  m.coef.C_sigma = 1.0;
  m.coef.domain = {0.0, kInf};
  m.coef.name = "cir";
  m.x0 = 1.0;
  return m;
}

ModelPreset make_gbm() {
  ModelPreset m;
  m.coef.b = [](double) { return 0.0; };
  m.coef.sigma = [](double x) { return x; };
  m.coef.sigma_prime = [](double) { return 1.0; };
  m.coef.sigma_second = [](double) { return 0.0; };
  m.coef.C_b = 0.0;
  // Holder-1/2 constant of x -> x on a diameter-8 state interval.
  m.coef.C_sigma = std::sqrt(8.0);
  m.coef.domain = {0.0, 8.0};
  m.coef.name = "gbm";
  m.x0 = 1.0;
  return m;
}

ModelPreset make_const() {
  ModelPreset m;
  m.coef.b = [](double) { return 0.0; };
  m.coef.sigma = [](double) { return 1.0; };
  m.coef.sigma_prime = [](double) { return 0.0; };
  m.coef.sigma_second = [](double) { return 0.0; };
  m.coef.C_b = 0.0;
  m.coef.C_sigma = 0.0;
  m.coef.bound_b = 0.0;
  m.coef.bound_sigma = 1.0;
  m.coef.name = "const";
  m.x0 = 0.0;
  return m;
}

ModelPreset make_tanh() {
  ModelPreset m;
  m.coef.b = [](double) { return 0.0; };
  m.coef.sigma = [](double x) { return std::tanh(x); };
  m.coef.sigma_prime = [](double x) {
    const double t = std::tanh(x);
    return 1.0 - t * t;
  };
  m.coef.sigma_second = [](double x) {
    const double t = std::tanh(x);
    return -2.0 * t * (1.0 - t * t);
  };
  m.coef.C_b = 0.0;
  // |tanh x - tanh y| <= min(|x-y|, 2) <= sqrt(2) sqrt(|x-y|) for all x, y.
  m.coef.C_sigma = std::sqrt(2.0);
  m.coef.bound_b = 0.0;
  m.coef.bound_sigma = 1.0;
  m.coef.name = "tanh";
  m.x0 = 0.0;
  return m;
}

ModelPreset make_trunc_cir() {
  ModelPreset m;
  m.coef.b = [](double x) { return std::clamp(2.0 * (1.0 - x), -2.0, 2.0); };
  m.coef.sigma = [](double x) { return std::min(sqrt_pos(x), 2.0); };
  m.coef.sigma_prime = [](double x) {
    return (x > 0.0 && x < 4.0) ? 0.5 / std::sqrt(x) : 0.0;
  };
  m.coef.sigma_second = [](double x) {
    return (x > 0.0 && x < 4.0) ? -0.25 / (x * std::sqrt(x)) : 0.0;
  };
  m.coef.C_b = 2.0;
  m.coef.C_sigma = 1.0;
  m.coef.bound_b = 2.0;
  m.coef.bound_sigma = 2.0;
  m.coef.domain = {0.0, kInf};
  m.coef.name = "trunc-cir";
  m.x0 = 1.0;
  return m;
}

}  // namespace

ModelPreset preset(const std::string& name) {
  if (name == "cir") return make_cir();
  if (name == "gbm") return make_gbm();
  if (name == "const") return make_const();
  if (name == "tanh") return make_tanh();
  if (name == "trunc-cir") return make_trunc_cir();
  throw validation_error("unknown preset '" + name + "' (expected one of: cir, gbm, const, tanh, trunc-cir)");
}

std::vector<std::string> preset_names() {
  return {"cir", "gbm", "const", "tanh", "trunc-cir"};
}

CoefficientPair coefficients_from_expressions(const std::string& drift,
                                              const std::string& diffusion,
                                              double C_b, double C_sigma,
                                              std::optional<double> bound_b,
                                              std::optional<double> bound_sigma) {
  CoefficientPair c;
  c.b = compile_expression(drift);
  c.sigma = compile_expression(diffusion);
  auto sig = c.sigma;
  // Central differences with a curvature-friendly step; adequate for the
  // transform diagnostics, which tolerate first-order coefficient error.
  c.sigma_prime = [sig](double x) {
    const double h = 1e-5 * std::max(1.0, std::fabs(x));
    return (sig(x + h) - sig(x - h)) / (2.0 * h);
  };
  c.sigma_second = [sig](double x) {
    const double h = 2e-4 * std::max(1.0, std::fabs(x));
    return (sig(x + h) - 2.0 * sig(x) + sig(x - h)) / (h * h);
  };
  c.C_b = C_b;
  c.C_sigma = C_sigma;
  c.bound_b = bound_b;
  c.bound_sigma = bound_sigma;
  c.name = "custom";
  return c;
}

ValidationReport validate_coefficients(const CoefficientPair& c, double lo, double hi,
                                       int probes, std::uint64_t seed) {
  if (!(lo < hi)) throw validation_error("probe interval must satisfy lo < hi");
  if (probes < 2) throw validation_error("need at least 2 probes");

  ValidationReport rep;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(lo, hi);
  // Near-diagonal offsets stress the Holder inequality where sqrt|x-y| is small.
  std::uniform_real_distribution<double> small_exp(-30.0, -1.0);

  const double slack = 1.0 + 1e-9;
  for (int k = 0; k < probes; ++k) {
    double x = uni(rng);
    double y;
    if (k % 2 == 0) {
      y = uni(rng);
    } else {
      const double d = std::exp2(small_exp(rng)) * (hi - lo);
      y = std::clamp(x + (k % 4 == 1 ? d : -d), lo, hi);
    }
    if (x == y) continue;
    const double dx = std::fabs(x - y);

    // A sharp declaration evaluated in floating point overshoots its budget by
    // rounding of the coefficient values alone; at near-diagonal separations
    // (~2^-30 of the interval) one ulp of b is worth ~1e-7 in ratio. Flag a
    // violation only when it clears an evaluation-noise floor on top of the
    // relative slack. The floor is a few dozen ulps of the function values,
    // far below any genuine constant violation, which grows with dx.
    const double eps = std::numeric_limits<double>::epsilon();
    const double bx = c.b(x), by = c.b(y);
    const double db = std::fabs(bx - by);
    const double lip_budget = c.C_b * dx;
    const double lip_ratio = lip_budget > 0.0 ? db / lip_budget
                                              : (db > 0.0 ? kInf : 0.0);
    if (lip_ratio > rep.worst_lipschitz_ratio) {
      rep.worst_lipschitz_ratio = lip_ratio;
      rep.lipschitz_witness[0] = x;
      rep.lipschitz_witness[1] = y;
    }
    const double noise_b = 32.0 * eps * (std::fabs(bx) + std::fabs(by) + 1.0);
    if (db > lip_budget * slack + noise_b) rep.lipschitz_ok = false;

    const double sx = c.sigma(x), sy = c.sigma(y);
    const double ds = std::fabs(sx - sy);
    const double hold_budget = c.C_sigma * std::sqrt(dx);
    const double hold_ratio = hold_budget > 0.0 ? ds / hold_budget
                                                : (ds > 0.0 ? kInf : 0.0);
    if (hold_ratio > rep.worst_holder_ratio) {
      rep.worst_holder_ratio = hold_ratio;
      rep.holder_witness[0] = x;
      rep.holder_witness[1] = y;
    }
    const double noise_s = 32.0 * eps * (std::fabs(sx) + std::fabs(sy) + 1.0);
    if (ds > hold_budget * slack + noise_s) rep.holder_ok = false;

    if (c.bound_b && std::fabs(bx) > *c.bound_b * slack) rep.bounds_ok = false;
    if (c.bound_sigma && std::fabs(sx) > *c.bound_sigma * slack)
      rep.bounds_ok = false;
  }

  if (!rep.lipschitz_ok)
    rep.messages.push_back(
        "drift violates the declared Lipschitz constant near x=" +
        std::to_string(rep.lipschitz_witness[0]) + ", y=" +
        std::to_string(rep.lipschitz_witness[1]));
  if (!rep.holder_ok)
    rep.messages.push_back(
        "diffusion violates the declared Holder-1/2 constant near x=" +
        std::to_string(rep.holder_witness[0]) + ", y=" +
        std::to_string(rep.holder_witness[1]));
  if (!rep.bounds_ok) rep.messages.push_back("a declared sup bound is exceeded");
  if (rep.ok())
    rep.messages.push_back("no violation found (probing falsifies; it cannot prove)");
  return rep;
}

}  // namespace pathwise
