#pragma once

// Drift/diffusion coefficient pairs with their regularity data: a Lipschitz
// constant for the drift and a Holder-1/2 constant for the diffusion, optional
// sup bounds, and an admissible state interval. Presets cover the models used
// throughout the experiments; custom pairs can be compiled from expression
// strings (with numeric derivatives for the diffusion).

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace pathwise {

struct CoefficientPair {
  std::function<double(double)> b;             // drift
  std::function<double(double)> sigma;         // diffusion
  std::function<double(double)> sigma_prime;   // d sigma / dx
  std::function<double(double)> sigma_second;  // d^2 sigma / dx^2
  double C_b = 0.0;              // |b(x)-b(y)| <= C_b |x-y|
  double C_sigma = 0.0;          // |sigma(x)-sigma(y)| <= C_sigma sqrt(|x-y|)
  std::optional<double> bound_b;      // sup |b|, when declared
  std::optional<double> bound_sigma;  // sup |sigma|, when declared
  std::pair<double, double> domain{-std::numeric_limits<double>::infinity(),
                                   std::numeric_limits<double>::infinity()};
  std::string name;

  bool bounds_declared() const { return bound_b.has_value() && bound_sigma.has_value(); }
  // max(1, bound_b + bound_sigma); requires declared bounds.
  double combined_bound() const;
};

struct ModelPreset {
  CoefficientPair coef;
  double x0 = 0.0;
};

// Presets: "cir" (mean-reverting square-root diffusion), "gbm" (linear
// diffusion, zero drift), "const" (additive unit noise), "tanh" (bounded
// smooth diffusion), "trunc-cir" (cir with clamped drift and diffusion so both
// sup bounds are declared).
ModelPreset preset(const std::string& name);
std::vector<std::string> preset_names();

// Coefficient pair from expression strings in x. sigma_prime / sigma_second
// fall back to central finite differences of the compiled diffusion.
CoefficientPair coefficients_from_expressions(const std::string& drift,
                                              const std::string& diffusion,
                                              double C_b, double C_sigma,
                                              std::optional<double> bound_b,
                                              std::optional<double> bound_sigma);

// Randomized falsification of the declared regularity: samples probe pairs in
// [lo, hi] (uniform plus near-diagonal refinements) and checks the Lipschitz
// and Holder-1/2 inequalities and any declared sup bounds. A passing report
// never proves the claims; a failing one carries a concrete witness pair.
struct ValidationReport {
  bool lipschitz_ok = true;
  bool holder_ok = true;
  bool bounds_ok = true;
  double worst_lipschitz_ratio = 0.0;  // max |b(x)-b(y)| / (C_b |x-y|)
  double worst_holder_ratio = 0.0;     // max |sigma(x)-sigma(y)| / (C_sigma sqrt|x-y|)
  double lipschitz_witness[2] = {0.0, 0.0};
  double holder_witness[2] = {0.0, 0.0};
  std::vector<std::string> messages;

  bool ok() const { return lipschitz_ok && holder_ok && bounds_ok; }
};

ValidationReport validate_coefficients(const CoefficientPair& c, double lo, double hi,
                                       int probes = 4096, std::uint64_t seed = 1);

}  // namespace pathwise
