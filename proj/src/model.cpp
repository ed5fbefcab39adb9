#include "jamiton/model.hpp"

#include <cmath>
#include <string>

#include "jamiton/errors.hpp"

namespace jamiton::model {

namespace {

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

void require_density(const ModelParams& params, double rho, bool allow_max,
                     const char* what) {
  const bool ok = allow_max ? (rho >= 0.0 && rho <= params.rho_max)
                            : (rho >= 0.0 && rho < params.rho_max);
  if (!ok || !std::isfinite(rho)) {
    throw DomainError(std::string(what) + ": density " + std::to_string(rho) +
                      " outside " + (allow_max ? "[0, rho_max]" : "[0, rho_max)"));
  }
}

}  // namespace

void ModelParams::validate() const {
  if (!positive_finite(beta)) throw DomainError("beta must be positive and finite");
  if (!positive_finite(rho_max)) throw DomainError("rho_max must be positive and finite");
  if (!positive_finite(u0)) throw DomainError("u0 must be positive and finite");
  if (!positive_finite(tau)) throw DomainError("tau must be positive and finite");
}

ModelParams canonical_params() { return ModelParams{10.0, 0.2, 20.0, 5.0}; }

double desired_speed(const ModelParams& params, double rho) {
  require_density(params, rho, true, "desired_speed");
  return params.u0 * (1.0 - rho / params.rho_max);
}

double desired_speed_slope(const ModelParams& params) {
  return -params.u0 / params.rho_max;
}

double pressure(const ModelParams& params, double rho) {
  require_density(params, rho, false, "pressure");
  // beta [rho_max ln(rho_max / (rho_max - rho)) - rho]
  return params.beta * (-params.rho_max * std::log1p(-rho / params.rho_max) - rho);
}

double pressure_slope(const ModelParams& params, double rho) {
  require_density(params, rho, false, "pressure_slope");
  return params.beta * rho / (params.rho_max - rho);
}

double sound_speed(const ModelParams& params, double rho) {
  return std::sqrt(pressure_slope(params, rho));
}

EquilibriumState equilibrium(const ModelParams& params, double rho) {
  return {rho, desired_speed(params, rho)};
}

bool is_unstable(const ModelParams& params, double rho) {
  require_density(params, rho, false, "is_unstable");
  const double kinematic = rho * params.u0 / params.rho_max;
  return kinematic * kinematic > pressure_slope(params, rho);
}

std::pair<double, double> critical_densities(const ModelParams& params) {
  // (u0/rho_max)^2 rho (rho_max - rho) = beta  <=>  rho^2 - rho_max rho + K = 0
  const double r = params.rho_max;
  const double k = params.beta * r * r / (params.u0 * params.u0);
  const double disc = 0.25 * r * r - k;
  if (!(disc > 0.0)) {
    throw NoUnstableBand("uniform flow is stable at every density (beta rho_max^2 / u0^2 = " +
                         std::to_string(k / (r * r)) + " >= 1/4)");
  }
  const double hi = 0.5 * r + std::sqrt(disc);
  const double lo = k / hi;
  return {lo, hi};
}

}  // namespace jamiton::model
