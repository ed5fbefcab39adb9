#pragma once

// Closures of the second-order traffic model
//
//   rho_t + (rho u)_x = 0
//   u_t + u u_x + p_x / rho = (U(rho) - u) / tau
//
// with Greenshields desired speed U(rho) = u0 (1 - rho/rho_max) and the
// pressure law dp/drho = beta rho / (rho_max - rho). These two functions are
// the only place a different closure would plug in.

#include <utility>

namespace jamiton::model {

/// Physical constants of road and drivers, SI units throughout.
struct ModelParams {
  double beta = 10.0;     ///< pressure coefficient [m^2/s^2]
  double rho_max = 0.2;   ///< jam density [vehicles/m]
  double u0 = 20.0;       ///< free-flow desired speed [m/s]
  double tau = 5.0;       ///< relaxation time [s]

  /// Throws DomainError unless every field is positive and finite.
  void validate() const;

  bool operator==(const ModelParams&) const = default;
};

/// The "paper-fig1" preset: beta = 10 m^2/s^2, rho_max = 0.2 /m, u0 = 20 m/s, tau = 5 s.
ModelParams canonical_params();

/// A uniform flow with u on the desired-speed curve.
struct EquilibriumState {
  double rho = 0.0;
  double u = 0.0;
};

double desired_speed(const ModelParams& params, double rho);

/// Derivative dU/drho (a constant for the linear closure).
double desired_speed_slope(const ModelParams& params);

/// Pressure normalised so that p(0) = 0; diverges logarithmically at rho_max.
double pressure(const ModelParams& params, double rho);

/// dp/drho = beta rho / (rho_max - rho).
double pressure_slope(const ModelParams& params, double rho);

/// c = sqrt(dp/drho).
double sound_speed(const ModelParams& params, double rho);

EquilibriumState equilibrium(const ModelParams& params, double rho);

/// Sub-characteristic test: uniform flow at rho is linearly unstable iff
/// rho |U'(rho)| > c(rho).
bool is_unstable(const ModelParams& params, double rho);

/// Edges (rho_lo, rho_hi) of the unstable density band. Throws NoUnstableBand
/// when uniform flow is stable at every density.
std::pair<double, double> critical_densities(const ModelParams& params);

}  // namespace jamiton::model
