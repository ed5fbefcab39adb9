#pragma once

// Exact traveling-wave solutions ("jamitons") of the traffic model.
//
// In the frame eta = (x - s t) / tau the mass equation integrates to
// rho (u - s) = m and the momentum equation reduces to the scalar ODE
//
//   du/deta = N(u) / D(u),   N = (u - s)(U(rho) - u),   D = (u - s)^2 - c(rho)^2
//
// with rho = m / (u - s). A self-sustained wave has its frame (s, m) chosen so
// that N and D vanish together at the sonic point; the smooth branch through
// that point is closed by a Rankine-Hugoniot shock.

#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "jamiton/model.hpp"

namespace jamiton::solver {

using model::EquilibriumState;
using model::ModelParams;

struct WaveFrame {
  double s = 0.0;  ///< wave speed [m/s], negative when the wave runs against traffic
  double m = 0.0;  ///< mass flux through the wave rho (u - s) [vehicles/s]
};

struct SonicState {
  double u = 0.0;      ///< speed at the sonic point [m/s]
  double rho = 0.0;    ///< density at the sonic point [vehicles/m]
  double slope = 0.0;  ///< du/deta there (finite by construction)
};

struct FlowState {
  double rho = 0.0;
  double u = 0.0;
};

/// Result of the shock matching. zero_strength marks a pre-shock state sitting
/// on the sonic speed, where the two conservation roots merge.
struct ShockJump {
  double u_post = 0.0;
  bool zero_strength = false;
};

/// One point of the smooth branch. eta carries velocity units (x / tau).
struct ProfileSample {
  double eta = 0.0;
  double u = 0.0;
  double rho = 0.0;
  double dudeta = 0.0;
};

/// Numerical knobs for the profile integration.
struct IntegrationOptions {
  double eps_rel = 1e-6;       ///< sonic escape offset, in units of u0
  double rtol = 1e-10;         ///< relative tolerance of the embedded RK pair
  double far_tol_rel = 1e-6;   ///< stop when |u - u_far| < far_tol_rel * u0
  double eta_span = std::numeric_limits<double>::infinity();  ///< per branch
  double max_sample_gap = 0.05;  ///< densify samples to at most this eta gap
};

/// Where integrate_profile stops.
struct ProfileStop {
  double u_low = 0.0;   ///< decreasing-eta branch ends here (shock attachment)
  double u_high = 0.0;  ///< increasing-eta branch ends within far_tol of this speed
};

// --- wave-frame algebra -------------------------------------------------

/// rho = m / (u - s).
double frame_density(const WaveFrame& frame, double u);

/// Numerator and denominator of the wave ODE as functions of u alone.
double wave_numerator(const ModelParams& params, const WaveFrame& frame, double u);
double wave_denominator(const ModelParams& params, const WaveFrame& frame, double u);
double wave_numerator_slope(const ModelParams& params, const WaveFrame& frame, double u);
double wave_denominator_slope(const ModelParams& params, const WaveFrame& frame, double u);

/// Relative speed w = u - s at which u - s = c(m / w); the unique positive
/// root of rho_max w^3 - m w^2 - beta m = 0.
double sonic_relative_speed(const ModelParams& params, double m);

/// Both roots (low, high) of U(m/(u - s)) = u. Throws NoJamiton if the frame
/// admits no equilibrium.
std::pair<double, double> equilibrium_speeds(const ModelParams& params, const WaveFrame& frame);

/// Wave-frame momentum flux m u + p(m / (u - s)); conserved across shocks.
double momentum_flux(const ModelParams& params, const WaveFrame& frame, double u);

// --- operations ---------------------------------------------------------

/// du/deta. Near a regular sonic point the 0/0 is resolved by a second-order
/// expansion about the point, so the value is finite and smooth there.
double ode_rhs(const ModelParams& params, const WaveFrame& frame, double u);

struct CjConstruction {
  WaveFrame frame;
  SonicState sonic;
  EquilibriumState far;
};

/// Chapman-Jouguet frame for a far state on the desired-speed curve.
CjConstruction cj_construct(const ModelParams& params, double rho_minus);

/// Scalar residual whose zero in s selects the CJ frame (exposed for tests).
double cj_residual(const ModelParams& params, double rho_minus, double s);

ShockJump rh_jump(const ModelParams& params, const WaveFrame& frame, double u_pre);

/// L'Hopital slope N'(u_s) / D'(u_s).
double sonic_slope(const ModelParams& params, const WaveFrame& frame, const SonicState& sonic);

/// Sonic state of a frame (speed, density, slope); no CJ check.
SonicState sonic_state(const ModelParams& params, const WaveFrame& frame);

/// Integrates the wave ODE away from the sonic point in both directions.
/// Samples are ordered by eta with eta = 0 at u_low.
std::vector<ProfileSample> integrate_profile(const ModelParams& params, const WaveFrame& frame,
                                             const SonicState& sonic, const ProfileStop& stop,
                                             const IntegrationOptions& options = {});

/// Independent route: eta(u_b) - eta(u_a) = integral of D/N du by adaptive
/// Gauss-Kronrod quadrature. Both speeds must lie on the smooth branch.
double eta_between(const ModelParams& params, const WaveFrame& frame, double u_a, double u_b);

enum class WaveKind { solitary, periodic };

/// An assembled wave. Road coordinates: x = eta tau + s t.
struct JamitonSolution {
  ModelParams params;
  WaveFrame frame;
  EquilibriumState far;
  FlowState post_shock;
  SonicState sonic;
  double sonic_eta = 0.0;
  WaveKind kind = WaveKind::solitary;
  /// Period in eta for trains; infinity for a solitary wave.
  double wavelength_eta = std::numeric_limits<double>::infinity();
  /// Speed just ahead of the shock: u_far for a solitary wave, u_1 for a train.
  double u_top = 0.0;
  /// Exponential approach rate to the far state beyond the last sample.
  double tail_rate = 0.0;
  /// Smooth branch, eta from 0 (post-shock) upward.
  std::vector<ProfileSample> profile;

  double speed_at(double eta) const;
  double density_at(double eta) const;
  /// Inverse of speed_at on the smooth branch.
  double eta_at_speed(double u) const;
  double eta_at(double x, double t) const { return (x - frame.s * t) / params.tau; }
  double road_x(double eta, double t) const { return eta * params.tau + frame.s * t; }
  double wavelength_x() const { return wavelength_eta * params.tau; }
  /// Average density over one period (trains) computed by quadrature in u.
  double mean_density() const;
  double eta_extent() const { return profile.empty() ? 0.0 : profile.back().eta; }
};

JamitonSolution solitary_jamiton(const ModelParams& params, double rho_minus,
                                 const IntegrationOptions& options = {});

/// Solitary wave of a given CJ frame; the far state is the upper equilibrium.
JamitonSolution solitary_from_frame(const ModelParams& params, const WaveFrame& frame,
                                    const IntegrationOptions& options = {});

JamitonSolution periodic_train(const ModelParams& params, const WaveFrame& frame,
                               double wavelength_eta, const IntegrationOptions& options = {});

/// Periodic train of given wavelength whose mean density equals mean_density
/// (the matched solution for a ring of known mass and wave count).
JamitonSolution periodic_train_for_ring(const ModelParams& params, double mean_density,
                                        double wavelength_eta,
                                        const IntegrationOptions& options = {});

struct SweepEntry {
  double rho_minus = 0.0;
  bool unstable = false;
  bool exists = false;
  double s = 0.0;
  double m = 0.0;
  double amplitude = 0.0;      ///< u_minus - u_plus [m/s]
  double rho_plus = 0.0;
};

struct SweepResult {
  std::vector<SweepEntry> entries;
  std::optional<std::pair<double, double>> band;       ///< linear-stability band
  std::optional<std::pair<double, double>> existence;  ///< smallest/largest rho with a jamiton
};

/// Existence map over a density grid; cases are solved concurrently.
SweepResult sweep_existence(const ModelParams& params, std::span<const double> grid);

}  // namespace jamiton::solver
