#pragma once

// Mesh-free Lagrangian particle discretisation of the traffic model on a
// ring road. Each particle carries a fixed share mu of the vehicles, so mass
// is conserved by construction; particles move with the local flow and feel
// the pressure, artificial-viscosity and relaxation forces.

#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include "jamiton/model.hpp"

namespace jamiton::sim {

using model::ModelParams;

enum class DensityEstimator { spacing, kernel };

struct SimConfig {
  std::size_t n_particles = 2500;
  double ring_length = 230.0;   ///< [m]
  double mu = 0.0;              ///< vehicles per particle
  double cfl = 0.5;
  double visc_coeff = 1.0;      ///< quadratic artificial-viscosity coefficient C
  double visc_linear = 1.0;    ///< linear (sound-speed) artificial-viscosity coefficient
  int mode = 1;                 ///< perturbation mode count k
  double amplitude = 0.01;      ///< relative density perturbation a
  double t_end = 0.0;           ///< [s]
  double output_every = 1.0;    ///< [s]
  /// Snapshots are resampled to this many uniform points; 0 keeps particle positions.
  std::size_t snapshot_points = 0;

  double base_density() const { return static_cast<double>(n_particles) * mu / ring_length; }
  double vehicles() const { return static_cast<double>(n_particles) * mu; }
  /// Throws ConfigError naming the violated constraint.
  void validate(const ModelParams& params) const;

  bool operator==(const SimConfig&) const = default;
};

/// Config for a ring of given length and mean density.
SimConfig ring_config(std::size_t n_particles, double ring_length, double base_density);

struct ParticleState {
  double t = 0.0;
  double ring_length = 0.0;
  double mu = 0.0;
  /// Positions in [0, ring_length). Index order is the cyclic order along the
  /// road; the seam where positions wrap moves as particles advance.
  std::vector<double> x;
  std::vector<double> u;

  std::size_t size() const { return x.size(); }
  double total_mass() const { return static_cast<double>(x.size()) * mu; }
};

/// Eulerian sampling of one instant, ordered by increasing x in [0, L).
struct FieldSnapshot {
  double t = 0.0;
  double ring_length = 0.0;
  std::vector<double> x;
  std::vector<double> rho;
  std::vector<double> u;
};

ParticleState init_uniform_perturbed(const SimConfig& config, const ModelParams& params);

/// Gap from particle i to the next one along the road, wrap-around included.
double spacing_ahead(const ParticleState& state, std::size_t i);

/// Centred-spacing estimate rho_i = 2 mu / (x_{i+1} - x_{i-1}), or a cubic
/// spline kernel sum as a cross-check.
std::vector<double> density_estimate(const ParticleState& state,
                                     DensityEstimator estimator = DensityEstimator::spacing);

/// Lagrangian acceleration Du/Dt of every particle.
std::vector<double> accel(const ParticleState& state, const ModelParams& params,
                          const SimConfig& config);

/// CFL-limited time step for the current state.
double stable_dt(const ParticleState& state, const ModelParams& params, const SimConfig& config);

/// One two-stage SSP Runge-Kutta step of size min(stable_dt, dt_limit).
ParticleState step(const ParticleState& state, const ModelParams& params,
                   const SimConfig& config,
                   double dt_limit = std::numeric_limits<double>::infinity());

FieldSnapshot snapshot(const ParticleState& state, std::size_t resample_points = 0);

/// Integrates to config.t_end, handing a snapshot to sink at t = 0 and every
/// output_every seconds (and at t_end). Deterministic for a given config.
void run(const SimConfig& config, const ModelParams& params,
         const std::function<void(const FieldSnapshot&)>& sink);

/// Same as above but also starts from an explicit state.
void run_from(ParticleState state, const SimConfig& config, const ModelParams& params,
              const std::function<void(const FieldSnapshot&)>& sink);

std::vector<FieldSnapshot> run(const SimConfig& config, const ModelParams& params);

/// max(rho) - min(rho) of a field.
double density_range(const std::vector<double>& rho);

}  // namespace jamiton::sim
