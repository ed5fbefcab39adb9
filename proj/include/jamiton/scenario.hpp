#pragma once

// Scenario files: flat key=value text, one entry per line, '#' comments.
// Every numeric key carries its unit as a suffix:
//
//   _m  metres        _s  seconds       _mps   m/s        _vpm  vehicles/m
//   _m2ps2  m^2/s^2   _count  integer   _frac  fraction   _nd   dimensionless
//
// Unknown keys are rejected.

#include <filesystem>
#include <string>
#include <vector>

#include "jamiton/model.hpp"
#include "jamiton/particles.hpp"

namespace jamiton::io {

struct Scenario {
  std::string task = "solve";  ///< solve, train, stability, sim, traj, compare, sweep
  std::string preset;
  std::string output_dir;
  model::ModelParams params = model::canonical_params();

  /// Far-field densities for solve; train and analytic traj use the first.
  std::vector<double> rho_minus;
  /// Train wavelength [m]; 0 means "matched to the ring" (L / waves).
  double wavelength = 0.0;

  // ring and particle run
  double ring_length = 230.0;
  double mean_density = 22.0 / 230.0;
  std::size_t n_particles = 2500;
  double cfl = 0.5;
  double visc_coeff = 1.0;
  double visc_linear = 1.0;
  int mode = 1;
  double amplitude = 0.01;
  double t_end = 300.0;
  double output_every = 1.0;
  std::size_t snapshot_points = 0;

  // trajectories
  std::string traj_source = "analytic";  ///< analytic or sim
  std::size_t tracers = 22;
  double traj_duration = 60.0;     ///< analytic: length of the sampled window [s]
  std::size_t traj_samples = 400;
  double traj_window = 60.0;       ///< sim: trailing window of the run [s]
  double traj_dt = 0.05;           ///< sim: tracer field cadence [s]
  std::size_t traj_grid = 200;     ///< sim: resampled field points

  // comparison
  std::string sim_dir;
  std::size_t waves = 0;  ///< 0: use the detected wave count
  double shock_exclusion = 1.0;
  std::size_t grid_points = 4096;
  double threshold = 5.0;
  std::size_t compare_window = 20;  ///< trailing snapshots for the averaged norms and speed tracking

  // sweep
  double sweep_lo = 0.002;
  double sweep_hi = 0.198;
  std::size_t sweep_points = 50;

  /// Particle-run configuration derived from the ring block.
  sim::SimConfig sim_config() const;

  bool operator==(const Scenario&) const = default;
};

/// Parses scenario text. `source` names the origin in error messages; a
/// non-empty `task` replaces the file's task before validation.
Scenario parse_scenario(const std::string& text, const std::string& source = "<text>",
                        const std::string& task = "");

Scenario load_scenario(const std::filesystem::path& path, const std::string& task = "");

/// Built-in scenarios: paper-fig1, paper-fig3, sugiyama-ring.
Scenario preset_scenario(const std::string& name);
std::vector<std::string> preset_names();

/// Full key=value echo that parse_scenario reads back to an equal Scenario.
std::string format_scenario(const Scenario& scenario);

/// Re-checks the invariants of every block the task uses.
void validate_scenario(const Scenario& scenario);

}  // namespace jamiton::io
