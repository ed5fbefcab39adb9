#pragma once

// Glue between exact waves and particle runs: shock detection and tracking,
// vehicle trajectories through either field, and profile comparison.

#include <cstddef>
#include <span>
#include <vector>

#include "jamiton/particles.hpp"
#include "jamiton/solver.hpp"

namespace jamiton::analysis {

using sim::FieldSnapshot;
using solver::JamitonSolution;

/// Upward density jump (in the direction of traffic) found in one snapshot.
struct ShockLocation {
  double position = 0.0;  ///< [m], in [0, L)
  double rho_before = 0.0;
  double rho_after = 0.0;
};

struct DetectedWave {
  double shock_position = 0.0;  ///< at the last snapshot [m]
  double measured_speed = 0.0;  ///< least-squares slope [m/s]; NaN from a single snapshot
  double amplitude = 0.0;       ///< max - min density over the wave's period [vehicles/m]
  double width = 0.0;           ///< shock to 90% density recovery [m]
  double min_speed = 0.0;       ///< slowest vehicle speed over the wave's period [m/s]
  bool merged = false;          ///< tracking saw waves appear or vanish
};

/// Shocks where the density gradient exceeds threshold times its ring mean.
std::vector<ShockLocation> detect_shocks(const FieldSnapshot& snap, double threshold = 5.0);

std::vector<DetectedWave> detect_jamitons(std::span<const FieldSnapshot> snapshots,
                                          double threshold = 5.0);

struct TrajectorySample {
  double t = 0.0;
  double x = 0.0;
  double u = 0.0;
};

struct Trajectory {
  int vehicle_id = 0;
  std::vector<TrajectorySample> samples;
};

/// Vehicle paths through an exact wave, dx/dt = u((x - s t)/tau). Samples are
/// taken on a uniform grid of `samples` times in [t0, t1]; every shock crossing
/// adds a pre/post pair at the crossing time. Positions are not wrapped.
std::vector<Trajectory> trajectories_analytic(const JamitonSolution& solution,
                                              std::span<const double> initial_positions,
                                              double t0, double t1, std::size_t samples = 400);

/// Tracer paths through a stored snapshot sequence, interpolating u linearly
/// in x and in t. Positions are unwrapped (they keep growing around the ring).
std::vector<Trajectory> trajectories_sim(std::span<const FieldSnapshot> snapshots,
                                         std::span<const double> seeds);

struct CompareOptions {
  std::size_t grid_points = 4096;
  /// Half-width [m] of the zone around each shock left out of the error norms.
  double shock_exclusion = 0.0;
  double threshold = 5.0;
};

struct FieldComparison {
  double linf_rel = 0.0;
  double l2_rel = 0.0;
  double offset = 0.0;  ///< b(x + offset) matches a(x) [m]
};

/// Shock-aligned density comparison of two fields on the same ring. Symmetric:
/// swapping a and b negates the offset and leaves the norms unchanged.
FieldComparison compare_fields(const FieldSnapshot& a, const FieldSnapshot& b,
                               const CompareOptions& options = {});

struct ComparisonReport {
  double linf_rel = 0.0;
  double l2_rel = 0.0;
  double speed_err_rel = 0.0;
  double offset = 0.0;
  double measured_speed = 0.0;
  double theory_speed = 0.0;
  std::size_t wave_count = 0;
};

/// Exact field of a wave sampled at `points` uniform positions of a ring at time t.
FieldSnapshot sample_solution(const JamitonSolution& solution, double ring_length, double t,
                              std::size_t points);

/// Compares a wave with a trailing window of snapshots. The norms are the mean
/// over snapshots that carry a front (the last one always counts), the offset
/// is that of the last snapshot and the speed error uses the waves tracked
/// through the window.
ComparisonReport compare_profiles(const JamitonSolution& theory,
                                  std::span<const FieldSnapshot> snapshots,
                                  const CompareOptions& options = {});

/// Mean density of a field by periodic trapezoid quadrature.
double mean_density(const FieldSnapshot& snap);

/// Periodic train matched to a ring: same mean density, wavelength = L / waves.
JamitonSolution matched_train(const model::ModelParams& params, double ring_length,
                              double mean_density, std::size_t waves);

}  // namespace jamiton::analysis
