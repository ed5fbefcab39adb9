#pragma once

// Plot-ready CSV emission and the snapshot directory format.

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "jamiton/analysis.hpp"
#include "jamiton/particles.hpp"
#include "jamiton/solver.hpp"

namespace jamiton::io {

namespace fs = std::filesystem;

/// Shortest text that reads back to the same double.
std::string format_double(double v);

/// Parses a whole field as a double; throws ConfigError otherwise.
double parse_double(const std::string& text, const std::string& what);

/// Profile of a wave at t = 0, header eta_mps,x_m,u_mps,rho_vpm,sonic_flag,shock_flag.
/// The shock appears as two rows at eta = 0 (pre- then post-shock state).
void write_profile_csv(const fs::path& path, const solver::JamitonSolution& solution);

void write_snapshot_csv(const fs::path& path, const sim::FieldSnapshot& snap);
sim::FieldSnapshot read_snapshot_csv(const fs::path& path, double ring_length);

void write_trajectories_csv(const fs::path& path, std::span<const analysis::Trajectory> trajectories);

/// Writes snap_NNNNNN.csv files and an index.csv (index,t_s,file) into a directory.
class SnapshotWriter {
public:
  explicit SnapshotWriter(fs::path dir);
  void operator()(const sim::FieldSnapshot& snap);
  std::size_t count() const { return count_; }

private:
  fs::path dir_;
  std::size_t count_ = 0;
};

/// Snapshot times listed in a directory's index, in order.
std::vector<double> read_snapshot_times(const fs::path& dir);

/// Loads the last `last_count` snapshots of a directory (all if 0).
std::vector<sim::FieldSnapshot> read_snapshot_series(const fs::path& dir, double ring_length,
                                                     std::size_t last_count = 0);

}  // namespace jamiton::io
