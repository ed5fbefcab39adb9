#pragma once

// Minimal static SVG charts. The CSV files stay authoritative; these are
// quick looks.

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "jamiton/particles.hpp"

namespace jamiton::io {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

void write_line_plot(const std::filesystem::path& path, const std::string& title,
                     const std::string& x_label, const std::string& y_label,
                     std::span<const Series> series);

/// Space-time density map: one row per snapshot, colour by density.
void write_heatmap(const std::filesystem::path& path, const std::string& title,
                   std::span<const sim::FieldSnapshot> snapshots, double rho_max);

}  // namespace jamiton::io
