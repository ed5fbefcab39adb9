#include "jamiton/csv.hpp"

#include <array>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "jamiton/errors.hpp"

namespace jamiton::io {

namespace {

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  return out;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path.string());
  return in;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

void expect_header(std::istream& in, const std::string& header, const fs::path& path) {
  std::string line;
  if (!std::getline(in, line) || line != header) {
    throw ConfigError(path.string() + ": expected header '" + header + "'");
  }
}

}  // namespace

std::string format_double(double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

double parse_double(const std::string& text, const std::string& what) {
  double v = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last || text.empty()) {
    throw ConfigError(what + ": '" + text + "' is not a number");
  }
  return v;
}

void write_profile_csv(const fs::path& path, const solver::JamitonSolution& sol) {
  auto out = open_out(path);
  const double tau = sol.params.tau;
  out << "eta_mps,x_m,u_mps,rho_vpm,sonic_flag,shock_flag\n";
  auto row = [&](double eta, double u, double rho, int sonic, int shock) {
    out << format_double(eta) << ',' << format_double(eta * tau) << ',' << format_double(u) << ','
        << format_double(rho) << ',' << sonic << ',' << shock << '\n';
  };
  const double rho_top = sol.kind == solver::WaveKind::periodic
                             ? solver::frame_density(sol.frame, sol.u_top)
                             : sol.far.rho;
  row(0.0, sol.u_top, rho_top, 0, 1);
  for (std::size_t i = 0; i < sol.profile.size(); ++i) {
    const auto& p = sol.profile[i];
    const int sonic = p.eta == sol.sonic_eta ? 1 : 0;
    row(p.eta, p.u, p.rho, sonic, i == 0 ? 1 : 0);
  }
}

void write_snapshot_csv(const fs::path& path, const sim::FieldSnapshot& snap) {
  auto out = open_out(path);
  out << "t_s,x_m,u_mps,rho_vpm\n";
  const std::string t = format_double(snap.t);
  for (std::size_t i = 0; i < snap.x.size(); ++i) {
    out << t << ',' << format_double(snap.x[i]) << ',' << format_double(snap.u[i]) << ','
        << format_double(snap.rho[i]) << '\n';
  }
}

sim::FieldSnapshot read_snapshot_csv(const fs::path& path, double ring_length) {
  auto in = open_in(path);
  expect_header(in, "t_s,x_m,u_mps,rho_vpm", path);
  sim::FieldSnapshot snap;
  snap.ring_length = ring_length;
  std::string line;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split(line, ',');
    const std::string where = path.string() + ":" + std::to_string(lineno);
    if (f.size() != 4) throw ConfigError(where + ": expected 4 fields");
    snap.t = parse_double(f[0], where);
    snap.x.push_back(parse_double(f[1], where));
    snap.u.push_back(parse_double(f[2], where));
    snap.rho.push_back(parse_double(f[3], where));
  }
  return snap;
}

void write_trajectories_csv(const fs::path& path, std::span<const analysis::Trajectory> trajs) {
  auto out = open_out(path);
  out << "vehicle_id,t_s,x_m,u_mps\n";
  for (const auto& tr : trajs) {
    for (const auto& s : tr.samples) {
      out << tr.vehicle_id << ',' << format_double(s.t) << ',' << format_double(s.x) << ','
          << format_double(s.u) << '\n';
    }
  }
}

SnapshotWriter::SnapshotWriter(fs::path dir) : dir_(std::move(dir)) {
  fs::create_directories(dir_);
  auto index = open_out(dir_ / "index.csv");
  index << "index,t_s,file\n";
}

void SnapshotWriter::operator()(const sim::FieldSnapshot& snap) {
  char name[32];
  std::snprintf(name, sizeof name, "snap_%06zu.csv", count_);
  write_snapshot_csv(dir_ / name, snap);
  std::ofstream index(dir_ / "index.csv", std::ios::app);
  index << count_ << ',' << format_double(snap.t) << ',' << name << '\n';
  ++count_;
}

namespace {

struct IndexEntry {
  double t;
  std::string file;
};

std::vector<IndexEntry> read_index(const fs::path& dir) {
  const fs::path path = dir / "index.csv";
  if (!fs::exists(path)) throw ConfigError("no snapshot index at " + path.string());
  auto in = open_in(path);
  expect_header(in, "index,t_s,file", path);
  std::vector<IndexEntry> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 3) throw ConfigError(path.string() + ": malformed line '" + line + "'");
    out.push_back({parse_double(f[1], path.string()), f[2]});
  }
  return out;
}

}  // namespace

std::vector<double> read_snapshot_times(const fs::path& dir) {
  std::vector<double> out;
  for (const auto& e : read_index(dir)) out.push_back(e.t);
  return out;
}

std::vector<sim::FieldSnapshot> read_snapshot_series(const fs::path& dir, double ring_length,
                                                     std::size_t last_count) {
  const auto index = read_index(dir);
  const std::size_t first =
      last_count == 0 || last_count >= index.size() ? 0 : index.size() - last_count;
  std::vector<sim::FieldSnapshot> out;
  for (std::size_t i = first; i < index.size(); ++i) {
    out.push_back(read_snapshot_csv(dir / index[i].file, ring_length));
  }
  return out;
}

}  // namespace jamiton::io
