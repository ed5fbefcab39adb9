#include "jamiton/cli.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cmath>
#include <deque>
#include <fstream>
#include <future>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "jamiton/analysis.hpp"
#include "jamiton/csv.hpp"
#include "jamiton/errors.hpp"
#include "jamiton/scenario.hpp"
#include "jamiton/solver.hpp"
#include "jamiton/svg.hpp"

namespace jamiton::io {

namespace {

struct Context {
  Scenario scenario;
  fs::path out_dir;
  bool svg = false;
  std::ostream& out;
  std::ostream& err;
};

std::ofstream open_text(const fs::path& path) {
  fs::create_directories(path.parent_path());
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write " + path.string());
  return f;
}

std::string fmt(double v) { return format_double(v); }

void write_sidecar(const Context& ctx, double wall_seconds) {
  auto f = open_text(ctx.out_dir / "scenario.meta");
  std::ostringstream wall;
  wall << std::setprecision(3) << wall_seconds;
  f << "# jamiton " << JAMITON_VERSION << "\n# wall_time_s " << wall.str() << "\n";
  f << format_scenario(ctx.scenario);
}

Series profile_series(const solver::JamitonSolution& sol, const std::string& label) {
  Series s{label, {}, {}};
  s.x.push_back(0.0);
  s.y.push_back(sol.kind == solver::WaveKind::periodic ? solver::frame_density(sol.frame, sol.u_top)
                                                       : sol.far.rho);
  for (const auto& p : sol.profile) {
    s.x.push_back(p.eta * sol.params.tau);
    s.y.push_back(p.rho);
  }
  return s;
}

// --- solve ------------------------------------------------------------------

struct CaseResult {
  bool exists = false;
  std::string note;
  solver::JamitonSolution sol;
};

int cmd_solve(Context& ctx) {
  const Scenario& sc = ctx.scenario;
  std::vector<std::future<CaseResult>> jobs;
  for (std::size_t k = 0; k < sc.rho_minus.size(); ++k) {
    const fs::path dir = ctx.out_dir / ("case_" + std::to_string(k));
    jobs.push_back(std::async(std::launch::async, [&sc, rho = sc.rho_minus[k], dir, svg = ctx.svg] {
      CaseResult r;
      try {
        r.sol = solver::solitary_jamiton(sc.params, rho);
        r.exists = true;
        write_profile_csv(dir / "profile.csv", r.sol);
        if (svg) {
          const Series s = profile_series(r.sol, "");
          write_line_plot(dir / "profile.svg", "density profile", "x - s t [m]", "rho [veh/m]",
                          std::span(&s, 1));
        }
      } catch (const Error& e) {
        if (e.error_class() != ErrorClass::negative_result) throw;
        r.note = e.what();
      }
      return r;
    }));
  }
  std::vector<CaseResult> results;
  for (auto& j : jobs) results.push_back(j.get());

  auto csv = open_text(ctx.out_dir / "summary.csv");
  const char* header =
      "case,rho_minus_vpm,u_minus_mps,s_mps,m_vps,u_plus_mps,rho_plus_vpm,u_sonic_mps,"
      "rho_sonic_vpm,extent_m,status";
  csv << header << '\n';
  ctx.out << std::left << std::setw(6) << "case" << std::setw(12) << "rho_minus" << std::setw(12)
          << "s" << std::setw(12) << "m" << std::setw(12) << "u_plus" << std::setw(12) << "u_sonic"
          << "status\n";
  bool negative = false;
  for (std::size_t k = 0; k < results.size(); ++k) {
    const auto& r = results[k];
    const double rho = sc.rho_minus[k];
    if (!r.exists) {
      negative = true;
      csv << k << ',' << fmt(rho) << ",nan,nan,nan,nan,nan,nan,nan,nan,no_jamiton\n";
      ctx.out << std::setw(6) << k << std::setw(12) << rho << "no jamiton\n";
      ctx.err << "case " << k << ": " << r.note << '\n';
      continue;
    }
    const auto& s = r.sol;
    csv << k << ',' << fmt(rho) << ',' << fmt(s.far.u) << ',' << fmt(s.frame.s) << ','
        << fmt(s.frame.m) << ',' << fmt(s.post_shock.u) << ',' << fmt(s.post_shock.rho) << ','
        << fmt(s.sonic.u) << ',' << fmt(s.sonic.rho) << ',' << fmt(s.eta_extent() * s.params.tau)
        << ",ok\n";
    ctx.out << std::setw(6) << k << std::setw(12) << rho << std::setw(12) << s.frame.s
            << std::setw(12) << s.frame.m << std::setw(12) << s.post_shock.u << std::setw(12)
            << s.sonic.u << "ok\n";
  }
  return negative ? exit_negative : exit_ok;
}

// --- train ------------------------------------------------------------------

int cmd_train(Context& ctx) {
  const Scenario& sc = ctx.scenario;
  solver::JamitonSolution sol;
  if (sc.wavelength > 0.0) {
    const auto cj = solver::cj_construct(sc.params, sc.rho_minus.front());
    sol = solver::periodic_train(sc.params, cj.frame, sc.wavelength / sc.params.tau);
  } else {
    sol = analysis::matched_train(sc.params, sc.ring_length, sc.mean_density,
                                  std::max<std::size_t>(sc.waves, 1));
  }
  write_profile_csv(ctx.out_dir / "profile.csv", sol);
  auto f = open_text(ctx.out_dir / "summary.txt");
  std::ostringstream text;
  text << "s_mps=" << fmt(sol.frame.s) << "\nm_vps=" << fmt(sol.frame.m)
       << "\nu_top_mps=" << fmt(sol.u_top) << "\nu_plus_mps=" << fmt(sol.post_shock.u)
       << "\nrho_plus_vpm=" << fmt(sol.post_shock.rho) << "\nu_sonic_mps=" << fmt(sol.sonic.u)
       << "\nwavelength_m=" << fmt(sol.wavelength_x())
       << "\nmean_density_vpm=" << fmt(sol.mean_density()) << '\n';
  f << text.str();
  ctx.out << text.str();
  if (ctx.svg) {
    const Series s = profile_series(sol, "");
    write_line_plot(ctx.out_dir / "profile.svg", "train period", "x - s t [m]", "rho [veh/m]",
                    std::span(&s, 1));
  }
  return exit_ok;
}

// --- stability --------------------------------------------------------------

int cmd_stability(Context& ctx) {
  const Scenario& sc = ctx.scenario;
  const auto [lo, hi] = model::critical_densities(sc.params);
  std::ostringstream text;
  text << "rho_lo_vpm=" << fmt(lo) << "\nrho_hi_vpm=" << fmt(hi) << '\n';
  for (double r : sc.rho_minus) {
    text << "# rho=" << fmt(r) << (model::is_unstable(sc.params, r) ? " unstable" : " stable")
         << '\n';
  }
  auto f = open_text(ctx.out_dir / "stability.txt");
  f << text.str();
  ctx.out << text.str();
  return exit_ok;
}

// --- sim --------------------------------------------------------------------

std::vector<analysis::DetectedWave> report_waves(Context& ctx,
                                                 const std::deque<sim::FieldSnapshot>& tail) {
  const std::vector<sim::FieldSnapshot> window(tail.begin(), tail.end());
  const auto waves = analysis::detect_jamitons(window, ctx.scenario.threshold);
  auto f = open_text(ctx.out_dir / "waves.csv");
  f << "shock_position_m,measured_speed_mps,amplitude_vpm,width_m,min_speed_mps,merged\n";
  for (const auto& w : waves) {
    f << fmt(w.shock_position) << ',' << fmt(w.measured_speed) << ',' << fmt(w.amplitude) << ','
      << fmt(w.width) << ',' << fmt(w.min_speed) << ',' << (w.merged ? 1 : 0) << '\n';
  }
  return waves;
}

sim::FieldSnapshot coarse(const sim::FieldSnapshot& s, std::size_t points) {
  if (s.x.size() <= points) return s;
  sim::FieldSnapshot c;
  c.t = s.t;
  c.ring_length = s.ring_length;
  const std::size_t stride = s.x.size() / points;
  for (std::size_t i = 0; i < s.x.size(); i += stride) {
    c.x.push_back(s.x[i]);
    c.u.push_back(s.u[i]);
    c.rho.push_back(s.rho[i]);
  }
  return c;
}

int cmd_sim(Context& ctx) {
  const Scenario& sc = ctx.scenario;
  const sim::SimConfig cfg = sc.sim_config();
  SnapshotWriter writer(ctx.out_dir / "snapshots");
  std::deque<sim::FieldSnapshot> tail;
  std::vector<sim::FieldSnapshot> thumbnails;
  sim::run(cfg, sc.params, [&](const sim::FieldSnapshot& s) {
    writer(s);
    tail.push_back(s);
    if (tail.size() > sc.compare_window) tail.pop_front();
    if (ctx.svg) thumbnails.push_back(coarse(s, 480));
  });
  const auto waves = report_waves(ctx, tail);
  const auto& last = tail.back();
  const auto [lo, hi] = std::minmax_element(last.rho.begin(), last.rho.end());
  ctx.out << "snapshots=" << writer.count() << "\nfinal_t_s=" << fmt(last.t)
          << "\nfinal_rho_min_vpm=" << fmt(*lo) << "\nfinal_rho_max_vpm=" << fmt(*hi)
          << "\nwaves_count=" << waves.size() << '\n';
  for (const auto& w : waves) {
    ctx.out << "# wave at " << w.shock_position << " m, speed " << w.measured_speed << " m/s\n";
  }
  if (ctx.svg) {
    write_heatmap(ctx.out_dir / "spacetime.svg", "density", thumbnails, sc.params.rho_max);
  }
  return exit_ok;
}

// --- traj -------------------------------------------------------------------

void plot_trajectories(const Context& ctx, std::span<const analysis::Trajectory> trajs) {
  std::vector<Series> series;
  for (const auto& tr : trajs) {
    Series s;
    for (const auto& p : tr.samples) {
      s.x.push_back(p.x);
      s.y.push_back(p.t);
    }
    series.push_back(std::move(s));
  }
  write_line_plot(ctx.out_dir / "trajectories.svg", "vehicle trajectories", "x [m]", "t [s]",
                  series);
}

Scenario load_sim_meta(const fs::path& dir) {
  if (dir.empty()) throw ConfigError("key 'sim_dir': required (directory written by 'sim')");
  if (!fs::is_directory(dir)) throw ConfigError("key 'sim_dir': no such directory " + dir.string());
  const fs::path meta = dir / "scenario.meta";
  if (!fs::exists(meta)) throw ConfigError("missing " + meta.string());
  return load_scenario(meta);
}

int cmd_traj(Context& ctx) {
  const Scenario& sc = ctx.scenario;
  std::vector<analysis::Trajectory> trajs;
  if (sc.traj_source == "analytic") {
    const double rho = sc.rho_minus.front();
    const auto sol = solver::solitary_jamiton(sc.params, rho);
    // Vehicles one headway apart, all starting upstream of the shock.
    std::vector<double> x0;
    for (std::size_t k = 0; k < sc.tracers; ++k) x0.push_back(-(static_cast<double>(k) + 0.5) / rho);
    trajs = analysis::trajectories_analytic(sol, x0, 0.0, sc.traj_duration, sc.traj_samples);
  } else {
    std::vector<sim::FieldSnapshot> snaps;
    if (!sc.sim_dir.empty()) {
      const Scenario meta = load_sim_meta(sc.sim_dir);
      snaps = read_snapshot_series(fs::path(sc.sim_dir) / "snapshots", meta.ring_length);
    } else {
      sim::SimConfig cfg = sc.sim_config();
      cfg.output_every = sc.traj_dt;
      cfg.snapshot_points = sc.traj_grid;
      const double t_from = cfg.t_end - sc.traj_window;
      sim::run(cfg, sc.params, [&](const sim::FieldSnapshot& s) {
        if (s.t >= t_from - 1e-9) snaps.push_back(s);
      });
    }
    if (snaps.empty()) throw NothingToCompare("no snapshots to trace");
    std::vector<double> seeds;
    const double L = snaps.front().ring_length;
    for (std::size_t k = 0; k < sc.tracers; ++k) {
      seeds.push_back(L * static_cast<double>(k) / static_cast<double>(sc.tracers));
    }
    trajs = analysis::trajectories_sim(snaps, seeds);
  }
  write_trajectories_csv(ctx.out_dir / "trajectories.csv", trajs);
  if (ctx.svg) plot_trajectories(ctx, trajs);
  ctx.out << "tracers=" << trajs.size() << '\n';
  return exit_ok;
}

// --- compare ----------------------------------------------------------------

int cmd_compare(Context& ctx) {
  const Scenario& sc = ctx.scenario;
  const Scenario meta = load_sim_meta(sc.sim_dir);
  const auto snaps = read_snapshot_series(fs::path(sc.sim_dir) / "snapshots", meta.ring_length,
                                          sc.compare_window);
  if (snaps.empty()) throw NothingToCompare("no snapshots in " + sc.sim_dir);
  const auto& last = snaps.back();
  std::size_t waves = sc.waves;
  if (waves == 0) waves = analysis::detect_shocks(last, sc.threshold).size();
  if (waves == 0) throw NothingToCompare("no jamiton in the last snapshot");
  const auto theory =
      analysis::matched_train(meta.params, meta.ring_length, analysis::mean_density(last), waves);

  analysis::CompareOptions opt;
  opt.grid_points = sc.grid_points;
  opt.shock_exclusion = sc.shock_exclusion;
  opt.threshold = sc.threshold;
  const auto rep = analysis::compare_profiles(theory, snaps, opt);
  opt.shock_exclusion = 0.0;
  const auto raw = analysis::compare_fields(
      analysis::sample_solution(theory, meta.ring_length, last.t, sc.grid_points), last, opt);

  std::ostringstream text;
  text << "linf_rel=" << fmt(rep.linf_rel) << "\nl2_rel=" << fmt(rep.l2_rel)
       << "\nspeed_err_rel=" << fmt(rep.speed_err_rel) << "\noffset_m=" << fmt(rep.offset)
       << "\nmeasured_speed_mps=" << fmt(rep.measured_speed)
       << "\ntheory_speed_mps=" << fmt(rep.theory_speed) << "\nwaves_count=" << waves
       << "\nshock_exclusion_m=" << fmt(sc.shock_exclusion)
       << "\nlinf_rel_unexcluded=" << fmt(raw.linf_rel) << "\nl2_rel_unexcluded=" << fmt(raw.l2_rel)
       << '\n';
  auto f = open_text(ctx.out_dir / "compare.txt");
  f << text.str();
  ctx.out << text.str();

  // Aligned profiles: theory at x, simulation at x + offset.
  auto csv = open_text(ctx.out_dir / "compare.csv");
  csv << "x_m,rho_theory_vpm,rho_sim_vpm\n";
  const auto exact = analysis::sample_solution(theory, meta.ring_length, last.t, sc.grid_points);
  Series th{"theory", {}, {}}, sm{"simulation", {}, {}};
  for (std::size_t i = 0; i < exact.x.size(); ++i) {
    const double xs = std::fmod(exact.x[i] + rep.offset + meta.ring_length, meta.ring_length);
    const auto it = std::lower_bound(last.x.begin(), last.x.end(), xs);
    const std::size_t j = std::min<std::size_t>(it - last.x.begin(), last.x.size() - 1);
    csv << fmt(exact.x[i]) << ',' << fmt(exact.rho[i]) << ',' << fmt(last.rho[j]) << '\n';
    th.x.push_back(exact.x[i]);
    th.y.push_back(exact.rho[i]);
    sm.x.push_back(exact.x[i]);
    sm.y.push_back(last.rho[j]);
  }
  if (ctx.svg) {
    const Series both[] = {th, sm};
    write_line_plot(ctx.out_dir / "compare.svg", "matched train vs simulation", "x [m]",
                    "rho [veh/m]", both);
  }
  return exit_ok;
}

// --- sweep ------------------------------------------------------------------

int cmd_sweep(Context& ctx) {
  const Scenario& sc = ctx.scenario;
  std::vector<double> grid;
  for (std::size_t i = 0; i < sc.sweep_points; ++i) {
    grid.push_back(sc.sweep_lo + (sc.sweep_hi - sc.sweep_lo) * static_cast<double>(i) /
                                     static_cast<double>(sc.sweep_points - 1));
  }
  const auto res = solver::sweep_existence(sc.params, grid);
  auto csv = open_text(ctx.out_dir / "sweep.csv");
  csv << "rho_minus_vpm,unstable,exists,s_mps,m_vps,amplitude_mps,rho_plus_vpm\n";
  for (const auto& e : res.entries) {
    csv << fmt(e.rho_minus) << ',' << e.unstable << ',' << e.exists << ',' << fmt(e.s) << ','
        << fmt(e.m) << ',' << fmt(e.amplitude) << ',' << fmt(e.rho_plus) << '\n';
  }
  if (res.band) {
    ctx.out << "band_vpm=" << fmt(res.band->first) << ',' << fmt(res.band->second) << '\n';
  }
  if (res.existence) {
    ctx.out << "existence_vpm=" << fmt(res.existence->first) << ','
            << fmt(res.existence->second) << '\n';
  } else {
    ctx.out << "existence_vpm=none\n";
  }
  if (ctx.svg) {
    Series s{"s", {}, {}};
    for (const auto& e : res.entries) {
      if (!e.exists) continue;
      s.x.push_back(e.rho_minus);
      s.y.push_back(e.s);
    }
    write_line_plot(ctx.out_dir / "sweep.svg", "jamiton speed", "rho_minus [veh/m]", "s [m/s]",
                    std::span(&s, 1));
  }
  return res.existence ? exit_ok : exit_negative;
}

int exit_for(const Error& e) {
  switch (e.error_class()) {
    case ErrorClass::negative_result: return exit_negative;
    case ErrorClass::configuration: return exit_config;
    case ErrorClass::numerical: return exit_numerical;
  }
  return exit_numerical;
}

void write_diagnostics(const fs::path& dir, const std::string& what, const Scenario* sc) {
  try {
    auto f = open_text(dir / "diagnostics.txt");
    f << "# jamiton " << JAMITON_VERSION << "\n# " << what << '\n';
    if (sc) f << format_scenario(*sc);
  } catch (...) {
  }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Traveling traffic waves: exact solutions and ring-road simulations", "jamiton"};
  app.require_subcommand(1, 1);
  std::string preset, config, out_dir;
  double seed_scale = 1.0;
  bool svg = false;
  const char* commands[][2] = {
      {"solve", "solitary jamitons for each rho_minus_vpm"},
      {"train", "periodic jamiton train"},
      {"stability", "critical densities of the unstable band"},
      {"sim", "particle simulation on a ring road"},
      {"traj", "vehicle trajectories (analytic or simulated)"},
      {"compare", "simulation vs matched periodic train"},
      {"sweep", "jamiton existence over a density range"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--preset", preset, "built-in scenario");
    sub->add_option("--config", config, "scenario file (key=value)");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--seed-scale", seed_scale, "particle count multiplier")
        ->check(CLI::PositiveNumber);
    sub->add_flag("--svg", svg, "also write SVG charts");
  }

  std::vector<std::string> rev(args.rbegin(), args.rend() - 1);
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    std::ostringstream so, se;
    const int code = app.exit(e, so, se);
    out << so.str();
    err << se.str();
    return code == 0 ? exit_ok : exit_config;
  }
  const std::string task = app.get_subcommands().front()->get_name();

  Scenario sc;
  fs::path dir;
  try {
    if (!preset.empty() && !config.empty()) {
      throw ConfigError("give either --preset or --config (a config file may set preset=...)");
    }
    if (!config.empty()) {
      sc = load_scenario(config, task);
    } else if (!preset.empty()) {
      sc = preset_scenario(preset);
    }
    sc.task = task;
    if (seed_scale != 1.0) {
      sc.n_particles = static_cast<std::size_t>(std::llround(sc.n_particles * seed_scale));
    }
    dir = !out_dir.empty() ? fs::path(out_dir)
                           : (!sc.output_dir.empty() ? fs::path(sc.output_dir) : fs::path("jamiton-out"));
    sc.output_dir = dir.string();
    validate_scenario(sc);
  } catch (const Error& e) {
    err << e.what() << '\n';
    return exit_for(e);
  }

  Context ctx{sc, dir, svg, out, err};
  const auto start = std::chrono::steady_clock::now();
  int code = exit_ok;
  try {
    fs::create_directories(dir);
    if (task == "solve") code = cmd_solve(ctx);
    else if (task == "train") code = cmd_train(ctx);
    else if (task == "stability") code = cmd_stability(ctx);
    else if (task == "sim") code = cmd_sim(ctx);
    else if (task == "traj") code = cmd_traj(ctx);
    else if (task == "compare") code = cmd_compare(ctx);
    else code = cmd_sweep(ctx);
  } catch (const Error& e) {
    err << e.what() << '\n';
    code = exit_for(e);
    if (code == exit_numerical) write_diagnostics(dir, e.what(), &sc);
  } catch (const fs::filesystem_error& e) {
    err << e.what() << '\n';
    code = exit_config;
  } catch (const std::exception& e) {
    err << e.what() << '\n';
    write_diagnostics(dir, e.what(), &sc);
    code = exit_numerical;
  }
  if (code != exit_config) {
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    try {
      write_sidecar(ctx, wall);
    } catch (const std::exception& e) {
      err << e.what() << '\n';
    }
  }
  return code;
}

int cli_dispatch(int argc, const char* const* argv) {
  std::vector<std::string> args(argv, argv + argc);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace jamiton::io
