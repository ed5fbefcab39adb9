// Acceptance run: one PASS/FAIL line per criterion, measured values alongside.
// The ring simulations make this take roughly twenty minutes on one core.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "jamiton/analysis.hpp"
#include "jamiton/cli.hpp"
#include "jamiton/errors.hpp"
#include "jamiton/particles.hpp"
#include "jamiton/solver.hpp"
#include "oracles.hpp"

using namespace jamiton;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void report(const char* name, bool ok, const std::string& detail) {
  if (!ok) ++failures;
  std::printf("%s %-22s %s\n", ok ? "PASS" : "FAIL", name, detail.c_str());
  std::fflush(stdout);
}

template <class... A>
std::string fmt(const char* f, A... a) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, a...);
  return buf;
}

// Relative momentum-flux mismatch across the shock of a wave.
double rh_residual(const solver::JamitonSolution& w) {
  const double a = solver::momentum_flux(w.params, w.frame, w.u_top);
  const double b = solver::momentum_flux(w.params, w.frame, w.post_shock.u);
  return std::abs(a - b) / std::max(std::abs(a), std::abs(b));
}

bool lax_ok(const solver::JamitonSolution& w) {
  const auto& p = w.params;
  const double rho_pre = solver::frame_density(w.frame, w.u_top);
  const double rho_post = solver::frame_density(w.frame, w.post_shock.u);
  return (w.u_top - w.frame.s) - model::sound_speed(p, rho_pre) > 0 &&
         model::sound_speed(p, rho_post) - (w.post_shock.u - w.frame.s) > 0;
}

void fig1() {
  const auto p = model::canonical_params();
  bool ok = true;
  std::string detail;
  for (int k = 1; k <= 5; ++k) {
    const double rho = 0.1 * k * p.rho_max;
    const auto t0 = Clock::now();
    const auto sol = solver::solitary_jamiton(p, rho);
    const double wall = seconds_since(t0);
    const double rh = rh_residual(sol);
    const double n = std::abs(solver::wave_numerator(p, sol.frame, sol.sonic.u)) / (p.u0 * p.u0);
    const double d = std::abs(solver::wave_denominator(p, sol.frame, sol.sonic.u)) / (p.u0 * p.u0);
    const double ret = std::abs(sol.profile.back().rho - rho);
    // Single jump: the smooth branch is strictly monotone, so the shock is the only jump.
    bool monotone = true;
    for (std::size_t i = 1; i < sol.profile.size(); ++i)
      monotone = monotone && sol.profile[i].rho < sol.profile[i - 1].rho;
    const bool sonic_inside = sol.sonic_eta > 0 && sol.sonic_eta < sol.eta_extent();
    const bool case_ok = rh < 1e-10 && n < 1e-10 && d < 1e-10 && ret < 1e-3 * p.rho_max &&
                         monotone && sonic_inside && lax_ok(sol) && wall < 1.0;
    ok = ok && case_ok;
    detail += fmt("[%.1f s=%.5g rh=%.1e cj=%.1e ret=%.1e %.2fs] ", 0.1 * k, sol.frame.s, rh,
                  std::max(n, d), ret / p.rho_max, wall);
  }
  report("fig1-profiles", ok, detail);
}

void oracle_equivalence() {
  const auto p = model::canonical_params();
  const double rho = 0.35 * p.rho_max;
  const auto cj = solver::cj_construct(p, rho);
  const auto g = oracle::grid_oracle(p, rho);
  const double ds = std::abs(cj.frame.s - g.s) / p.u0;
  const double dm = std::abs(cj.frame.m - g.m) / p.u0;
  report("oracle-equivalence", ds < 1e-6 && dm < 1e-6,
         fmt("s=%.10f grid=%.10f |ds|/U=%.1e |dm|/U=%.1e", cj.frame.s, g.s, ds, dm));
}

void fig3() {
  const auto p = model::canonical_params();
  const auto t0 = Clock::now();
  const auto sol = solver::solitary_jamiton(p, 0.35 * p.rho_max);
  std::vector<double> x0;
  for (int k = 0; k < 20; ++k) x0.push_back(-(k + 0.5) / sol.far.rho);
  const auto trajs = analysis::trajectories_analytic(sol, x0, 0.0, 60.0, 400);
  const double wall = seconds_since(t0);
  const double u_post = solver::rh_jump(p, sol.frame, sol.far.u).u_post;
  bool ok = true;
  double worst_drop = 0;
  int total_drops = 0;
  for (const auto& tr : trajs) {
    const auto& s = tr.samples;
    int drops = 0;
    for (std::size_t i = 1; i < s.size(); ++i) {
      if (s[i].t == s[i - 1].t) {
        ++drops;
        worst_drop = std::max(worst_drop, std::abs((s[i - 1].u - s[i].u) - (sol.far.u - u_post)));
      } else if (drops > 0 && s[i].u < s[i - 1].u) {
        ok = false;
      }
    }
    ok = ok && drops == 1;
    total_drops += drops;
  }
  bool ordered = true;
  for (std::size_t v = 0; v + 1 < trajs.size(); ++v) {
    const auto& a = trajs[v].samples;
    const auto& b = trajs[v + 1].samples;
    std::size_t j = 0;
    for (const auto& s : a) {
      while (j + 1 < b.size() && b[j + 1].t <= s.t) ++j;
      if (b[j].t == s.t && !(s.x > b[j].x)) ordered = false;
    }
  }
  ok = ok && ordered && worst_drop < 1e-8 * p.u0 && wall < 1.0;
  report("fig3-trajectories", ok,
         fmt("tracers=%zu drops=%d drop_err/U=%.1e ordered=%d %.2fs", trajs.size(), total_drops,
             worst_drop / p.u0, ordered ? 1 : 0, wall));
}

void stability() {
  const auto p = model::canonical_params();
  bool ok = true;
  std::string detail;
  const auto t0 = Clock::now();
  for (double rho : {0.002, 0.02, 0.19, 0.198}) {
    auto c = sim::ring_config(2500, 100.0, rho);
    c.amplitude = 0.01;
    c.t_end = 100 * p.tau;
    c.output_every = c.t_end;
    double r0 = 0, r1 = 0;
    try {
      sim::run(c, p, [&](const sim::FieldSnapshot& s) {
        (s.t == 0.0 ? r0 : r1) = sim::density_range(s.rho);
      });
    } catch (const Error& e) {
      ok = false;
      detail += fmt("[%g failed: %s] ", rho, e.what());
      continue;
    }
    const bool grew = r1 > r0;
    ok = ok && grew == model::is_unstable(p, rho);
    detail += fmt("[%g range %.2e->%.2e %s] ", rho, r0, r1, grew ? "grows" : "decays");
  }
  detail += fmt("%.0fs", seconds_since(t0));
  report("stability-band", ok, detail);
}

struct RingResult {
  analysis::ComparisonReport excluded, raw;
  double wall = 0;
  bool ok = false;
  std::string error;
};

// Sugiyama ring, mode-1 perturbation, compared with the matched train over
// the trailing 20 s of a 200 s run.
RingResult ring_run(std::size_t n) {
  const auto p = model::canonical_params();
  const double L = 230.0, rho0 = 22.0 / L;
  auto c = sim::ring_config(n, L, rho0);
  c.amplitude = 0.01;
  c.t_end = 200.0;
  c.output_every = 1.0;
  RingResult out;
  const auto t0 = Clock::now();
  std::deque<sim::FieldSnapshot> tail;
  try {
    sim::run(c, p, [&](const sim::FieldSnapshot& s) {
      tail.push_back(s);
      if (tail.size() > 21) tail.pop_front();
    });
    const std::vector<sim::FieldSnapshot> snaps(tail.begin(), tail.end());
    const auto waves = analysis::detect_shocks(snaps.back());
    const auto theory = analysis::matched_train(p, L, analysis::mean_density(snaps.back()),
                                                std::max<std::size_t>(waves.size(), 1));
    analysis::CompareOptions o;
    o.shock_exclusion = 1.0;
    out.excluded = analysis::compare_profiles(theory, snaps, o);
    o.shock_exclusion = 0.0;
    out.raw = analysis::compare_profiles(theory, snaps, o);
    out.ok = true;
  } catch (const Error& e) {
    out.error = e.what();
  }
  out.wall = seconds_since(t0);
  return out;
}

void fig2_and_convergence() {
  std::vector<RingResult> runs;
  std::string conv;
  for (std::size_t n : {2500u, 5000u, 10000u}) {
    runs.push_back(ring_run(n));
    const auto& r = runs.back();
    if (r.ok) {
      conv += fmt("[n=%zu linf=%.5f l2=%.5f speed=%.3f%% unexcl_linf=%.4f %.0fs] ", n,
                  r.excluded.linf_rel, r.excluded.l2_rel, 100 * r.excluded.speed_err_rel,
                  r.raw.linf_rel, r.wall);
    } else {
      conv += fmt("[n=%zu failed: %s] ", n, r.error.c_str());
    }
  }
  const auto& big = runs.back();
  report("fig2-ring-train",
         big.ok && big.excluded.wave_count >= 1 && big.excluded.linf_rel < 0.05 &&
             big.excluded.speed_err_rel < 0.02,
         big.ok ? fmt("n=10000 waves=%zu linf_rel=%.5f (1 m shock exclusion; %.4f without) "
                      "l2_rel=%.5f speed %.5f vs %.5f m/s err=%.3f%% %.0fs",
                      big.excluded.wave_count, big.excluded.linf_rel, big.raw.linf_rel,
                      big.excluded.l2_rel, big.excluded.measured_speed, big.excluded.theory_speed,
                      100 * big.excluded.speed_err_rel, big.wall)
                : big.error);
  bool mono = runs[0].ok && runs[1].ok && runs[2].ok &&
              runs[1].excluded.linf_rel < runs[0].excluded.linf_rel &&
              runs[2].excluded.linf_rel < runs[1].excluded.linf_rel;
  report("convergence", mono, conv);
}

std::string slurp(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

void invariants() {
  const auto p = model::canonical_params();
  std::string detail;
  bool ok = true;

  // Exact waves: first integral, RH, Lax, CJ residuals over the band.
  double worst_fi = 0, worst_rh = 0, worst_cj = 0;
  bool lax = true, mono = true;
  for (int k = 1; k <= 19; ++k) {
    const double rho = 0.05 * k * p.rho_max;
    if (!model::is_unstable(p, rho)) continue;
    const auto sol = solver::solitary_jamiton(p, rho);
    for (const auto& s : sol.profile)
      worst_fi = std::max(worst_fi, std::abs(s.rho * (s.u - sol.frame.s) - sol.frame.m) / sol.frame.m);
    for (std::size_t i = 1; i < sol.profile.size(); ++i)
      mono = mono && sol.profile[i].u > sol.profile[i - 1].u;
    worst_rh = std::max(worst_rh, rh_residual(sol));
    worst_cj = std::max({worst_cj, std::abs(solver::wave_numerator(p, sol.frame, sol.sonic.u)),
                         std::abs(solver::wave_denominator(p, sol.frame, sol.sonic.u))}) ;
    lax = lax && lax_ok(sol);
  }
  const auto cj = solver::cj_construct(p, 22.0 / 230.0);
  const auto train = solver::periodic_train(p, cj.frame, 40.0);
  worst_rh = std::max(worst_rh, rh_residual(train));
  lax = lax && lax_ok(train);
  worst_cj /= p.u0 * p.u0;
  ok = worst_fi < 1e-12 && worst_rh < 1e-10 && worst_cj < 1e-10 && lax && mono;
  detail += fmt("first_integral=%.1e rh=%.1e cj=%.1e lax=%d monotone=%d ", worst_fi, worst_rh,
                worst_cj, lax ? 1 : 0, mono ? 1 : 0);

  // Particles: exact mass, quadrature mass, equilibrium fixed point.
  auto c = sim::ring_config(2500, 230.0, 22.0 / 230.0);
  c.amplitude = 0.05;
  auto st = sim::init_uniform_perturbed(c, p);
  const double m0 = st.total_mass();
  bool mass_exact = true;
  for (int k = 0; k < 2000; ++k) {
    st = sim::step(st, p, c);
    mass_exact = mass_exact && st.total_mass() == m0;
  }
  const auto snap = sim::snapshot(st);
  const double quad = analysis::mean_density(snap) * snap.ring_length;
  const double quad_err = std::abs(quad - m0) / m0;
  // Fixed point on both stable sides of the band (rounding noise grows inside it).
  double drift = 0;
  for (double rho : {0.002, 0.198}) {
    auto eq = sim::ring_config(2500, 100.0, rho);
    eq.amplitude = 0.0;
    auto es = sim::init_uniform_perturbed(eq, p);
    for (int k = 0; k < 10000; ++k) es = sim::step(es, p, eq);
    for (double u : es.u) drift = std::max(drift, std::abs(u - model::desired_speed(p, rho)));
  }
  ok = ok && mass_exact && quad_err < 1e-3 && drift < 1e-11 * p.u0;
  detail += fmt("mass_exact=%d quad_mass=%.1e eq_drift/U=%.1e ", mass_exact ? 1 : 0, quad_err,
                drift / p.u0);

  // Determinism: two CLI runs of the same scenario give identical bytes.
  const fs::path root = fs::temp_directory_path() / "jamiton-acceptance";
  fs::remove_all(root);
  fs::create_directories(root);
  {
    std::ofstream cfg(root / "ring.cfg");
    cfg << "preset=sugiyama-ring\nt_end_s=20\n";
  }
  std::ostringstream out, err;
  bool same = true;
  for (const char* d : {"a", "b"}) {
    const int code = io::run_cli({"jamiton", "sim", "--config", (root / "ring.cfg").string(), "--out",
                                  (root / d).string()},
                                 out, err);
    same = same && code == 0;
  }
  std::size_t files = 0;
  for (const auto& e : fs::recursive_directory_iterator(root / "a")) {
    if (!e.is_regular_file() || e.path().filename() == "scenario.meta") continue;
    ++files;
    same = same && slurp(e.path()) == slurp(root / "b" / fs::relative(e.path(), root / "a"));
  }
  fs::remove_all(root);
  ok = ok && same && files > 1;
  detail += fmt("deterministic=%d (%zu files)", same ? 1 : 0, files);
  report("invariant-suite", ok, detail);
}

}  // namespace

int main() {
  auto guard = [](const char* name, void (*f)()) {
    try {
      f();
    } catch (const std::exception& e) {
      report(name, false, std::string("error: ") + e.what());
    }
  };
  guard("fig1-profiles", fig1);
  guard("oracle-equivalence", oracle_equivalence);
  guard("fig3-trajectories", fig3);
  guard("invariant-suite", invariants);
  guard("stability-band", stability);
  guard("fig2-ring-train", fig2_and_convergence);
  std::printf("%s: %d failing\n", failures ? "FAILED" : "ALL PASS", failures);
  return failures ? 1 : 0;
}
