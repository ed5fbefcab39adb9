#include "jamiton/analysis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include <boost/math/tools/toms748_solve.hpp>
#include <boost/numeric/odeint.hpp>

#include "jamiton/errors.hpp"

namespace jamiton::analysis {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double wrap_pos(double x, double L) {
  x = std::fmod(x, L);
  return x < 0.0 ? x + L : x;
}

// Signed cyclic displacement in (-L/2, L/2].
double cyclic_delta(double from, double to, double L) {
  double d = wrap_pos(to - from, L);
  if (d > 0.5 * L) d -= L;
  return d;
}

double interp_periodic(std::span<const double> xs, std::span<const double> ys, double L,
                       double x) {
  x = wrap_pos(x, L);
  const std::size_t n = xs.size();
  const auto it = std::upper_bound(xs.begin(), xs.end(), x);
  const std::size_t hi = static_cast<std::size_t>(it - xs.begin());
  double x0, x1, y0, y1;
  if (hi == 0 || hi == n) {
    x0 = xs[n - 1];
    y0 = ys[n - 1];
    x1 = xs[0] + L;
    y1 = ys[0];
    if (hi == 0) {
      x0 -= L;
      x1 -= L;
    }
  } else {
    x0 = xs[hi - 1];
    y0 = ys[hi - 1];
    x1 = xs[hi];
    y1 = ys[hi];
  }
  return y0 + (x - x0) / (x1 - x0) * (y1 - y0);
}

// Linear interpolation on a uniform periodic grid of spacing L/M starting at 0.
double interp_uniform(const std::vector<double>& v, double L, double x) {
  const std::size_t m = v.size();
  const double pos = wrap_pos(x, L) / L * static_cast<double>(m);
  const double fl = std::floor(pos);
  const std::size_t i = static_cast<std::size_t>(fl) % m;
  const double w = pos - fl;
  return (1.0 - w) * v[i] + w * v[(i + 1) % m];
}

std::vector<double> resample(const FieldSnapshot& s, std::vector<double> FieldSnapshot::*f,
                             std::size_t m) {
  std::vector<double> out(m);
  for (std::size_t k = 0; k < m; ++k) {
    const double x = s.ring_length * static_cast<double>(k) / static_cast<double>(m);
    out[k] = interp_periodic(s.x, s.*f, s.ring_length, x);
  }
  return out;
}

FieldSnapshot grid_snapshot(double t, double L, std::vector<double> rho) {
  FieldSnapshot s;
  s.t = t;
  s.ring_length = L;
  const std::size_t m = rho.size();
  s.x.resize(m);
  for (std::size_t k = 0; k < m; ++k) s.x[k] = L * static_cast<double>(k) / static_cast<double>(m);
  s.rho = std::move(rho);
  s.u.assign(m, 0.0);
  return s;
}

}  // namespace

std::vector<ShockLocation> detect_shocks(const FieldSnapshot& snap, double threshold) {
  const std::size_t n = snap.x.size();
  const double L = snap.ring_length;
  std::vector<ShockLocation> out;
  if (n < 3) return out;

  std::vector<double> drho(n), dx(n);
  double variation = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t k = (j + 1) % n;
    drho[j] = snap.rho[k] - snap.rho[j];
    dx[j] = k == 0 ? snap.x[0] + L - snap.x[j] : snap.x[k] - snap.x[j];
    variation += std::abs(drho[j]);
  }
  const auto [lo_it, hi_it] = std::minmax_element(snap.rho.begin(), snap.rho.end());
  const double range = *hi_it - *lo_it;
  if (!(range > 1e-12 * std::max(1e-300, *hi_it))) return out;
  const double mean_grad = variation / L;

  std::vector<char> cand(n);
  std::size_t count = 0;
  for (std::size_t j = 0; j < n; ++j) {
    cand[j] = drho[j] / dx[j] > threshold * mean_grad;
    count += cand[j];
  }
  if (count == 0 || count == n) return out;

  // Start the cyclic sweep just after a non-candidate interval.
  std::size_t start = 0;
  while (cand[start]) ++start;
  struct Cluster {
    std::size_t first, last;  // interval indices, cyclic, counted from `start`
  };
  std::vector<Cluster> clusters;
  for (std::size_t off = 1; off <= n; ++off) {
    const std::size_t j = (start + off) % n;
    if (!cand[j]) continue;
    if (!clusters.empty() && off - clusters.back().last <= 3) {
      clusters.back().last = off;  // bridge short interruptions inside one front
    } else {
      clusters.push_back({off, off});
    }
  }
  // Clusters that wrap onto the first one are merged.
  if (clusters.size() > 1 && clusters.front().first + n - clusters.back().last <= 3) {
    clusters.front().first = clusters.back().first;
    clusters.front().last += n;
    clusters.pop_back();
  }

  for (const auto& c : clusters) {
    const std::size_t j0 = (start + c.first) % n;
    const std::size_t j1 = (start + c.last) % n;
    const double before = snap.rho[j0];
    const double after = snap.rho[(j1 + 1) % n];
    // A front must carry a sizeable share of the ring's density range.
    if (after - before < 0.1 * range) continue;
    const double mid = 0.5 * (before + after);
    double pos = snap.x[j0];
    for (std::size_t off = c.first; off <= c.last; ++off) {
      const std::size_t j = (start + off) % n;
      const double r0 = snap.rho[j], r1 = snap.rho[(j + 1) % n];
      if (r0 <= mid && mid < r1) {
        pos = wrap_pos(snap.x[j] + (mid - r0) / (r1 - r0) * dx[j], L);
        break;
      }
    }
    out.push_back({pos, before, after});
  }
  std::sort(out.begin(), out.end(),
            [](const ShockLocation& a, const ShockLocation& b) { return a.position < b.position; });
  return out;
}

std::vector<DetectedWave> detect_jamitons(std::span<const FieldSnapshot> snapshots,
                                          double threshold) {
  if (snapshots.empty()) return {};
  struct Track {
    std::vector<double> t, pos;  // pos unwrapped
    double last = 0.0;           // wrapped
    bool alive = true;
    bool merged = false;
  };
  const double L = snapshots.front().ring_length;
  std::vector<Track> tracks;
  for (const auto& s : detect_shocks(snapshots.front(), threshold)) {
    tracks.push_back({{snapshots.front().t}, {s.position}, s.position, true, false});
  }
  for (std::size_t k = 1; k < snapshots.size(); ++k) {
    const auto shocks = detect_shocks(snapshots[k], threshold);
    std::vector<std::size_t> live;
    for (std::size_t i = 0; i < tracks.size(); ++i)
      if (tracks[i].alive) live.push_back(i);
    const bool changed = live.size() != shocks.size();

    struct Pair {
      double dist;
      std::size_t track, shock;
    };
    std::vector<Pair> pairs;
    for (std::size_t i : live)
      for (std::size_t j = 0; j < shocks.size(); ++j)
        pairs.push_back({std::abs(cyclic_delta(tracks[i].last, shocks[j].position, L)), i, j});
    std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) { return a.dist < b.dist; });
    std::vector<char> used_track(tracks.size()), used_shock(shocks.size());
    for (const auto& p : pairs) {
      if (used_track[p.track] || used_shock[p.shock]) continue;
      used_track[p.track] = used_shock[p.shock] = 1;
      Track& tr = tracks[p.track];
      const double d = cyclic_delta(tr.last, shocks[p.shock].position, L);
      tr.t.push_back(snapshots[k].t);
      tr.pos.push_back(tr.pos.back() + d);
      tr.last = shocks[p.shock].position;
      tr.merged = tr.merged || changed;
    }
    for (std::size_t i : live) {
      if (!used_track[i]) {
        tracks[i].alive = false;
        tracks[i].merged = true;
      }
    }
    for (std::size_t j = 0; j < shocks.size(); ++j) {
      if (!used_shock[j]) {
        tracks.push_back({{snapshots[k].t}, {shocks[j].position}, shocks[j].position, true, true});
      }
    }
  }

  const FieldSnapshot& last = snapshots.back();
  std::vector<const Track*> alive;
  for (const auto& tr : tracks)
    if (tr.alive) alive.push_back(&tr);
  std::sort(alive.begin(), alive.end(),
            [](const Track* a, const Track* b) { return a->last < b->last; });

  std::vector<DetectedWave> waves;
  const std::size_t n = last.x.size();
  for (std::size_t w = 0; w < alive.size(); ++w) {
    const Track& tr = *alive[w];
    DetectedWave dw;
    dw.shock_position = tr.last;
    dw.merged = tr.merged;
    if (tr.t.size() >= 2) {
      const double tm = std::accumulate(tr.t.begin(), tr.t.end(), 0.0) / tr.t.size();
      const double pm = std::accumulate(tr.pos.begin(), tr.pos.end(), 0.0) / tr.pos.size();
      double num = 0.0, den = 0.0;
      for (std::size_t i = 0; i < tr.t.size(); ++i) {
        num += (tr.t[i] - tm) * (tr.pos[i] - pm);
        den += (tr.t[i] - tm) * (tr.t[i] - tm);
      }
      dw.measured_speed = den > 0.0 ? num / den : kNaN;
    } else {
      dw.measured_speed = kNaN;
    }
    // The wave's period runs from its shock to the next one downstream.
    const double seg_len =
        alive.size() == 1 ? L : wrap_pos(alive[(w + 1) % alive.size()]->last - tr.last, L);
    const std::size_t first =
        static_cast<std::size_t>(std::upper_bound(last.x.begin(), last.x.end(), tr.last) -
                                 last.x.begin()) % n;
    double peak = -1.0, low = std::numeric_limits<double>::infinity();
    double umin = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> seg;
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t i = (first + k) % n;
      if (wrap_pos(last.x[i] - tr.last, L) >= seg_len) break;
      seg.push_back(i);
      peak = std::max(peak, last.rho[i]);
      low = std::min(low, last.rho[i]);
      umin = std::min(umin, last.u[i]);
    }
    dw.amplitude = seg.empty() ? 0.0 : peak - low;
    dw.min_speed = umin;
    const double recovered = peak - 0.9 * (peak - low);
    bool past_peak = false;
    for (std::size_t i : seg) {
      if (last.rho[i] == peak) past_peak = true;
      if (past_peak && last.rho[i] <= recovered) {
        dw.width = wrap_pos(last.x[i] - tr.last, L);
        break;
      }
    }
    waves.push_back(dw);
  }
  return waves;
}

std::vector<Trajectory> trajectories_analytic(const JamitonSolution& sol,
                                              std::span<const double> initial_positions,
                                              double t0, double t1, std::size_t samples) {
  namespace odeint = boost::numeric::odeint;
  using State = std::array<double, 1>;
  const double tau = sol.params.tau;
  const double s = sol.frame.s;
  const bool periodic = sol.kind == solver::WaveKind::periodic;
  const double lambda = sol.wavelength_eta;
  samples = std::max<std::size_t>(samples, 2);

  // Next shock strictly ahead of eta, and the speed on the current segment
  // extended past it so that each integration leg sees a smooth field.
  auto next_shock = [&](double eta) {
    if (periodic) return lambda * (std::floor(eta / lambda) + 1.0);
    return eta < 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  };
  auto u_top = [&] { return periodic ? sol.u_top : sol.far.u; };

  std::vector<Trajectory> out;
  int id = 0;
  for (double x0 : initial_positions) {
    Trajectory tr;
    tr.vehicle_id = id++;
    double t = t0;
    double eta = sol.eta_at(x0, t0);
    double shock = next_shock(eta);
    std::size_t next_sample = 0;
    auto sample_time = [&](std::size_t j) {
      return t0 + (t1 - t0) * static_cast<double>(j) / static_cast<double>(samples - 1);
    };
    auto speed = [&](double e, double shock_ahead) {
      return e >= shock_ahead ? u_top() : sol.speed_at(e);
    };

    while (next_sample < samples) {
      const double shock_ahead = shock;
      auto rhs = [&](const State& y, State& dydt, double) {
        dydt[0] = (speed(y[0], shock_ahead) - s) / tau;
      };
      auto stepper = odeint::make_dense_output(1e-12, 1e-11, odeint::runge_kutta_dopri5<State>());
      stepper.initialize(State{eta}, t, 1e-3);
      bool crossed = false;
      while (next_sample < samples && !crossed) {
        const auto [ta, tb] = stepper.do_step(rhs);
        const double eb = stepper.current_state()[0];
        double t_end = tb;
        if (eb >= shock_ahead) {
          State tmp;
          auto F = [&](double tt) {
            stepper.calc_state(tt, tmp);
            return tmp[0] - shock_ahead;
          };
          std::uintmax_t iters = 100;
          auto tol = [](double a, double b) { return std::abs(b - a) <= 1e-13 * std::max(1.0, std::abs(b)); };
          const auto br = boost::math::tools::toms748_solve(F, ta, tb, F(ta), F(tb), tol, iters);
          t_end = 0.5 * (br.first + br.second);
          crossed = true;
        }
        State tmp;
        while (next_sample < samples && sample_time(next_sample) <= t_end) {
          const double ts = sample_time(next_sample);
          if (ts < ta) {
            tmp[0] = eta;  // only at the leg start
          } else {
            stepper.calc_state(ts, tmp);
          }
          const double e = std::min(tmp[0], shock_ahead);
          const double u = e >= shock_ahead ? u_top() : sol.speed_at(e);
          tr.samples.push_back({ts, sol.road_x(tmp[0], ts), u});
          ++next_sample;
        }
        if (crossed && t_end <= t1) {
          const double x = sol.road_x(shock_ahead, t_end);
          tr.samples.push_back({t_end, x, u_top()});
          tr.samples.push_back({t_end, x, sol.post_shock.u});
          t = t_end;
          eta = shock_ahead;
          shock = next_shock(eta);
        } else if (crossed) {
          break;
        }
      }
      if (!crossed) break;
    }
    std::stable_sort(tr.samples.begin(), tr.samples.end(),
                     [](const TrajectorySample& a, const TrajectorySample& b) { return a.t < b.t; });
    out.push_back(std::move(tr));
  }
  return out;
}

std::vector<Trajectory> trajectories_sim(std::span<const FieldSnapshot> snaps,
                                         std::span<const double> seeds) {
  if (snaps.size() < 2) throw InsufficientOutputRate("need at least two snapshots");
  const double L = snaps.front().ring_length;
  for (std::size_t k = 0; k + 1 < snaps.size(); ++k) {
    const double dt = snaps[k + 1].t - snaps[k].t;
    double umax = 0.0;
    for (double u : snaps[k].u) umax = std::max(umax, std::abs(u));
    for (double u : snaps[k + 1].u) umax = std::max(umax, std::abs(u));
    const double cell = L / static_cast<double>(std::max(snaps[k].x.size(), snaps[k + 1].x.size()));
    if (!(dt > 0.0) || umax * dt >= cell) {
      throw InsufficientOutputRate("between t=" + std::to_string(snaps[k].t) + " and t=" +
                                   std::to_string(snaps[k + 1].t) + " tracers move " +
                                   std::to_string(umax * dt) + " m, more than one cell of " +
                                   std::to_string(cell) + " m");
    }
  }
  std::vector<Trajectory> out;
  int id = 0;
  for (double x0 : seeds) {
    Trajectory tr;
    tr.vehicle_id = id++;
    double x = x0;
    auto field = [&](std::size_t k, double theta, double pos) {
      const double ua = interp_periodic(snaps[k].x, snaps[k].u, L, pos);
      const double ub = interp_periodic(snaps[k + 1].x, snaps[k + 1].u, L, pos);
      return (1.0 - theta) * ua + theta * ub;
    };
    tr.samples.push_back({snaps[0].t, x, interp_periodic(snaps[0].x, snaps[0].u, L, x)});
    for (std::size_t k = 0; k + 1 < snaps.size(); ++k) {
      const double dt = snaps[k + 1].t - snaps[k].t;
      constexpr int substeps = 2;
      const double h = dt / substeps;
      for (int j = 0; j < substeps; ++j) {
        const double th0 = static_cast<double>(j) / substeps;
        const double th1 = static_cast<double>(j + 1) / substeps;
        const double k1 = field(k, th0, x);
        const double k2 = field(k, th1, x + h * k1);
        x += 0.5 * h * (k1 + k2);
      }
      tr.samples.push_back({snaps[k + 1].t, x, interp_periodic(snaps[k + 1].x, snaps[k + 1].u, L, x)});
    }
    out.push_back(std::move(tr));
  }
  return out;
}

FieldComparison compare_fields(const FieldSnapshot& a, const FieldSnapshot& b,
                               const CompareOptions& opt) {
  const double L = a.ring_length;
  const std::size_t m = opt.grid_points;
  const auto ra = resample(a, &FieldSnapshot::rho, m);
  const auto rb = resample(b, &FieldSnapshot::rho, m);
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / m;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / m;

  // Circular cross-correlation C(k) = sum_i a_i b_{i+k}.
  std::vector<double> corr(m);
  for (std::size_t k = 0; k < m; ++k) {
    double acc = 0.0;
    for (std::size_t i = 0; i < m; ++i) acc += (ra[i] - ma) * (rb[(i + k) % m] - mb);
    corr[k] = acc;
  }
  // Ties between equivalent peaks (trains) resolve to the smallest cyclic shift.
  std::size_t best = 0;
  auto shift_of = [m](std::size_t k) {
    const double d = static_cast<double>(k);
    return d > 0.5 * m ? d - m : d;
  };
  for (std::size_t k = 1; k < m; ++k) {
    const double rel = corr[k] - corr[best];
    const double scale = 1e-12 * std::max(std::abs(corr[k]), std::abs(corr[best]));
    if (rel > scale || (std::abs(rel) <= scale && std::abs(shift_of(k)) < std::abs(shift_of(best)))) {
      best = k;
    }
  }
  const double cm = corr[(best + m - 1) % m], c0 = corr[best], cp = corr[(best + 1) % m];
  const double curv = cm - 2.0 * c0 + cp;
  const double frac = curv < 0.0 ? 0.5 * (cm - cp) / curv : 0.0;
  const double shift = (shift_of(best) + frac) * L / static_cast<double>(m);

  std::vector<double> A(m), B(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double x = L * static_cast<double>(i) / static_cast<double>(m);
    A[i] = interp_uniform(ra, L, x - 0.5 * shift);
    B[i] = interp_uniform(rb, L, x + 0.5 * shift);
  }
  std::vector<char> keep(m, 1);
  if (opt.shock_exclusion > 0.0) {
    std::vector<double> fronts;
    for (const auto* f : {&A, &B}) {
      for (const auto& sh : detect_shocks(grid_snapshot(a.t, L, *f), opt.threshold)) {
        fronts.push_back(sh.position);
      }
    }
    for (std::size_t i = 0; i < m; ++i) {
      const double x = L * static_cast<double>(i) / static_cast<double>(m);
      for (double f : fronts) {
        if (std::abs(cyclic_delta(f, x, L)) <= opt.shock_exclusion) {
          keep[i] = 0;
          break;
        }
      }
    }
  }
  double linf = 0.0, l2 = 0.0, na = 0.0, nb = 0.0, sa = 0.0, sb = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    na = std::max(na, std::abs(A[i]));
    nb = std::max(nb, std::abs(B[i]));
    sa += A[i] * A[i];
    sb += B[i] * B[i];
    if (!keep[i]) continue;
    const double d = A[i] - B[i];
    linf = std::max(linf, std::abs(d));
    l2 += d * d;
  }
  FieldComparison out;
  out.linf_rel = linf / (0.5 * (na + nb));
  out.l2_rel = std::sqrt(l2) / (0.5 * (std::sqrt(sa) + std::sqrt(sb)));
  out.offset = shift;
  return out;
}

FieldSnapshot sample_solution(const JamitonSolution& sol, double L, double t, std::size_t points) {
  FieldSnapshot s;
  s.t = t;
  s.ring_length = L;
  s.x.resize(points);
  s.rho.resize(points);
  s.u.resize(points);
  for (std::size_t k = 0; k < points; ++k) {
    const double x = L * static_cast<double>(k) / static_cast<double>(points);
    const double eta = sol.eta_at(x, t);
    s.x[k] = x;
    s.u[k] = sol.speed_at(eta);
    s.rho[k] = sol.density_at(eta);
  }
  return s;
}

ComparisonReport compare_profiles(const JamitonSolution& theory,
                                  std::span<const FieldSnapshot> snapshots,
                                  const CompareOptions& opt) {
  if (snapshots.empty()) throw NothingToCompare("no snapshots");
  const FieldSnapshot& last = snapshots.back();
  const auto shocks = detect_shocks(last, opt.threshold);
  if (shocks.empty()) throw NothingToCompare("no jamiton detected at t=" + std::to_string(last.t));

  // Norms are averaged over every supplied snapshot that carries a front; a
  // single snapshot's error fluctuates with the particle noise.
  ComparisonReport rep;
  std::size_t used = 0;
  for (const auto& snap : snapshots) {
    if (&snap != &last && detect_shocks(snap, opt.threshold).empty()) continue;
    const FieldSnapshot exact = sample_solution(theory, snap.ring_length, snap.t, opt.grid_points);
    const FieldComparison cmp = compare_fields(exact, snap, opt);
    rep.linf_rel += cmp.linf_rel;
    rep.l2_rel += cmp.l2_rel;
    rep.offset = cmp.offset;
    ++used;
  }
  rep.linf_rel /= static_cast<double>(used);
  rep.l2_rel /= static_cast<double>(used);
  rep.wave_count = shocks.size();
  rep.theory_speed = theory.frame.s;
  rep.measured_speed = kNaN;
  rep.speed_err_rel = kNaN;
  if (snapshots.size() >= 2) {
    const auto waves = detect_jamitons(snapshots, opt.threshold);
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& w : waves) {
      if (std::isfinite(w.measured_speed)) {
        sum += w.measured_speed;
        ++count;
      }
    }
    if (count > 0) {
      rep.measured_speed = sum / static_cast<double>(count);
      rep.speed_err_rel = std::abs(rep.measured_speed - theory.frame.s) / std::abs(theory.frame.s);
    }
  }
  return rep;
}

double mean_density(const FieldSnapshot& s) {
  const std::size_t n = s.x.size();
  double acc = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t k = (j + 1) % n;
    const double dx = k == 0 ? s.x[0] + s.ring_length - s.x[j] : s.x[k] - s.x[j];
    acc += 0.5 * (s.rho[j] + s.rho[k]) * dx;
  }
  return acc / s.ring_length;
}

JamitonSolution matched_train(const model::ModelParams& params, double ring_length,
                              double mean_density, std::size_t waves) {
  if (waves == 0) throw NothingToCompare("no waves to match");
  const double lambda_x = ring_length / static_cast<double>(waves);
  return solver::periodic_train_for_ring(params, mean_density, lambda_x / params.tau);
}

}  // namespace jamiton::analysis
