#include <doctest.h>

#include <cmath>
#include <vector>

#include "jamiton/errors.hpp"
#include "jamiton/solver.hpp"
#include "oracles.hpp"

using namespace jamiton;
using namespace jamiton::solver;
using namespace oracle;

TEST_SUITE("solver") {

TEST_CASE("CJ frame matches the closed form") {
  const auto p = model::canonical_params();
  for (double frac : {0.05, 0.1, 0.2, 0.3, 0.35, 0.4, 0.5, 0.7, 0.9}) {
    const double rho = frac * p.rho_max;
    const auto cj = cj_construct(p, rho);
    const auto ref = closed_form_cj(p, rho);
    CAPTURE(frac);
    CHECK(std::abs(cj.frame.s - ref.s) < 1e-9 * p.u0);
    CHECK(std::abs(cj.frame.m - ref.m) < 1e-9 * p.u0 * p.rho_max);
    CHECK(std::abs(cj.sonic.u - ref.u_sonic) < 1e-9 * p.u0);
    CHECK(cj.sonic.rho == doctest::Approx(ref.rho_sonic).epsilon(1e-9));
    CHECK(std::abs(wave_numerator(p, cj.frame, cj.sonic.u)) < 1e-10 * p.u0 * p.u0);
    CHECK(std::abs(wave_denominator(p, cj.frame, cj.sonic.u)) < 1e-10 * p.u0 * p.u0);
  }
  const auto ref = closed_form_cj(p, 0.07);
  CHECK(ref.s == doctest::Approx(-3.6101694915).epsilon(1e-9));
}

TEST_CASE("CJ frame agrees with the brute-force grid oracle") {
  const auto p = model::canonical_params();
  const auto cj = cj_construct(p, 0.35 * p.rho_max);
  const auto g = grid_oracle(p, 0.35 * p.rho_max);
  CHECK(std::abs(cj.frame.s - g.s) < 1e-6 * p.u0);
  CHECK(std::abs(cj.frame.m - g.m) < 1e-6 * p.u0);
}

TEST_CASE("no jamiton outside the unstable band") {
  const auto p = model::canonical_params();
  CHECK_THROWS_AS(cj_construct(p, 0.002), NoJamiton);
  CHECK_THROWS_AS(cj_construct(p, 0.198), NoJamiton);
  CHECK_THROWS_AS(solitary_jamiton(p, 0.002), NoJamiton);
}

TEST_CASE("wave-frame algebra against direct formulas") {
  const auto p = model::canonical_params();
  const WaveFrame f{-3.0, 1.2};
  for (double u : {4.0, 6.0, 9.0, 15.0}) {
    CHECK(wave_numerator(p, f, u) == doctest::Approx(N_ref(p, f.s, f.m, u)).epsilon(1e-12));
    CHECK(wave_denominator(p, f, u) == doctest::Approx(D_ref(p, f.s, f.m, u)).epsilon(1e-12));
    const double h = 1e-5;
    const double dn = (wave_numerator(p, f, u + h) - wave_numerator(p, f, u - h)) / (2 * h);
    const double dd = (wave_denominator(p, f, u + h) - wave_denominator(p, f, u - h)) / (2 * h);
    CHECK(wave_numerator_slope(p, f, u) == doctest::Approx(dn).epsilon(1e-7));
    CHECK(wave_denominator_slope(p, f, u) == doctest::Approx(dd).epsilon(1e-7));
  }
  const double w = sonic_relative_speed(p, f.m);
  CHECK(w == doctest::Approx(sonic_w_ref(p, f.m)).epsilon(1e-12));
  CHECK(p.rho_max * w * w * w - f.m * w * w - p.beta * f.m ==
        doctest::Approx(0.0).epsilon(1e-10));
  const auto [lo, hi] = equilibrium_speeds(p, f);
  CHECK(std::abs(N_ref(p, f.s, f.m, lo)) < 1e-10);
  CHECK(std::abs(N_ref(p, f.s, f.m, hi)) < 1e-10);
  CHECK(lo < hi);
}

TEST_CASE("shock jump matches a dense scan of the momentum flux") {
  const auto p = model::canonical_params();
  for (double frac : {0.1, 0.35, 0.5}) {
    const auto cj = cj_construct(p, frac * p.rho_max);
    const auto& f = cj.frame;
    const double u_pre = cj.far.u;
    const auto jump = rh_jump(p, f, u_pre);
    CHECK_FALSE(jump.zero_strength);

    auto h = [&](double u) { return f.m * u + p_ref(p, f.m / (u - f.s)); };
    const double target = h(u_pre);
    // Scan the subsonic side u in (s + m/R, u_sonic) for a sign change.
    const double a0 = f.s + f.m / p.rho_max * (1 + 1e-9);
    const double b0 = cj.sonic.u;
    const int n = 20000;
    double root = NAN;
    for (int i = 0; i < n; ++i) {
      double a = a0 + (b0 - a0) * i / n, b = a0 + (b0 - a0) * (i + 1) / n;
      if ((h(a) - target) * (h(b) - target) <= 0) {
        for (int k = 0; k < 200; ++k) {
          const double c = 0.5 * (a + b);
          ((h(a) - target) * (h(c) - target) <= 0 ? b : a) = c;
        }
        root = 0.5 * (a + b);
        break;
      }
    }
    CAPTURE(frac);
    CHECK(jump.u_post == doctest::Approx(root).epsilon(1e-10));
    // Rankine-Hugoniot: momentum flux equal; mass flux equal by construction of the frame.
    CHECK(momentum_flux(p, f, jump.u_post) == doctest::Approx(momentum_flux(p, f, u_pre)).epsilon(1e-10));
    // Lax: supersonic ahead of the shock, subsonic behind it, in the wave frame.
    CHECK(wave_denominator(p, f, u_pre) > 0);
    CHECK(wave_denominator(p, f, jump.u_post) < 0);
  }
}

TEST_CASE("zero-strength shock at the sonic speed and no root when supersonic side is missing") {
  const auto p = model::canonical_params();
  const auto cj = cj_construct(p, 0.07);
  const auto j = rh_jump(p, cj.frame, cj.sonic.u);
  CHECK(j.zero_strength);
  CHECK(j.u_post == doctest::Approx(cj.sonic.u));
}

TEST_CASE("sonic slope is the limit of N/D") {
  const auto p = model::canonical_params();
  const auto cj = cj_construct(p, 0.07);
  const double us = cj.sonic.u;
  auto ratio = [&](double h) {
    // Symmetric average removes the odd error term.
    const double up = wave_numerator(p, cj.frame, us + h) / wave_denominator(p, cj.frame, us + h);
    const double dn = wave_numerator(p, cj.frame, us - h) / wave_denominator(p, cj.frame, us - h);
    return 0.5 * (up + dn);
  };
  const double h = 1e-3;
  const double richardson = (4 * ratio(h / 2) - ratio(h)) / 3;
  CHECK(sonic_slope(p, cj.frame, cj.sonic) == doctest::Approx(richardson).epsilon(1e-7));
  CHECK(cj.sonic.slope == doctest::Approx(richardson).epsilon(1e-7));
  // The regularised right-hand side is continuous through the sonic point.
  CHECK(ode_rhs(p, cj.frame, us) == doctest::Approx(cj.sonic.slope).epsilon(1e-9));
  CHECK(ode_rhs(p, cj.frame, us + 1e-7) == doctest::Approx(cj.sonic.slope).epsilon(1e-5));
}

TEST_CASE("solitary profile invariants") {
  const auto p = model::canonical_params();
  for (double frac : {0.1, 0.2, 0.3, 0.35, 0.4, 0.5}) {
    const auto sol = solitary_jamiton(p, frac * p.rho_max);
    const auto& pr = sol.profile;
    CAPTURE(frac);
    REQUIRE(pr.size() > 10);
    // First integral rho (u - s) = m.
    double worst = 0;
    for (const auto& s : pr) worst = std::max(worst, std::abs(s.rho * (s.u - sol.frame.s) - sol.frame.m));
    CHECK(worst < 1e-12 * sol.frame.m);
    // Starts at the post-shock state, rises monotonically, ends near the far state.
    CHECK(pr.front().eta == 0.0);
    CHECK(pr.front().u == doctest::Approx(sol.post_shock.u).epsilon(1e-12));
    for (std::size_t i = 1; i < pr.size(); ++i) {
      CHECK(pr[i].eta > pr[i - 1].eta);
      CHECK(pr[i].u > pr[i - 1].u);
    }
    CHECK(std::abs(pr.back().rho - sol.far.rho) < 1e-3 * p.rho_max);
    CHECK(sol.sonic_eta > 0.0);
    CHECK(sol.sonic_eta < pr.back().eta);
    // Wave slower than every vehicle.
    CHECK(sol.frame.s < pr.front().u);
  }
}

TEST_CASE("ODE profile and quadrature route agree") {
  const auto p = model::canonical_params();
  const auto sol = solitary_jamiton(p, 0.07);
  const double ua = sol.post_shock.u + 0.01;
  const double ub = sol.far.u - 0.05;
  const double by_ode = sol.eta_at_speed(ub) - sol.eta_at_speed(ua);
  const double by_quad = eta_between(p, sol.frame, ua, ub);
  CHECK(by_ode == doctest::Approx(by_quad).epsilon(1e-6));
}

TEST_CASE("profile is insensitive to the sonic escape offset") {
  const auto p = model::canonical_params();
  auto max_change = [&](double eps) {
    IntegrationOptions a, b;
    a.eps_rel = eps;
    b.eps_rel = eps / 2;
    const auto sa = solitary_jamiton(p, 0.07, a);
    const auto sb = solitary_jamiton(p, 0.07, b);
    double w = 0;
    const double top = std::min(sa.eta_extent(), sb.eta_extent());
    for (int i = 0; i <= 2000; ++i) {
      const double eta = top * i / 2000.0;
      w = std::max(w, std::abs(sa.speed_at(eta) - sb.speed_at(eta)));
    }
    return w;
  };
  const double d1 = max_change(1e-6);
  CHECK(d1 < 1e-6 * p.u0);
  CHECK(max_change(1e-4) < 1e-6 * p.u0);
}

TEST_CASE("sonic point and far state are the two equilibrium roots") {
  const auto p = model::canonical_params();
  for (double frac : {0.1, 0.3, 0.5}) {
    const auto cj = cj_construct(p, frac * p.rho_max);
    const double s = cj.frame.s, m = cj.frame.m, U = p.u0;
    // u^2 - (s + U) u + U (s + m / R) = 0
    const double b = s + U, c = U * (s + m / p.rho_max);
    const double disc = std::sqrt(b * b - 4 * c);
    CHECK(std::abs((b - disc) / 2 - cj.sonic.u) < 1e-8 * U);
    CHECK(std::abs((b + disc) / 2 - cj.far.u) < 1e-8 * U);
  }
}

TEST_CASE("periodic train geometry") {
  const auto p = model::canonical_params();
  const auto cj = cj_construct(p, 0.07);
  const double lambda = 40.0;
  const auto tr = periodic_train(p, cj.frame, lambda);
  CHECK(tr.kind == WaveKind::periodic);
  CHECK(tr.profile.back().eta == doctest::Approx(lambda));
  // Both shock sides share the momentum flux.
  CHECK(momentum_flux(p, tr.frame, tr.u_top) ==
        doctest::Approx(momentum_flux(p, tr.frame, tr.post_shock.u)).epsilon(1e-10));
  CHECK(tr.speed_at(1.0) == doctest::Approx(tr.speed_at(1.0 + lambda)).epsilon(1e-12));
  // Mean density: trapezoid over a fine eta grid vs the quadrature in u.
  const int n = 200000;
  double acc = 0;
  for (int i = 0; i < n; ++i) acc += tr.density_at((i + 0.5) * lambda / n);
  CHECK(tr.mean_density() == doctest::Approx(acc / n).epsilon(1e-6));
  CHECK_THROWS_AS(periodic_train(p, cj.frame, 0.0), WavelengthInfeasible);
  CHECK_THROWS_AS(periodic_train(p, cj.frame, 1e9), WavelengthInfeasible);
}

TEST_CASE("ring-matched train carries the requested mean density") {
  const auto p = model::canonical_params();
  const double mean = 22.0 / 230.0;
  const auto tr = periodic_train_for_ring(p, mean, 230.0 / p.tau);
  CHECK(tr.mean_density() == doctest::Approx(mean).epsilon(1e-9));
  CHECK(tr.wavelength_x() == doctest::Approx(230.0));
  CHECK(tr.far.rho < mean);
}

TEST_CASE("existence sweep matches the band") {
  const auto p = model::canonical_params();
  std::vector<double> grid;
  for (int i = 1; i < 20; ++i) grid.push_back(0.2 * i / 20.0);
  const auto res = sweep_existence(p, grid);
  REQUIRE(res.band);
  for (const auto& e : res.entries) {
    CAPTURE(e.rho_minus);
    CHECK(e.unstable == model::is_unstable(p, e.rho_minus));
    CHECK(e.exists == e.unstable);
    if (e.exists) CHECK(e.s == doctest::Approx(closed_form_cj(p, e.rho_minus).s).epsilon(1e-9));
  }
}

}
