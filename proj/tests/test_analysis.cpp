#include <doctest.h>

#include <cmath>
#include <vector>

#include "jamiton/analysis.hpp"
#include "jamiton/errors.hpp"

using namespace jamiton;
using namespace jamiton::analysis;

namespace {

const solver::JamitonSolution& ring_train() {
  static const auto tr = matched_train(model::canonical_params(), 230.0, 22.0 / 230.0, 1);
  return tr;
}

const solver::JamitonSolution& two_wave_train() {
  static const auto tr = matched_train(model::canonical_params(), 400.0, 0.09, 2);
  return tr;
}

FieldSnapshot shifted(const FieldSnapshot& s, double dx) {
  FieldSnapshot out = s;
  const std::size_t n = s.x.size();
  const auto k = static_cast<std::size_t>(std::lround(dx / (s.ring_length / n))) % n;
  for (std::size_t j = 0; j < n; ++j) {
    out.rho[(j + k) % n] = s.rho[j];
    out.u[(j + k) % n] = s.u[j];
  }
  return out;
}

}  // namespace

TEST_SUITE("analysis") {

TEST_CASE("exact train field carries the ring mass") {
  const auto& tr = ring_train();
  const auto snap = sample_solution(tr, 230.0, 0.0, 8192);
  CHECK(mean_density(snap) == doctest::Approx(22.0 / 230.0).epsilon(1e-4));
}

TEST_CASE("shock detection on exact fields") {
  const auto& tr = ring_train();
  const auto snap = sample_solution(tr, 230.0, 3.0, 4096);
  const auto shocks = detect_shocks(snap);
  REQUIRE(shocks.size() == 1);
  const double expect = std::fmod(tr.road_x(0.0, 3.0) + 10 * 230.0, 230.0);
  double d = std::abs(shocks[0].position - expect);
  d = std::min(d, 230.0 - d);
  CHECK(d < 2 * 230.0 / 4096);
  CHECK(shocks[0].rho_after > shocks[0].rho_before);

  const auto two = sample_solution(two_wave_train(), 400.0, 0.0, 4096);
  CHECK(detect_shocks(two).size() == 2);

  FieldSnapshot flat = snap;
  for (auto& r : flat.rho) r = 0.09;
  CHECK(detect_shocks(flat).empty());
}

TEST_CASE("tracked exact waves move at the wave speed") {
  const auto p = model::canonical_params();
  for (const auto* tr : {&ring_train(), &two_wave_train()}) {
    const double L = tr->wavelength_x() * (tr == &ring_train() ? 1 : 2);
    std::vector<FieldSnapshot> snaps;
    for (int k = 0; k <= 20; ++k) snaps.push_back(sample_solution(*tr, L, 0.5 * k, 4096));
    const auto waves = detect_jamitons(snaps);
    REQUIRE(waves.size() == (tr == &ring_train() ? 1u : 2u));
    for (const auto& w : waves) {
      CHECK(std::abs(w.measured_speed - tr->frame.s) < 1e-3 * p.u0);
      CHECK_FALSE(w.merged);
      CHECK(w.amplitude == doctest::Approx(tr->post_shock.rho - tr->density_at(1e-9 + tr->wavelength_eta * 0.999999)).epsilon(0.05));
      CHECK(w.width > 0.0);
      CHECK(w.width < tr->wavelength_x());
      CHECK(w.min_speed == doctest::Approx(tr->post_shock.u).epsilon(1e-2));
    }
  }
}

TEST_CASE("single snapshot gives no speed") {
  const auto snap = sample_solution(ring_train(), 230.0, 0.0, 2048);
  const std::vector<FieldSnapshot> one{snap};
  const auto waves = detect_jamitons(one);
  REQUIRE(waves.size() == 1);
  CHECK(std::isnan(waves[0].measured_speed));
}

TEST_CASE("comparison of a field with itself and with a shifted copy") {
  const auto snap = sample_solution(ring_train(), 230.0, 0.0, 4096);
  const auto self = compare_fields(snap, snap);
  CHECK(self.linf_rel == doctest::Approx(0.0));
  CHECK(self.l2_rel == doctest::Approx(0.0));
  CHECK(self.offset == doctest::Approx(0.0));

  const auto half = shifted(snap, 115.0);
  const auto c = compare_fields(snap, half);
  CHECK(c.linf_rel < 1e-12);
  CHECK(c.l2_rel < 1e-12);
  CHECK(std::abs(std::abs(c.offset) - 115.0) < 1e-6);

  const std::vector<FieldSnapshot> seq{half};
  const auto rep = compare_profiles(ring_train(), seq);
  CHECK(rep.linf_rel < 1e-3);
  CHECK(rep.wave_count == 1);
}

TEST_CASE("comparison is symmetric") {
  const auto a = sample_solution(ring_train(), 230.0, 0.0, 3000);
  auto b = sample_solution(ring_train(), 230.0, 7.3, 3000);
  for (std::size_t j = 0; j < b.rho.size(); ++j) b.rho[j] *= 1.0 + 0.01 * std::sin(0.37 * j);
  for (double ex : {0.0, 1.0}) {
    CompareOptions o;
    o.shock_exclusion = ex;
    const auto ab = compare_fields(a, b, o);
    const auto ba = compare_fields(b, a, o);
    CHECK(std::abs(ab.linf_rel - ba.linf_rel) < 1e-8);
    CHECK(std::abs(ab.l2_rel - ba.l2_rel) < 1e-8);
    CHECK(std::abs(ab.offset + ba.offset) < 1e-8);
  }
}

TEST_CASE("shock exclusion only removes the neighbourhood of the front") {
  const auto a = sample_solution(ring_train(), 230.0, 0.0, 4096);
  const double xs = detect_shocks(a).at(0).position;
  auto b = a;
  for (std::size_t j = 0; j < b.x.size(); ++j) {
    double d = std::abs(b.x[j] - xs);
    d = std::min(d, 230.0 - d);
    if (d < 0.5) b.rho[j] += 0.03;
  }
  CompareOptions o;
  CHECK(compare_fields(a, b, o).linf_rel > 0.1);
  o.shock_exclusion = 1.0;
  CHECK(compare_fields(a, b, o).linf_rel < 1e-3);
}

TEST_CASE("comparison needs a wave") {
  auto flat = sample_solution(ring_train(), 230.0, 0.0, 1024);
  for (auto& r : flat.rho) r = 0.09;
  const std::vector<FieldSnapshot> seq{flat};
  CHECK_THROWS_AS(compare_profiles(ring_train(), seq), NothingToCompare);
  CHECK_THROWS_AS(matched_train(model::canonical_params(), 230.0, 0.09, 0), NothingToCompare);
}

TEST_CASE("analytic trajectories through a solitary jamiton") {
  const auto p = model::canonical_params();
  const auto sol = solver::solitary_jamiton(p, 0.35 * p.rho_max);
  const double rho_m = sol.far.rho;
  std::vector<double> x0;
  for (int k = 0; k < 10; ++k) x0.push_back(-(k + 0.5) / rho_m);
  // A vehicle far downstream of the wave drives straight.
  x0.push_back(1e6);
  const double t1 = 60.0;
  const auto trajs = trajectories_analytic(sol, x0, 0.0, t1, 400);
  REQUIRE(trajs.size() == x0.size());
  const double drop = sol.far.u - sol.post_shock.u;
  const auto jump = solver::rh_jump(p, sol.frame, sol.far.u);

  std::vector<double> crossing_times;
  for (std::size_t v = 0; v + 1 < trajs.size(); ++v) {
    const auto& s = trajs[v].samples;
    int drops = 0;
    double t_cross = NAN;
    for (std::size_t i = 1; i < s.size(); ++i) {
      CHECK(s[i].t >= s[i - 1].t);
      if (s[i].t == s[i - 1].t) {
        ++drops;
        t_cross = s[i].t;
        CHECK(std::abs((s[i - 1].u - s[i].u) - drop) < 1e-8 * p.u0);
        CHECK(std::abs(s[i].u - jump.u_post) < 1e-8 * p.u0);
      } else if (drops > 0) {
        CHECK(s[i].u >= s[i - 1].u - 1e-12);
      }
    }
    CHECK(drops == 1);
    crossing_times.push_back(t_cross);
  }
  // Vehicles enter the wave at equal intervals 1 / (rho_- (u_- - s)).
  const double period = 1.0 / (rho_m * (sol.far.u - sol.frame.s));
  for (std::size_t k = 1; k < crossing_times.size(); ++k) {
    CHECK(crossing_times[k] - crossing_times[k - 1] == doctest::Approx(period).epsilon(1e-6));
  }
  // Order is preserved at every sample time.
  for (std::size_t v = 0; v + 2 < trajs.size(); ++v) {
    const auto& a = trajs[v].samples;
    const auto& b = trajs[v + 1].samples;
    std::size_t j = 0;
    for (const auto& s : a) {
      while (j + 1 < b.size() && b[j + 1].t <= s.t) ++j;
      if (b[j].t == s.t) CHECK(s.x > b[j].x);
    }
  }
  const auto& far = trajs.back().samples;
  CHECK(far.back().x - far.front().x == doctest::Approx(sol.far.u * t1).epsilon(1e-9));
}

TEST_CASE("tracers through stored snapshots") {
  std::vector<FieldSnapshot> snaps;
  for (int k = 0; k <= 10; ++k) {
    FieldSnapshot s;
    s.t = 0.1 * k;
    s.ring_length = 100.0;
    for (int j = 0; j < 100; ++j) {
      s.x.push_back(j);
      s.rho.push_back(0.05);
      s.u.push_back(3.0);
    }
    snaps.push_back(s);
  }
  const std::vector<double> seeds{0.0, 50.0, 99.5};
  const auto tr = trajectories_sim(snaps, seeds);
  REQUIRE(tr.size() == 3);
  for (std::size_t v = 0; v < 3; ++v) {
    const auto& s = tr[v].samples;
    CHECK(s.front().x == doctest::Approx(seeds[v]));
    CHECK(s.back().x == doctest::Approx(seeds[v] + 3.0).epsilon(1e-12));
  }
  for (auto& s : snaps) for (auto& u : s.u) u = 20.0;
  CHECK_THROWS_AS(trajectories_sim(snaps, seeds), InsufficientOutputRate);
}

}
