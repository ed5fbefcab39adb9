#include "jamiton/solver.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <future>
#include <sstream>
#include <string>
#include <thread>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>
#include <boost/math/tools/toms748_solve.hpp>
#include <boost/numeric/odeint.hpp>

#include "jamiton/errors.hpp"

namespace jamiton::solver {

namespace {

using model::pressure;
using model::sound_speed;

// Half-width (in units of u0) of the window around a regular sonic point in
// which du/deta is taken from its Taylor expansion instead of N/D.
constexpr double kSonicWindow = 1e-6;
// |D| below this (in units of u0^2) with N not vanishing is a true singularity.
constexpr double kSingularD = 1e-14;
// A sonic point is regular when |N| there is below this (units of u0^2).
constexpr double kRegularN = 1e-8;

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

// N, D and their first two u-derivatives at relative speed w = u - s.
struct RhsParts {
  double n, d, dn, dd, d2n, d2d;
};

RhsParts rhs_parts(const ModelParams& p, const WaveFrame& f, double u) {
  const double w = u - f.s;
  const double g = p.rho_max * w - f.m;  // rho_max w - m > 0  <=>  rho < rho_max
  if (!(w > 0.0) || !(g > 0.0)) {
    throw DomainError("speed " + fmt(u) + " gives density outside (0, rho_max) in frame s=" +
                      fmt(f.s) + ", m=" + fmt(f.m));
  }
  RhsParts r{};
  r.n = w * (p.u0 - u) - p.u0 * f.m / p.rho_max;
  r.dn = p.u0 + f.s - 2.0 * u;
  r.d2n = -2.0;
  const double bm = p.beta * f.m;
  r.d = w * w - bm / g;
  r.dd = 2.0 * w + bm * p.rho_max / (g * g);
  r.d2d = 2.0 - 2.0 * bm * p.rho_max * p.rho_max / (g * g * g);
  return r;
}

// Value and u-derivative of du/deta at a regular sonic point.
std::pair<double, double> sonic_expansion(const RhsParts& r) {
  const double f0 = r.dn / r.dd;
  const double f1 = (r.d2n * r.dd - r.dn * r.d2d) / (2.0 * r.dd * r.dd);
  return {f0, f1};
}

template <class F>
std::pair<double, double> bracket_root(F&& f, double lo, double hi, double flo, double fhi,
                                       double abs_tol, const char* what) {
  std::uintmax_t iters = 200;
  auto tol = [abs_tol](double a, double b) { return std::abs(b - a) <= abs_tol; };
  try {
    return boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, tol, iters);
  } catch (const std::exception& e) {
    throw ConvergenceFailure(std::string(what) + ": " + e.what());
  }
}

template <class F>
double pick_root(F&& f, std::pair<double, double> br) {
  return std::abs(f(br.first)) <= std::abs(f(br.second)) ? br.first : br.second;
}

double hermite(double t, double h, double y0, double d0, double y1, double d1) {
  const double t2 = t * t, t3 = t2 * t;
  return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * h * d0 + (-2 * t3 + 3 * t2) * y1 +
         (t3 - t2) * h * d1;
}

}  // namespace

// --- wave-frame algebra -------------------------------------------------

double frame_density(const WaveFrame& frame, double u) { return frame.m / (u - frame.s); }

double wave_numerator(const ModelParams& p, const WaveFrame& f, double u) {
  return rhs_parts(p, f, u).n;
}
double wave_denominator(const ModelParams& p, const WaveFrame& f, double u) {
  return rhs_parts(p, f, u).d;
}
double wave_numerator_slope(const ModelParams& p, const WaveFrame& f, double u) {
  return rhs_parts(p, f, u).dn;
}
double wave_denominator_slope(const ModelParams& p, const WaveFrame& f, double u) {
  return rhs_parts(p, f, u).dd;
}

double sonic_relative_speed(const ModelParams& p, double m) {
  if (!(m > 0.0)) throw DomainError("mass flux must be positive, got " + fmt(m));
  const double r = p.rho_max;
  const double lo = m / r;
  const double hi = 2.0 * lo + std::cbrt(p.beta * m / r);
  auto f = [&](double w) {
    return std::make_pair(w * w * (r * w - m) - p.beta * m, w * (3.0 * r * w - 2.0 * m));
  };
  std::uintmax_t iters = 100;
  return boost::math::tools::newton_raphson_iterate(f, 0.5 * (lo + hi), lo, hi, 52, iters);
}

std::pair<double, double> equilibrium_speeds(const ModelParams& p, const WaveFrame& f) {
  // u^2 - (s + u0) u + u0 (s + m / rho_max) = 0
  const double b = f.s + p.u0;
  const double c = p.u0 * (f.s + f.m / p.rho_max);
  const double disc = b * b - 4.0 * c;
  if (!(disc >= 0.0)) {
    throw NoJamiton("frame s=" + fmt(f.s) + ", m=" + fmt(f.m) + " has no equilibrium state");
  }
  const double hi = 0.5 * (b + std::sqrt(disc));
  const double lo = c / hi;
  return {lo, hi};
}

double momentum_flux(const ModelParams& p, const WaveFrame& f, double u) {
  return f.m * u + pressure(p, frame_density(f, u));
}

// --- operations ---------------------------------------------------------

double ode_rhs(const ModelParams& p, const WaveFrame& f, double u) {
  const RhsParts r = rhs_parts(p, f, u);
  const double scale = p.u0 * p.u0;
  const double step = r.d / r.dd;  // Newton step to the nearest denominator root
  if (std::abs(step) < kSonicWindow * p.u0) {
    double root = u - step;
    RhsParts rr = rhs_parts(p, f, root);
    root -= rr.d / rr.dd;
    rr = rhs_parts(p, f, root);
    if (std::abs(rr.n) <= kRegularN * scale) {
      const auto [f0, f1] = sonic_expansion(rr);
      return f0 + (u - root) * f1;
    }
  }
  if (std::abs(r.d) < kSingularD * scale) {
    throw SonicSingularity("denominator vanishes at u=" + fmt(u) + " while numerator is " +
                           fmt(r.n));
  }
  return r.n / r.d;
}

double cj_residual(const ModelParams& p, double rho_minus, double s) {
  const double u_minus = model::desired_speed(p, rho_minus);
  const double m = rho_minus * (u_minus - s);
  const double w = sonic_relative_speed(p, m);
  return (model::desired_speed(p, m / w) - (s + w)) / p.u0;
}

CjConstruction cj_construct(const ModelParams& p, double rho_minus) {
  if (!(rho_minus > 0.0 && rho_minus < p.rho_max)) {
    throw DomainError("far density " + fmt(rho_minus) + " outside (0, rho_max)");
  }
  const double u_minus = model::desired_speed(p, rho_minus);
  const double c_minus = sound_speed(p, rho_minus);
  // s = u_minus - c_minus puts the sonic point on the far state itself (the
  // zero-amplitude root). The admissible root lies below it, and above
  // u_minus - u0 since the far relative speed cannot exceed u0.
  const double s_top = u_minus - c_minus;
  const double s_floor = u_minus - p.u0;
  auto g = [&](double s) { return cj_residual(p, rho_minus, s); };

  const double offset = 1e-9 * p.u0;
  const double scan = 1e-2 * p.u0;
  double s_prev = s_top - offset;
  if (s_prev <= s_floor) throw NoJamiton("far density " + fmt(rho_minus) + " admits no wave speed");
  double g_prev = g(s_prev);
  std::optional<std::pair<double, double>> bracket;
  double g_lo = 0.0, g_hi = 0.0;
  while (s_prev > s_floor) {
    const double s_next = std::max(s_prev - scan, s_floor);
    const double g_next = g(s_next);
    if ((g_next < 0.0) != (g_prev < 0.0) || g_next == 0.0) {
      bracket = {s_next, s_prev};
      g_lo = g_next;
      g_hi = g_prev;
      break;
    }
    s_prev = s_next;
    g_prev = g_next;
  }
  if (!bracket) {
    throw NoJamiton("no Chapman-Jouguet wave speed for far density " + fmt(rho_minus) +
                    " (uniform flow there is " +
                    (model::is_unstable(p, rho_minus) ? "unstable" : "stable") + ")");
  }
  const auto br = bracket_root(g, bracket->first, bracket->second, g_lo, g_hi, 1e-13 * p.u0,
                               "cj_construct");
  const double s = pick_root(g, br);

  CjConstruction out;
  out.far = {rho_minus, u_minus};
  out.frame = {s, rho_minus * (u_minus - s)};
  const double w = sonic_relative_speed(p, out.frame.m);
  out.sonic.u = s + w;
  out.sonic.rho = out.frame.m / w;

  const RhsParts r = rhs_parts(p, out.frame, out.sonic.u);
  const double scale = p.u0 * p.u0;
  const bool ordered = out.sonic.u < u_minus && out.sonic.rho > rho_minus;
  const bool lax = (u_minus - s) > c_minus;
  if (!ordered || !lax) {
    throw NoJamiton("CJ root for far density " + fmt(rho_minus) +
                    " violates ordering or the Lax condition");
  }
  if (std::abs(r.n) > 1e-10 * scale || std::abs(r.d) > 1e-10 * scale) {
    throw ConvergenceFailure("CJ residuals too large: N=" + fmt(r.n) + ", D=" + fmt(r.d) +
                             " at s=" + fmt(s));
  }
  out.sonic.slope = sonic_slope(p, out.frame, out.sonic);
  return out;
}

ShockJump rh_jump(const ModelParams& p, const WaveFrame& f, double u_pre) {
  const double w_pre = u_pre - f.s;
  if (!(w_pre > 0.0) || !(frame_density(f, u_pre) < p.rho_max)) {
    throw DomainError("pre-shock speed " + fmt(u_pre) + " outside the frame's admissible range");
  }
  const double w_c = sonic_relative_speed(p, f.m);
  if (std::abs(w_pre - w_c) <= 1e-10 * w_c) return {u_pre, true};

  const double h_pre = momentum_flux(p, f, u_pre);
  auto F = [&](double w) { return momentum_flux(p, f, f.s + w) - h_pre; };
  double lo, hi;
  if (w_pre > w_c) {
    // Subsonic partner lies between the jam-density limit and the sonic speed.
    lo = f.m / (p.rho_max * (1.0 - 1e-13));
    hi = w_c;
    if (!(F(lo) > 0.0)) {
      throw NoJumpRoot("no subsonic partner of u=" + fmt(u_pre) + " below rho_max");
    }
  } else {
    lo = w_c;
    hi = 2.0 * w_c;
    int guard = 0;
    while (F(hi) < 0.0) {
      hi *= 2.0;
      if (++guard > 200) throw NoJumpRoot("no supersonic partner of u=" + fmt(u_pre));
    }
  }
  const auto br = bracket_root(F, lo, hi, F(lo), F(hi), 4e-16 * hi, "rh_jump");
  return {f.s + pick_root(F, br), false};
}

double sonic_slope(const ModelParams& p, const WaveFrame& f, const SonicState& sonic) {
  const RhsParts r = rhs_parts(p, f, sonic.u);
  if (std::abs(r.dd) < 1e-14 * p.u0) {
    throw DegenerateSonic("D'(u_s) vanishes at u_s=" + fmt(sonic.u));
  }
  return r.dn / r.dd;
}

SonicState sonic_state(const ModelParams& p, const WaveFrame& f) {
  SonicState s;
  const double w = sonic_relative_speed(p, f.m);
  s.u = f.s + w;
  s.rho = f.m / w;
  s.slope = sonic_slope(p, f, s);
  return s;
}

std::vector<ProfileSample> integrate_profile(const ModelParams& p, const WaveFrame& f,
                                             const SonicState& sonic, const ProfileStop& stop,
                                             const IntegrationOptions& opt) {
  namespace odeint = boost::numeric::odeint;
  using State = std::array<double, 1>;

  const double eps = opt.eps_rel * p.u0;
  if (!(eps > 1e-12 * p.u0)) {
    throw SonicEscapeFailure("sonic offset " + fmt(eps) + " is below resolvable precision");
  }
  if (!(stop.u_low > f.s + f.m / p.rho_max && stop.u_low < sonic.u - eps)) {
    throw IntegrationOutOfRange("lower stop " + fmt(stop.u_low) + " is not on the subsonic branch");
  }
  const double u_top = stop.u_high - opt.far_tol_rel * p.u0;
  if (!(u_top > sonic.u + eps)) {
    throw IntegrationOutOfRange("upper stop " + fmt(stop.u_high) + " is not above the sonic point");
  }

  const RhsParts rs = rhs_parts(p, f, sonic.u);
  const auto [f0, f1] = sonic_expansion(rs);
  auto eta_offset = [&](double du) { return du / f0 - f1 * du * du / (2.0 * f0 * f0); };

  auto system = [&](const State& x, State& dxdt, double) {
    try {
      dxdt[0] = ode_rhs(p, f, x[0]);
    } catch (const DomainError& e) {
      throw IntegrationOutOfRange(e.what());
    }
  };
  auto sample = [&](double eta, double u) {
    return ProfileSample{eta, u, frame_density(f, u), ode_rhs(p, f, u)};
  };

  // direction = -1: decreasing eta down to u_low; +1: increasing eta up to u_top.
  auto branch = [&](int direction) {
    std::vector<ProfileSample> out;
    const double du0 = direction * eps;
    const double eta0 = eta_offset(du0);
    const double target = direction < 0 ? stop.u_low : u_top;
    auto reached = [&](double u) { return direction < 0 ? u <= target : u >= target; };

    auto stepper = odeint::make_dense_output(1e-12 * p.u0, opt.rtol,
                                             odeint::runge_kutta_dopri5<State>());
    stepper.initialize(State{sonic.u + du0}, eta0, direction * 1e-3 * std::abs(eta0 + 1e-6));
    out.push_back(sample(eta0, sonic.u + du0));

    const std::size_t max_steps = 2'000'000;
    for (std::size_t k = 0; k < max_steps; ++k) {
      std::pair<double, double> span;
      try {
        span = stepper.do_step(system);
      } catch (const odeint::step_adjustment_error& e) {
        throw SonicEscapeFailure(std::string("step-size control failed: ") + e.what());
      }
      const double t0 = span.first, t1 = span.second;
      if (std::abs(t1 - t0) < 1e-15 * std::max(1.0, std::abs(t1))) {
        throw SonicEscapeFailure("step size underflow at eta=" + fmt(t1));
      }
      const double u1 = stepper.current_state()[0];
      if (direction > 0 && u1 > stop.u_high + 1e-9 * p.u0) {
        throw IntegrationOutOfRange("speed overshoots the far state at eta=" + fmt(t1));
      }
      double t_end = t1;
      bool done = false;
      bool hit = false;
      if (reached(u1)) {
        State tmp;
        auto F = [&](double t) {
          stepper.calc_state(t, tmp);
          return tmp[0] - target;
        };
        const auto br = bracket_root(F, std::min(t0, t1), std::max(t0, t1), F(std::min(t0, t1)),
                                     F(std::max(t0, t1)), 1e-14 * std::max(1.0, std::abs(t1)),
                                     "integrate_profile event");
        t_end = pick_root(F, br);
        done = hit = true;
      }
      if (std::abs(t_end - eta0) >= opt.eta_span) {
        t_end = eta0 + direction * opt.eta_span;
        hit = false;
        done = true;
      }
      const int pieces = std::max(1, static_cast<int>(std::ceil(std::abs(t_end - t0) /
                                                                 opt.max_sample_gap)));
      State tmp;
      for (int j = 1; j <= pieces; ++j) {
        const double t = t0 + (t_end - t0) * j / pieces;
        if (j == pieces && hit) {
          out.push_back(sample(t, target));
        } else {
          stepper.calc_state(t, tmp);
          if (!(tmp[0] > f.s + f.m / p.rho_max)) {
            throw IntegrationOutOfRange("speed left the admissible range at eta=" + fmt(t));
          }
          out.push_back(sample(t, tmp[0]));
        }
      }
      if (done) return out;
    }
    throw ConvergenceFailure("profile integration exceeded the step budget");
  };

  std::vector<ProfileSample> low = branch(-1);
  std::vector<ProfileSample> high = branch(+1);

  std::vector<ProfileSample> out;
  out.reserve(low.size() + high.size() + 1);
  out.insert(out.end(), low.rbegin(), low.rend());
  out.push_back({0.0, sonic.u, sonic.rho, f0});
  out.insert(out.end(), high.begin(), high.end());
  const double shift = out.front().eta;
  for (auto& s : out) s.eta -= shift;
  return out;
}

double eta_between(const ModelParams& p, const WaveFrame& f, double u_a, double u_b) {
  using boost::math::quadrature::gauss_kronrod;
  auto inv = [&](double u) { return 1.0 / ode_rhs(p, f, u); };
  const double u_s = f.s + sonic_relative_speed(p, f.m);
  auto integrate = [&](double a, double b) {
    if (a == b) return 0.0;
    return gauss_kronrod<double, 61>::integrate(inv, a, b, 15, 1e-14);
  };
  if ((u_a - u_s) * (u_b - u_s) < 0.0) return integrate(u_a, u_s) + integrate(u_s, u_b);
  return integrate(u_a, u_b);
}

// --- assembled waves ----------------------------------------------------

double JamitonSolution::speed_at(double eta) const {
  if (kind == WaveKind::periodic) {
    eta -= wavelength_eta * std::floor(eta / wavelength_eta);
  } else if (eta < 0.0) {
    return far.u;
  }
  const auto& pr = profile;
  if (eta >= pr.back().eta) {
    if (kind == WaveKind::periodic) return pr.back().u;
    return far.u - (far.u - pr.back().u) * std::exp(-tail_rate * (eta - pr.back().eta));
  }
  auto it = std::upper_bound(pr.begin(), pr.end(), eta,
                             [](double e, const ProfileSample& s) { return e < s.eta; });
  if (it == pr.begin()) return pr.front().u;
  const auto& b = *it;
  const auto& a = *(it - 1);
  const double h = b.eta - a.eta;
  if (h <= 0.0) return b.u;
  return hermite((eta - a.eta) / h, h, a.u, a.dudeta, b.u, b.dudeta);
}

double JamitonSolution::density_at(double eta) const {
  if (kind == WaveKind::solitary && eta < 0.0) return far.rho;
  return frame_density(frame, speed_at(eta));
}

double JamitonSolution::eta_at_speed(double u) const {
  const auto& pr = profile;
  if (u <= pr.front().u) return pr.front().eta;
  if (u >= pr.back().u) {
    if (kind == WaveKind::periodic) return pr.back().eta;
    if (u >= far.u) return std::numeric_limits<double>::infinity();
    return pr.back().eta + std::log((far.u - pr.back().u) / (far.u - u)) / tail_rate;
  }
  auto it = std::upper_bound(pr.begin(), pr.end(), u,
                             [](double v, const ProfileSample& s) { return v < s.u; });
  const auto& b = *it;
  const auto& a = *(it - 1);
  const double h = b.u - a.u;
  return hermite((u - a.u) / h, h, a.eta, 1.0 / a.dudeta, b.eta, 1.0 / b.dudeta);
}

double JamitonSolution::mean_density() const {
  if (kind == WaveKind::solitary) return far.rho;
  using boost::math::quadrature::gauss_kronrod;
  auto integrand = [&](double u) { return frame_density(frame, u) / ode_rhs(params, frame, u); };
  auto integrate = [&](double a, double b) {
    return gauss_kronrod<double, 61>::integrate(integrand, a, b, 15, 1e-14);
  };
  const double a = post_shock.u, b = u_top;
  double total = 0.0;
  if (a < sonic.u && sonic.u < b) {
    total = integrate(a, sonic.u) + integrate(sonic.u, b);
  } else {
    total = integrate(a, b);
  }
  return total / wavelength_eta;
}

namespace {

JamitonSolution assemble_solitary(const ModelParams& p, const WaveFrame& frame,
                                  const SonicState& sonic, const EquilibriumState& far,
                                  const IntegrationOptions& opt) {
  const ShockJump jump = rh_jump(p, frame, far.u);
  if (jump.zero_strength) throw NoJamiton("zero-strength shock: far state is sonic");
  JamitonSolution sol;
  sol.params = p;
  sol.frame = frame;
  sol.far = far;
  sol.post_shock = {frame_density(frame, jump.u_post), jump.u_post};
  sol.sonic = sonic;
  sol.kind = WaveKind::solitary;
  sol.u_top = far.u;
  sol.profile = integrate_profile(p, frame, sonic, {jump.u_post, far.u}, opt);
  for (const auto& s : sol.profile) {
    if (s.u == sonic.u) {
      sol.sonic_eta = s.eta;
      break;
    }
  }
  const RhsParts r = rhs_parts(p, frame, far.u);
  sol.tail_rate = -r.dn / r.d;
  return sol;
}

}  // namespace

JamitonSolution solitary_jamiton(const ModelParams& p, double rho_minus,
                                 const IntegrationOptions& opt) {
  const CjConstruction cj = cj_construct(p, rho_minus);
  return assemble_solitary(p, cj.frame, cj.sonic, cj.far, opt);
}

JamitonSolution solitary_from_frame(const ModelParams& p, const WaveFrame& frame,
                                    const IntegrationOptions& opt) {
  const auto [u_low_eq, u_high_eq] = equilibrium_speeds(p, frame);
  const SonicState sonic = sonic_state(p, frame);
  const RhsParts r = rhs_parts(p, frame, sonic.u);
  const double scale = p.u0 * p.u0;
  if (std::abs(r.n) > 1e-10 * scale || !(sonic.u < u_high_eq)) {
    throw NoJamiton("frame s=" + fmt(frame.s) + ", m=" + fmt(frame.m) +
                    " does not satisfy the Chapman-Jouguet condition");
  }
  (void)u_low_eq;
  const EquilibriumState far{frame_density(frame, u_high_eq), u_high_eq};
  return assemble_solitary(p, frame, sonic, far, opt);
}

JamitonSolution periodic_train(const ModelParams& p, const WaveFrame& frame,
                               double wavelength_eta, const IntegrationOptions& opt) {
  const JamitonSolution sol = solitary_from_frame(p, frame, opt);
  if (!(wavelength_eta > 0.0) || !std::isfinite(wavelength_eta)) {
    throw WavelengthInfeasible("wavelength must be positive and finite, got " +
                               fmt(wavelength_eta));
  }
  auto partner = [&](double u1) { return rh_jump(p, frame, u1).u_post; };
  auto span = [&](double u1) { return sol.eta_at_speed(u1) - sol.eta_at_speed(partner(u1)); };
  const double u_end = sol.profile.back().u;
  const double max_span = span(u_end);
  if (wavelength_eta >= max_span) {
    throw WavelengthInfeasible("wavelength " + fmt(wavelength_eta) +
                               " exceeds the resolved solitary extent " + fmt(max_span));
  }
  auto F = [&](double u1) { return span(u1) - wavelength_eta; };
  const double lo = sol.sonic.u;
  const auto br = bracket_root(F, lo, u_end, -wavelength_eta, max_span - wavelength_eta,
                               1e-14 * p.u0, "periodic_train");
  const double u1 = pick_root(F, br);
  const double u_post = partner(u1);
  const double eta_a = sol.eta_at_speed(u_post);
  const double eta_b = sol.eta_at_speed(u1);

  JamitonSolution out = sol;
  out.kind = WaveKind::periodic;
  out.wavelength_eta = wavelength_eta;
  out.u_top = u1;
  out.post_shock = {frame_density(frame, u_post), u_post};
  out.profile.clear();
  out.profile.push_back({0.0, u_post, frame_density(frame, u_post), ode_rhs(p, frame, u_post)});
  for (const auto& s : sol.profile) {
    if (s.eta > eta_a && s.eta < eta_b) out.profile.push_back({s.eta - eta_a, s.u, s.rho, s.dudeta});
  }
  out.profile.push_back(
      {wavelength_eta, u1, frame_density(frame, u1), ode_rhs(p, frame, u1)});
  out.sonic_eta = sol.sonic_eta - eta_a;
  return out;
}

JamitonSolution periodic_train_for_ring(const ModelParams& p, double mean_density,
                                        double wavelength_eta, const IntegrationOptions& opt) {
  const auto [band_lo, band_hi] = model::critical_densities(p);
  const double top = std::min(mean_density, band_hi);
  if (!(top > band_lo)) {
    throw NoJamiton("mean density " + fmt(mean_density) + " is below the unstable band");
  }
  auto mismatch = [&](double rho_minus) -> std::optional<double> {
    try {
      const auto cj = cj_construct(p, rho_minus);
      return periodic_train(p, cj.frame, wavelength_eta, opt).mean_density() - mean_density;
    } catch (const WavelengthInfeasible&) {
      return std::nullopt;
    } catch (const NoJamiton&) {
      return std::nullopt;
    }
  };
  // Trains carry densities above their far state, so the matching far density
  // lies below the ring mean. Scan downward for the first sign change.
  const int n = 400;
  const double width = top - band_lo;
  std::optional<double> prev_val;
  double prev_rho = 0.0;
  for (int i = 1; i < n; ++i) {
    const double rho = top - width * i / n;
    const auto val = mismatch(rho);
    if (val && prev_val && ((*val < 0.0) != (*prev_val < 0.0))) {
      auto F = [&](double r) {
        const auto v = mismatch(r);
        if (!v) throw ConvergenceFailure("infeasible train inside matching bracket");
        return *v;
      };
      const auto br = bracket_root(F, rho, prev_rho, *val, *prev_val, 1e-13 * p.rho_max,
                                   "periodic_train_for_ring");
      const auto cj = cj_construct(p, pick_root(F, br));
      return periodic_train(p, cj.frame, wavelength_eta, opt);
    }
    if (val) {
      prev_val = val;
      prev_rho = rho;
    }
  }
  throw NoJamiton("no jamiton train of wavelength " + fmt(wavelength_eta) +
                  " carries mean density " + fmt(mean_density));
}

SweepResult sweep_existence(const ModelParams& p, std::span<const double> grid) {
  SweepResult result;
  result.entries.resize(grid.size());
  auto solve_one = [&](std::size_t i) {
    SweepEntry e;
    e.rho_minus = grid[i];
    e.unstable = model::is_unstable(p, grid[i]);
    try {
      const auto cj = cj_construct(p, grid[i]);
      const auto jump = rh_jump(p, cj.frame, cj.far.u);
      e.exists = true;
      e.s = cj.frame.s;
      e.m = cj.frame.m;
      e.amplitude = cj.far.u - jump.u_post;
      e.rho_plus = frame_density(cj.frame, jump.u_post);
    } catch (const NoJamiton&) {
      e.exists = false;
    }
    result.entries[i] = e;
  };
  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>(std::thread::hardware_concurrency(), 16));
  std::vector<std::future<void>> tasks;
  for (std::size_t w = 0; w < workers; ++w) {
    tasks.push_back(std::async(std::launch::async, [&, w] {
      for (std::size_t i = w; i < grid.size(); i += workers) solve_one(i);
    }));
  }
  for (auto& t : tasks) t.get();

  try {
    result.band = model::critical_densities(p);
  } catch (const NoUnstableBand&) {
  }
  for (const auto& e : result.entries) {
    if (!e.exists) continue;
    if (!result.existence) {
      result.existence = {e.rho_minus, e.rho_minus};
    } else {
      result.existence->first = std::min(result.existence->first, e.rho_minus);
      result.existence->second = std::max(result.existence->second, e.rho_minus);
    }
  }
  return result;
}

}  // namespace jamiton::solver
