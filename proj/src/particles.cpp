#include "jamiton/particles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "jamiton/errors.hpp"

namespace jamiton::sim {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

inline double wrap(double x, double L) {
  if (x >= L) return x - L;
  if (x < 0.0) return x + L;
  return x;
}

inline double gap(double from, double to, double L) {
  const double d = to - from;
  return d < 0.0 ? d + L : d;
}

// Scratch buffers reused across steps of one run.
class Stepper {
public:
  Stepper(const ModelParams& params, const SimConfig& config) : p_(params), c_(config) {}

  // Fills a with Du/Dt for positions x, speeds u.
  void accelerations(double t, double L, double mu, const std::vector<double>& x,
                     const std::vector<double>& u, std::vector<double>& a) {
    const std::size_t n = x.size();
    cell_.resize(n);
    a.resize(n);
    // Cell j lies between particle j and j+1; its density is mu / gap and it
    // carries pressure plus von Neumann-Richtmyer viscosity in compression.
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t k = j + 1 == n ? 0 : j + 1;
      const double d = gap(x[j], x[k], L);
      if (!(d > 0.0)) throw DegenerateSpacing("coincident particles at t=" + fmt(t));
      const double rho = mu / d;
      if (!(rho < p_.rho_max)) {
        throw DensityOverflow("density " + fmt(rho) + " reached rho_max at x=" + fmt(x[j]) +
                              ", t=" + fmt(t));
      }
      const double du = u[k] - u[j];
      double q = 0.0;
      if (du < 0.0) {
        const double c = std::sqrt(p_.beta * rho / (p_.rho_max - rho));
        q = rho * (c_.visc_coeff * du * du - c_.visc_linear * c * du);
      }
      cell_[j] = model::pressure(p_, rho) + q;
    }
    const double inv_mu = 1.0 / mu;
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t prev = i == 0 ? n - 1 : i - 1;
      const std::size_t next = i + 1 == n ? 0 : i + 1;
      const double rho = 2.0 * mu / gap(x[prev], x[next], L);
      const double relax = (p_.u0 * (1.0 - rho / p_.rho_max) - u[i]) / p_.tau;
      a[i] = -(cell_[i] - cell_[prev]) * inv_mu + relax;
    }
  }

  double stable_dt(const ParticleState& s) const {
    const std::size_t n = s.size();
    const double L = s.ring_length;
    const double floor = 1e-9 * p_.u0;
    double dt = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t prev = i == 0 ? n - 1 : i - 1;
      const std::size_t next = i + 1 == n ? 0 : i + 1;
      const double d_back = gap(s.x[prev], s.x[i], L);
      const double d_fwd = gap(s.x[i], s.x[next], L);
      const double rho = std::min(2.0 * s.mu / (d_back + d_fwd), std::nextafter(p_.rho_max, 0.0));
      const double ubar = (s.u[prev] + s.u[i] + s.u[next]) / 3.0;
      const double c = std::sqrt(p_.beta * rho / (p_.rho_max - rho));
      dt = std::min(dt, std::min(d_back, d_fwd) / (std::abs(s.u[i] - ubar) + c + floor));
    }
    return c_.cfl * dt;
  }

  // Advances s in place; returns false if cyclic order broke.
  bool try_advance(ParticleState& s, double dt) {
    const std::size_t n = s.size();
    const double L = s.ring_length;
    accelerations(s.t, L, s.mu, s.x, s.u, a0_);
    x1_.resize(n);
    u1_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      x1_[i] = wrap(s.x[i] + dt * s.u[i], L);
      u1_[i] = s.u[i] + dt * a0_[i];
    }
    if (!ordered(x1_, L)) return false;
    accelerations(s.t + dt, L, s.mu, x1_, u1_, a1_);
    x2_.resize(n);
    u2_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      x2_[i] = wrap(s.x[i] + 0.5 * dt * (s.u[i] + u1_[i]), L);
      u2_[i] = s.u[i] + 0.5 * dt * (a0_[i] + a1_[i]);
    }
    if (!ordered(x2_, L)) return false;
    const double min_gap = s.mu / p_.rho_max;
    for (std::size_t i = 0; i < n; ++i) {
      if (!(gap(x2_[i], x2_[i + 1 == n ? 0 : i + 1], L) > min_gap)) {
        throw DensityOverflow("density reached rho_max near x=" + fmt(x2_[i]) + ", t=" +
                              fmt(s.t + dt));
      }
    }
    s.x.swap(x2_);
    s.u.swap(u2_);
    s.t += dt;
    return true;
  }

  void advance(ParticleState& s, double dt_limit) {
    double dt = std::min(stable_dt(s), dt_limit);
    const bool hits_limit = dt == dt_limit;
    const double t_target = s.t + dt_limit;
    std::string last;
    bool overflow = false;
    for (int attempt = 0; attempt <= 10; ++attempt) {
      try {
        if (try_advance(s, dt)) {
          if (hits_limit && attempt == 0) s.t = t_target;
          return;
        }
        last = "cyclic order violated";
        overflow = false;
      } catch (const DensityOverflow& e) {
        last = e.detail();
        overflow = true;
      }
      dt *= 0.5;
    }
    if (overflow) throw DensityOverflow(last + " (after 10 step halvings)");
    throw StepTooLarge(last + " at t=" + fmt(s.t) + " after 10 step halvings");
  }

  static bool ordered(const std::vector<double>& x, double L) {
    const std::size_t n = x.size();
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = gap(x[i], x[i + 1 == n ? 0 : i + 1], L);
      if (!(d > 0.0) || d >= 0.5 * L) return false;
      total += d;
    }
    return std::abs(total - L) <= 1e-9 * L;
  }

private:
  ModelParams p_;
  SimConfig c_;
  std::vector<double> cell_, a0_, a1_, x1_, u1_, x2_, u2_;
};

double interp_periodic(const std::vector<double>& xs, const std::vector<double>& ys, double L,
                       double x) {
  // xs ascending in [0, L)
  const std::size_t n = xs.size();
  auto it = std::upper_bound(xs.begin(), xs.end(), x);
  std::size_t hi = static_cast<std::size_t>(it - xs.begin());
  double x0, x1, y0, y1;
  if (hi == 0) {
    x0 = xs[n - 1] - L;
    y0 = ys[n - 1];
    x1 = xs[0];
    y1 = ys[0];
  } else if (hi == n) {
    x0 = xs[n - 1];
    y0 = ys[n - 1];
    x1 = xs[0] + L;
    y1 = ys[0];
  } else {
    x0 = xs[hi - 1];
    y0 = ys[hi - 1];
    x1 = xs[hi];
    y1 = ys[hi];
  }
  const double w = (x - x0) / (x1 - x0);
  return y0 + w * (y1 - y0);
}

}  // namespace

void SimConfig::validate(const ModelParams& params) const {
  if (n_particles < 1000 || n_particles > 100000) {
    throw ConfigError("n_particles " + std::to_string(n_particles) + " outside [1000, 100000]");
  }
  if (!(ring_length > 0.0) || !std::isfinite(ring_length)) throw ConfigError("ring_length must be positive");
  if (!(mu > 0.0) || !std::isfinite(mu)) throw ConfigError("mass per particle must be positive");
  if (static_cast<double>(n_particles) < 100.0 * vehicles() * (1.0 - 1e-12)) {
    throw ConfigError("n_particles must exceed the vehicle count " + fmt(vehicles()) +
                      " by at least 100x");
  }
  if (!(base_density() < params.rho_max)) throw ConfigError("base density must be below rho_max");
  if (!(cfl > 0.0 && cfl <= 1.0)) throw ConfigError("cfl must lie in (0, 1]");
  if (!(visc_coeff >= 0.0)) throw ConfigError("visc_coeff must be non-negative");
  if (!(visc_linear >= 0.0)) throw ConfigError("visc_linear must be non-negative");
  if (mode < 1) throw ConfigError("perturbation mode must be >= 1");
  if (!(amplitude >= 0.0)) throw ConfigError("perturbation amplitude must be >= 0");
  if (!(t_end >= 0.0)) throw ConfigError("t_end must be >= 0");
  if (!(output_every > 0.0)) throw ConfigError("output_every must be positive");
}

SimConfig ring_config(std::size_t n_particles, double ring_length, double base_density) {
  SimConfig c;
  c.n_particles = n_particles;
  c.ring_length = ring_length;
  c.mu = base_density * ring_length / static_cast<double>(n_particles);
  return c;
}

ParticleState init_uniform_perturbed(const SimConfig& config, const ModelParams& params) {
  config.validate(params);
  if (config.amplitude >= 1.0) {
    throw InvalidPerturbation("relative amplitude " + fmt(config.amplitude) +
                              " would reorder particles (must be < 1)");
  }
  const std::size_t n = config.n_particles;
  const double L = config.ring_length;
  const double k = 2.0 * std::numbers::pi * config.mode / L;
  ParticleState s;
  s.ring_length = L;
  s.mu = config.mu;
  s.x.resize(n);
  s.u.resize(n);
  // x = X - a sin(k X) / k has dx/dX = 1 - a cos(k X): density rho0 / (1 - a cos(k X)).
  for (std::size_t i = 0; i < n; ++i) {
    const double X = (static_cast<double>(i) + 0.5) * L / static_cast<double>(n);
    s.x[i] = wrap(X - config.amplitude * std::sin(k * X) / k, L);
  }
  if (!Stepper::ordered(s.x, L)) throw InvalidPerturbation("perturbed particles are not ordered");
  if (config.amplitude == 0.0) {
    std::fill(s.u.begin(), s.u.end(), model::desired_speed(params, config.base_density()));
  } else {
    const auto rho = density_estimate(s);
    for (std::size_t i = 0; i < n; ++i) s.u[i] = model::desired_speed(params, rho[i]);
  }
  return s;
}

double spacing_ahead(const ParticleState& state, std::size_t i) {
  const std::size_t n = state.size();
  return gap(state.x[i], state.x[(i + 1) % n], state.ring_length);
}

std::vector<double> density_estimate(const ParticleState& s, DensityEstimator estimator) {
  const std::size_t n = s.size();
  const double L = s.ring_length;
  std::vector<double> rho(n);
  if (estimator == DensityEstimator::spacing) {
    for (std::size_t i = 0; i < n; ++i) {
      const double d = gap(s.x[(i + n - 1) % n], s.x[(i + 1) % n], L);
      if (!(d > 0.0)) throw DegenerateSpacing("coincident neighbours of particle " + std::to_string(i));
      rho[i] = 2.0 * s.mu / d;
    }
    return rho;
  }
  // Cubic B-spline kernel with support 2h; h tied to the local spacing.
  for (std::size_t i = 0; i < n; ++i) {
    const double local = 0.5 * gap(s.x[(i + n - 1) % n], s.x[(i + 1) % n], L);
    if (!(local > 0.0)) throw DegenerateSpacing("coincident neighbours of particle " + std::to_string(i));
    const double h = 1.3 * local;
    auto W = [h](double r) {
      const double q = std::abs(r) / h;
      const double norm = 2.0 / (3.0 * h);
      if (q < 1.0) return norm * (1.0 - 1.5 * q * q + 0.75 * q * q * q);
      if (q < 2.0) return norm * 0.25 * (2.0 - q) * (2.0 - q) * (2.0 - q);
      return 0.0;
    };
    double sum = W(0.0);
    double r = 0.0;
    for (std::size_t j = 1; j < n; ++j) {
      r += gap(s.x[(i + j - 1) % n], s.x[(i + j) % n], L);
      if (r >= 2.0 * h) break;
      sum += W(r);
    }
    r = 0.0;
    for (std::size_t j = 1; j < n; ++j) {
      r += gap(s.x[(i + n - j) % n], s.x[(i + n - j + 1) % n], L);
      if (r >= 2.0 * h) break;
      sum += W(r);
    }
    rho[i] = s.mu * sum;
  }
  return rho;
}

std::vector<double> accel(const ParticleState& state, const ModelParams& params,
                          const SimConfig& config) {
  Stepper st(params, config);
  std::vector<double> a;
  st.accelerations(state.t, state.ring_length, state.mu, state.x, state.u, a);
  return a;
}

double stable_dt(const ParticleState& state, const ModelParams& params, const SimConfig& config) {
  return Stepper(params, config).stable_dt(state);
}

ParticleState step(const ParticleState& state, const ModelParams& params, const SimConfig& config,
                   double dt_limit) {
  ParticleState next = state;
  Stepper(params, config).advance(next, dt_limit);
  return next;
}

FieldSnapshot snapshot(const ParticleState& s, std::size_t resample_points) {
  const std::size_t n = s.size();
  const auto rho = density_estimate(s);
  const std::size_t seam = static_cast<std::size_t>(
      std::min_element(s.x.begin(), s.x.end()) - s.x.begin());
  FieldSnapshot snap;
  snap.t = s.t;
  snap.ring_length = s.ring_length;
  snap.x.resize(n);
  snap.rho.resize(n);
  snap.u.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t i = (seam + j) % n;
    snap.x[j] = s.x[i];
    snap.rho[j] = rho[i];
    snap.u[j] = s.u[i];
  }
  if (resample_points == 0) return snap;

  FieldSnapshot grid;
  grid.t = snap.t;
  grid.ring_length = snap.ring_length;
  grid.x.resize(resample_points);
  grid.rho.resize(resample_points);
  grid.u.resize(resample_points);
  for (std::size_t k = 0; k < resample_points; ++k) {
    const double x = s.ring_length * static_cast<double>(k) / static_cast<double>(resample_points);
    grid.x[k] = x;
    grid.rho[k] = interp_periodic(snap.x, snap.rho, s.ring_length, x);
    grid.u[k] = interp_periodic(snap.x, snap.u, s.ring_length, x);
  }
  return grid;
}

void run_from(ParticleState state, const SimConfig& config, const ModelParams& params,
              const std::function<void(const FieldSnapshot&)>& sink) {
  Stepper st(params, config);
  sink(snapshot(state, config.snapshot_points));
  const double t0 = state.t;
  for (long k = 1;; ++k) {
    const double target = std::min(t0 + static_cast<double>(k) * config.output_every, config.t_end);
    if (!(target > state.t)) break;
    while (state.t < target) st.advance(state, target - state.t);
    sink(snapshot(state, config.snapshot_points));
    if (target >= config.t_end) break;
  }
}

void run(const SimConfig& config, const ModelParams& params,
         const std::function<void(const FieldSnapshot&)>& sink) {
  run_from(init_uniform_perturbed(config, params), config, params, sink);
}

std::vector<FieldSnapshot> run(const SimConfig& config, const ModelParams& params) {
  std::vector<FieldSnapshot> out;
  run(config, params, [&](const FieldSnapshot& s) { out.push_back(s); });
  return out;
}

double density_range(const std::vector<double>& rho) {
  const auto [lo, hi] = std::minmax_element(rho.begin(), rho.end());
  return *hi - *lo;
}

}  // namespace jamiton::sim
