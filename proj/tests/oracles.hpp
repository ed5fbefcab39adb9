#pragma once

// Independent reference computations shared by the unit and acceptance tests.
// Written from the model equations directly; nothing here calls the solver.

#include <algorithm>
#include <cmath>

#include "jamiton/model.hpp"
#include "jamiton/solver.hpp"

namespace oracle {

using jamiton::model::ModelParams;
using jamiton::solver::WaveFrame;

// Hand-derived closed form of the CJ frame for the linear desired speed and
// the beta rho/(R - rho) pressure slope.
struct ClosedFormCj {
  double s, m, u_sonic, rho_sonic;
};

inline ClosedFormCj closed_form_cj(const ModelParams& p, double rho_minus) {
  const double R = p.rho_max, U = p.u0;
  const double u_minus = U * (1 - rho_minus / R);
  const double a = U * rho_minus / R;
  const double rho_s = a * a * R / (p.beta + a * a);
  const double s = u_minus - a * rho_s / rho_minus;
  return {s, rho_minus * (u_minus - s), s + a, rho_s};
}

// Residuals written out directly from the model, independent of the library.
inline double N_ref(const ModelParams& p, double s, double m, double u) {
  const double rho = m / (u - s);
  return (u - s) * (p.u0 * (1 - rho / p.rho_max) - u);
}

inline double D_ref(const ModelParams& p, double s, double m, double u) {
  const double rho = m / (u - s);
  return (u - s) * (u - s) - p.beta * rho / (p.rho_max - rho);
}

inline double p_ref(const ModelParams& p, double rho) {
  return p.beta * (-p.rho_max * std::log(1 - rho / p.rho_max) - rho);
}

// Sonic relative speed by bisection on D = 0 over w in (m/R, large).
inline double sonic_w_ref(const ModelParams& p, double m) {
  double a = m / p.rho_max * (1 + 1e-12), b = 100.0;
  auto D = [&](double w) { return D_ref(p, 0.0, m, w); };
  for (int i = 0; i < 300; ++i) {
    const double c = 0.5 * (a + b);
    (D(c) < 0 ? a : b) = c;
  }
  return 0.5 * (a + b);
}

// Brute-force 2-D residual grid, zoomed around its minimum.
inline WaveFrame grid_oracle(const ModelParams& p, double rho_minus) {
  const double U = p.u0, R = p.rho_max;
  const double u_minus = U * (1 - rho_minus / R);
  const double c_minus = std::sqrt(p.beta * rho_minus / (R - rho_minus));
  auto residual = [&](double s, double m) {
    if (m <= 0) return 1e300;
    const double w = sonic_w_ref(p, m);
    return std::abs(m - rho_minus * (u_minus - s)) / (rho_minus * U) +
           std::abs(N_ref(p, s, m, s + w)) / (U * U);
  };
  // The far state is trivially "sonic" at s = u_- - c_-; search strictly below it.
  double s_lo = u_minus - U, s_hi = u_minus - c_minus - 0.05 * U;
  double m_lo = 1e-6, m_hi = rho_minus * U * 2;
  double best_s = 0, best_m = 0;
  const int n = 60;
  for (int level = 0; level < 14; ++level) {
    double best = 1e300;
    for (int i = 0; i <= n; ++i) {
      const double s = s_lo + (s_hi - s_lo) * i / n;
      for (int j = 0; j <= n; ++j) {
        const double m = m_lo + (m_hi - m_lo) * j / n;
        const double r = residual(s, m);
        if (r < best) {
          best = r;
          best_s = s;
          best_m = m;
        }
      }
    }
    const double ds = 4 * (s_hi - s_lo) / n, dm = 4 * (m_hi - m_lo) / n;
    s_lo = best_s - ds;
    s_hi = best_s + ds;
    m_lo = std::max(1e-9, best_m - dm);
    m_hi = best_m + dm;
  }
  return {best_s, best_m};
}

}  // namespace oracle
