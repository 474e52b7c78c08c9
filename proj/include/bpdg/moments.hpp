#pragma once

#include <cmath>
#include <vector>

#include "basis.hpp"
#include "constants.hpp"
#include "mesh.hpp"
#include "quadtables.hpp"

namespace bpdg {

// Macroscopic quantities per spatial cell (x-major, y fastest). Density keeps
// its P1 coefficients; the rest are cell-centre values.
struct MacroField {
  std::size_t cells = 0;
  std::vector<double> rho, rho_x, rho_y;  // density coefficients on {1, xi_x, xi_y}
  std::vector<double> mom_x, mom_y;       // momentum density
  std::vector<double> vel_x, vel_y;       // mean velocity (dimensionless)
  std::vector<double> energy;             // mean energy, units of k_B T_L
  std::vector<int> flag;                  // 1 where density was too small to divide by
};

namespace detail {
inline double angular_weight(const PhaseGrid& g, std::size_t m, std::size_t n) {
  return g.mu.width(m) * (g.two_d() ? g.phi.width(n) : kPi);
}
}  // namespace detail

inline void density(const DGField& f, const PhaseGrid& g, MacroField& out) {
  const std::size_t ns = g.spatial_cells(), nv = g.velocity_cells();
  out.cells = ns;
  out.rho.assign(ns, 0.0);
  out.rho_x.assign(ns, 0.0);
  if (g.two_d()) out.rho_y.assign(ns, 0.0); else out.rho_y.clear();
  const int sY = coef_slot(g.dim, AxisId::Y);
  std::vector<double> wv(nv);
  for (std::size_t k = 0; k < g.nw(); ++k)
    for (std::size_t m = 0; m < g.nmu(); ++m)
      for (std::size_t n = 0; n < g.nphi(); ++n) wv[g.velocity_index(k, m, n)] = g.w.width(k) * detail::angular_weight(g, m, n);
  for (std::size_t s = 0; s < ns; ++s) {
    const std::size_t base = s * nv;
    double a = 0.0, b = 0.0, c = 0.0;
    for (std::size_t v = 0; v < nv; ++v) {
      a += wv[v] * f.c[0][base + v];
      b += wv[v] * f.c[1][base + v];
      if (sY > 0) c += wv[v] * f.c[static_cast<std::size_t>(sY)][base + v];
    }
    out.rho[s] = a;
    out.rho_x[s] = b;
    if (sY > 0) out.rho_y[s] = c;
  }
}

inline MacroField density(const DGField& f, const PhaseGrid& g) {
  MacroField m;
  density(f, g, m);
  return m;
}

inline constexpr double kDensityFloor = 1e-300;

// Momentum density from the velocity-cell moments of g1 (and g2 in 2D), and
// mean velocity = momentum / density at the cell centre.
inline void momentum_and_velocity(const DGField& f, const StreamingTables& st, const PhaseGrid& g, MacroField& out) {
  if (out.rho.size() != g.spatial_cells()) density(f, g, out);
  const std::size_t ns = g.spatial_cells(), nv = g.velocity_cells();
  const int sW = coef_slot(g.dim, AxisId::W), sM = coef_slot(g.dim, AxisId::Mu), sP = coef_slot(g.dim, AxisId::Phi);
  out.mom_x.assign(ns, 0.0);
  out.vel_x.assign(ns, 0.0);
  out.flag.assign(ns, 0);
  if (g.two_d()) {
    out.mom_y.assign(ns, 0.0);
    out.vel_y.assign(ns, 0.0);
  }
  const double pre = g.two_d() ? 1.0 : kPi;
  for (std::size_t s = 0; s < ns; ++s) {
    const std::size_t base = s * nv;
    double px = 0.0, py = 0.0;
    for (std::size_t v = 0; v < nv; ++v) {
      const std::size_t id = base + v;
      const double T = f.c[0][id], W = f.c[static_cast<std::size_t>(sW)][id], M = f.c[static_cast<std::size_t>(sM)][id];
      px += st.g1[v] * T + st.g1w[v] * W + st.g1mu[v] * M;
      if (g.two_d()) py += st.g2[v] * T + st.g2w[v] * W + st.g2mu[v] * M + st.g2phi[v] * f.c[static_cast<std::size_t>(sP)][id];
    }
    out.mom_x[s] = pre * px;
    if (g.two_d()) out.mom_y[s] = py;
    if (std::abs(out.rho[s]) < kDensityFloor) {
      out.flag[s] = 1;
      continue;
    }
    out.vel_x[s] = out.mom_x[s] / out.rho[s];
    if (g.two_d()) out.vel_y[s] = out.mom_y[s] / out.rho[s];
  }
}

// Mean energy: integral of w * Phi over velocity space divided by density.
inline void energy(const DGField& f, const PhaseGrid& g, MacroField& out) {
  if (out.rho.size() != g.spatial_cells()) density(f, g, out);
  const std::size_t ns = g.spatial_cells(), nv = g.velocity_cells();
  const int sW = coef_slot(g.dim, AxisId::W);
  out.energy.assign(ns, 0.0);
  if (out.flag.size() != ns) out.flag.assign(ns, 0);
  for (std::size_t s = 0; s < ns; ++s) {
    const std::size_t base = s * nv;
    double e = 0.0;
    for (std::size_t k = 0; k < g.nw(); ++k) {
      const double wk = g.w.center(k), dw = g.w.width(k);
      for (std::size_t m = 0; m < g.nmu(); ++m)
        for (std::size_t n = 0; n < g.nphi(); ++n) {
          const std::size_t id = base + g.velocity_index(k, m, n);
          e += detail::angular_weight(g, m, n) * (wk * dw * f.c[0][id] + dw * dw / 6.0 * f.c[static_cast<std::size_t>(sW)][id]);
        }
    }
    if (std::abs(out.rho[s]) < kDensityFloor) {
      out.flag[s] = 1;
      continue;
    }
    out.energy[s] = e / out.rho[s];
  }
}

inline MacroField all_moments(const DGField& f, const StreamingTables& st, const PhaseGrid& g) {
  MacroField m;
  density(f, g, m);
  momentum_and_velocity(f, st, g, m);
  energy(f, g, m);
  return m;
}

// Total particle number: sum of cell densities times spatial cell measures.
inline double total_number(const DGField& f, const PhaseGrid& g) {
  const MacroField m = density(f, g);
  double total = 0.0;
  for (std::size_t i = 0; i < g.nx(); ++i)
    for (std::size_t j = 0; j < g.ny(); ++j)
      total += m.rho[i * g.ny() + j] * g.x.width(i) * (g.two_d() ? g.y.width(j) : 1.0);
  return total;
}

}  // namespace bpdg
