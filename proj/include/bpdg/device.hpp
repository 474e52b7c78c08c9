#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "basis.hpp"
#include "constants.hpp"
#include "mesh.hpp"
#include "poisson.hpp"
#include "quadtables.hpp"
#include "transport.hpp"

namespace bpdg {

// How the x ends of the transport domain are closed.
enum class ContactMode {
  Neutral,     // ghost = adjacent cell scaled so its density equals the doping
  ZeroInflow,  // ghost = 0
  Reflecting,  // mirror in x and mu (needs a mu grid symmetric about 0)
};

struct DeviceSpec {
  std::string name = "diode400";
  Dim dim = Dim::One;
  double length = 1.0;
  double n_plus_cm3 = 5e17;   // contact regions
  double n_minus_cm3 = 2e15;  // channel
  double channel_lo = 0.3, channel_hi = 0.7;
  // 1D contacts
  double v_left = 0.0, v_right = 1.0;
  // 2D electrodes
  double v_source = 0.52354, v_drain = 1.5235, v_gate = 1.06;
  double gate_lo = 0.05, gate_hi = 0.10;
  MosfetMeshSpec geometry;
  ContactMode contacts = ContactMode::Neutral;

  void validate() const {
    if (!(length > 0.0)) throw std::invalid_argument("DeviceSpec: length must be positive");
    if (!(n_plus_cm3 > 0.0) || !(n_minus_cm3 > 0.0)) throw std::invalid_argument("DeviceSpec: doping must be positive");
    if (!(channel_lo >= 0.0 && channel_lo <= channel_hi && channel_hi <= length))
      throw std::invalid_argument("DeviceSpec: channel must lie inside the device");
    if (dim == Dim::Two && !(gate_lo < gate_hi)) throw std::invalid_argument("DeviceSpec: empty gate segment");
  }

  friend bool operator==(const DeviceSpec&, const DeviceSpec&) = default;
};

inline DeviceSpec preset_device(DevicePreset p) {
  DeviceSpec d;
  switch (p) {
    case DevicePreset::Diode400:
      d.name = "diode400";
      d.length = 1.0;
      d.n_plus_cm3 = 5e17;
      d.n_minus_cm3 = 2e15;
      d.channel_lo = 0.3;
      d.channel_hi = 0.7;
      break;
    case DevicePreset::Diode50:
      d.name = "diode50";
      d.length = 0.25;
      d.n_plus_cm3 = 5e18;
      d.n_minus_cm3 = 1e15;
      d.channel_lo = 0.1;
      d.channel_hi = 0.15;
      break;
    case DevicePreset::Mosfet:
      d.name = "mosfet";
      d.dim = Dim::Two;
      d.geometry = MosfetMeshSpec{};
      d.length = d.geometry.length;
      d.n_plus_cm3 = 1e19;
      d.n_minus_cm3 = 1e17;
      d.channel_lo = 0.05;
      d.channel_hi = 0.10;
      break;
  }
  return d;
}

inline std::vector<DevicePreset> preset_catalog() {
  return {DevicePreset::Diode400, DevicePreset::Diode50, DevicePreset::Mosfet};
}

// One doping transition centred at x0 with half-width h. The high value sits
// on the left when high_on_left is set.
inline double smoothed_doping(double x, double x0, double h, double n_high, double n_low, bool high_on_left = true) {
  double y = high_on_left ? (x - x0 + h) / (2.0 * h + 1e-20) : (x0 + h - x) / (2.0 * h + 1e-20);
  y = std::clamp(y, 0.0, 1.0);
  const double b = 1.0 - y * y * y;
  return (n_high - n_low) * b * b * b + n_low;
}

// Doping profile n+ / n / n+ along x, with each junction smoothed over the
// two mesh cells adjacent to it. Values in dimensionless units.
class DopingProfile {
 public:
  DopingProfile(const DeviceSpec& d, const Axis& x, const ConversionFactors& cf = {}) {
    high_ = cf.dimensionless_density(d.n_plus_cm3);
    low_ = cf.dimensionless_density(d.n_minus_cm3);
    lo_ = d.channel_lo;
    hi_ = d.channel_hi;
    h_lo_ = local_width(x, lo_);
    h_hi_ = local_width(x, hi_);
    const GaussRule r = gauss_legendre(8);
    cell_avg_.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
      cell_avg_[i] = integrate(r, x.edge(i), x.edge(i + 1), [&](double z) { return (*this)(z); }) / x.width(i);
  }

  double operator()(double x) const {
    if (x <= 0.5 * (lo_ + hi_)) return smoothed_doping(x, lo_, h_lo_, high_, low_, true);
    return smoothed_doping(x, hi_, h_hi_, high_, low_, false);
  }
  double cell_average(std::size_t i) const { return cell_avg_[i]; }
  const std::vector<double>& cell_averages() const { return cell_avg_; }
  double high() const { return high_; }
  double low() const { return low_; }

 private:
  static double local_width(const Axis& x, double x0) {
    const double z = std::clamp(x0, x.lo(), x.hi());
    return x.width(x.locate(z));
  }
  double high_, low_, lo_, hi_, h_lo_, h_hi_;
  std::vector<double> cell_avg_;
};

// Locally Maxwellian start: per spatial cell, T and W follow the projection of
// s(w) exp(-w), scaled so the density equals the cell-averaged doping.
inline DGField initial_condition(const PhaseGrid& g, const DimensionlessConstants& c, const std::vector<double>& doping_per_x,
                                 std::size_t order = 8) {
  if (doping_per_x.size() != g.nx()) throw std::invalid_argument("initial_condition: doping size mismatch");
  const GaussRule rule = gauss_legendre(order);
  const std::size_t nw = g.nw();
  std::vector<double> i0(nw), i1(nw);
  double total = 0.0;
  for (std::size_t k = 0; k < nw; ++k) {
    const double wc = g.w.center(k), hw = g.w.width(k);
    i0[k] = s_weighted_integral(g.w.edge(k), g.w.edge(k + 1), 0.0, [](double z) { return std::exp(-z); }, c.alpha_K, rule);
    i1[k] = s_weighted_integral(g.w.edge(k), g.w.edge(k + 1), 0.0,
                                [=](double z) { return std::exp(-z) * 2.0 * (z - wc) / hw; }, c.alpha_K, rule);
    total += i0[k];
  }
  DGField f(g);
  const int sW = coef_slot(g.dim, AxisId::W);
  for (std::size_t i = 0; i < g.nx(); ++i) {
    const double F = doping_per_x[i] / (2.0 * kPi * total);
    for (std::size_t j = 0; j < g.ny(); ++j)
      for (std::size_t k = 0; k < nw; ++k) {
        const double t = F * i0[k] / g.w.width(k), w = 3.0 * F * i1[k] / g.w.width(k);
        for (std::size_t m = 0; m < g.nmu(); ++m)
          for (std::size_t n = 0; n < g.nphi(); ++n) {
            const std::size_t id = g.index(i, j, k, m, n);
            f.c[0][id] = t;
            f.c[static_cast<std::size_t>(sW)][id] = w;
          }
      }
  }
  return f;
}

// Cell-average density of one spatial cell (i, j).
inline double cell_density(const DGField& f, const PhaseGrid& g, std::size_t i, std::size_t j) {
  double rho = 0.0;
  for (std::size_t k = 0; k < g.nw(); ++k)
    for (std::size_t m = 0; m < g.nmu(); ++m)
      for (std::size_t n = 0; n < g.nphi(); ++n)
        rho += g.w.width(k) * g.mu.width(m) * (g.two_d() ? g.phi.width(n) : kPi) * f.c[0][g.index(i, j, k, m, n)];
  return rho;
}

namespace detail {
inline std::vector<std::vector<double>> empty_layer(std::size_t nb, std::size_t n) {
  return std::vector<std::vector<double>>(nb, std::vector<double>(n, 0.0));
}
}  // namespace detail

// Neutral contacts: each ghost copies the adjacent interior cell, scaled by
// doping / density of that cell.
inline void contact_ghosts(const DGField& f, const PhaseGrid& g, const std::vector<double>& doping_per_x, GhostLayers& gh) {
  const std::size_t nb = f.nb(), nv = g.velocity_cells(), ny = g.ny();
  gh.x_lo = detail::empty_layer(nb, ny * nv);
  gh.x_hi = detail::empty_layer(nb, ny * nv);
  for (int side = 0; side < 2; ++side) {
    const std::size_t i = side ? g.nx() - 1 : 0;
    auto& layer = side ? gh.x_hi : gh.x_lo;
    for (std::size_t j = 0; j < ny; ++j) {
      const double rho = cell_density(f, g, i, j);
      if (!(rho > 0.0)) throw std::runtime_error("contact_ghosts: nonpositive density next to a contact");
      const double scale = doping_per_x[i] / rho;
      const std::size_t base = g.index(i, j, 0, 0, 0);
      for (std::size_t q = 0; q < nb; ++q)
        for (std::size_t v = 0; v < nv; ++v) layer[q][j * nv + v] = scale * f.c[q][base + v];
    }
  }
}

inline void zero_inflow_ghosts(const PhaseGrid& g, std::size_t nb, GhostLayers& gh) {
  gh.x_lo = detail::empty_layer(nb, g.ny() * g.velocity_cells());
  gh.x_hi = detail::empty_layer(nb, g.ny() * g.velocity_cells());
}

inline bool mu_symmetric(const PhaseGrid& g) {
  const std::size_t nm = g.nmu();
  for (std::size_t e = 0; e <= nm; ++e)
    if (std::abs(g.mu.edge(e) + g.mu.edge(nm - e)) > 1e-12) return false;
  return true;
}

// Reflecting x walls: mirror image in x with mu -> -mu.
inline void reflecting_x_ghosts(const DGField& f, const PhaseGrid& g, GhostLayers& gh) {
  if (!mu_symmetric(g)) throw std::invalid_argument("reflecting walls need a mu grid symmetric about 0");
  const std::size_t nb = f.nb(), nv = g.velocity_cells(), ny = g.ny(), nm = g.nmu();
  const int sX = coef_slot(g.dim, AxisId::X), sM = coef_slot(g.dim, AxisId::Mu);
  gh.x_lo = detail::empty_layer(nb, ny * nv);
  gh.x_hi = detail::empty_layer(nb, ny * nv);
  for (int side = 0; side < 2; ++side) {
    const std::size_t i = side ? g.nx() - 1 : 0;
    auto& layer = side ? gh.x_hi : gh.x_lo;
    for (std::size_t j = 0; j < ny; ++j)
      for (std::size_t k = 0; k < g.nw(); ++k)
        for (std::size_t m = 0; m < nm; ++m)
          for (std::size_t n = 0; n < g.nphi(); ++n) {
            const std::size_t src = g.index(i, j, k, nm - 1 - m, n);
            const std::size_t dst = j * nv + g.velocity_index(k, m, n);
            for (std::size_t q = 0; q < nb; ++q) {
              const double sgn = (static_cast<int>(q) == sX || static_cast<int>(q) == sM) ? -1.0 : 1.0;
              layer[q][dst] = sgn * f.c[q][src];
            }
          }
  }
}

// Specular walls at both y ends: mirror image in y with phi -> pi - phi.
inline void specular_ghosts(const DGField& f, const PhaseGrid& g, GhostLayers& gh) {
  if (!g.two_d()) throw std::invalid_argument("specular_ghosts: 2D grids only");
  const std::size_t np = g.nphi();
  for (std::size_t e = 0; e <= np; ++e)
    if (std::abs(g.phi.edge(e) + g.phi.edge(np - e) - kPi) > 1e-12)
      throw std::invalid_argument("specular_ghosts: phi grid is not symmetric");
  const std::size_t nb = f.nb(), nv = g.velocity_cells(), nx = g.nx();
  gh.y_lo = detail::empty_layer(nb, nx * nv);
  gh.y_hi = detail::empty_layer(nb, nx * nv);
  const int sY = coef_slot(g.dim, AxisId::Y), sP = coef_slot(g.dim, AxisId::Phi);
  for (int side = 0; side < 2; ++side) {
    const std::size_t j = side ? g.ny() - 1 : 0;
    auto& layer = side ? gh.y_hi : gh.y_lo;
    for (std::size_t i = 0; i < nx; ++i)
      for (std::size_t k = 0; k < g.nw(); ++k)
        for (std::size_t m = 0; m < g.nmu(); ++m)
          for (std::size_t n = 0; n < np; ++n) {
            const std::size_t src = g.index(i, j, k, m, mirror_phi(g, n));
            const std::size_t dst = i * nv + g.velocity_index(k, m, n);
            for (std::size_t q = 0; q < nb; ++q) {
              const double sgn = (static_cast<int>(q) == sY || static_cast<int>(q) == sP) ? -1.0 : 1.0;
              layer[q][dst] = sgn * f.c[q][src];
            }
          }
  }
}

// ---- electrostatics of a device -------------------------------------------

inline LdgPoisson make_device_poisson(const DeviceSpec& d, const PhaseGrid& g, const DimensionlessConstants& c) {
  if (!g.two_d()) {
    PoissonBC bc;
    bc.add(Side::Left, d.v_left).add(Side::Right, d.v_right);
    return LdgPoisson(g.x, std::vector<double>(g.nx(), c.eps_r_si), bc, c.c_v);
  }
  const Axis& py = g.poisson_y;
  const double y_si = g.y.hi();
  std::vector<double> eps(g.nx() * py.size());
  for (std::size_t i = 0; i < g.nx(); ++i)
    for (std::size_t j = 0; j < py.size(); ++j) eps[i * py.size() + j] = j < g.ny() ? c.eps_r_si : c.eps_r_ox;
  PoissonBC bc;
  bc.add(Side::Left, d.v_source, 0.0, y_si).add(Side::Right, d.v_drain, 0.0, y_si).add(Side::Top, d.v_gate, d.gate_lo, d.gate_hi);
  return LdgPoisson(g.x, py, eps, bc, c.c_v);
}

}  // namespace bpdg
