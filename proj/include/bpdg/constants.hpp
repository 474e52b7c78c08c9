#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace bpdg {

inline constexpr double kPi = 3.14159265358979323846;

// Scaled silicon parameters. Lattice temperature is fixed at 300 K, so the
// energy unit is k_B T_L and lengths/times are in micrometres/picoseconds.
struct DimensionlessConstants {
  double c0 = 0.26531;       // acoustic (elastic) scattering strength
  double c_plus = 0.50705;   // phonon absorption strength
  double c_minus = 0.04432;  // phonon emission strength
  double c_x = 0.16857;      // streaming speed scale
  double c_k = 0.32606;      // force scale
  double c_p = 1830349.0;    // Poisson coupling
  double c_v = 10.0;         // field scale
  double gamma = 2.43723;    // phonon energy jump
  double alpha_K = 0.01292;  // Kane non-parabolicity
  double eps_r_si = 11.7;
  double eps_r_ox = 3.9;

  void validate() const {
    const double vals[] = {c0, c_plus, c_minus, c_x, c_k, c_p, c_v, gamma, alpha_K, eps_r_si, eps_r_ox};
    const char* names[] = {"c0", "c_plus", "c_minus", "c_x", "c_k", "c_p", "c_v", "gamma", "alpha_K",
                           "eps_r_si", "eps_r_ox"};
    for (int i = 0; i < 11; ++i) {
      if (!(vals[i] > 0.0) || !std::isfinite(vals[i]))
        throw std::invalid_argument(std::string("constant must be positive and finite: ") + names[i]);
    }
  }

  friend bool operator==(const DimensionlessConstants&, const DimensionlessConstants&) = default;
};

struct ConversionFactors {
  double density_factor = 1.0115e26;  // m^-3 per dimensionless density
  double energy_factor = 0.025849;    // eV per unit of k_B T_L
  double length_scale = 1e-6;         // m
  double time_scale = 1e-12;          // s
  double voltage_scale = 1.0;         // V
  double velocity_factor = 1e6;       // m/s, length_scale / time_scale
  double field_kV_per_cm = 1.0;       // kV/cm per dimensionless field unit

  double density_cm3(double rho) const { return rho * density_factor * 1e-6; }
  double dimensionless_density(double n_cm3) const { return n_cm3 * 1e6 / density_factor; }
  double velocity_cm_s(double v) const { return v * velocity_factor * 100.0; }
  double energy_eV(double w) const { return w * energy_factor; }
};

inline DimensionlessConstants default_silicon() { return DimensionlessConstants{}; }

inline double phonon_occupation(double gamma) {
  if (!(gamma > 0.0)) throw std::domain_error("phonon_occupation: gamma must be positive");
  return 1.0 / std::expm1(gamma);
}

// Relative mismatch |c-(n+1) - c+ n| / (c+ n); zero means exact detailed balance.
inline double detailed_balance_mismatch(const DimensionlessConstants& c) {
  const double n = phonon_occupation(c.gamma);
  return std::abs(c.c_minus * (n + 1.0) - c.c_plus * n) / (c.c_plus * n);
}

// Energy weights of the transformed system. s is the density of states in
// (w, mu, phi); s1 and s2 are the group-velocity and force factors.
inline double kane_root(double w, double alpha) { return std::sqrt(w * (1.0 + alpha * w)); }

inline double weight_s(double w, double alpha) {
  if (w <= 0.0) return 0.0;
  return kane_root(w, alpha) * (1.0 + 2.0 * alpha * w);
}

inline double weight_s1(double w, double alpha) {
  if (w <= 0.0) return 0.0;
  return kane_root(w, alpha) / (1.0 + 2.0 * alpha * w);
}

inline double weight_s2(double w, double alpha) { return 1.0 / kane_root(w, alpha); }

inline double loss_frequency(double w, const DimensionlessConstants& c) {
  return 2.0 * kPi *
         (c.c0 * weight_s(w, c.alpha_K) + c.c_plus * weight_s(w - c.gamma, c.alpha_K) +
          c.c_minus * weight_s(w + c.gamma, c.alpha_K));
}

}  // namespace bpdg
