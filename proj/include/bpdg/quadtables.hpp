#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <ostream>
#include <iomanip>
#include <stdexcept>
#include <vector>

#include "constants.hpp"
#include "mesh.hpp"
#include "quadrature.hpp"

namespace bpdg {

// Integral over [a, b] of s(w + shift) * weight(w), with s taken as zero where
// its argument is negative. The substitution w + shift = r^2 turns the
// sqrt(w) endpoint behaviour into a smooth integrand in r.
template <class Weight>
double s_weighted_integral(double a, double b, double shift, Weight&& weight, double alpha, const GaussRule& rule) {
  if (!(a >= 0.0) || !(a < b)) throw std::domain_error("s_weighted_integral: need 0 <= a < b");
  const double lo = std::max(a, -shift);
  if (lo >= b) return 0.0;
  const double r0 = std::sqrt(lo + shift), r1 = std::sqrt(b + shift);
  return integrate(rule, r0, r1, [&](double r) {
    const double u = r * r;
    return 2.0 * r * weight_s(u, alpha) * weight(u - shift);
  });
}

template <class Weight>
double s_weighted_integral(double a, double b, double shift, Weight&& weight, double alpha, std::size_t order = 8) {
  return s_weighted_integral(a, b, shift, std::forward<Weight>(weight), alpha, gauss_legendre(order));
}

// ---- collision tables ----------------------------------------------------

// Overlap of destination cell k with the image of source cell k' under the
// shift w -> w + sigma. o[0..3] weight s(w) against
// {1, xi_src(w + sigma), xi_dst(w), xi_src * xi_dst}.
struct OverlapEntry {
  std::size_t src = 0;
  int shift = 0;  // -1, 0, +1 in units of gamma
  std::array<double, 4> o{};
};

struct CollisionTables {
  std::size_t nw = 0;
  double gamma = 0.0;
  std::vector<std::vector<OverlapEntry>> rows;  // indexed by destination cell k
  std::vector<std::array<double, 3>> loss;      // integral of nu * xi^d over cell k

  double overlap(std::size_t k, std::size_t src, int shift, int weight) const {
    for (const auto& e : rows[k])
      if (e.src == src && e.shift == shift) return e.o[static_cast<std::size_t>(weight)];
    return 0.0;
  }
};

inline double flush_tiny(double v) { return std::abs(v) < 1e-300 ? 0.0 : v; }

inline CollisionTables build_collision_tables(const PhaseGrid& g, const DimensionlessConstants& c, std::size_t order = 8) {
  const GaussRule rule = gauss_legendre(order);
  const Axis& w = g.w;
  const double alpha = c.alpha_K;
  CollisionTables t;
  t.nw = w.size();
  t.gamma = c.gamma;
  t.rows.resize(t.nw);
  t.loss.resize(t.nw);
  for (std::size_t k = 0; k < t.nw; ++k) {
    const double a = w.edge(k), b = w.edge(k + 1), wc = w.center(k), hw = w.width(k);
    auto xi_dst = [=](double z) { return 2.0 * (z - wc) / hw; };
    for (int sh = -1; sh <= 1; ++sh) {
      const double sigma = sh * c.gamma;
      for (std::size_t kp = 0; kp < t.nw; ++kp) {
        // w in cell k with w + sigma in cell k'
        const double lo = std::max(a, w.edge(kp) - sigma), hi = std::min(b, w.edge(kp + 1) - sigma);
        if (!(hi > lo)) continue;
        const double wcp = w.center(kp), hwp = w.width(kp);
        auto xi_src = [=](double z) { return 2.0 * (z + sigma - wcp) / hwp; };
        OverlapEntry e;
        e.src = kp;
        e.shift = sh;
        e.o[0] = s_weighted_integral(lo, hi, 0.0, [](double) { return 1.0; }, alpha, rule);
        e.o[1] = s_weighted_integral(lo, hi, 0.0, xi_src, alpha, rule);
        e.o[2] = s_weighted_integral(lo, hi, 0.0, xi_dst, alpha, rule);
        e.o[3] = s_weighted_integral(lo, hi, 0.0, [&](double z) { return xi_src(z) * xi_dst(z); }, alpha, rule);
        for (double& v : e.o) v = flush_tiny(v);
        t.rows[k].push_back(e);
      }
    }
    for (int d = 0; d < 3; ++d) {
      auto wd = [=](double z) { return std::pow(xi_dst(z), d); };
      const double v = c.c0 * s_weighted_integral(a, b, 0.0, wd, alpha, rule) +
                       c.c_plus * s_weighted_integral(a, b, -c.gamma, wd, alpha, rule) +
                       c.c_minus * s_weighted_integral(a, b, c.gamma, wd, alpha, rule);
      t.loss[k][static_cast<std::size_t>(d)] = flush_tiny(2.0 * kPi * v);
    }
  }
  return t;
}

// ---- streaming tables ----------------------------------------------------

// Moments of a one-variable factor over each cell of an axis:
// mom[i][d] = integral over cell i of f * xi^d (not normalised), d = 0, 1, 2.
using MomentTable = std::vector<std::array<double, 3>>;

struct StreamingTables {
  // energy factors
  MomentTable s1, s2;
  std::vector<double> s1_edge;  // s1 at w edges
  // pitch factors: mu, 1 - mu^2, sqrt(1 - mu^2), mu sqrt(1 - mu^2), 1/sqrt(1 - mu^2)
  MomentTable mu, one_minus_mu2, sqrt_1mmu2, mu_sqrt_1mmu2, inv_sqrt_1mmu2;
  std::vector<double> one_minus_mu2_edge, mu_sqrt_1mmu2_edge;
  // azimuth factors (2D): 1, cos, sin
  MomentTable phi_one, cos_phi, sin_phi;
  std::vector<double> sin_phi_edge;
  // momentum moments, indexed by velocity cell (k, m[, n])
  std::vector<double> g1, g1w, g1mu;
  std::vector<double> g2, g2w, g2mu, g2phi;
};

namespace detail {

inline MomentTable polynomial_moments(const Axis& a, const GaussRule& rule, double (*f)(double)) {
  MomentTable t(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double c = a.center(i), h = a.width(i);
    for (int d = 0; d < 3; ++d)
      t[i][static_cast<std::size_t>(d)] =
          integrate(rule, a.edge(i), a.edge(i + 1), [&](double z) { return f(z) * std::pow(2.0 * (z - c) / h, d); });
  }
  return t;
}

// Factors with sqrt(1 - mu^2) behaviour: integrate in t with mu = sin t.
template <class F>
MomentTable pitch_moments(const Axis& a, const GaussRule& rule, F&& f_times_cos) {
  MomentTable t(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double c = a.center(i), h = a.width(i);
    const double t0 = std::asin(std::clamp(a.edge(i), -1.0, 1.0)), t1 = std::asin(std::clamp(a.edge(i + 1), -1.0, 1.0));
    for (int d = 0; d < 3; ++d)
      t[i][static_cast<std::size_t>(d)] = integrate(rule, t0, t1, [&](double th) {
        const double m = std::sin(th);
        return f_times_cos(th) * std::pow(2.0 * (m - c) / h, d);
      });
  }
  return t;
}

// Exact trigonometric moments over [c - h, c + h] with xi = (phi - c)/h.
inline std::array<double, 3> trig_moments(double c, double h, bool cosine) {
  const double sh = std::sin(h), ch = std::cos(h);
  const double e0 = 2.0 * sh;                                 // int cos u
  const double o1 = 2.0 * (sh - h * ch);                      // int u sin u
  const double e2 = 2.0 * ((h * h - 2.0) * sh + 2.0 * h * ch);  // int u^2 cos u
  const double C = std::cos(c), S = std::sin(c);
  if (cosine) return {C * e0, -S * o1 / h, C * e2 / (h * h)};
  return {S * e0, C * o1 / h, S * e2 / (h * h)};
}

}  // namespace detail

inline StreamingTables build_streaming_tables(const PhaseGrid& g, const DimensionlessConstants& c, std::size_t order = 8) {
  const GaussRule rule = gauss_legendre(order);
  const GaussRule fine = gauss_legendre(2 * order);
  const double alpha = c.alpha_K;
  StreamingTables t;
  const Axis& w = g.w;
  t.s1.resize(w.size());
  t.s2.resize(w.size());
  for (std::size_t k = 0; k < w.size(); ++k) {
    const double wc = w.center(k), hw = w.width(k);
    const double r0 = std::sqrt(w.edge(k)), r1 = std::sqrt(w.edge(k + 1));
    for (int d = 0; d < 3; ++d) {
      auto xi = [=](double u) { return std::pow(2.0 * (u - wc) / hw, d); };
      // w = r^2: s1 dw = 2 r^2 sqrt(1 + a r^2)/(1 + 2 a r^2) dr, s2 dw = 2/sqrt(1 + a r^2) dr
      t.s1[k][static_cast<std::size_t>(d)] = integrate(rule, r0, r1, [&](double r) {
        const double u = r * r;
        return 2.0 * u * std::sqrt(1.0 + alpha * u) / (1.0 + 2.0 * alpha * u) * xi(u);
      });
      t.s2[k][static_cast<std::size_t>(d)] =
          integrate(rule, r0, r1, [&](double r) { return 2.0 / std::sqrt(1.0 + alpha * r * r) * xi(r * r); });
    }
  }
  t.s1_edge.resize(w.size() + 1);
  for (std::size_t e = 0; e <= w.size(); ++e) t.s1_edge[e] = weight_s1(w.edge(e), alpha);

  const Axis& mu = g.mu;
  t.mu = detail::polynomial_moments(mu, rule, [](double z) { return z; });
  t.one_minus_mu2 = detail::polynomial_moments(mu, rule, [](double z) { return 1.0 - z * z; });
  t.sqrt_1mmu2 = detail::pitch_moments(mu, fine, [](double th) { return std::cos(th) * std::cos(th); });
  t.mu_sqrt_1mmu2 =
      detail::pitch_moments(mu, fine, [](double th) { return std::sin(th) * std::cos(th) * std::cos(th); });
  t.inv_sqrt_1mmu2 = detail::pitch_moments(mu, fine, [](double) { return 1.0; });
  t.one_minus_mu2_edge.resize(mu.size() + 1);
  t.mu_sqrt_1mmu2_edge.resize(mu.size() + 1);
  for (std::size_t e = 0; e <= mu.size(); ++e) {
    const double m = mu.edge(e);
    t.one_minus_mu2_edge[e] = 1.0 - m * m;
    t.mu_sqrt_1mmu2_edge[e] = m * std::sqrt(std::max(0.0, 1.0 - m * m));
  }

  const std::size_t nw = g.nw(), nm = g.nmu();
  if (g.two_d()) {
    const Axis& phi = g.phi;
    t.phi_one.resize(phi.size());
    t.cos_phi.resize(phi.size());
    t.sin_phi.resize(phi.size());
    for (std::size_t n = 0; n < phi.size(); ++n) {
      const double h = 0.5 * phi.width(n);
      t.phi_one[n] = {phi.width(n), 0.0, phi.width(n) / 3.0};
      t.cos_phi[n] = detail::trig_moments(phi.center(n), h, true);
      t.sin_phi[n] = detail::trig_moments(phi.center(n), h, false);
    }
    t.sin_phi_edge.resize(phi.size() + 1);
    for (std::size_t e = 0; e <= phi.size(); ++e) t.sin_phi_edge[e] = std::sin(phi.edge(e));
    t.sin_phi_edge.front() = 0.0;
    t.sin_phi_edge.back() = 0.0;

    const std::size_t np = g.nphi();
    t.g1.assign(nw * nm * np, 0.0);
    t.g1w = t.g1mu = t.g2 = t.g2w = t.g2mu = t.g2phi = t.g1;
    for (std::size_t k = 0; k < nw; ++k)
      for (std::size_t m = 0; m < nm; ++m)
        for (std::size_t n = 0; n < np; ++n) {
          const std::size_t v = g.velocity_index(k, m, n);
          const auto &a = t.s1[k], &b1 = t.mu[m], &b2 = t.sqrt_1mmu2[m], &cp = t.phi_one[n], &cc = t.cos_phi[n];
          t.g1[v] = c.c_x * a[0] * b1[0] * cp[0];
          t.g1w[v] = c.c_x * a[1] * b1[0] * cp[0];
          t.g1mu[v] = c.c_x * a[0] * b1[1] * cp[0];
          t.g2[v] = c.c_x * a[0] * b2[0] * cc[0];
          t.g2w[v] = c.c_x * a[1] * b2[0] * cc[0];
          t.g2mu[v] = c.c_x * a[0] * b2[1] * cc[0];
          t.g2phi[v] = c.c_x * a[0] * b2[0] * cc[1];
        }
  } else {
    t.g1.assign(nw * nm, 0.0);
    t.g1w = t.g1mu = t.g1;
    for (std::size_t k = 0; k < nw; ++k)
      for (std::size_t m = 0; m < nm; ++m) {
        const std::size_t v = k * nm + m;
        t.g1[v] = c.c_x * t.s1[k][0] * t.mu[m][0];
        t.g1w[v] = c.c_x * t.s1[k][1] * t.mu[m][0];
        t.g1mu[v] = c.c_x * t.s1[k][0] * t.mu[m][1];
      }
  }
  return t;
}

// Plain-text dump of every table entry, one entry per line.
inline void dump_tables(std::ostream& os, const PhaseGrid& g, const CollisionTables& ct, const StreamingTables& st) {
  os << std::setprecision(17);
  for (std::size_t k = 0; k < ct.nw; ++k) {
    for (const auto& e : ct.rows[k])
      os << "overlap " << k << ' ' << e.src << ' ' << e.shift << ' ' << e.o[0] << ' ' << e.o[1] << ' ' << e.o[2] << ' '
         << e.o[3] << '\n';
    os << "loss " << k << ' ' << ct.loss[k][0] << ' ' << ct.loss[k][1] << ' ' << ct.loss[k][2] << '\n';
  }
  auto dump = [&](const char* name, const MomentTable& t) {
    for (std::size_t i = 0; i < t.size(); ++i) os << name << ' ' << i << ' ' << t[i][0] << ' ' << t[i][1] << ' ' << t[i][2] << '\n';
  };
  dump("s1", st.s1);
  dump("s2", st.s2);
  dump("mu", st.mu);
  dump("one_minus_mu2", st.one_minus_mu2);
  dump("sqrt_one_minus_mu2", st.sqrt_1mmu2);
  dump("mu_sqrt_one_minus_mu2", st.mu_sqrt_1mmu2);
  dump("inv_sqrt_one_minus_mu2", st.inv_sqrt_1mmu2);
  if (g.two_d()) {
    dump("cos_phi", st.cos_phi);
    dump("sin_phi", st.sin_phi);
  }
  for (std::size_t v = 0; v < st.g1.size(); ++v) {
    os << "g1 " << v << ' ' << st.g1[v] << ' ' << st.g1w[v] << ' ' << st.g1mu[v];
    if (g.two_d()) os << " g2 " << st.g2[v] << ' ' << st.g2w[v] << ' ' << st.g2mu[v] << ' ' << st.g2phi[v];
    os << '\n';
  }
}

}  // namespace bpdg
