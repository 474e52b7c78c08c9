#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "constants.hpp"

namespace bpdg {

struct GaussRule {
  std::vector<double> nodes;    // on [-1, 1], ascending
  std::vector<double> weights;
};

// Gauss-Legendre rule by Newton iteration on P_n, started from the
// Tricomi approximation of the roots.
inline GaussRule gauss_legendre(std::size_t n) {
  if (n == 0) throw std::invalid_argument("gauss_legendre: order must be positive");
  GaussRule r;
  r.nodes.resize(n);
  r.weights.resize(n);
  const double dn = static_cast<double>(n);
  for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(kPi * (static_cast<double>(i) + 0.75) / (dn + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (std::size_t j = 2; j <= n; ++j) {
        const double dj = static_cast<double>(j);
        const double p2 = ((2.0 * dj - 1.0) * z * p1 - (dj - 1.0) * p0) / dj;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0;
      dp = dn * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    // recompute derivative at the converged root for the weight
    double p0 = 1.0, p1 = z;
    for (std::size_t j = 2; j <= n; ++j) {
      const double dj = static_cast<double>(j);
      const double p2 = ((2.0 * dj - 1.0) * z * p1 - (dj - 1.0) * p0) / dj;
      p0 = p1;
      p1 = p2;
    }
    dp = (n == 1) ? 1.0 : dn * (z * p1 - p0) / (z * z - 1.0);
    const double wgt = 2.0 / ((1.0 - z * z) * dp * dp);
    r.nodes[i] = -z;
    r.nodes[n - 1 - i] = z;
    r.weights[i] = wgt;
    r.weights[n - 1 - i] = wgt;
  }
  if (n % 2 == 1) r.nodes[n / 2] = 0.0;
  return r;
}

template <class F>
double integrate(const GaussRule& rule, double a, double b, F&& f) {
  const double h = 0.5 * (b - a), c = 0.5 * (a + b);
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) sum += rule.weights[i] * f(c + h * rule.nodes[i]);
  return sum * h;
}

}  // namespace bpdg
