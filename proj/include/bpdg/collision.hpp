#pragma once

#include <array>
#include <stdexcept>
#include <vector>

#include "basis.hpp"
#include "constants.hpp"
#include "mesh.hpp"
#include "quadtables.hpp"

namespace bpdg {

// Phonon collision operator projected on the P1 basis. The gain term only
// sees the pitch/azimuth-integrated field, so per spatial cell it reduces to a
// sparse product over energy cells; the loss term is cell-local.
class CollisionOperator {
 public:
  CollisionOperator(const PhaseGrid& g, const CollisionTables& t, const DimensionlessConstants& c) : g_(g) {
    if (t.nw != g.nw()) throw std::invalid_argument("collision tables built on a different grid");
    const double strength[3] = {c.c_minus, c.c0, c.c_plus};  // shift -1, 0, +1
    rows_.resize(g.nw());
    loss_.resize(g.nw());
    for (std::size_t k = 0; k < g.nw(); ++k) {
      const double iw = 1.0 / g.w.width(k);
      for (const auto& e : t.rows[k]) {
        const double cs = strength[e.shift + 1] * iw;
        rows_[k].push_back({e.src, {cs * e.o[0], cs * e.o[1], 3.0 * cs * e.o[2], 3.0 * cs * e.o[3]}});
      }
      loss_[k] = {t.loss[k][0] * iw, t.loss[k][1] * iw, t.loss[k][2] * iw};
    }
    // pitch/azimuth measure of each angular cell; 1D carries the pi from the phi integral
    const std::size_t na = g.nmu() * g.nphi();
    angular_measure_.resize(na);
    for (std::size_t m = 0; m < g.nmu(); ++m)
      for (std::size_t n = 0; n < g.nphi(); ++n)
        angular_measure_[m * g.nphi() + n] = g.mu.width(m) * (g.two_d() ? g.phi.width(n) : kPi);
  }

  // rhs += C(f) projected and mass-inverted.
  void accumulate(const DGField& f, DGField& rhs) const {
    check_compatible(f, g_);
    check_compatible(rhs, g_);
    const long long nsp = static_cast<long long>(g_.spatial_cells());
#pragma omp parallel for schedule(static)
    for (long long s = 0; s < nsp; ++s) spatial_cell(static_cast<std::size_t>(s), f, rhs);
  }

  DGField apply(const DGField& f) const {
    DGField rhs(g_);
    accumulate(f, rhs);
    return rhs;
  }

 private:
  struct Row {
    std::size_t src;
    std::array<double, 4> w;  // gain weights for T (O0, O1) and W (O2, O3), with c_sigma/dw folded in
  };

  void spatial_cell(std::size_t s, const DGField& f, DGField& rhs) const {
    const bool two = g_.two_d();
    const std::size_t nw = g_.nw(), na = g_.nmu() * g_.nphi(), base = s * nw * na;
    const int sX = 1, sY = two ? 2 : -1, sW = two ? 3 : 2;
    const std::size_t nb = f.nb();
    std::vector<double> tb(nw, 0.0), wb(nw, 0.0), xb(nw, 0.0), yb(nw, 0.0);
    const double* T = f.c[0].data() + base;
    const double* Xc = f.c[sX].data() + base;
    const double* Wc = f.c[sW].data() + base;
    const double* Yc = two ? f.c[sY].data() + base : nullptr;
    for (std::size_t k = 0; k < nw; ++k)
      for (std::size_t a = 0; a < na; ++a) {
        const std::size_t id = k * na + a;
        const double am = angular_measure_[a];
        tb[k] += am * T[id];
        wb[k] += am * Wc[id];
        xb[k] += am * Xc[id];
        if (two) yb[k] += am * Yc[id];
      }
    for (std::size_t k = 0; k < nw; ++k) {
      double gT = 0.0, gW = 0.0, gX = 0.0, gY = 0.0;
      for (const Row& r : rows_[k]) {
        gT += r.w[0] * tb[r.src] + r.w[1] * wb[r.src];
        gW += r.w[2] * tb[r.src] + r.w[3] * wb[r.src];
        gX += r.w[0] * xb[r.src];
        gY += r.w[0] * yb[r.src];
      }
      const auto& L = loss_[k];
      for (std::size_t a = 0; a < na; ++a) {
        const std::size_t id = base + k * na + a;
        const double t = f.c[0][id], w = f.c[sW][id];
        rhs.c[0][id] += gT - (L[0] * t + L[1] * w);
        rhs.c[sW][id] += gW - 3.0 * (L[1] * t + L[2] * w);
        rhs.c[sX][id] += gX - L[0] * f.c[sX][id];
        if (two) rhs.c[sY][id] += gY - L[0] * f.c[sY][id];
        for (std::size_t q = 1; q < nb; ++q) {
          if (static_cast<int>(q) == sX || static_cast<int>(q) == sY || static_cast<int>(q) == sW) continue;
          rhs.c[q][id] -= L[0] * f.c[q][id];
        }
      }
    }
  }

  PhaseGrid g_;
  std::vector<std::vector<Row>> rows_;
  std::vector<std::array<double, 3>> loss_;
  std::vector<double> angular_measure_;
};

}  // namespace bpdg
