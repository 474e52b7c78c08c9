#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "basis.hpp"
#include "constants.hpp"
#include "mesh.hpp"
#include "quadtables.hpp"

namespace bpdg {

// Cell-mean field per spatial cell (x-major, y fastest).
struct FieldSample {
  std::vector<double> ex, ey;
};

// Advection coefficients of the transformed transport equation (1-based index
// as in the usual x, y, w, mu, phi ordering). In 1D pass ey = 0, phi = pi/2.
inline double eval_g(int index, double w, double mu, double phi, double ex, double ey, const DimensionlessConstants& c) {
  const double a = c.alpha_K;
  const double sq = std::sqrt(std::max(0.0, 1.0 - mu * mu));
  switch (index) {
    case 1: return c.c_x * mu * weight_s1(w, a);
    case 2: return c.c_x * sq * std::cos(phi) * weight_s1(w, a);
    case 3: return -2.0 * c.c_k * weight_s1(w, a) * (mu * ex + sq * std::cos(phi) * ey);
    case 4: return -c.c_k * weight_s2(w, a) * ((1.0 - mu * mu) * ex - mu * sq * std::cos(phi) * ey);
    case 5: return c.c_k * ey * std::sin(phi) * weight_s2(w, a) / sq;
    default: throw std::invalid_argument("eval_g: index must be 1..5");
  }
}

// Boundary data for x (contacts) and, in 2D, y (walls). Each layer holds
// [slot][cross index * velocity_cells + v]; the cross index is j for x layers
// and i for y layers.
struct GhostLayers {
  std::vector<std::vector<double>> x_lo, x_hi, y_lo, y_hi;
};

namespace detail {

// Symmetric matrix of products of normalised per-axis moments:
// entry (r, c) = prod_t m_t[(r == t) + (c == t)], index 0 = constant.
template <std::size_t NT>
std::array<double, (NT + 1) * (NT + 1)> moment_matrix(const std::array<std::array<double, 3>, NT>& m) {
  constexpr std::size_t N = NT + 1;
  std::array<double, N * N> out{};
  for (std::size_t r = 0; r < N; ++r)
    for (std::size_t c = 0; c < N; ++c) {
      double p = 1.0;
      for (std::size_t t = 1; t <= NT; ++t) p *= m[t - 1][(r == t) + (c == t)];
      out[r * N + c] = p;
    }
  return out;
}

inline std::array<double, 3> normalised(const std::array<double, 3>& mom, double width) {
  return {mom[0] / width, mom[1] / width, mom[2] / width};
}

}  // namespace detail

// Precomputed velocity-space face and volume factors for the upwind DG
// residual. Everything here is field independent.
class TransportOperator {
 public:
  TransportOperator(const PhaseGrid& g, const StreamingTables& st, const DimensionlessConstants& c) : g_(g), c_(c) {
    using detail::moment_matrix;
    using detail::normalised;
    const std::size_t nw = g.nw(), nm = g.nmu(), np = g.nphi();
    auto A = [&](const MomentTable& t, std::size_t k) { return normalised(t[k], g.w.width(k)); };
    auto B = [&](const MomentTable& t, std::size_t m) { return normalised(t[m], g.mu.width(m)); };
    auto C = [&](const MomentTable& t, std::size_t n) { return normalised(t[n], g.phi.width(n)); };
    s1_edge_ = st.s1_edge;
    omm_edge_ = st.one_minus_mu2_edge;
    msq_edge_ = st.mu_sqrt_1mmu2_edge;
    if (!g.two_d()) {
      vx1_.resize(nw * nm);
      v41_.resize(nw * nm);
      for (std::size_t k = 0; k < nw; ++k)
        for (std::size_t m = 0; m < nm; ++m) {
          vx1_[k * nm + m] = moment_matrix<2>({A(st.s1, k), B(st.mu, m)});
          const auto full = moment_matrix<2>({A(st.s2, k), B(st.one_minus_mu2, m)});
          v41_[k * nm + m] = {full[0], full[1], full[2]};
        }
      vw1_.resize(nm);
      for (std::size_t m = 0; m < nm; ++m) vw1_[m] = moment_matrix<1>({B(st.mu, m)});
      vmu1_.resize(nw);
      for (std::size_t k = 0; k < nw; ++k) vmu1_[k] = moment_matrix<1>({A(st.s2, k)});
      return;
    }
    sin_edge_ = st.sin_phi_edge;
    const std::size_t nv = g.velocity_cells();
    vx2_.resize(nv);
    vy2_.resize(nv);
    v4x_.resize(nv);
    v4y_.resize(nv);
    v5_.resize(nv);
    for (std::size_t k = 0; k < nw; ++k)
      for (std::size_t m = 0; m < nm; ++m)
        for (std::size_t n = 0; n < np; ++n) {
          const std::size_t v = g.velocity_index(k, m, n);
          vx2_[v] = moment_matrix<3>({A(st.s1, k), B(st.mu, m), C(st.phi_one, n)});
          vy2_[v] = moment_matrix<3>({A(st.s1, k), B(st.sqrt_1mmu2, m), C(st.cos_phi, n)});
          const auto a = moment_matrix<3>({A(st.s2, k), B(st.one_minus_mu2, m), C(st.phi_one, n)});
          const auto b = moment_matrix<3>({A(st.s2, k), B(st.mu_sqrt_1mmu2, m), C(st.cos_phi, n)});
          const auto d = moment_matrix<3>({A(st.s2, k), B(st.inv_sqrt_1mmu2, m), C(st.sin_phi, n)});
          v4x_[v] = {a[0], a[1], a[2], a[3]};
          v4y_[v] = {b[0], b[1], b[2], b[3]};
          v5_[v] = {d[0], d[1], d[2], d[3]};
        }
    vwx_.resize(nm * np);
    vwy_.resize(nm * np);
    for (std::size_t m = 0; m < nm; ++m)
      for (std::size_t n = 0; n < np; ++n) {
        vwx_[m * np + n] = moment_matrix<2>({B(st.mu, m), C(st.phi_one, n)});
        vwy_[m * np + n] = moment_matrix<2>({B(st.sqrt_1mmu2, m), C(st.cos_phi, n)});
      }
    vmux_.resize(nw * np);
    vmuy_.resize(nw * np);
    for (std::size_t k = 0; k < nw; ++k)
      for (std::size_t n = 0; n < np; ++n) {
        vmux_[k * np + n] = moment_matrix<2>({A(st.s2, k), C(st.phi_one, n)});
        vmuy_[k * np + n] = moment_matrix<2>({A(st.s2, k), C(st.cos_phi, n)});
      }
    vphi_.resize(nw * nm);
    for (std::size_t k = 0; k < nw; ++k)
      for (std::size_t m = 0; m < nm; ++m) vphi_[k * nm + m] = moment_matrix<2>({A(st.s2, k), B(st.inv_sqrt_1mmu2, m)});
  }

  const PhaseGrid& grid() const { return g_; }

  // rhs = mass-inverted streaming residual (rhs is overwritten).
  void apply(const DGField& f, const FieldSample& E, const GhostLayers& gh, DGField& rhs) const {
    check_compatible(f, g_);
    if (!rhs.same_shape(f)) rhs = DGField(g_);
    const std::size_t nsp = g_.spatial_cells(), nvel = g_.velocity_cells();
    if (E.ex.size() != nsp || (g_.two_d() && E.ey.size() != nsp)) throw std::invalid_argument("transport: field sample size mismatch");
    if (gh.x_lo.size() != f.nb() || gh.x_hi.size() != f.nb() || gh.x_lo[0].size() != g_.ny() * nvel ||
        gh.x_hi[0].size() != g_.ny() * nvel)
      throw std::invalid_argument("transport: missing x ghost data");
    if (g_.two_d() && (gh.y_lo.size() != f.nb() || gh.y_hi.size() != f.nb() || gh.y_lo[0].size() != g_.nx() * nvel ||
                       gh.y_hi[0].size() != g_.nx() * nvel))
      throw std::invalid_argument("transport: missing y ghost data");
    const long long n = static_cast<long long>(nsp);
    if (g_.two_d()) {
#pragma omp parallel for schedule(static)
      for (long long s = 0; s < n; ++s) spatial_cell_2d(static_cast<std::size_t>(s), f, E, gh, rhs);
    } else {
#pragma omp parallel for schedule(static)
      for (long long s = 0; s < n; ++s) spatial_cell_1d(static_cast<std::size_t>(s), f, E, gh, rhs);
    }
  }

  // Outward particle flux through the two y walls of a 2D grid, using the
  // same upwind traces as apply(). Returns {net flux, sum of |contributions|}.
  std::array<double, 2> wall_mass_flux(const DGField& f, const GhostLayers& gh) const {
    if (!g_.two_d()) return {0.0, 0.0};
    constexpr std::size_t NB = 6;
    constexpr int Y = 2, W = 3, M = 4, P = 5;
    const std::size_t nvel = g_.velocity_cells(), ny = g_.ny();
    double net = 0.0, gross = 0.0, u[NB], t[NB];
    for (std::size_t i = 0; i < g_.nx(); ++i)
      for (int side = -1; side <= 1; side += 2) {
        const bool upper = side > 0;
        const std::size_t j = upper ? ny - 1 : 0;
        for (std::size_t k = 0; k < g_.nw(); ++k)
          for (std::size_t m = 0; m < g_.nmu(); ++m)
            for (std::size_t n = 0; n < g_.nphi(); ++n) {
              const std::size_t v = g_.velocity_index(k, m, n);
              if ((std::cos(g_.phi.center(n)) > 0.0) == upper) {
                load<NB>(Source{&f.c, (i * ny + j) * nvel + v}, u);
                trace<NB>(u, Y, side, t);
              } else {
                load<NB>(Source{upper ? &gh.y_hi : &gh.y_lo, i * nvel + v}, u);
                trace<NB>(u, Y, -side, t);
              }
              const double* Vy = vy2_[v].data();
              const double f0 = c_.c_x * (Vy[0] * t[0] + Vy[1] * t[W] + Vy[2] * t[M] + Vy[3] * t[P]);
              const double contrib =
                  side * f0 * g_.x.width(i) * g_.w.width(k) * g_.mu.width(m) * g_.phi.width(n);
              net += contrib;
              gross += std::abs(contrib);
            }
      }
    return {net, gross};
  }

 private:
  // Coefficient vector of a neighbour or ghost cell.
  struct Source {
    const std::vector<std::vector<double>>* arr;
    std::size_t idx;
  };

  template <std::size_t NB>
  static void load(const Source& s, double* u) {
    for (std::size_t q = 0; q < NB; ++q) u[q] = (*s.arr)[q][s.idx];
  }

  // F[L[r]] += scale * sum_c V[r][c] t[L[c]] for the velocity block, plus
  // the diagonal entries of spatial tangential slots S.
  template <std::size_t N, std::size_t NS>
  static void face_apply(const double* V, const std::array<int, N>& L, const std::array<int, NS>& S, const double* t,
                         double scale, double* F) {
    for (std::size_t r = 0; r < N; ++r) {
      double sum = 0.0;
      for (std::size_t c = 0; c < N; ++c) sum += V[r * N + c] * t[L[c]];
      F[L[r]] += scale * sum;
    }
    const double d = scale * V[0] / 3.0;
    for (std::size_t s = 0; s < NS; ++s) F[S[s]] += d * t[S[s]];
  }

  // Accumulate a face flux into the residual of the cell that owns acc.
  template <std::size_t NB>
  static void add_face(double* acc, const double* F, int normal, bool upper, double inv_width) {
    for (std::size_t q = 0; q < NB; ++q) {
      if (static_cast<int>(q) == normal) continue;
      acc[q] += (upper ? -F[q] : F[q]) * inv_width;
    }
    acc[normal] -= F[0] * inv_width;
  }

  template <std::size_t NB>
  static void trace(const double* u, int axis_slot, double side, double* t) {
    for (std::size_t q = 0; q < NB; ++q) t[q] = u[q];
    t[0] = u[0] + side * u[axis_slot];
  }

  // ---- 1D kernel: slots T=0 X=1 W=2 M=3 ----
  void spatial_cell_1d(std::size_t i, const DGField& f, const FieldSample& E, const GhostLayers& gh, DGField& rhs) const {
    constexpr std::size_t NB = 4;
    constexpr int X = 1, W = 2, M = 3;
    const std::size_t nw = g_.nw(), nm = g_.nmu(), nvel = nw * nm, nx = g_.nx();
    const double e = E.ex[i];
    const double ix = 1.0 / g_.x.width(i);
    const double cx = c_.c_x, ck = c_.c_k;
    const std::array<int, 3> Lx{0, W, M};
    const std::array<int, 0> none{};
    const std::array<int, 1> sx{X};
    const std::array<int, 2> Lw{0, M}, Lm{0, W};
    const std::size_t base = i * nvel;
    auto cell = [&](std::size_t id) { return Source{&f.c, id}; };
    for (std::size_t k = 0; k < nw; ++k) {
      const double iw = 1.0 / g_.w.width(k);
      for (std::size_t m = 0; m < nm; ++m) {
        const std::size_t v = k * nm + m, id = base + v;
        const double imu = 1.0 / g_.mu.width(m);
        double u[NB], t[NB], nb[NB], acc[NB] = {0, 0, 0, 0}, F[NB];
        load<NB>(cell(id), u);
        const double* Vx = vx1_[v].data();
        const double r1 = Vx[0] * u[0] + Vx[1] * u[W] + Vx[2] * u[M];
        const auto& v4 = v41_[v];
        acc[X] += 2.0 * ix * cx * r1;
        acc[W] += 2.0 * iw * (-2.0 * ck * e) * r1;
        acc[M] += 2.0 * imu * (-ck * e) * (v4[0] * u[0] + v4[1] * u[W] + v4[2] * u[M]);

        // x faces, upwind by the sign of mu
        const bool right_moving = g_.mu.center(m) > 0.0;
        for (int side = -1; side <= 1; side += 2) {
          const bool upper = side > 0;
          if (right_moving == upper) {
            trace<NB>(u, X, side, t);
          } else {
            const bool boundary = upper ? (i + 1 == nx) : (i == 0);
            Source s = boundary ? Source{upper ? &gh.x_hi : &gh.x_lo, v} : cell(upper ? id + nvel : id - nvel);
            load<NB>(s, nb);
            trace<NB>(nb, X, -side, t);
          }
          std::fill(F, F + NB, 0.0);
          face_apply<3, 0>(Vx, Lx, none, t, cx, F);
          add_face<NB>(acc, F, X, upper, ix);
        }
        // w faces: velocity -2 ck s1 mu E; zero at w = 0 and w = w_max
        const double sw = -2.0 * ck * e;
        const bool w_pos = g_.mu.center(m) * e < 0.0;
        for (int side = -1; side <= 1; side += 2) {
          const bool upper = side > 0;
          if (upper ? (k + 1 == nw) : (k == 0)) continue;
          const double s1f = s1_edge_[upper ? k + 1 : k];
          if (w_pos == upper) {
            trace<NB>(u, W, side, t);
          } else {
            load<NB>(cell(upper ? id + nm : id - nm), nb);
            trace<NB>(nb, W, -side, t);
          }
          std::fill(F, F + NB, 0.0);
          face_apply<2, 1>(vw1_[m].data(), Lw, sx, t, sw * s1f, F);
          add_face<NB>(acc, F, W, upper, iw);
        }
        // mu faces: velocity -ck s2 (1 - mu^2) E; zero at mu = +-1
        const bool mu_pos = e < 0.0;
        for (int side = -1; side <= 1; side += 2) {
          const bool upper = side > 0;
          if (upper ? (m + 1 == nm) : (m == 0)) continue;
          const double ff = omm_edge_[upper ? m + 1 : m];
          if (mu_pos == upper) {
            trace<NB>(u, M, side, t);
          } else {
            load<NB>(cell(upper ? id + 1 : id - 1), nb);
            trace<NB>(nb, M, -side, t);
          }
          std::fill(F, F + NB, 0.0);
          face_apply<2, 1>(vmu1_[k].data(), Lm, sx, t, -ck * e * ff, F);
          add_face<NB>(acc, F, M, upper, imu);
        }
        rhs.c[0][id] = acc[0];
        for (std::size_t q = 1; q < NB; ++q) rhs.c[q][id] = 3.0 * acc[q];
      }
    }
  }

  // ---- 2D kernel: slots T=0 X=1 Y=2 W=3 M=4 P=5 ----
  void spatial_cell_2d(std::size_t sidx, const DGField& f, const FieldSample& E, const GhostLayers& gh, DGField& rhs) const {
    constexpr std::size_t NB = 6;
    constexpr int X = 1, Y = 2, W = 3, M = 4, P = 5;
    const std::size_t ny = g_.ny(), nx = g_.nx();
    const std::size_t i = sidx / ny, j = sidx % ny;
    const std::size_t nw = g_.nw(), nm = g_.nmu(), np = g_.nphi(), nvel = nw * nm * np;
    const double ex = E.ex[sidx], ey = E.ey[sidx];
    const double ix = 1.0 / g_.x.width(i), iy = 1.0 / g_.y.width(j);
    const double cx = c_.c_x, ck = c_.c_k;
    const std::array<int, 4> Lv{0, W, M, P};
    const std::array<int, 1> sy{Y}, sx{X};
    const std::array<int, 2> sxy{X, Y};
    const std::array<int, 3> Lw{0, M, P}, Lm{0, W, P}, Lp{0, W, M};
    const std::size_t base = sidx * nvel;
    const std::size_t xstride = ny * nvel, ystride = nvel;
    auto cell = [&](std::size_t id) { return Source{&f.c, id}; };
    double u[NB], t[NB], nb[NB], acc[NB], F[NB];

    auto neighbour_trace = [&](const Source& s, int slot, double side) {
      load<NB>(s, nb);
      trace<NB>(nb, slot, side, t);
    };

    for (std::size_t k = 0; k < nw; ++k) {
      const double iw = 1.0 / g_.w.width(k);
      for (std::size_t m = 0; m < nm; ++m) {
        const double imu = 1.0 / g_.mu.width(m);
        const double mu_c = g_.mu.center(m);
        for (std::size_t n = 0; n < np; ++n) {
          const std::size_t v = (k * nm + m) * np + n, id = base + v;
          const double iphi = 1.0 / g_.phi.width(n);
          const double cphi = std::cos(g_.phi.center(n));
          load<NB>(cell(id), u);
          std::fill(acc, acc + NB, 0.0);
          const double* Vx = vx2_[v].data();
          const double* Vy = vy2_[v].data();
          const double r1 = Vx[0] * u[0] + Vx[1] * u[W] + Vx[2] * u[M] + Vx[3] * u[P];
          const double r2 = Vy[0] * u[0] + Vy[1] * u[W] + Vy[2] * u[M] + Vy[3] * u[P];
          const auto &a4 = v4x_[v], &b4 = v4y_[v], &d5 = v5_[v];
          const double r4x = a4[0] * u[0] + a4[1] * u[W] + a4[2] * u[M] + a4[3] * u[P];
          const double r4y = b4[0] * u[0] + b4[1] * u[W] + b4[2] * u[M] + b4[3] * u[P];
          const double r5 = d5[0] * u[0] + d5[1] * u[W] + d5[2] * u[M] + d5[3] * u[P];
          acc[X] += 2.0 * ix * cx * r1;
          acc[Y] += 2.0 * iy * cx * r2;
          acc[W] += 2.0 * iw * (-2.0 * ck) * (ex * r1 + ey * r2);
          acc[M] += 2.0 * imu * (-ck) * (ex * r4x - ey * r4y);
          acc[P] += 2.0 * iphi * ck * ey * r5;

          // x faces
          const bool xpos = mu_c > 0.0;
          for (int side = -1; side <= 1; side += 2) {
            const bool upper = side > 0;
            if (xpos == upper) {
              trace<NB>(u, X, side, t);
            } else if (upper ? (i + 1 == nx) : (i == 0)) {
              neighbour_trace(Source{upper ? &gh.x_hi : &gh.x_lo, j * nvel + v}, X, -side);
            } else {
              neighbour_trace(cell(upper ? id + xstride : id - xstride), X, -side);
            }
            std::fill(F, F + NB, 0.0);
            face_apply<4, 1>(Vx, Lv, sy, t, cx, F);
            add_face<NB>(acc, F, X, upper, ix);
          }
          // y faces
          const bool ypos = cphi > 0.0;
          for (int side = -1; side <= 1; side += 2) {
            const bool upper = side > 0;
            if (ypos == upper) {
              trace<NB>(u, Y, side, t);
            } else if (upper ? (j + 1 == ny) : (j == 0)) {
              neighbour_trace(Source{upper ? &gh.y_hi : &gh.y_lo, i * nvel + v}, Y, -side);
            } else {
              neighbour_trace(cell(upper ? id + ystride : id - ystride), Y, -side);
            }
            std::fill(F, F + NB, 0.0);
            face_apply<4, 1>(Vy, Lv, sx, t, cx, F);
            add_face<NB>(acc, F, Y, upper, iy);
          }
          // w faces: two field components, upwinded independently
          {
            const double* VwX = vwx_[m * np + n].data();
            const double* VwY = vwy_[m * np + n].data();
            const bool pos_x = mu_c * ex < 0.0, pos_y = cphi * ey < 0.0;
            for (int side = -1; side <= 1; side += 2) {
              const bool upper = side > 0;
              if (upper ? (k + 1 == nw) : (k == 0)) continue;
              const double sf = -2.0 * ck * s1_edge_[upper ? k + 1 : k];
              const std::size_t nid = upper ? id + nm * np : id - nm * np;
              std::fill(F, F + NB, 0.0);
              if (pos_x == upper) trace<NB>(u, W, side, t); else neighbour_trace(cell(nid), W, -side);
              face_apply<3, 2>(VwX, Lw, sxy, t, sf * ex, F);
              if (pos_y == upper) trace<NB>(u, W, side, t); else neighbour_trace(cell(nid), W, -side);
              face_apply<3, 2>(VwY, Lw, sxy, t, sf * ey, F);
              add_face<NB>(acc, F, W, upper, iw);
            }
          }
          // mu faces
          {
            const double* VmX = vmux_[k * np + n].data();
            const double* VmY = vmuy_[k * np + n].data();
            const bool pos_x = ex < 0.0;
            for (int side = -1; side <= 1; side += 2) {
              const bool upper = side > 0;
              if (upper ? (m + 1 == nm) : (m == 0)) continue;
              const std::size_t e = upper ? m + 1 : m;
              const double mu_lower = g_.mu.center(upper ? m : m - 1);
              const bool pos_y = mu_lower * cphi * ey > 0.0;
              const std::size_t nid = upper ? id + np : id - np;
              std::fill(F, F + NB, 0.0);
              if (pos_x == upper) trace<NB>(u, M, side, t); else neighbour_trace(cell(nid), M, -side);
              face_apply<3, 2>(VmX, Lm, sxy, t, -ck * ex * omm_edge_[e], F);
              if (pos_y == upper) trace<NB>(u, M, side, t); else neighbour_trace(cell(nid), M, -side);
              face_apply<3, 2>(VmY, Lm, sxy, t, ck * ey * msq_edge_[e], F);
              add_face<NB>(acc, F, M, upper, imu);
            }
          }
          // phi faces: velocity ck Ey s2 sin(phi)/sqrt(1 - mu^2); zero at 0 and pi
          {
            const double* Vp = vphi_[k * nm + m].data();
            const bool pos = ey > 0.0;
            for (int side = -1; side <= 1; side += 2) {
              const bool upper = side > 0;
              if (upper ? (n + 1 == np) : (n == 0)) continue;
              if (pos == upper) trace<NB>(u, P, side, t); else neighbour_trace(cell(upper ? id + 1 : id - 1), P, -side);
              std::fill(F, F + NB, 0.0);
              face_apply<3, 2>(Vp, Lp, sxy, t, ck * ey * sin_edge_[upper ? n + 1 : n], F);
              add_face<NB>(acc, F, P, upper, iphi);
            }
          }
          rhs.c[0][id] = acc[0];
          for (std::size_t q = 1; q < NB; ++q) rhs.c[q][id] = 3.0 * acc[q];
        }
      }
    }
  }

  PhaseGrid g_;
  DimensionlessConstants c_;
  std::vector<double> s1_edge_, omm_edge_, msq_edge_, sin_edge_;
  // 1D
  std::vector<std::array<double, 9>> vx1_;
  std::vector<std::array<double, 3>> v41_;
  std::vector<std::array<double, 4>> vw1_, vmu1_;
  // 2D
  std::vector<std::array<double, 16>> vx2_, vy2_;
  std::vector<std::array<double, 4>> v4x_, v4y_, v5_;
  std::vector<std::array<double, 9>> vwx_, vwy_, vmux_, vmuy_, vphi_;
};

}  // namespace bpdg
