#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "constants.hpp"
#include "mesh.hpp"
#include "quadrature.hpp"

namespace bpdg {

enum class AxisId : int { X = 0, Y = 1, W = 2, Mu = 3, Phi = 4 };

// Phase point (x, y, w, mu, phi); 1D grids ignore y and phi.
using PhasePoint = std::array<double, 5>;

// Coefficient slots. Slot 0 multiplies the constant; slot s > 0 multiplies
// the scaled coordinate 2(z - z_c)/dz of axis slot_axis(s).
//   1D: T X W M       2D: T X Y W M P
inline std::size_t num_coefs(Dim d) { return d == Dim::Two ? 6 : 4; }

inline AxisId slot_axis(Dim d, std::size_t s) {
  static constexpr AxisId one[] = {AxisId::X, AxisId::X, AxisId::W, AxisId::Mu};
  static constexpr AxisId two[] = {AxisId::X, AxisId::X, AxisId::Y, AxisId::W, AxisId::Mu, AxisId::Phi};
  if (s == 0) throw std::invalid_argument("slot 0 is the constant");
  return d == Dim::Two ? two[s] : one[s];
}

inline int coef_slot(Dim d, AxisId a) {
  const std::size_t nb = num_coefs(d);
  for (std::size_t s = 1; s < nb; ++s)
    if (slot_axis(d, s) == a) return static_cast<int>(s);
  return -1;
}

inline const char* coef_name(Dim d, std::size_t s) {
  static constexpr const char* one[] = {"T", "X", "W", "M"};
  static constexpr const char* two[] = {"T", "X", "Y", "W", "M", "P"};
  return d == Dim::Two ? two[s] : one[s];
}

struct DGField {
  Dim dim = Dim::One;
  std::vector<std::vector<double>> c;  // c[slot][cell]

  DGField() = default;
  explicit DGField(const PhaseGrid& g) : dim(g.dim), c(num_coefs(g.dim), std::vector<double>(g.cells(), 0.0)) {}

  std::size_t nb() const { return c.size(); }
  std::size_t cells() const { return c.empty() ? 0 : c[0].size(); }
  std::vector<double>& T() { return c[0]; }
  const std::vector<double>& T() const { return c[0]; }
  std::vector<double>& operator[](std::size_t s) { return c[s]; }
  const std::vector<double>& operator[](std::size_t s) const { return c[s]; }

  void fill(double v) {
    for (auto& a : c) std::fill(a.begin(), a.end(), v);
  }
  bool same_shape(const DGField& o) const { return dim == o.dim && nb() == o.nb() && cells() == o.cells(); }

  // this += a * o
  void axpy(double a, const DGField& o) {
    for (std::size_t s = 0; s < nb(); ++s) {
      double* d = c[s].data();
      const double* src = o.c[s].data();
      const std::size_t n = c[s].size();
      for (std::size_t i = 0; i < n; ++i) d[i] += a * src[i];
    }
  }

  friend bool operator==(const DGField&, const DGField&) = default;
};

inline void check_compatible(const DGField& f, const PhaseGrid& g) {
  if (f.dim != g.dim || f.nb() != num_coefs(g.dim) || f.cells() != g.cells())
    throw std::invalid_argument("DGField does not match grid");
}

struct CellIndex {
  std::size_t i = 0, j = 0, k = 0, m = 0, n = 0;
};

inline const Axis& axis_of(const PhaseGrid& g, AxisId a) {
  switch (a) {
    case AxisId::X: return g.x;
    case AxisId::Y: return g.y;
    case AxisId::W: return g.w;
    case AxisId::Mu: return g.mu;
    case AxisId::Phi: return g.phi;
  }
  return g.x;
}

inline std::size_t cell_coord(const CellIndex& c, AxisId a) {
  switch (a) {
    case AxisId::X: return c.i;
    case AxisId::Y: return c.j;
    case AxisId::W: return c.k;
    case AxisId::Mu: return c.m;
    case AxisId::Phi: return c.n;
  }
  return 0;
}

inline std::size_t linear_index(const PhaseGrid& g, const CellIndex& c) { return g.index(c.i, c.j, c.k, c.m, c.n); }

inline double scaled_coord(const Axis& a, std::size_t idx, double z) { return 2.0 * (z - a.center(idx)) / a.width(idx); }

inline double evaluate_in_cell(const DGField& f, const PhaseGrid& g, const CellIndex& cell, const PhasePoint& p) {
  const std::size_t id = linear_index(g, cell);
  double v = f.c[0][id];
  for (std::size_t s = 1; s < f.nb(); ++s) {
    const AxisId a = slot_axis(g.dim, s);
    v += f.c[s][id] * scaled_coord(axis_of(g, a), cell_coord(cell, a), p[static_cast<int>(a)]);
  }
  return v;
}

inline CellIndex locate(const PhaseGrid& g, const PhasePoint& p) {
  CellIndex c;
  c.i = g.x.locate(p[0]);
  c.k = g.w.locate(p[2]);
  c.m = g.mu.locate(p[3]);
  if (g.two_d()) {
    c.j = g.y.locate(p[1]);
    c.n = g.phi.locate(p[4]);
  }
  return c;
}

// Value at a point; on an interior face the upper cell is used. Use
// evaluate_in_cell to pick a trace side explicitly.
inline double evaluate(const DGField& f, const PhaseGrid& g, const PhasePoint& p) {
  check_compatible(f, g);
  return evaluate_in_cell(f, g, locate(g, p), p);
}

// L2 projection cell by cell with a tensor Gauss rule of `order` points per axis.
template <class F>
DGField project(F&& func, const PhaseGrid& g, std::size_t order = 4) {
  DGField out(g);
  const GaussRule rule = gauss_legendre(order);
  const std::size_t q = order;
  const std::size_t nyq = g.two_d() ? q : 1, nphq = g.two_d() ? q : 1;
  const std::size_t nb = out.nb();
  std::vector<double> acc(nb);
  for (std::size_t i = 0; i < g.nx(); ++i)
    for (std::size_t j = 0; j < g.ny(); ++j)
      for (std::size_t k = 0; k < g.nw(); ++k)
        for (std::size_t m = 0; m < g.nmu(); ++m)
          for (std::size_t n = 0; n < g.nphi(); ++n) {
            std::fill(acc.begin(), acc.end(), 0.0);
            for (std::size_t a = 0; a < q; ++a)
              for (std::size_t b = 0; b < nyq; ++b)
                for (std::size_t cq = 0; cq < q; ++cq)
                  for (std::size_t d = 0; d < q; ++d)
                    for (std::size_t e = 0; e < nphq; ++e) {
                      const double xi[5] = {rule.nodes[a], g.two_d() ? rule.nodes[b] : 0.0, rule.nodes[cq],
                                            rule.nodes[d], g.two_d() ? rule.nodes[e] : 0.0};
                      double wt = rule.weights[a] * rule.weights[cq] * rule.weights[d] / 8.0;
                      if (g.two_d()) wt *= rule.weights[b] * rule.weights[e] / 4.0;
                      PhasePoint p{g.x.center(i) + 0.5 * g.x.width(i) * xi[0], 0.0,
                                   g.w.center(k) + 0.5 * g.w.width(k) * xi[2],
                                   g.mu.center(m) + 0.5 * g.mu.width(m) * xi[3], 0.0};
                      if (g.two_d()) {
                        p[1] = g.y.center(j) + 0.5 * g.y.width(j) * xi[1];
                        p[4] = g.phi.center(n) + 0.5 * g.phi.width(n) * xi[4];
                      }
                      const double fv = func(p) * wt;
                      acc[0] += fv;
                      for (std::size_t s = 1; s < nb; ++s) acc[s] += fv * xi[static_cast<int>(slot_axis(g.dim, s))];
                    }
            const std::size_t id = g.index(i, j, k, m, n);
            out.c[0][id] = acc[0];
            for (std::size_t s = 1; s < nb; ++s) out.c[s][id] = 3.0 * acc[s];
          }
  return out;
}

// Exact per-cell measure |cell| over the active axes.
inline double cell_measure(const PhaseGrid& g, const CellIndex& c) {
  double v = g.x.width(c.i) * g.w.width(c.k) * g.mu.width(c.m);
  if (g.two_d()) v *= g.y.width(c.j) * g.phi.width(c.n);
  return v;
}

// Integral of the squared reconstruction, using the diagonal mass matrix.
inline double l2_norm_squared(const DGField& f, const PhaseGrid& g) {
  double total = 0.0;
  for (std::size_t i = 0; i < g.nx(); ++i)
    for (std::size_t j = 0; j < g.ny(); ++j)
      for (std::size_t k = 0; k < g.nw(); ++k)
        for (std::size_t m = 0; m < g.nmu(); ++m)
          for (std::size_t n = 0; n < g.nphi(); ++n) {
            const std::size_t id = g.index(i, j, k, m, n);
            double lin = 0.0;
            for (std::size_t s = 1; s < f.nb(); ++s) lin += f.c[s][id] * f.c[s][id];
            total += cell_measure(g, {i, j, k, m, n}) * (f.c[0][id] * f.c[0][id] + lin / 3.0);
          }
  return total;
}

// ---- binary checkpoint -------------------------------------------------
// Layout (little-endian host order):
//   char[8]  magic "BPDGCKP1"
//   u32      dimension (1 or 2)
//   u32      number of coefficient arrays
//   u64      number of cells
//   u64      grid hash
//   f64      time
//   f64[11]  constants in declaration order
//   f64[ncoef * ncells] coefficient arrays, slot-major
struct Checkpoint {
  double time = 0.0;
  std::uint64_t grid_hash = 0;
  DimensionlessConstants constants;
  DGField field;
};

namespace detail {
inline void pack_constants(const DimensionlessConstants& c, double out[11]) {
  const double v[11] = {c.c0, c.c_plus, c.c_minus, c.c_x, c.c_k, c.c_p, c.c_v, c.gamma, c.alpha_K, c.eps_r_si, c.eps_r_ox};
  std::memcpy(out, v, sizeof v);
}
inline DimensionlessConstants unpack_constants(const double v[11]) {
  DimensionlessConstants c;
  c.c0 = v[0]; c.c_plus = v[1]; c.c_minus = v[2]; c.c_x = v[3]; c.c_k = v[4]; c.c_p = v[5];
  c.c_v = v[6]; c.gamma = v[7]; c.alpha_K = v[8]; c.eps_r_si = v[9]; c.eps_r_ox = v[10];
  return c;
}
}  // namespace detail

inline void write_checkpoint(const std::string& path, const Checkpoint& ck) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open checkpoint for writing: " + path);
  const char magic[8] = {'B', 'P', 'D', 'G', 'C', 'K', 'P', '1'};
  const std::uint32_t dim = ck.field.dim == Dim::Two ? 2u : 1u;
  const auto ncoef = static_cast<std::uint32_t>(ck.field.nb());
  const std::uint64_t ncells = ck.field.cells();
  double consts[11];
  detail::pack_constants(ck.constants, consts);
  os.write(magic, 8);
  os.write(reinterpret_cast<const char*>(&dim), 4);
  os.write(reinterpret_cast<const char*>(&ncoef), 4);
  os.write(reinterpret_cast<const char*>(&ncells), 8);
  os.write(reinterpret_cast<const char*>(&ck.grid_hash), 8);
  os.write(reinterpret_cast<const char*>(&ck.time), 8);
  os.write(reinterpret_cast<const char*>(consts), sizeof consts);
  for (const auto& a : ck.field.c) os.write(reinterpret_cast<const char*>(a.data()), static_cast<std::streamsize>(a.size() * 8));
  if (!os) throw std::runtime_error("checkpoint write failed: " + path);
}

inline Checkpoint read_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open checkpoint: " + path);
  char magic[8];
  std::uint32_t dim = 0, ncoef = 0;
  std::uint64_t ncells = 0;
  Checkpoint ck;
  double consts[11];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, "BPDGCKP1", 8) != 0) throw std::runtime_error("not a checkpoint file: " + path);
  is.read(reinterpret_cast<char*>(&dim), 4);
  is.read(reinterpret_cast<char*>(&ncoef), 4);
  is.read(reinterpret_cast<char*>(&ncells), 8);
  is.read(reinterpret_cast<char*>(&ck.grid_hash), 8);
  is.read(reinterpret_cast<char*>(&ck.time), 8);
  is.read(reinterpret_cast<char*>(consts), sizeof consts);
  if (!is || (dim != 1 && dim != 2)) throw std::runtime_error("corrupt checkpoint header: " + path);
  ck.constants = detail::unpack_constants(consts);
  ck.field.dim = dim == 2 ? Dim::Two : Dim::One;
  if (ncoef != num_coefs(ck.field.dim)) throw std::runtime_error("corrupt checkpoint header: " + path);
  ck.field.c.assign(ncoef, std::vector<double>(ncells));
  for (auto& a : ck.field.c) is.read(reinterpret_cast<char*>(a.data()), static_cast<std::streamsize>(ncells * 8));
  if (!is) throw std::runtime_error("truncated checkpoint: " + path);
  return ck;
}

}  // namespace bpdg
