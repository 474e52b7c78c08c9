#pragma once

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "constants.hpp"
#include "mesh.hpp"
#include "quadrature.hpp"

namespace bpdg {

enum class Side { Left, Right, Bottom, Top };

// Boundary description: faces covered by a Dirichlet segment take its data,
// every other face is homogeneous Neumann. Extent is measured along the side
// (y for Left/Right, x for Bottom/Top); a face belongs to the segment that
// contains its midpoint.
struct PoissonBC {
  struct Segment {
    Side side = Side::Left;
    double from = -1e300, to = 1e300;
    double value = 0.0;
    std::function<double(double, double)> data;  // optional position-dependent value
  };
  std::vector<Segment> dirichlet;

  PoissonBC& add(Side side, double value, double from = -1e300, double to = 1e300) {
    dirichlet.push_back({side, from, to, value, {}});
    return *this;
  }
  PoissonBC& add(Side side, std::function<double(double, double)> f, double from = -1e300, double to = 1e300) {
    dirichlet.push_back({side, from, to, 0.0, std::move(f)});
    return *this;
  }

  const Segment* find(Side side, double mid) const {
    const Segment* hit = nullptr;
    for (const auto& s : dirichlet)
      if (s.side == side && mid >= s.from && mid <= s.to) {
        if (hit) throw std::invalid_argument("PoissonBC: overlapping Dirichlet segments");
        hit = &s;
      }
    return hit;
  }
};

// Per-cell P1 coefficients on {1, xi_x[, xi_y]} for the potential and its
// gradient components.
struct PoissonSolution {
  std::size_t nx = 0, ny = 1, nb = 2;
  std::vector<double> psi, q, s;  // [cell * nb + basis]
  double c_v = 10.0;

  std::size_t cells() const { return nx * ny; }
  double psi_mean(std::size_t cell) const { return psi[cell * nb]; }
  double ex(std::size_t cell) const { return -c_v * q[cell * nb]; }
  double ey(std::size_t cell) const { return s.empty() ? 0.0 : -c_v * s[cell * nb]; }
};

class LdgPoisson {
 public:
  // 1D solver on x with per-cell permittivity.
  LdgPoisson(const Axis& x, std::vector<double> eps, PoissonBC bc, double c_v = 10.0)
      : x_(x), two_(false), eps_(std::move(eps)), bc_(std::move(bc)), c_v_(c_v) {
    setup();
  }
  // 2D solver on the tensor grid x * y.
  LdgPoisson(const Axis& x, const Axis& y, std::vector<double> eps, PoissonBC bc, double c_v = 10.0)
      : x_(x), y_(y), two_(true), eps_(std::move(eps)), bc_(std::move(bc)), c_v_(c_v) {
    setup();
  }

  std::size_t nx() const { return x_.size(); }
  std::size_t ny() const { return two_ ? y_.size() : 1; }
  std::size_t nb() const { return two_ ? 3 : 2; }
  std::size_t unknowns() const { return static_cast<std::size_t>(A_.rows()); }
  const Eigen::SparseMatrix<double>& matrix() const { return A_; }

  // Right-hand side R of d/dx(eps dPsi/dx) [+ d/dy(eps dPsi/dy)] = R as P1
  // coefficients per cell ([cell * nb + basis], cells x-major).
  PoissonSolution solve(const std::vector<double>& r) const {
    const Eigen::VectorXd b = load_vector(r);
    Eigen::VectorXd u = lu_.solve(b);
    if (lu_.info() != Eigen::Success) throw std::runtime_error("LdgPoisson: solve failed");
    PoissonSolution sol;
    sol.nx = nx();
    sol.ny = ny();
    sol.nb = nb();
    sol.c_v = c_v_;
    const std::size_t nc = nx() * ny(), B = nb();
    sol.psi.resize(nc * B);
    sol.q.resize(nc * B);
    if (two_) sol.s.resize(nc * B);
    for (std::size_t c = 0; c < nc; ++c)
      for (std::size_t b = 0; b < B; ++b) {
        sol.psi[c * B + b] = u[static_cast<Eigen::Index>(dof(c, 0, b))];
        sol.q[c * B + b] = u[static_cast<Eigen::Index>(dof(c, 1, b))];
        if (two_) sol.s[c * B + b] = u[static_cast<Eigen::Index>(dof(c, 2, b))];
      }
    return sol;
  }

  Eigen::VectorXd load_vector(const std::vector<double>& r) const {
    const std::size_t nc = nx() * ny(), B = nb();
    if (r.size() != nc * B) throw std::invalid_argument("LdgPoisson: rhs size mismatch");
    Eigen::VectorXd b = bc_rhs_;
    for (std::size_t c = 0; c < nc; ++c) {
      const double vol = volume(c);
      for (std::size_t k = 0; k < B; ++k) b[static_cast<Eigen::Index>(dof(c, 0, k))] += vol * mass(k) * r[c * B + k];
    }
    return b;
  }

  // Net outward flux of eps * grad(Psi) through the domain boundary, using
  // the same numerical fluxes as the scheme.
  double boundary_flux(const PoissonSolution& sol) const {
    double total = 0.0;
    const std::size_t B = nb();
    for (std::size_t j = 0; j < ny(); ++j) {
      const double len = two_ ? y_.width(j) : 1.0;
      for (int side = 0; side < 2; ++side) {
        const std::size_t i = side ? nx() - 1 : 0;
        const std::size_t c = i * ny() + j;
        const double sg = side ? 1.0 : -1.0;
        const Segment* seg = bc_.find(side ? Side::Right : Side::Left, two_ ? y_.center(j) : 0.0);
        if (!seg) continue;
        const double qt = sol.q[c * B] + sg * sol.q[c * B + 1];
        const double pt = sol.psi[c * B] + sg * sol.psi[c * B + 1];
        const double g = face_average(*seg, side ? x_.hi() : x_.lo(), two_ ? y_.edge(j) : 0.0,
                                      side ? x_.hi() : x_.lo(), two_ ? y_.edge(j + 1) : 0.0);
        // outward normal flux: eps q + jump, jump oriented from - to +
        const double jump = side ? (g - pt) : (pt - g);
        total += sg * (eps_[c] * qt + jump) * len;
      }
    }
    if (two_) {
      for (std::size_t i = 0; i < nx(); ++i) {
        const double len = x_.width(i);
        for (int side = 0; side < 2; ++side) {
          const std::size_t j = side ? ny() - 1 : 0;
          const std::size_t c = i * ny() + j;
          const double sg = side ? 1.0 : -1.0;
          const Segment* seg = bc_.find(side ? Side::Top : Side::Bottom, x_.center(i));
          if (!seg) continue;
          const double st = sol.s[c * B] + sg * sol.s[c * B + 2];
          const double pt = sol.psi[c * B] + sg * sol.psi[c * B + 2];
          const double yy = side ? y_.hi() : y_.lo();
          const double g = face_average(*seg, x_.edge(i), yy, x_.edge(i + 1), yy);
          const double jump = side ? (g - pt) : (pt - g);
          total += sg * (eps_[c] * st + jump) * len;
        }
      }
    }
    return total;
  }

  struct FaceTrace {
    Side side;
    double along;      // face midpoint coordinate along the side
    double imposed;    // face average of the Dirichlet data (the scheme's potential trace)
    double interior;   // face average of the adjacent cell's potential
  };

  // One entry per boundary face covered by a Dirichlet segment.
  std::vector<FaceTrace> dirichlet_traces(const PoissonSolution& sol) const {
    std::vector<FaceTrace> out;
    const std::size_t B = nb();
    for (std::size_t j = 0; j < ny(); ++j)
      for (int side = 0; side < 2; ++side) {
        const std::size_t c = (side ? nx() - 1 : 0) * ny() + j;
        const Side sd = side ? Side::Right : Side::Left;
        const double mid = two_ ? y_.center(j) : 0.0;
        const Segment* seg = bc_.find(sd, mid);
        if (!seg) continue;
        const double xx = side ? x_.hi() : x_.lo();
        const double g = face_average(*seg, xx, two_ ? y_.edge(j) : 0.0, xx, two_ ? y_.edge(j + 1) : 0.0);
        out.push_back({sd, mid, g, sol.psi[c * B] + (side ? 1.0 : -1.0) * sol.psi[c * B + 1]});
      }
    if (two_)
      for (std::size_t i = 0; i < nx(); ++i)
        for (int side = 0; side < 2; ++side) {
          const std::size_t c = i * ny() + (side ? ny() - 1 : 0);
          const Side sd = side ? Side::Top : Side::Bottom;
          const Segment* seg = bc_.find(sd, x_.center(i));
          if (!seg) continue;
          const double yy = side ? y_.hi() : y_.lo();
          const double g = face_average(*seg, x_.edge(i), yy, x_.edge(i + 1), yy);
          out.push_back({sd, x_.center(i), g, sol.psi[c * B] + (side ? 1.0 : -1.0) * sol.psi[c * B + 2]});
        }
    return out;
  }

  double volume(std::size_t c) const {
    const std::size_t i = c / ny(), j = c % ny();
    return x_.width(i) * (two_ ? y_.width(j) : 1.0);
  }

  void dump_matrix_market(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path);
    os << "%%MatrixMarket matrix coordinate real general\n" << A_.rows() << ' ' << A_.cols() << ' ' << A_.nonZeros() << '\n';
    os << std::setprecision(17);
    for (int k = 0; k < A_.outerSize(); ++k)
      for (Eigen::SparseMatrix<double>::InnerIterator it(A_, k); it; ++it)
        os << it.row() + 1 << ' ' << it.col() + 1 << ' ' << it.value() << '\n';
  }

 private:
  using Segment = PoissonBC::Segment;
  using Trip = Eigen::Triplet<double>;

  static double mass(std::size_t basis) { return basis == 0 ? 1.0 : 1.0 / 3.0; }

  // var: 0 = Psi, 1 = q, 2 = s
  std::size_t dof(std::size_t cell, std::size_t var, std::size_t basis) const {
    const std::size_t B = nb();
    return cell * (two_ ? 9 : 4) + var * B + basis;
  }

  double face_average(const Segment& s, double x0, double y0, double x1, double y1) const {
    if (!s.data) return s.value;
    const GaussRule r = gauss_legendre(4);
    double acc = 0.0;
    for (std::size_t p = 0; p < r.nodes.size(); ++p) {
      const double t = 0.5 * (1.0 + r.nodes[p]);
      acc += 0.5 * r.weights[p] * s.data(x0 + t * (x1 - x0), y0 + t * (y1 - y0));
    }
    return acc;
  }

  // P1 projection of Dirichlet data onto the tangential basis {1, tau} of a face.
  std::array<double, 2> face_moments(const Segment& s, double x0, double y0, double x1, double y1) const {
    if (!s.data) return {s.value, 0.0};
    const GaussRule r = gauss_legendre(6);
    std::array<double, 2> acc{0.0, 0.0};
    for (std::size_t p = 0; p < r.nodes.size(); ++p) {
      const double t = 0.5 * (1.0 + r.nodes[p]);
      const double v = 0.5 * r.weights[p] * s.data(x0 + t * (x1 - x0), y0 + t * (y1 - y0));
      acc[0] += v;
      acc[1] += v * r.nodes[p];
    }
    acc[1] *= 3.0;
    return acc;
  }

  // A face trace: linear combination of dofs in (constant, tangential-linear) parts.
  struct Term {
    std::size_t dof;
    double c0, c1;
  };
  using Trace = std::vector<Term>;

  // Trace of variable `var` of `cell` on a face normal to `axis` (0 = x, 1 = y) at side sg.
  Trace trace(std::size_t cell, std::size_t var, int axis, double sg, double scale = 1.0) const {
    Trace t;
    t.push_back({dof(cell, var, 0), scale, 0.0});
    t.push_back({dof(cell, var, 1 + axis), scale * sg, 0.0});
    if (two_) t.push_back({dof(cell, var, 2 - axis), 0.0, scale});
    return t;
  }

  // Restriction of test basis b of a cell to the face: (constant, linear) parts.
  std::array<double, 2> test_on_face(std::size_t b, int axis, double sg) const {
    if (b == 0) return {1.0, 0.0};
    if (b == static_cast<std::size_t>(1 + axis)) return {sg, 0.0};
    return {0.0, 1.0};
  }

  // rows of equation `eq` (0 = potential/flux balance, 1 = x-gradient, 2 = y-gradient) of cell
  void add_face_term(std::vector<Trip>& T, std::size_t cell, std::size_t eq, int axis, double sg, double coeff,
                     double len, const Trace& tr) const {
    for (std::size_t b = 0; b < nb(); ++b) {
      const auto v = test_on_face(b, axis, sg);
      const std::size_t row = dof(cell, eq, b);
      for (const Term& t : tr) {
        const double val = coeff * len * (t.c0 * v[0] + t.c1 * v[1] / 3.0);
        if (val != 0.0) T.emplace_back(static_cast<int>(row), static_cast<int>(t.dof), val);
      }
    }
  }

  void add_face_data(std::size_t cell, std::size_t eq, int axis, double sg, double coeff, double len,
                     const std::array<double, 2>& g) {
    for (std::size_t b = 0; b < nb(); ++b) {
      const auto v = test_on_face(b, axis, sg);
      bc_rhs_[static_cast<Eigen::Index>(dof(cell, eq, b))] += coeff * len * (g[0] * v[0] + g[1] * v[1] / 3.0);
    }
  }

  static Trace concat(Trace a, const Trace& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
  }

  void setup() {
    const std::size_t nc = nx() * ny();
    if (eps_.size() != nc) throw std::invalid_argument("LdgPoisson: permittivity map does not match grid");
    for (double e : eps_)
      if (!(e > 0.0)) throw std::invalid_argument("LdgPoisson: permittivity must be positive");
    const std::size_t B = nb(), N = nc * (two_ ? 9 : 4);
    std::vector<Trip> T;
    bc_rhs_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(N));
    bool any_dirichlet = false;

    // volume terms
    for (std::size_t c = 0; c < nc; ++c) {
      const std::size_t i = c / ny(), j = c % ny();
      const double vol = volume(c);
      const double dx = x_.width(i), dy = two_ ? y_.width(j) : 1.0;
      for (std::size_t b = 0; b < B; ++b) {
        T.emplace_back(static_cast<int>(dof(c, 1, b)), static_cast<int>(dof(c, 1, b)), vol * mass(b));
        if (two_) T.emplace_back(static_cast<int>(dof(c, 2, b)), static_cast<int>(dof(c, 2, b)), vol * mass(b));
      }
      // int Psi dv/dx for v = xi_x; - int eps q dv/dx
      T.emplace_back(static_cast<int>(dof(c, 1, 1)), static_cast<int>(dof(c, 0, 0)), 2.0 / dx * vol);
      T.emplace_back(static_cast<int>(dof(c, 0, 1)), static_cast<int>(dof(c, 1, 0)), -eps_[c] * 2.0 / dx * vol);
      if (two_) {
        T.emplace_back(static_cast<int>(dof(c, 2, 2)), static_cast<int>(dof(c, 0, 0)), 2.0 / dy * vol);
        T.emplace_back(static_cast<int>(dof(c, 0, 2)), static_cast<int>(dof(c, 2, 0)), -eps_[c] * 2.0 / dy * vol);
      }
    }

    // faces normal to `axis`; index f runs over face positions along the axis
    auto faces = [&](int axis) {
      const Axis& ax = axis == 0 ? x_ : y_;
      const std::size_t nf = ax.size() + 1, ncross = axis == 0 ? ny() : nx();
      const std::size_t eqg = axis == 0 ? 1 : 2;  // gradient equation / variable
      for (std::size_t cr = 0; cr < ncross; ++cr) {
        const double len = two_ ? (axis == 0 ? y_.width(cr) : x_.width(cr)) : 1.0;
        for (std::size_t f = 0; f < nf; ++f) {
          auto cell_at = [&](std::size_t a) { return axis == 0 ? a * ny() + cr : cr * ny() + a; };
          const bool has_lo = f > 0, has_hi = f < ax.size();
          if (has_lo && has_hi) {
            const std::size_t L = cell_at(f - 1), R = cell_at(f);
            const Trace psi_hat = trace(L, 0, axis, +1.0);
            // eps q+ + (Psi+ - Psi-); the jump enters with the dissipative sign
            const Trace flux = concat(concat(trace(R, eqg, axis, -1.0, eps_[R]), trace(R, 0, axis, -1.0, 1.0)),
                                      trace(L, 0, axis, +1.0, -1.0));
            add_face_term(T, L, eqg, axis, +1.0, -1.0, len, psi_hat);
            add_face_term(T, R, eqg, axis, -1.0, +1.0, len, psi_hat);
            add_face_term(T, L, 0, axis, +1.0, +1.0, len, flux);
            add_face_term(T, R, 0, axis, -1.0, -1.0, len, flux);
            continue;
          }
          const bool lower_boundary = !has_lo;
          const std::size_t c = cell_at(lower_boundary ? 0 : ax.size() - 1);
          const double sg = lower_boundary ? -1.0 : 1.0;  // side of the cell touching the boundary
          const double normal = sg;                        // outward normal component
          const Side side = axis == 0 ? (lower_boundary ? Side::Left : Side::Right)
                                      : (lower_boundary ? Side::Bottom : Side::Top);
          const double mid = two_ ? (axis == 0 ? y_.center(cr) : x_.center(cr)) : 0.0;
          const Segment* seg = bc_.find(side, mid);
          const double pos = lower_boundary ? ax.lo() : ax.hi();
          if (!seg) {
            // homogeneous Neumann: interior trace for Psi, zero flux
            add_face_term(T, c, eqg, axis, sg, -normal, len, trace(c, 0, axis, sg));
            continue;
          }
          any_dirichlet = true;
          std::array<double, 2> g;
          if (axis == 0)
            g = face_moments(*seg, pos, two_ ? y_.edge(cr) : 0.0, pos, two_ ? y_.edge(cr + 1) : 0.0);
          else
            g = face_moments(*seg, x_.edge(cr), pos, x_.edge(cr + 1), pos);
          // gradient equation: - n Psi_hat with Psi_hat = g
          add_face_data(c, eqg, axis, sg, normal, len, g);
          // flux = eps q_int + jump, jump = (Psi_int - g) on the lower side, (g - Psi_int) on the upper
          add_face_term(T, c, 0, axis, sg, normal, len, trace(c, eqg, axis, sg, eps_[c]));
          add_face_term(T, c, 0, axis, sg, normal, len, trace(c, 0, axis, sg, lower_boundary ? 1.0 : -1.0));
          add_face_data(c, 0, axis, sg, -normal, len, {lower_boundary ? -g[0] : g[0], lower_boundary ? -g[1] : g[1]});
        }
      }
    };
    faces(0);
    if (two_) faces(1);
    if (!any_dirichlet) throw std::invalid_argument("LdgPoisson: no Dirichlet boundary; system is singular");

    A_.resize(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(N));
    A_.setFromTriplets(T.begin(), T.end());
    A_.makeCompressed();
    lu_.analyzePattern(A_);
    lu_.factorize(A_);
    if (lu_.info() != Eigen::Success) throw std::runtime_error("LdgPoisson: factorization failed");
  }

  Axis x_, y_;
  bool two_;
  std::vector<double> eps_;
  PoissonBC bc_;
  double c_v_;
  Eigen::SparseMatrix<double> A_;
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;
  Eigen::VectorXd bc_rhs_;
};

// L2 error of the potential against an exact solution, by 4-point Gauss per axis.
inline double potential_l2_error(const PoissonSolution& sol, const Axis& x, const Axis* y,
                                 const std::function<double(double, double)>& exact) {
  const GaussRule r = gauss_legendre(4);
  double err = 0.0;
  const std::size_t ny = y ? y->size() : 1, B = sol.nb;
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < ny; ++j) {
      const std::size_t c = i * ny + j;
      for (std::size_t a = 0; a < r.nodes.size(); ++a)
        for (std::size_t b = 0; b < (y ? r.nodes.size() : 1); ++b) {
          const double xa = x.center(i) + 0.5 * x.width(i) * r.nodes[a];
          double wt = 0.5 * x.width(i) * r.weights[a];
          double val = sol.psi[c * B] + sol.psi[c * B + 1] * r.nodes[a];
          double yb = 0.0;
          if (y) {
            yb = y->center(j) + 0.5 * y->width(j) * r.nodes[b];
            wt *= 0.5 * y->width(j) * r.weights[b];
            val += sol.psi[c * B + 2] * r.nodes[b];
          }
          const double d = val - exact(xa, yb);
          err += wt * d * d;
        }
    }
  return std::sqrt(err);
}

// P1 projection of a source term, cell by cell.
inline std::vector<double> project_source(const Axis& x, const Axis* y, const std::function<double(double, double)>& f) {
  const GaussRule r = gauss_legendre(4);
  const std::size_t ny = y ? y->size() : 1, B = y ? 3 : 2;
  std::vector<double> out(x.size() * ny * B, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i)
    for (std::size_t j = 0; j < ny; ++j) {
      double acc[3] = {0, 0, 0};
      for (std::size_t a = 0; a < r.nodes.size(); ++a)
        for (std::size_t b = 0; b < (y ? r.nodes.size() : 1); ++b) {
          double wt = 0.5 * r.weights[a];
          double yb = 0.0;
          if (y) {
            wt *= 0.5 * r.weights[b];
            yb = y->center(j) + 0.5 * y->width(j) * r.nodes[b];
          }
          const double v = wt * f(x.center(i) + 0.5 * x.width(i) * r.nodes[a], yb);
          acc[0] += v;
          acc[1] += v * r.nodes[a];
          if (y) acc[2] += v * r.nodes[b];
        }
      const std::size_t c = (i * ny + j) * B;
      out[c] = acc[0];
      out[c + 1] = 3.0 * acc[1];
      if (y) out[c + 2] = 3.0 * acc[2];
    }
  return out;
}

struct ConvergenceRow {
  std::size_t cells = 0;
  double error = 0.0;
  double order = 0.0;  // 0 for the first row
};

// Manufactured-solution study on the unit interval/square with homogeneous
// Dirichlet data: Psi = sin(pi x) [sin(pi y)], constant permittivity.
inline std::vector<ConvergenceRow> poisson_convergence(const std::vector<std::size_t>& cells, bool two_d, double eps = 11.7) {
  std::vector<ConvergenceRow> rows;
  for (std::size_t n : cells) {
    const Axis x = uniform_axis(0.0, 1.0, n);
    const Axis y = uniform_axis(0.0, 1.0, n);
    PoissonBC bc;
    bc.add(Side::Left, 0.0).add(Side::Right, 0.0);
    std::function<double(double, double)> exact, src;
    if (two_d) {
      bc.add(Side::Bottom, 0.0).add(Side::Top, 0.0);
      exact = [](double a, double b) { return std::sin(kPi * a) * std::sin(kPi * b); };
      src = [eps](double a, double b) { return -2.0 * eps * kPi * kPi * std::sin(kPi * a) * std::sin(kPi * b); };
    } else {
      exact = [](double a, double) { return std::sin(kPi * a); };
      src = [eps](double a, double) { return -eps * kPi * kPi * std::sin(kPi * a); };
    }
    std::vector<double> epsmap(two_d ? n * n : n, eps);
    const PoissonSolution sol = two_d ? LdgPoisson(x, y, epsmap, bc).solve(project_source(x, &y, src))
                                      : LdgPoisson(x, epsmap, bc).solve(project_source(x, nullptr, src));
    ConvergenceRow row;
    row.cells = n;
    row.error = potential_l2_error(sol, x, two_d ? &y : nullptr, exact);
    if (!rows.empty())
      row.order = std::log(rows.back().error / row.error) / std::log(static_cast<double>(n) / static_cast<double>(rows.back().cells));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace bpdg
