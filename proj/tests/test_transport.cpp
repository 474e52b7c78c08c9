#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "bpdg/device.hpp"
#include "bpdg/moments.hpp"
#include "bpdg/transport.hpp"

namespace {

using bpdg::DGField;
using bpdg::FieldSample;
using bpdg::GhostLayers;
using bpdg::PhaseGrid;

const bpdg::DimensionlessConstants kC;

PhaseGrid small_1d() {
  return bpdg::make_grid_1d(bpdg::uniform_axis(0.0, 1.0, 6), bpdg::uniform_axis(0.0, 12.0, 10),
                            bpdg::uniform_axis(-1.0, 1.0, 6));
}

PhaseGrid small_2d() {
  bpdg::MosfetMeshSpec s;
  s.nx = 4;
  s.ny = 4;
  s.nw = 6;
  s.nmu = 4;
  s.nphi = 4;
  return bpdg::make_grid_2d(s, 12.0);
}

// Ghosts that repeat the neighbouring interior cell on every boundary.
GhostLayers copy_ghosts(const DGField& f, const PhaseGrid& g) {
  GhostLayers gh;
  bpdg::zero_inflow_ghosts(g, f.nb(), gh);
  const std::size_t nv = g.velocity_cells();
  for (std::size_t q = 0; q < f.nb(); ++q)
    for (std::size_t j = 0; j < g.ny(); ++j)
      for (std::size_t v = 0; v < nv; ++v) {
        gh.x_lo[q][j * nv + v] = f.c[q][g.index(0, j, 0, 0, 0) + v];
        gh.x_hi[q][j * nv + v] = f.c[q][g.index(g.nx() - 1, j, 0, 0, 0) + v];
      }
  if (g.two_d()) {
    gh.y_lo.assign(f.nb(), std::vector<double>(g.nx() * nv));
    gh.y_hi = gh.y_lo;
    for (std::size_t q = 0; q < f.nb(); ++q)
      for (std::size_t i = 0; i < g.nx(); ++i)
        for (std::size_t v = 0; v < nv; ++v) {
          gh.y_lo[q][i * nv + v] = f.c[q][g.index(i, 0, 0, 0, 0) + v];
          gh.y_hi[q][i * nv + v] = f.c[q][g.index(i, g.ny() - 1, 0, 0, 0) + v];
        }
  }
  return gh;
}

FieldSample uniform_field(const PhaseGrid& g, double ex, double ey = 0.0) {
  return {std::vector<double>(g.spatial_cells(), ex), std::vector<double>(g.two_d() ? g.spatial_cells() : 0, ey)};
}

DGField random_field(const PhaseGrid& g, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-0.3, 0.3);
  DGField f(g);
  for (auto& a : f.c)
    for (double& v : a) v = u(rng);
  for (double& v : f.c[0]) v += 1.0;
  return f;
}

double max_abs(const DGField& f) {
  double m = 0.0;
  for (const auto& a : f.c)
    for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

// Mass-matrix inner product of two P1 fields.
double inner(const DGField& a, const DGField& b, const PhaseGrid& g) {
  double s = 0.0;
  for (std::size_t i = 0; i < g.nx(); ++i)
    for (std::size_t j = 0; j < g.ny(); ++j)
      for (std::size_t k = 0; k < g.nw(); ++k)
        for (std::size_t m = 0; m < g.nmu(); ++m)
          for (std::size_t n = 0; n < g.nphi(); ++n) {
            const std::size_t id = g.index(i, j, k, m, n);
            double v = a.c[0][id] * b.c[0][id];
            for (std::size_t q = 1; q < a.nb(); ++q) v += a.c[q][id] * b.c[q][id] / 3.0;
            s += bpdg::cell_measure(g, {i, j, k, m, n}) * v;
          }
  return s;
}

double total_mass(const DGField& f, const PhaseGrid& g) {
  const auto d = bpdg::density(f, g);
  double s = 0.0;
  for (std::size_t i = 0; i < g.nx(); ++i)
    for (std::size_t j = 0; j < g.ny(); ++j) s += d.rho[i * g.ny() + j] * g.x.width(i) * (g.two_d() ? g.y.width(j) : 1.0);
  return s;
}

TEST(EvalG, Examples) {
  const double a = kC.alpha_K, w = 2.0, mu = 0.6;
  EXPECT_NEAR(bpdg::eval_g(1, w, mu, 0.0, 0.0, 0.0, kC), kC.c_x * mu * bpdg::weight_s1(w, a), 1e-15);
  EXPECT_NEAR(bpdg::eval_g(2, w, mu, bpdg::kPi / 3.0, 0.0, 0.0, kC), kC.c_x * 0.8 * 0.5 * bpdg::weight_s1(w, a), 1e-15);
  EXPECT_NEAR(bpdg::eval_g(3, w, mu, bpdg::kPi / 2.0, 1.5, 0.0, kC), -2.0 * kC.c_k * bpdg::weight_s1(w, a) * mu * 1.5, 1e-14);
  EXPECT_NEAR(bpdg::eval_g(4, w, mu, bpdg::kPi / 2.0, 1.5, 0.0, kC), -kC.c_k * bpdg::weight_s2(w, a) * 0.64 * 1.5, 1e-14);
  EXPECT_EQ(bpdg::eval_g(5, w, mu, 1.0, 1.5, 0.0, kC), 0.0);
  EXPECT_NEAR(bpdg::eval_g(5, w, 0.0, bpdg::kPi / 2.0, 0.0, 2.0, kC), kC.c_k * 2.0 * bpdg::weight_s2(w, a), 1e-14);
  EXPECT_THROW(bpdg::eval_g(6, w, mu, 0.0, 0.0, 0.0, kC), std::invalid_argument);
}

TEST(EvalG, FieldFreeStreamingIsZeroInVelocitySpace) {
  for (double w : {0.5, 3.0})
    for (double mu : {-0.7, 0.2})
      for (int idx = 3; idx <= 5; ++idx) EXPECT_EQ(bpdg::eval_g(idx, w, mu, 1.1, 0.0, 0.0, kC), 0.0);
}

class TransportBoth : public ::testing::TestWithParam<bool> {
 protected:
  PhaseGrid g = GetParam() ? small_2d() : small_1d();
  bpdg::StreamingTables st = bpdg::build_streaming_tables(g, kC);
  bpdg::TransportOperator op{g, st, kC};
};

TEST_P(TransportBoth, ConstantStateIsSteadyWithoutField) {
  DGField f(g);
  std::fill(f.c[0].begin(), f.c[0].end(), 1.0);
  DGField rhs;
  op.apply(f, uniform_field(g, 0.0), copy_ghosts(f, g), rhs);
  EXPECT_LE(max_abs(rhs), 1e-13);
}

TEST_P(TransportBoth, SpatiallyUniformMaxwellianIsSteadyWithoutField) {
  const auto f = bpdg::initial_condition(g, kC, std::vector<double>(g.nx(), 3.0));
  DGField rhs;
  op.apply(f, uniform_field(g, 0.0), copy_ghosts(f, g), rhs);
  EXPECT_LE(max_abs(rhs), 1e-13 * max_abs(f));
}

TEST_P(TransportBoth, L2NormDoesNotGrowWithoutFieldAndInflow) {
  for (unsigned seed = 1; seed <= 5; ++seed) {
    const auto f = random_field(g, seed);
    GhostLayers gh;
    bpdg::zero_inflow_ghosts(g, f.nb(), gh);
    if (g.two_d()) bpdg::specular_ghosts(f, g, gh);
    DGField rhs;
    op.apply(f, uniform_field(g, 0.0), gh, rhs);
    EXPECT_LE(inner(f, rhs, g), 1e-13 * inner(f, f, g));
  }
}

TEST_P(TransportBoth, ClosedDeviceConservesMassForAnyField) {
  // reflecting x ends and, in 2D, specular y walls leave nothing to leak
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  FieldSample E = uniform_field(g, 0.0);
  for (double& v : E.ex) v = u(rng);
  for (double& v : E.ey) v = u(rng);
  const auto f = random_field(g, 4);
  GhostLayers gh;
  bpdg::reflecting_x_ghosts(f, g, gh);
  if (g.two_d()) bpdg::specular_ghosts(f, g, gh);
  DGField rhs;
  op.apply(f, E, gh, rhs);
  EXPECT_NEAR(total_mass(rhs, g), 0.0, 1e-12 * total_mass(f, g));
  if (g.two_d()) {
    const auto wf = op.wall_mass_flux(f, gh);
    EXPECT_LE(std::abs(wf[0]), 1e-12 * wf[1]);
    EXPECT_GT(wf[1], 0.0);
  }
}

TEST_P(TransportBoth, IsLinearForFixedField) {
  const FieldSample E = uniform_field(g, 0.7, g.two_d() ? -0.4 : 0.0);
  const auto f = random_field(g, 1), h = random_field(g, 2);
  GhostLayers gh;
  bpdg::zero_inflow_ghosts(g, f.nb(), gh);
  if (g.two_d()) {
    gh.y_lo.assign(f.nb(), std::vector<double>(g.nx() * g.velocity_cells(), 0.0));
    gh.y_hi = gh.y_lo;
  }
  DGField rf, rh, rs;
  op.apply(f, E, gh, rf);
  op.apply(h, E, gh, rh);
  DGField s = f;
  s.axpy(-2.0, h);
  op.apply(s, E, gh, rs);
  rf.axpy(-2.0, rh);
  rf.axpy(-1.0, rs);
  EXPECT_LE(max_abs(rf), 1e-12 * max_abs(rs));
}

INSTANTIATE_TEST_SUITE_P(Dims, TransportBoth, ::testing::Values(false, true),
                         [](const auto& info) { return info.param ? std::string("TwoD") : std::string("OneD"); });

TEST(Transport, InformationTravelsDownwindOnly) {
  const auto g = small_1d();
  const auto st = bpdg::build_streaming_tables(g, kC);
  const bpdg::TransportOperator op(g, st, kC);
  DGField f(g);
  const std::size_t i0 = 3;
  for (std::size_t k = 0; k < g.nw(); ++k)
    for (std::size_t m = 0; m < g.nmu(); ++m) f.c[0][g.index(i0, 0, k, m, 0)] = 1.0;
  GhostLayers gh;
  bpdg::zero_inflow_ghosts(g, f.nb(), gh);
  DGField rhs;
  op.apply(f, uniform_field(g, 0.0), gh, rhs);
  for (std::size_t k = 0; k < g.nw(); ++k)
    for (std::size_t m = 0; m < g.nmu(); ++m) {
      const bool right = g.mu.center(m) > 0.0;
      const std::size_t up = right ? i0 - 1 : i0 + 1, down = right ? i0 + 1 : i0 - 1;
      for (std::size_t q = 0; q < f.nb(); ++q) EXPECT_EQ(rhs.c[q][g.index(up, 0, k, m, 0)], 0.0);
      EXPECT_GT(std::abs(rhs.c[0][g.index(down, 0, k, m, 0)]), 0.0);
      EXPECT_LT(rhs.c[0][g.index(i0, 0, k, m, 0)], 0.0);
    }
}

TEST(Transport, OutflowMatchesFaceFlux) {
  // a uniform state flowing out of the right contact with nothing coming in
  const auto g = small_1d();
  const auto st = bpdg::build_streaming_tables(g, kC);
  const bpdg::TransportOperator op(g, st, kC);
  DGField f(g);
  std::fill(f.c[0].begin(), f.c[0].end(), 1.0);
  GhostLayers gh;
  bpdg::zero_inflow_ghosts(g, f.nb(), gh);
  DGField rhs;
  op.apply(f, uniform_field(g, 0.0), gh, rhs);
  // d/dt mass = -(flux out right) - (flux out left) = -c_x pi * int s1 dw * int |mu| dmu
  double s1 = 0.0;
  for (const auto& r : st.s1) s1 += r[0];
  EXPECT_NEAR(total_mass(rhs, g), -2.0 * kC.c_x * bpdg::kPi * s1 * 0.5, 1e-12);
}

TEST(Transport, MirrorSymmetryIn2D) {
  // y -> H - y together with phi -> pi - phi and E_y -> -E_y
  const auto g = small_2d();
  const auto st = bpdg::build_streaming_tables(g, kC);
  const bpdg::TransportOperator op(g, st, kC);
  const int sY = 2, sP = 5;
  auto mirror = [&](const DGField& f) {
    DGField r(g);
    for (std::size_t i = 0; i < g.nx(); ++i)
      for (std::size_t j = 0; j < g.ny(); ++j)
        for (std::size_t k = 0; k < g.nw(); ++k)
          for (std::size_t m = 0; m < g.nmu(); ++m)
            for (std::size_t n = 0; n < g.nphi(); ++n) {
              const std::size_t a = g.index(i, j, k, m, n), b = g.index(i, g.ny() - 1 - j, k, m, bpdg::mirror_phi(g, n));
              for (std::size_t q = 0; q < f.nb(); ++q) r.c[q][a] = (q == sY || q == sP ? -1.0 : 1.0) * f.c[q][b];
            }
    return r;
  };
  std::mt19937 rng(2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  FieldSample E = uniform_field(g, 0.0), Em = E;
  for (std::size_t s = 0; s < g.spatial_cells(); ++s) {
    E.ex[s] = u(rng);
    E.ey[s] = u(rng);
  }
  for (std::size_t i = 0; i < g.nx(); ++i)
    for (std::size_t j = 0; j < g.ny(); ++j) {
      Em.ex[i * g.ny() + j] = E.ex[i * g.ny() + g.ny() - 1 - j];
      Em.ey[i * g.ny() + j] = -E.ey[i * g.ny() + g.ny() - 1 - j];
    }
  const auto f = random_field(g, 8), fm = mirror(f);
  GhostLayers gh, ghm;
  bpdg::zero_inflow_ghosts(g, f.nb(), gh);
  bpdg::zero_inflow_ghosts(g, f.nb(), ghm);
  bpdg::specular_ghosts(f, g, gh);
  bpdg::specular_ghosts(fm, g, ghm);
  DGField r, rm;
  op.apply(f, E, gh, r);
  op.apply(fm, Em, ghm, rm);
  auto diff = mirror(r);
  diff.axpy(-1.0, rm);
  EXPECT_LE(max_abs(diff), 1e-12 * max_abs(r));
}

TEST(Transport, RejectsMissingGhosts) {
  const auto g = small_2d();
  const auto st = bpdg::build_streaming_tables(g, kC);
  const bpdg::TransportOperator op(g, st, kC);
  DGField f(g), rhs;
  GhostLayers gh;
  bpdg::zero_inflow_ghosts(g, f.nb(), gh);
  EXPECT_THROW(op.apply(f, uniform_field(g, 0.0), gh, rhs), std::invalid_argument);
  EXPECT_THROW(op.apply(f, FieldSample{}, gh, rhs), std::invalid_argument);
}

}  // namespace
